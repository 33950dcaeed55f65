"""Experiment harness: configuration, synthetic scenarios, runners, metrics."""
