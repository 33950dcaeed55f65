"""Building HVAC + storage MPC: models, optimization, plant simulator and experiment harness."""

__version__ = "0.1.0"
