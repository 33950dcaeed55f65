import numpy as np
import pytest

from hvacmpc.sysid import (IdentifiabilityError, LoopArxModel, PvusaModel,
                           RegressorSpec, ZoneArxModel, fit_arx, fit_index,
                           fit_pvusa, load_models, save_models, simulate_arx)


class TestFitIndex:
    def test_perfect(self):
        y = np.array([1.0, 2.0, 3.0])
        assert fit_index(y, y) == pytest.approx(100.0)

    def test_mean_predictor(self):
        y = np.array([1.0, 2.0, 3.0])
        assert fit_index(y, np.full(3, y.mean())) == pytest.approx(0.0)

    def test_hand_value(self):
        assert fit_index([0.0, 2.0], [1.0, 1.0]) == pytest.approx(0.0)

    def test_constant_reference(self):
        with pytest.raises(ValueError):
            fit_index([2.0, 2.0, 2.0], [2.0, 2.1, 1.9])


def simulate_truth(theta, spec, n, m, n_exo, rng, noise_std=0.0):
    """Generate data from a known zone ARX model (orders 1)."""
    model = _make_model(theta, spec, m, n_exo)
    t = np.zeros((n, m))
    t[0] = t[1] = 20.0 + rng.normal(0, 1, m)
    h = rng.uniform(0.0, 2.0, size=(n, m))
    e = 10.0 + 3.0 * rng.standard_normal((n, n_exo))
    for k in range(1, n - 1):
        t[k + 1] = model.predict(t[:k + 1], h[:k + 1], e[:k + 1])
    if noise_std > 0:
        t = t + rng.normal(0.0, noise_std, size=t.shape)
    return {"t": t, "h": h, "e": e}


def _make_model(theta, spec, m, n_exo):
    from hvacmpc.sysid import _lagged_blocks
    dummy = np.zeros((3, m))
    dummy_e = np.zeros((3, n_exo))
    _, meta = _lagged_blocks([(dummy, spec.k_t), (dummy, spec.k_h),
                              (dummy_e, spec.k_e)])
    return ZoneArxModel(theta=theta, meta=meta, spec=spec, n_zones=m,
                        n_exo=n_exo)


def stable_truth(spec, m, n_exo, rng):
    """Random stable-ish sparse theta honoring the adjacency mask."""
    from hvacmpc.sysid import _lagged_blocks, _zone_mask
    dummy = np.zeros((3, m))
    _, meta = _lagged_blocks([(dummy, spec.k_t), (dummy, spec.k_h),
                              (np.zeros((3, n_exo)), spec.k_e)])
    theta = np.zeros((m, meta.shape[0]))
    for i in range(m):
        mask = _zone_mask(spec, meta, i, m, n_exo)
        for c in np.nonzero(mask)[0]:
            blk, lag, idx = meta[c]
            if blk == 0:
                if idx == i:
                    theta[i, c] = 0.55 if lag == 0 else 0.25
                else:
                    theta[i, c] = 0.03 * rng.uniform(0.5, 1.0)
            elif blk == 1:
                theta[i, c] = 0.05 * rng.uniform(0.5, 1.5)
            else:
                theta[i, c] = 0.01 * rng.uniform(-1.0, 1.0)
    return theta


class TestFitArx:
    def test_noiseless_recovery(self):
        rng = np.random.default_rng(0)
        adj = np.zeros((3, 3), dtype=bool)
        adj[0, 1] = adj[1, 0] = adj[1, 2] = adj[2, 1] = True
        spec = RegressorSpec(k_t=1, k_h=1, k_e=0, adjacency=adj, e_shared=2)
        theta = stable_truth(spec, 3, 2, rng)
        data = simulate_truth(theta, spec, 800, 3, 2, rng)
        model = fit_arx(data, spec, target="zone")
        assert np.max(np.abs(model.theta - theta)) < 1e-8

    def test_zero_excitation(self):
        spec = RegressorSpec(k_t=1, k_h=1, k_e=0, e_shared=2)
        n = 200
        data = {"t": np.full((n, 2), 20.0), "h": np.zeros((n, 2)),
                "e": np.zeros((n, 2))}
        with pytest.raises(IdentifiabilityError):
            fit_arx(data, spec, target="zone")

    def test_loop_fit(self):
        rng = np.random.default_rng(1)
        n = 500
        outlet = 40.0 + 5.0 * rng.standard_normal(n)
        h = rng.uniform(0.0, 3.0, size=(n, 2))
        state = np.zeros(n)
        state[0] = 40.0
        for k in range(n - 1):
            state[k + 1] = 0.8 * state[k] + 0.2 * outlet[k] - 0.01 * h[k].sum()
        spec = RegressorSpec(k_loop_state=0, k_loop_outlet=0, k_loop_h=0)
        model = fit_arx({"state": state, "outlet": outlet, "h": h}, spec,
                        target="tes")
        assert model.theta[0] == pytest.approx(0.8, abs=1e-8)
        assert model.theta[1] == pytest.approx(0.2, abs=1e-8)

    def test_no_validation_leakage(self):
        rng = np.random.default_rng(2)
        spec = RegressorSpec(k_t=1, k_h=1, k_e=0, e_shared=2)
        theta = stable_truth(spec, 2, 2, rng)
        data = simulate_truth(theta, spec, 400, 2, 2, rng, noise_std=0.05)
        model_a = fit_arx(data, spec, target="zone")
        # permute the validation split only: parameters must not change
        n_est = model_a.diagnostics["n_est"]
        data_b = {k: v.copy() for k, v in data.items()}
        perm = rng.permutation(np.arange(n_est, 400))
        for key in data_b:
            data_b[key][n_est:] = data_b[key][perm]
        model_b = fit_arx(data_b, spec, target="zone")
        assert np.array_equal(model_a.theta, model_b.theta)


class TestSimulateArx:
    def test_scalar_decay(self):
        # T' = 0.5 T, T(0) = 8 -> after 3 steps 1.0
        spec = RegressorSpec(k_t=0, k_h=0, k_e=0, e_shared=1)
        model = _make_model(np.array([[0.5, 0.0, 0.0]]), spec, 1, 1)
        hist = {"t": np.array([[8.0]]), "h": np.zeros((1, 1)),
                "e": np.zeros((1, 1))}
        fut = {"h": np.zeros((3, 1)), "e": np.zeros((3, 1))}
        out = simulate_arx(model, hist, fut, 3)
        assert out[-1, 0] == pytest.approx(1.0)

    def test_matches_generator(self):
        rng = np.random.default_rng(3)
        spec = RegressorSpec(k_t=1, k_h=1, k_e=0, e_shared=2)
        theta = stable_truth(spec, 2, 2, rng)
        data = simulate_truth(theta, spec, 100, 2, 2, rng)
        model = _make_model(theta, spec, 2, 2)
        hist = {k: v[:10] for k, v in data.items()}
        n = 50
        fut = {"h": data["h"][10:10 + n], "e": data["e"][10:10 + n]}
        out = simulate_arx(model, hist, fut, n)
        assert np.allclose(out, data["t"][10:60], atol=1e-9)

    def test_insufficient_history(self):
        spec = RegressorSpec(k_t=1, k_h=0, k_e=0, e_shared=1)
        model = _make_model(np.zeros((1, 4)), spec, 1, 1)
        with pytest.raises(ValueError):
            simulate_arx(model, {"t": np.zeros((1, 1)), "h": np.zeros((1, 1)),
                                 "e": np.zeros((1, 1))},
                         {"h": np.zeros((2, 1)), "e": np.zeros((2, 1))}, 2)


class TestPvusa:
    def test_exact_recovery(self):
        rng = np.random.default_rng(4)
        irr = rng.uniform(0.0, 1000.0, 300)
        ta = rng.uniform(-5.0, 35.0, 300)
        theta = np.array([1.6e-3, -5e-8, 1e-6])
        w = theta[0] * irr + theta[1] * irr ** 2 + theta[2] * irr * ta
        model = fit_pvusa(irr, ta, w)
        assert np.allclose(model.theta, theta, atol=1e-12)

    def test_night_data(self):
        with pytest.raises(IdentifiabilityError):
            fit_pvusa(np.zeros(50), np.full(50, 10.0), np.zeros(50))

    def test_noisy_residual(self):
        rng = np.random.default_rng(5)
        irr = rng.uniform(0.0, 1000.0, 2000)
        ta = rng.uniform(-5.0, 35.0, 2000)
        theta = np.array([1.6e-3, -5e-8, 1e-6])
        sigma = 0.02
        w = (theta[0] * irr + theta[1] * irr ** 2 + theta[2] * irr * ta
             + rng.normal(0, sigma, irr.size))
        model = fit_pvusa(irr, ta, w)
        assert model.diagnostics["residual_rms"] < sigma * 1.1

    def test_prediction_clamped(self):
        model = PvusaModel(theta=np.array([1e-3, -5e-6, 0.0]))
        assert np.all(model.predict(np.array([0.0, 500.0, 1000.0]), 20.0) >= 0.0)


class TestSerialization:
    def test_roundtrip(self, tmp_path):
        rng = np.random.default_rng(6)
        spec = RegressorSpec(k_t=1, k_h=1, k_e=0, e_shared=2)
        theta = stable_truth(spec, 2, 2, rng)
        data = simulate_truth(theta, spec, 300, 2, 2, rng)
        zone = fit_arx(data, spec, target="zone")
        pv = PvusaModel(theta=np.array([1.0, 2.0, 3.0]))
        path = tmp_path / "models.json"
        save_models(path, zone, None, pv)
        z2, l2, p2 = load_models(path)
        assert np.allclose(z2.theta, zone.theta)
        assert l2 is None
        assert np.allclose(p2.theta, pv.theta)
