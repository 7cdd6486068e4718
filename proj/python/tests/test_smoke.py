import math

import numpy as np
import pytest

import bflab


def test_round_point_is_balanced():
    k = 6
    h = bflab.balanced_round_point(k)
    assert np.allclose(bflab.hilb(k), h, rtol=1e-12, atol=1e-14)
    assert np.allclose(bflab.rho(k), k + 1, atol=1e-8)
    mb = bflab.mu_bar(h)
    assert np.allclose(mb, np.eye(k + 1) * k / (k + 1), atol=1e-8)
    assert np.max(np.abs(bflab.balancing_potential(h))) < 1e-8


def test_matrix_geometry():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    a = (a + a.conj().T) / 2
    assert abs(np.trace(bflab.trace_free(a))) < 1e-12
    assert bflab.op_norm(a) <= bflab.killing_norm(a) + 1e-14
    eye = np.eye(4, dtype=complex)
    assert bflab.distance(eye, bflab.geodesic_point(eye, a, 1.0)) == pytest.approx(bflab.killing_norm(a), rel=1e-10)
    assert bflab.scaled_distance(eye, bflab.geodesic_point(eye, a, 1.0), 4) == pytest.approx(
        bflab.killing_norm(a) / 8, rel=1e-10)


def test_errors_map_to_python_exceptions():
    with pytest.raises(ValueError):
        bflab.killing_norm(np.array([[0, 1], [0, 0]], dtype=complex))
    with pytest.raises(bflab.NumericalError):
        bflab.hilb(4, [0.0, 0.0, 2.0])
    with pytest.raises(ValueError):
        bflab.fit_rate([1, 2], [1, 0.5])


def test_balancing_flow_decreases_mu0():
    k = 6
    rng = np.random.default_rng(5)
    a = rng.normal(size=(k + 1, k + 1)) + 1j * rng.normal(size=(k + 1, k + 1))
    a = (a + a.conj().T) / 2
    a *= 0.5 / np.linalg.norm(a)
    h0 = bflab.act(bflab.balanced_round_point(k), a)
    T = 5 / (2 * math.pi * k * k)
    tr = bflab.balancing_flow(h0, T / 20, T)
    mu0 = tr["mu0"]
    assert len(tr["times"]) == len(tr["points"]) == 21
    assert all(b < a + 1e-12 for a, b in zip(mu0, mu0[1:]))
    it = bflab.t_iteration(h0, 5)
    assert it["mu0"][-1] < it["mu0"][0]


def test_perturbed_metric_and_curvature():
    coeffs = bflab.perturbed_metric(0.1)
    s = bflab.scalar_curvature(coeffs, 16, 32)
    g = bflab.grid(7)
    assert len(g["theta"]) == 15 * 30
    assert s.shape == (16 * 32,)
    r = bflab.rho(8, coeffs)
    assert r.shape == (16 * 32,) and np.all(r > 8)
    fs = bflab.fs_density(bflab.hilb(8, coeffs))
    w = bflab.grid(8)["round_weights"]
    assert float(np.dot(w, fs)) == pytest.approx(8.0, rel=1e-8)


def test_fit_rate_and_experiment_runner(tmp_path):
    ks = [4, 8, 16, 32]
    slope, intercept, residual = bflab.fit_rate(ks, [7 / k for k in ks])
    assert slope == pytest.approx(-1.0, abs=1e-10)
    assert residual < 1e-12
    assert "flow_comparison" in bflab.experiments()
    summary = bflab.run_experiment({"experiment": "smoke", "k_list": [2, 3], "output_dir": str(tmp_path / "s")},
                                   write=True)
    assert summary["all_pass"] is True
    assert (tmp_path / "s" / "results.csv").exists()
    with pytest.raises(ValueError):
        bflab.run_experiment({"experiment": "smoke", "unknown": 1})
