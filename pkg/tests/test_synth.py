import math

import numpy as np
import pytest

from bgpc import Dims, EnsembleSpec, GroundTruth, assumption_diagnostics, gen_instance, msnr
from bgpc.synth import FlatSparse, JointSparse, Sparse, complex_normal, corrupt_phases, derive_seed, stream

from conftest import make_instance


def test_gain_circle_geometry():
    delta = 0.1
    _, t = make_instance(500, 4, 2, seed=1, delta=delta)
    r = math.sqrt(1 + delta) - 1
    np.testing.assert_allclose(np.abs(t.lam - np.exp(1j * t.phases)), r, rtol=1e-12)
    mag = np.abs(t.lam)
    assert np.all(mag >= 2 - math.sqrt(1 + delta) - 1e-12)
    assert np.all(mag <= math.sqrt(1 + delta) + 1e-12)
    assert np.all(np.abs(mag ** 2 - 1) <= delta + 1e-12)


def test_dense_signal_energy():
    vals = [np.linalg.norm(make_instance(4, 32, 16, seed=s)[1].X) ** 2 for s in range(1000)]
    assert 0.97 <= np.mean(vals) <= 1.03


def test_noiseless_observation_exact():
    inst, t = make_instance(16, 4, 4, seed=9)
    assert not np.any(t.W)
    assert inst.Y.tobytes() == (t.lam[:, None] * (inst.A @ t.X)).tobytes()


def test_noise_model():
    inst, t = make_instance(64, 8, 32, seed=2, sigma_w=0.5)
    np.testing.assert_allclose(inst.Y, t.lam[:, None] * (inst.A @ t.X) + t.W, atol=1e-14)
    # entries of W are CN(0, sigma^2 / (N n)) so ||W||_F^2 is close to sigma^2
    assert np.linalg.norm(t.W) ** 2 == pytest.approx(0.25, rel=0.1)


def test_truth_consistency():
    inst, t = make_instance(12, 3, 2, seed=4)
    np.testing.assert_allclose(t.gamma * t.lam, 1, rtol=1e-12)
    assert t.eta_dot.alpha == pytest.approx(math.sqrt(12))
    assert t.eta_dot.norm() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("kind", ["sparse", "joint", "flat"])
def test_sparse_supports(kind):
    inst, t = make_instance(16, 20, 6, seed=3, signal=kind, s0=5)
    counts = np.count_nonzero(t.X, axis=0)
    np.testing.assert_array_equal(counts, 5)
    for j, S in enumerate(t.support):
        np.testing.assert_array_equal(np.sort(np.flatnonzero(t.X[:, j])), np.sort(S))
    if kind == "joint":
        assert np.count_nonzero(np.linalg.norm(t.X, axis=1)) == 5


def test_sparse_energy():
    vals = [np.linalg.norm(make_instance(4, 64, 16, seed=s, signal="sparse", s0=8)[1].X) ** 2 for s in range(500)]
    assert 0.95 <= np.mean(vals) <= 1.05


def test_flat_entries():
    _, t = make_instance(8, 30, 4, seed=5, signal="flat", s0=6)
    nz = t.X[t.X != 0]
    np.testing.assert_allclose(np.abs(nz), 1 / math.sqrt(4 * 6), rtol=1e-15)
    assert set(np.sign(nz.real)) == {-1.0, 1.0}
    assert not np.any(nz.imag)


def test_reproducible_and_seed_sensitive():
    a = make_instance(16, 4, 4, seed=7, sigma_w=0.1)
    b = make_instance(16, 4, 4, seed=7, sigma_w=0.1)
    c = make_instance(16, 4, 4, seed=8, sigma_w=0.1)
    assert a[0].Y.tobytes() == b[0].Y.tobytes()
    assert a[0].A.tobytes() != c[0].A.tobytes()


def test_streams_are_independent_of_other_parameters():
    # the gain draw depends only on (seed, stream), not on m or N
    _, t1 = make_instance(16, 4, 4, seed=7)
    _, t2 = make_instance(16, 9, 2, seed=7)
    np.testing.assert_array_equal(t1.lam, t2.lam)


def test_spec_dict_roundtrip():
    spec = EnsembleSpec(Dims(10, 20, 3), 0.2, 0.1, FlatSparse(4, joint=True), 99)
    assert EnsembleSpec.from_dict(spec.to_dict()) == spec
    for sig in (Sparse(3), JointSparse(2)):
        s = EnsembleSpec(Dims(10, 20, 3), signal=sig)
        assert EnsembleSpec.from_dict(s.to_dict()) == s


@pytest.mark.parametrize("bad", [dict(delta=0.0), dict(delta=1.0), dict(sigma_w=-1.0), dict(signal=Sparse(30))])
def test_spec_validation(bad):
    with pytest.raises(ValueError):
        EnsembleSpec(Dims(4, 20, 2), **bad)


def test_complex_normal_moments():
    z = complex_normal(stream(0, "A"), 200000, var=2.0)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(2.0, rel=0.02)
    assert np.var(z.real) == pytest.approx(1.0, rel=0.02)
    assert abs(np.mean(z.real * z.imag)) < 0.01


def test_derive_seed_deterministic():
    assert derive_seed(5, 1, 2) == derive_seed(5, 1, 2)
    assert derive_seed(5, 1, 2) != derive_seed(5, 2, 1)


def test_corrupt_phases_fraction():
    phases = np.zeros(100)
    out = corrupt_phases(phases, 0.5, seed=3)
    assert np.count_nonzero(out) == 50
    np.testing.assert_array_equal(corrupt_phases(phases, 0.5, seed=3), out)


def truth_from(lam, X):
    n = len(lam)
    return GroundTruth(lam, 1 / lam, X, np.zeros((n, X.shape[1])), None, np.angle(lam))


def test_diagnostics_trivial_cases():
    m = 5
    rep = assumption_diagnostics(truth_from(np.ones(7, dtype=complex), np.eye(m) / math.sqrt(m)))
    assert rep.delta_actual == 0
    assert rep.theta_actual == pytest.approx(0.0, abs=1e-12)


def test_diagnostics_flat_sparse():
    _, t = make_instance(8, 40, 6, seed=1, signal="flat", s0=5)
    rep = assumption_diagnostics(t)
    assert rep.delta_X == pytest.approx(0.0, abs=1e-12)
    assert rep.omega == pytest.approx(1.0, abs=1e-12)
    assert rep.delta_actual <= 0.1 + 1e-12


@pytest.mark.parametrize("sigma, target", [(0.1, 20.0), (0.2, 14.0), (0.5, 6.0)])
def test_msnr_levels(sigma, target):
    vals = []
    for seed in range(100):
        inst, t = make_instance(128, 32, 16, seed=seed, sigma_w=sigma)
        vals.append(msnr(t.lam, inst.A, t.X, t.W))
    assert abs(np.mean(vals) - target) <= 2.0
