import os
import subprocess
import sys
from pathlib import Path

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqbell import kernels
from seqbell.linalg import apply_local_unitary, fidelity, schmidt_decompose, schmidt_state
from seqbell.protocol import MuSchedule, distinct_bob_states, enumerate_tree
from seqbell.measurement import X_AXIS, Z_AXIS, WeakMeasurement, outcome_probabilities, post_measurement_state

BACKENDS = ["numpy"]
try:
    kernels.get_backend("cython")
    BACKENDS.append("cython")
except ImportError:
    pass

CHILD_MEASUREMENTS = [(Z_AXIS, 0), (Z_AXIS, 1), (X_AXIS, 0), (X_AXIS, 1)]


def random_parents(rng, n):
    theta = rng.uniform(0, np.pi / 4, n)
    ang = rng.uniform(0, 2 * np.pi, n)
    ub = np.empty((n, 2, 2))
    ub[:, 0, 0], ub[:, 0, 1] = np.cos(ang), -np.sin(ang)
    ub[:, 1, 0], ub[:, 1, 1] = np.sin(ang), np.cos(ang)
    flip = rng.random(n) < 0.5
    ub[flip, :, 1] *= -1
    return theta, ub, rng.uniform(1e-3, np.pi / 4 - 1e-3, n)


@pytest.mark.parametrize("backend", BACKENDS)
def test_matches_generic_path(backend, rng):
    expand = kernels.get_backend(backend)
    theta, ub, mu = random_parents(rng, 100)
    t, u, p = expand(theta, ub, mu)
    for i in range(100):
        psi = np.kron(np.eye(2), ub[i]) @ schmidt_state(theta[i])
        for j, (axis, outcome) in enumerate(CHILD_MEASUREMENTS):
            k = 4 * i + j
            m = WeakMeasurement(axis, mu[i])
            assert p[k] == pytest.approx(outcome_probabilities(psi, m)[outcome], abs=1e-12)
            post = post_measurement_state(psi, m, outcome)
            form = schmidt_decompose(post)
            assert t[k] == pytest.approx(form.theta, abs=1e-12)
            np.testing.assert_allclose(u[k], form.u_b.real, atol=1e-10)
            undone = apply_local_unitary(post, form.u_a.conj().T, "A")
            child = np.kron(np.eye(2), u[k]) @ schmidt_state(t[k])
            assert fidelity(undone, child) > 1 - 1e-10


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
def test_backends_agree(rng):
    theta, ub, mu = random_parents(rng, 5000)
    a = kernels.get_backend("cython")(theta, ub, mu)
    b = kernels.get_backend("numpy")(theta, ub, mu)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-13, atol=1e-15)


def _mp_child_theta(theta, mu, axis, outcome):
    mpmath.mp.dps = 60
    c, s = mpmath.cos(theta), mpmath.sin(theta)
    cm, sm = mpmath.cos(mu), mpmath.sin(mu)
    if outcome == 1:
        cm, sm = sm, cm
    if axis == Z_AXIS:
        k = mpmath.matrix([[cm, 0], [0, sm]])
    else:
        hp, hm = (cm + sm) / 2, (cm - sm) / 2
        k = mpmath.matrix([[hp, hm], [hm, hp]])
    a = k * mpmath.matrix([[c, 0], [0, s]])
    sv = sorted(mpmath.svd_r(a, compute_uv=False))
    return mpmath.atan2(sv[0], sv[1])


@pytest.mark.parametrize("backend", BACKENDS)
@pytest.mark.parametrize("theta, mu", [(1e-8, 5e-9), (1e-40, 3e-41), (1e-130, 1e-131), (0.3, 1e-20)])
def test_tiny_angles_keep_relative_precision(backend, theta, mu):
    t, _, p = kernels.get_backend(backend)(np.array([theta]), np.eye(2)[None], np.array([mu]))
    for j, (axis, outcome) in enumerate(CHILD_MEASUREMENTS):
        expected = float(_mp_child_theta(mpmath.mpf(theta), mpmath.mpf(mu), axis, outcome))
        assert t[j] > 0
        assert t[j] == pytest.approx(expected, rel=1e-10)
    assert np.all(p > 0)


@pytest.mark.parametrize("backend", BACKENDS)
def test_output_shapes_and_frames(backend, rng):
    theta, ub, mu = random_parents(rng, 33)
    t, u, p = kernels.get_backend(backend)(theta, ub, mu)
    assert t.shape == (132,) and u.shape == (132, 2, 2) and p.shape == (132,)
    np.testing.assert_allclose(np.einsum("nji,njk->nik", u, u), np.broadcast_to(np.eye(2), u.shape),
                               atol=1e-12)
    np.testing.assert_allclose(p.reshape(-1, 2, 2).sum(axis=2), 1.0, atol=1e-12)
    assert np.all((t >= 0) & (t <= np.pi / 4 + 1e-15))


def test_active_backend_is_reported():
    assert kernels.BACKEND in ("cython", "numpy")


def naive_quantize(bloch, probability, m):
    """Recompute every live pair each round; smallest cost, then smallest (i, j)."""
    r = [np.array(x, dtype=float) for x in bloch]
    p = list(map(float, probability))
    alive = list(range(len(r)))
    slot = np.arange(len(r))
    while len(alive) > m:
        best = None
        for a in range(len(alive)):
            for b in range(a + 1, len(alive)):
                i, j = alive[a], alive[b]
                d = r[j] - r[i]
                cost = p[i] * p[j] / (p[i] + p[j]) * (0.5 * np.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]))
                if best is None or cost < best[0]:
                    best = (cost, i, j)
        _, i, j = best
        total = p[i] + p[j]
        r[i] = (p[i] * r[i] + p[j] * r[j]) / total
        p[i] = total
        alive.remove(j)
        slot[slot == j] = i
    return slot


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 30), m=st.integers(1, 8),
       coarse=st.booleans(), uniform=st.booleans())
def test_quantizer_matches_naive_greedy(backend, seed, n, m, coarse, uniform):
    rng = np.random.default_rng(seed)
    bloch = rng.standard_normal((n, 3))
    bloch /= np.linalg.norm(bloch, axis=1, keepdims=True) / rng.random((n, 1))
    if coarse:
        # a coarse lattice produces many exactly tied costs
        bloch = np.round(bloch * 4) / 4
    prob = np.full(n, 1.0 / n) if uniform else rng.random(n)
    prob /= prob.sum()
    got = kernels.get_quantizer(backend)(bloch, prob, m)
    np.testing.assert_array_equal(got, naive_quantize(bloch, prob, m))


@pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernel not built")
def test_quantizer_backends_agree_on_protocol_states():
    level = enumerate_tree(MuSchedule.adaptive(0.5), 5)[5]
    d = distinct_bob_states(level)
    for m in (1, 2, 37):
        a = kernels.get_quantizer("cython")(d.bloch, d.probability, m)
        b = kernels.get_quantizer("numpy")(d.bloch, d.probability, m)
        np.testing.assert_array_equal(a, b)
        assert np.unique(a).size == m


def test_environment_forces_fallback():
    env = {**os.environ, "SEQBELL_PURE_PYTHON": "1"}
    code = "import seqbell.kernels as k; print(k.BACKEND)"
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
    table = subprocess.run([sys.executable, "-m", "seqbell", "table", "--depth", "4"], env=env,
                           capture_output=True, text=True, check=True)
    assert table.stdout == (Path(__file__).parent / "golden" / "table_I.jsonl").read_text()
