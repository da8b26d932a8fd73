import math

import numpy as np
import pytest

from flagwalk.boundary import (EmpiricalMeasure, StepMeasure, convolve_step,
                               detect_cone, estimate_p1p2, invariant_arc,
                               limit_form, limit_vector, sample_furstenberg)
from flagwalk.errors import ConfigurationError, PreconditionError
from flagwalk.examples import default_measure, mixed_sign_measure, \
    volatile_measure

rng = np.random.default_rng(31)


# ---------------------------------------------------------------- measures


def test_step_measure_validation():
    with pytest.raises(PreconditionError):
        StepMeasure(((0.5, np.eye(2)),))
    with pytest.raises(PreconditionError):
        StepMeasure(((1.5, np.eye(2)), (-0.5, np.eye(2))))


def test_step_measure_zariski_heuristic():
    assert default_measure().looks_zariski_dense()
    assert not StepMeasure(((1.0, np.diag([2.0, 0.5])),)).looks_zariski_dense()


def test_empirical_ks_self_zero():
    vals = rng.normal(size=500)
    m = EmpiricalMeasure(vals)
    assert m.ks_distance(EmpiricalMeasure(vals.copy())) == 0.0


def test_empirical_ks_known_value():
    a = EmpiricalMeasure(np.array([0.0, 1.0]))
    b = EmpiricalMeasure(np.array([0.5]))
    assert a.ks_distance(b) == pytest.approx(0.5)


def test_wasserstein_line_translation():
    vals = rng.normal(size=2000)
    a = EmpiricalMeasure(vals)
    b = EmpiricalMeasure(vals + 0.25)
    assert a.wasserstein1(b) == pytest.approx(0.25, abs=1e-12)


def test_wasserstein_circle_rotation_invariance():
    vals = rng.uniform(0, 2 * math.pi, size=3000)
    a = EmpiricalMeasure(vals, "circle")
    b = EmpiricalMeasure(np.mod(vals + 1.0, 2 * math.pi), "circle")
    # rotating every sample moves nothing relative to the rotated copy
    assert a.antipode().wasserstein1(
        EmpiricalMeasure(np.mod(vals + math.pi, 2 * math.pi), "circle")) \
        == pytest.approx(0.0, abs=1e-12)
    # a uniform-ish sample is close to its own rotation in circular W1
    assert a.wasserstein1(b) <= 0.05


# ---------------------------------------------------------------- limits


def test_limit_vector_is_attractor():
    mats = default_measure().matrices
    word = [mats[0], mats[1], mats[0]]
    v = limit_vector(word, 200)
    # applying the past word once more does not move the direction
    p = word[0] @ word[1] @ word[2]
    img = p @ v
    img /= np.linalg.norm(img)
    w = word[1] @ word[2] @ word[0]  # shifted word has a different attractor
    assert abs(abs(img @ v) - 1.0) <= 1e-9
    assert np.linalg.norm(p @ v) > 1.0


def test_limit_form_transpose_relation():
    mats = default_measure().matrices
    word = [mats[1], mats[0]]
    phi = limit_form(word, 200)
    # phi spans the limit vector of the transposed word
    vt = limit_vector([m.T for m in word], 200)
    assert abs(abs(phi @ vt) - 1.0) <= 1e-9


def test_limit_vector_warns_without_proximality():
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    with pytest.warns(UserWarning):
        limit_vector([rot], 8)


# ---------------------------------------------------------------- stationarity


@pytest.mark.parametrize("mu", [default_measure(), volatile_measure()],
                         ids=["default", "volatile"])
def test_furstenberg_stationarity(mu):
    nu = sample_furstenberg(mu, burn_in=2000, samples=100000, seed=5)
    assert nu.wasserstein1(convolve_step(mu, nu)) <= 0.02


def test_furstenberg_projective_mode():
    nu = sample_furstenberg(default_measure(), burn_in=500, samples=2000,
                            space="projective", seed=6)
    assert np.all(nu.values >= 0.0) and np.all(nu.values < math.pi)
    assert "autocorr" in nu.meta


# ---------------------------------------------------------------- cones


def test_detect_cone_positive_measures():
    assert detect_cone(default_measure(), seed=0) == "true"
    assert detect_cone(volatile_measure(), seed=0) == "true"


def test_detect_cone_mixed_sign():
    assert detect_cone(mixed_sign_measure(), seed=0) == "false"


def test_invariant_arc_is_invariant():
    mu = default_measure()
    arc = invariant_arc(mu, seed=0)
    assert arc is not None and arc[1] < math.pi
    start, length = arc
    for g in mu.matrices:
        for t in np.linspace(0.0, length, 25):
            u = np.array([math.cos(start + t), math.sin(start + t)])
            img = g @ u
            ang = math.atan2(img[1], img[0])
            off = (ang - start) % (2 * math.pi)
            assert off <= length + 1e-9


# ---------------------------------------------------------------- p1 / p2


def test_p1p2_boundary_values():
    mu = default_measure()
    arc = invariant_arc(mu, seed=0)
    mid = arc[0] + arc[1] / 2.0
    inside = (math.cos(mid), math.sin(mid))
    p1, p2 = estimate_p1p2(mu, inside, trials=400, seed=1)
    assert (p1, p2) == (1.0, 0.0)
    p1, p2 = estimate_p1p2(mu, (-inside[0], -inside[1]), trials=400, seed=1)
    assert (p1, p2) == (0.0, 1.0)


def test_p1p2_sum_to_one():
    p1, p2 = estimate_p1p2(default_measure(), (-1.0, 0.4), trials=500, seed=2)
    assert p1 + p2 == pytest.approx(1.0)


def test_p1p2_requires_cone():
    with pytest.raises(ConfigurationError):
        estimate_p1p2(mixed_sign_measure(), (1.0, 0.0), trials=10, seed=0)
