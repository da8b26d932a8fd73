import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from flagwalk.errors import PreconditionError
from flagwalk.examples import closed_geodesic_point
from flagwalk.fiber import (LatticePoint, act, capped_shortest, diag_action,
                            diag_matrix, diag_orbit_average,
                            orbit_shortest_values, reduce, reduce_batch,
                            shortest_vector)
from flagwalk.cocycles import DiagSignValue

rng = np.random.default_rng(99)


def random_unimodular(k=2, steps=6, r=None):
    """Random element of GL_k(Z) as a product of elementary matrices."""
    r = r or rng
    m = np.eye(k)
    for _ in range(steps):
        i, j = r.integers(0, k, size=2)
        if i == j:
            continue
        e = np.eye(k)
        e[i, j] = r.integers(-3, 4)
        m = m @ e
    if r.random() < 0.5:
        m[:, 0] *= -1.0
    return m


def random_basis(k=2):
    while True:
        b = rng.normal(size=(k, k))
        d = abs(np.linalg.det(b))
        if d > 1e-2:
            return b / d ** (1.0 / k)


def shortest_by_enumeration(B, radius=25):
    best = np.inf
    for p in range(-radius, radius + 1):
        for q in range(-radius, radius + 1):
            if p == 0 and q == 0:
                continue
            best = min(best, float(np.linalg.norm(p * B[:, 0] + q * B[:, 1])))
    return best


# ---------------------------------------------------------------- reduction


def test_reduce_identity():
    z = reduce(np.eye(2))
    assert shortest_vector(z) == pytest.approx(1.0)


def test_reduce_diagonal():
    e = math.e
    z = reduce(np.diag([e, 1.0 / e]))
    assert shortest_vector(z) == pytest.approx(1.0 / e)


def test_reduce_rejects_non_unimodular():
    with pytest.raises(PreconditionError):
        reduce(np.diag([2.0, 1.0]))


def test_shortest_vector_matches_enumeration():
    for _ in range(100):
        B = random_basis(2)
        z = reduce(B)
        assert shortest_vector(z) == pytest.approx(
            shortest_by_enumeration(B), abs=1e-9)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_reduce_invariant_under_lattice_change(seed):
    r = np.random.default_rng(seed)
    b = r.normal(size=(2, 2))
    d = abs(np.linalg.det(b))
    if d < 1e-2:
        return
    b = b / math.sqrt(d)
    u = random_unimodular(2, r=r)
    assert reduce(b).close_to(reduce(b @ u), tol=1e-9)


def test_reduce_lll_three_dim():
    for _ in range(30):
        B = random_basis(3)
        z = reduce(B)
        # same lattice: the change of basis matrix is integral with det +-1
        c = np.linalg.solve(B, z.basis)
        assert np.max(np.abs(c - np.round(c))) <= 1e-6
        assert abs(abs(np.linalg.det(c)) - 1.0) <= 1e-6
        # reduced first vector is no longer than the original columns
        assert shortest_vector(z) <= min(np.linalg.norm(B, axis=0)) + 1e-9


def test_lattice_point_json_roundtrip():
    z = reduce(random_basis(2))
    assert LatticePoint.from_json(z.to_json()) == z


# ---------------------------------------------------------------- actions


def test_act_group_action():
    z = reduce(random_basis(2))
    g1, g2 = random_basis(2), random_basis(2)
    assert act(g1 @ g2, z).close_to(act(g1, act(g2, z)), tol=1e-9)


def test_diag_action_matches_matrix():
    z = reduce(random_basis(2))
    v = DiagSignValue(0.7, -1)
    assert diag_action(v, z) == act(diag_matrix(0.7, -1), z)


def test_shortest_vector_sign_invariant():
    # diag(1, -1) is orthogonal: shortest lengths agree on both sign branches
    z = reduce(random_basis(2))
    for r in (0.0, 0.4, 2.0):
        zp = act(diag_matrix(r, 1), z)
        zm = act(diag_matrix(r, -1), z)
        assert shortest_vector(zp) == pytest.approx(shortest_vector(zm))


# ---------------------------------------------------------------- orbits


def test_orbit_average_periodic_orbit():
    z0, period = closed_geodesic_point()
    f = capped_shortest(1.0)
    one = diag_orbit_average(z0, period, 0.01, f)
    three = diag_orbit_average(z0, 3 * period, 0.01, f)
    # dt does not divide the period exactly, so agreement is O(dt) only
    assert one == pytest.approx(three, abs=1e-3)


def test_orbit_average_signed_matches_unsigned_for_shortest():
    z0, _ = closed_geodesic_point()
    f = capped_shortest(1.0)
    a = diag_orbit_average(z0, 5.0, 0.02, f, signed=False)
    b = diag_orbit_average(z0, 5.0, 0.02, f, signed=True)
    assert a == pytest.approx(b, abs=1e-12)


def test_orbit_shortest_values_matches_slow_path():
    z0, _ = closed_geodesic_point()
    dt = 0.02
    vals = orbit_shortest_values(z0, 4.0, dt)
    slow = [shortest_vector(act(diag_matrix((j + 0.5) * dt), z0))
            for j in range(len(vals))]
    assert np.max(np.abs(vals - np.array(slow))) <= 1e-9


def test_orbit_average_dt_guard():
    z0, _ = closed_geodesic_point()
    with pytest.raises(PreconditionError):
        diag_orbit_average(z0, 1.0, 0.5, shortest_vector)


# ---------------------------------------------------------------- batching


def test_reduce_batch_matches_scalar():
    B = np.stack([random_basis(2) for _ in range(64)])
    expect = [reduce(B[i]) for i in range(64)]
    reduce_batch(B)
    for i in range(64):
        # batch output is reduced but not sign-canonicalized
        assert shortest_vector(LatticePoint(B[i])) == pytest.approx(
            shortest_vector(expect[i]), abs=1e-9)
