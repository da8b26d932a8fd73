"""The fibre S/Lambda as reduced unimodular lattice bases.

Gauss reduction (k = 2) and LLL (k >= 3), the left action of group elements
and of the diagonal flow G(r, sg), the shortest-vector observable, and
diagonal-orbit averages.  Basis vectors are the *columns* of the stored
matrix.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .group_core import as_matrix


def _gauss_reduce(B):
    """Lagrange/Gauss reduction of a 2x2 basis (columns)."""
    B = B.astype(float).copy()
    for _ in range(256):
        n1 = B[0, 0] ** 2 + B[1, 0] ** 2
        n2 = B[0, 1] ** 2 + B[1, 1] ** 2
        if n2 < n1:
            B = B[:, ::-1].copy()
            n1, n2 = n2, n1
        mu = round((B[0, 0] * B[0, 1] + B[1, 0] * B[1, 1]) / n1)
        if mu == 0:
            return B
        B[:, 1] -= mu * B[:, 0]
    raise PreconditionError("Gauss reduction failed to terminate")


def _lll_reduce(B, delta=0.99):
    """Floating-point LLL on the columns of B."""
    B = B.astype(float).copy()
    n = B.shape[1]

    def gso():
        Q = np.zeros_like(B)
        mu = np.eye(n)
        for i in range(n):
            Q[:, i] = B[:, i]
            for j in range(i):
                mu[i, j] = (Q[:, j] @ B[:, i]) / (Q[:, j] @ Q[:, j])
                Q[:, i] -= mu[i, j] * Q[:, j]
        return Q, mu

    Q, mu = gso()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            if abs(mu[k, j]) > 0.5:
                B[:, k] -= round(mu[k, j]) * B[:, j]
                Q, mu = gso()
        if (Q[:, k] @ Q[:, k]) >= (delta - mu[k, k - 1] ** 2) * (Q[:, k - 1] @ Q[:, k - 1]):
            k += 1
        else:
            B[:, [k - 1, k]] = B[:, [k, k - 1]]
            Q, mu = gso()
            k = max(k - 1, 1)
    return B


def _canonicalize(B):
    """Fix signs: b1 gets a positive first nonzero coordinate and the basis
    is made positively oriented (a right GL(Z) operation either way)."""
    B = B.copy()
    col = B[:, 0]
    for v in col:
        if v != 0.0:
            if v < 0:
                B[:, 0] = -B[:, 0] + 0.0
            break
    if np.linalg.det(B) < 0:
        B[:, -1] = -B[:, -1] + 0.0
    return B


@dataclass(frozen=True, eq=False)
class LatticePoint:
    """A point of S/Lambda: a reduced basis matrix (columns) with |det| = 1."""

    basis: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=float)
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def k(self):
        return self.basis.shape[0]

    def __eq__(self, other):
        return isinstance(other, LatticePoint) and \
            bool(np.array_equal(self.basis, other.basis))

    def __hash__(self):
        return hash(self.basis.tobytes())

    def close_to(self, other, tol=1e-9):
        return np.max(np.abs(self.basis - other.basis)) <= tol

    def to_json(self):
        return json.dumps({"basis": [list(row) for row in self.basis]})

    @classmethod
    def from_json(cls, s):
        return cls(np.array(json.loads(s)["basis"], dtype=float))


def reduce(B):
    """Reduce a unimodular basis to the canonical LatticePoint representative.

    Gauss reduction for k = 2, LLL (delta = 0.99) for k >= 3; the generated
    lattice is unchanged since all operations are right-unimodular.
    """
    B = as_matrix(B)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise PreconditionError("square basis matrix required")
    det = np.linalg.det(B)
    if abs(abs(det) - 1.0) > 1e-6:
        raise PreconditionError(f"|det| = {abs(det):.6f}, basis not unimodular")
    if abs(det) < 1e-12:
        raise PreconditionError("near-singular basis")
    if B.shape[0] == 2:
        red = _gauss_reduce(B)
    else:
        red = _lll_reduce(B)
    return LatticePoint(_canonicalize(red))


def act(s, z):
    """Left multiplication then reduction: the lattice of s . B."""
    return reduce(as_matrix(s) @ z.basis)


def diag_matrix(r, sign=1):
    """The matrix of G(r, sg): diag(e^{r/2}, e^{-r/2}) times the sign class
    diag(1, -1)."""
    h = math.exp(r / 2.0)
    return np.array([[h, 0.0], [0.0, sign / h]])


def diag_action(d, z):
    """Action of a DiagSignValue on a lattice point."""
    return act(d.matrix(), z)


def shortest_vector(z):
    """||b1|| of the reduced basis = the lattice minimum for k = 2."""
    return float(np.linalg.norm(z.basis[:, 0]))


def capped_shortest(cap=1.0):
    """The standard bounded observable min(shortest_vector, cap)."""
    def f(z):
        return min(shortest_vector(z), cap)
    f.cap = cap
    f.name = f"capped_shortest({cap})"
    return f


def renormalize_det(B):
    k = B.shape[0]
    return B / abs(np.linalg.det(B)) ** (1.0 / k)


def diag_orbit_average(z, T, dt, f, signed=False):
    """(1/T) int_0^T f(G(r, 1) z) dr by the midpoint rule.

    When signed, averages the two D±-orbit branches (1/2T) int [f(G(r,1)z) +
    f(G(r,-1)z)] dr.  The orbit is advanced incrementally, re-reducing after
    every dt-step, so arbitrarily long horizons stay in bounded arithmetic.
    """
    if dt > 0.05 or T < dt:
        raise PreconditionError("need dt <= 0.05 and T >= dt")
    branches = [1, -1] if signed else [1]
    total = 0.0
    count = 0
    steps = int(round(T / dt))
    half = diag_matrix(dt / 2.0)
    full = diag_matrix(dt)
    for sg in branches:
        cur = act(diag_matrix(0.0, sg), z)
        cur = act(half, cur)  # first midpoint r = dt/2
        for j in range(steps):
            total += f(cur)
            count += 1
            if j + 1 < steps:
                cur = act(full, cur)
                if (j + 1) % 100 == 0:
                    cur = LatticePoint(renormalize_det(cur.basis))
    return total / count


def orbit_shortest_values(z, T, dt, start=0.0):
    """Shortest-vector lengths at midpoint times of the diagonal orbit.

    Fast scalar loop used by the equidistribution experiment; returns the
    array f(G(r, 1) z) for r = start + (j + 1/2) dt, j < T/dt.  (The sign
    branch G(r, -1) differs by the orthogonal matrix diag(1, -1), which does
    not change shortest-vector lengths.)
    """
    steps = int(round(T / dt))
    b00, b01 = float(z.basis[0, 0]), float(z.basis[0, 1])
    b10, b11 = float(z.basis[1, 0]), float(z.basis[1, 1])
    eh = math.exp((start + dt / 2.0) / 2.0)
    out = np.empty(steps)
    ef = math.exp(dt / 2.0)
    for j in range(steps):
        b00 *= eh; b01 *= eh
        b10 /= eh; b11 /= eh
        # inline Gauss reduction (hot loop)
        while True:
            n1 = b00 * b00 + b10 * b10
            n2 = b01 * b01 + b11 * b11
            if n2 < n1:
                b00, b01 = b01, b00
                b10, b11 = b11, b10
                n1, n2 = n2, n1
            mu = round((b00 * b01 + b10 * b11) / n1)
            if mu == 0:
                break
            b01 -= mu * b00
            b11 -= mu * b10
        out[j] = math.sqrt(n1)
        if j == 0:
            eh = ef
        if (j + 1) % 1000 == 0:
            d = abs(b00 * b11 - b01 * b10) ** 0.5
            b00 /= d; b01 /= d; b10 /= d; b11 /= d
    return out


# batched Gauss reduction for the walk engine ------------------------------


def reduce_batch(B):
    """In-place Gauss reduction of a (N, 2, 2) stack of 2x2 bases (columns).

    Intended for incremental walk updates where bases start near-reduced, so
    only a handful of sweeps are needed.
    """
    for _ in range(256):
        n1 = B[:, 0, 0] ** 2 + B[:, 1, 0] ** 2
        n2 = B[:, 0, 1] ** 2 + B[:, 1, 1] ** 2
        swap = n2 < n1
        if np.any(swap):
            B[swap] = B[swap][:, :, ::-1]
            n1 = np.where(swap, n2, n1)
        mu = np.rint((B[:, 0, 0] * B[:, 0, 1] + B[:, 1, 0] * B[:, 1, 1]) / n1)
        if not np.any(mu):
            return B
        B[:, 0, 1] -= mu * B[:, 0, 0]
        B[:, 1, 1] -= mu * B[:, 1, 0]
    raise PreconditionError("batched Gauss reduction failed to terminate")
