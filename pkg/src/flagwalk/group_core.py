"""Matrix-group arithmetic.

KAN (Iwasawa) factorization with positive diagonal, symmetric-power
representations of SL(2), sl2-triples and the principal embedding, plus the
least-squares triple-extension test used by the case classifier.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DecompositionError, PreconditionError

NORMALIZATIONS = ("det+1", "det±1", "projective")


def as_matrix(g):
    """Accept a GroupElement or a plain array and return an ndarray."""
    if isinstance(g, GroupElement):
        return g.mat
    return np.asarray(g, dtype=float)


def _canonical_projective_sign(m):
    """Flip the global sign so the first nonzero entry of column 0 is > 0."""
    col = m[:, 0]
    for v in col:
        if v != 0.0:
            # + 0.0 clears negative zeros so byte-level equality works
            return m if v > 0 else -m + 0.0
    return m


@dataclass(frozen=True, eq=False)
class GroupElement:
    """An n x n real matrix with |det| = 1, optionally taken projectively.

    normalization is one of {"det+1", "det±1", "projective"}.  Entries are
    rescaled to |det| = 1 on construction; projective representatives are
    sign-canonicalized so equality testing is well defined.
    """

    mat: np.ndarray
    normalization: str = "det+1"

    def __post_init__(self):
        if self.normalization not in NORMALIZATIONS:
            raise PreconditionError(f"unknown normalization {self.normalization!r}")
        m = np.array(self.mat, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise PreconditionError("GroupElement needs a square matrix")
        n = m.shape[0]
        det = np.linalg.det(m)
        if abs(det) < 1e-300:
            raise PreconditionError("singular matrix")
        m = m / abs(det) ** (1.0 / n)
        det = np.linalg.det(m)
        if self.normalization == "det+1" and det < 0:
            raise PreconditionError("negative determinant with det+1 normalization")
        if self.normalization == "projective":
            m = _canonical_projective_sign(m)
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)

    @property
    def n(self):
        return self.mat.shape[0]

    def det(self):
        return float(np.linalg.det(self.mat))

    def inv(self):
        return GroupElement(np.linalg.inv(self.mat), self.normalization)

    def __matmul__(self, other):
        return GroupElement(self.mat @ as_matrix(other), self.normalization)

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return (self.normalization == other.normalization
                and self.mat.shape == other.mat.shape
                and bool(np.array_equal(self.mat, other.mat)))

    def __hash__(self):
        return hash((self.normalization, self.mat.tobytes()))

    def close_to(self, other, tol=1e-9):
        a, b = self.mat, as_matrix(other)
        if self.normalization == "projective":
            return min(np.max(np.abs(a - b)), np.max(np.abs(a + b))) <= tol
        return np.max(np.abs(a - b)) <= tol


def bracket(a, b):
    """Lie bracket ab - ba."""
    a = np.asarray(a, dtype=float) if not isinstance(a, GroupElement) else a.mat
    b = np.asarray(b, dtype=float) if not isinstance(b, GroupElement) else b.mat
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PreconditionError("bracket needs two square matrices of equal size")
    return a @ b - b @ a


@dataclass(frozen=True)
class IwasawaFactors:
    """g = k a nu with k orthogonal, a positive diagonal, nu unipotent upper."""

    k: np.ndarray
    a: np.ndarray
    nu: np.ndarray

    def reconstruct(self):
        return self.k @ self.a @ self.nu


def iwasawa_decompose(g):
    """KAN decomposition via modified Gram-Schmidt with positive pivots.

    Gram-Schmidt (rather than Householder) enforces the a > 0 sign convention
    directly; one reorthogonalization pass keeps the reconstruction error at
    the 1e-12 level for well-conditioned inputs.
    """
    m = as_matrix(g)
    n = m.shape[0]
    if m.shape[0] != m.shape[1]:
        raise PreconditionError("square matrix required")
    if abs(abs(np.linalg.det(m)) - 1.0) > 1e-6:
        raise PreconditionError("|det g| must be 1")
    if np.linalg.cond(m) > 1e12:
        raise DecompositionError("condition number exceeds 1e12")

    q = np.zeros((n, n))
    r = np.zeros((n, n))
    v = m.astype(float).copy()
    for i in range(n):
        # two orthogonalization sweeps ("twice is enough")
        for _ in range(2):
            for j in range(i):
                c = q[:, j] @ v[:, i]
                r[j, i] += c
                v[:, i] -= c * q[:, j]
        piv = float(np.linalg.norm(v[:, i]))
        if piv < 1e-14:
            raise DecompositionError("column collapse during Gram-Schmidt")
        r[i, i] = piv
        q[:, i] = v[:, i] / piv

    a = np.diag(np.diag(r))
    nu = r / np.diag(r)[:, None]
    np.fill_diagonal(nu, 1.0)
    return IwasawaFactors(q, a, nu)


def _binom_pow(u0, u1, p):
    """Coefficients of (u0*X + u1*Y)**p in the basis X^p, X^{p-1}Y, ..., Y^p."""
    return np.array([math.comb(p, i) * u0 ** (p - i) * u1 ** i
                     for i in range(p + 1)], dtype=float)


def sym_power(g, n):
    """Matrix of the unique n-dimensional irreducible SL2-representation.

    Realized on degree-(n-1) homogeneous polynomials in X, Y with the monomial
    basis ordered by descending weight: X^{n-1}, X^{n-2}Y, ..., Y^{n-1}, so
    diag(t, 1/t) maps to diag(t^{n-1}, ..., t^{-(n-1)}).  For n even the SL2
    action is faithful; for n odd it factors through PGL2.
    """
    if n < 1:
        raise PreconditionError("n >= 1 required")
    m = as_matrix(g)
    if m.shape != (2, 2):
        raise PreconditionError("sym_power expects a 2x2 matrix")
    d = n - 1
    a, b = m[0, 0], m[0, 1]
    c, dd = m[1, 0], m[1, 1]
    out = np.zeros((n, n))
    for j in range(n):
        # basis vector X^{d-j} Y^j maps to (aX + cY)^{d-j} (bX + dY)^j
        col = np.convolve(_binom_pow(a, c, d - j), _binom_pow(b, dd, j))
        out[:, j] = col
    return out


def highest_weight_lift(u, n):
    """Lift of the direction u into the highest-weight line of sym_power(., n).

    The equivariant map sends the line through the unit vector u = (u0, u1) to
    the span of (u0 X + u1 Y)^{n-1}; this returns that coefficient vector.
    """
    u = np.asarray(u, dtype=float)
    nrm = float(np.linalg.norm(u))
    if nrm == 0.0:
        raise PreconditionError("zero vector has no direction")
    return _binom_pow(u[0] / nrm, u[1] / nrm, n - 1)


@dataclass(frozen=True)
class Representation:
    """An irreducible representation of the 2x2 group, given by evaluation
    and highest-weight-line lifting rules."""

    dim: int
    apply: callable = field(repr=False)
    lift: callable = field(repr=False)
    name: str = ""


def standard_rep():
    return Representation(2, lambda g: as_matrix(g), lambda u: np.asarray(u, float),
                          name="standard")


def sym_rep(n):
    if n == 2:
        return standard_rep()
    return Representation(n, lambda g, n=n: sym_power(g, n),
                          lambda u, n=n: highest_weight_lift(u, n),
                          name=f"sym{n}")


@dataclass(frozen=True)
class Sl2Triple:
    """Raising/semisimple/lowering matrices with [x,e]=2e, [x,f]=-2f, [e,f]=x."""

    e: np.ndarray
    x: np.ndarray
    f: np.ndarray

    def bracket_residual(self):
        r1 = bracket(self.x, self.e) - 2.0 * np.asarray(self.e, dtype=float)
        r2 = bracket(self.x, self.f) + 2.0 * np.asarray(self.f, dtype=float)
        r3 = bracket(self.e, self.f) - np.asarray(self.x, dtype=float)
        return max(np.max(np.abs(r)) for r in (r1, r2, r3))

    def validate(self, tol=1e-9):
        res = self.bracket_residual()
        if res > tol:
            raise PreconditionError(f"sl2-triple bracket residual {res:.3e}")
        return self


def principal_triple(m):
    """The principal sl2-triple in m x m integer matrices.

    x = diag(m-1, m-3, ..., -m+1), e = superdiagonal of ones,
    f = subdiagonal (m-1), 2(m-2), ..., (m-1).  Brackets hold exactly in
    integer arithmetic.
    """
    if m < 2:
        raise PreconditionError("m >= 2 required")
    x = np.diag(np.arange(m - 1, -m, -2, dtype=np.int64))
    e = np.diag(np.ones(m - 1, dtype=np.int64), k=1)
    f = np.diag(np.array([(i + 1) * (m - 1 - i) for i in range(m - 1)],
                         dtype=np.int64), k=-1)
    return Sl2Triple(e, x, f)


def extend_sl2_triple(xbar, ebar, tol=1e-6):
    """Try to complete (xbar, ebar) to an sl2-triple by solving for fbar.

    Solves [xbar, f] = -2 f and [ebar, f] = xbar jointly by least squares.
    Returns (fbar, residual) on success (residual <= tol) and (None, residual)
    when no completion exists; the residual is the certified minimum of the
    stacked linear system.
    """
    xb = np.asarray(xbar, dtype=float)
    eb = np.asarray(ebar, dtype=float)
    if xb.shape != eb.shape or xb.ndim != 2 or xb.shape[0] != xb.shape[1]:
        raise PreconditionError("xbar, ebar must be square of equal dimension")
    pre = np.max(np.abs(bracket(xb, eb) - 2.0 * eb))
    if pre > max(tol, 1e-9):
        raise PreconditionError(f"[xbar, ebar] != 2 ebar (residual {pre:.3e})")
    n = xb.shape[0]
    eye = np.eye(n)
    # vec is column-stacking: vec(X F) = (I (x) X) vec(F), vec(F X) = (X^T (x) I) vec(F)
    ad_x = np.kron(eye, xb) - np.kron(xb.T, eye)
    ad_e = np.kron(eye, eb) - np.kron(eb.T, eye)
    big = np.vstack([ad_x + 2.0 * np.eye(n * n), ad_e])
    rhs = np.concatenate([np.zeros(n * n), xb.reshape(-1, order="F")])
    sol, *_ = np.linalg.lstsq(big, rhs, rcond=None)
    residual = float(np.linalg.norm(big @ sol - rhs))
    fbar = sol.reshape((n, n), order="F")
    if residual <= tol:
        return fbar, residual
    return None, residual
