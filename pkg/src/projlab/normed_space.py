"""Weighted p-normed spaces on R^d and certified induced operator norms.

A :class:`NormedSpace` carries the dimension, the exponent ``p`` (``math.inf``
allowed) and a positive weight per coordinate.  The vector norm is

    ||v|| = (sum_i w_i |v_i|^p)^(1/p)        (finite p)
    ||v|| = max_i w_i |v_i|                  (p = inf)

so ``||v|| = ||s * v||_p`` with ``s_i = w_i^(1/p)`` (``s_i = w_i`` for
``p = inf``), and every induced norm reduces to the unit-weight problem for
``diag(s) A diag(s)^-1``.  Operator norms come back as a :class:`NormCertificate`
interval; the interval collapses to a point whenever the reduced exponent is
1, 2 or inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DimensionError

EXACT_TOL = 1e-12

_SMALL_JACOBI = 24


@dataclass(frozen=True)
class NormedSpace:
    dim: int
    p: float = 2.0
    weights: tuple = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise DimensionError(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        p = float(self.p)
        if math.isnan(p) or p < 1.0:
            raise ValueError(f"p must lie in [1, inf], got {self.p!r}")
        object.__setattr__(self, "p", p)
        if self.weights is None:
            w = (1.0,) * self.dim
        else:
            w = tuple(float(x) for x in self.weights)
            if len(w) != self.dim:
                raise DimensionError(f"expected {self.dim} weights, got {len(w)}")
            if not all(math.isfinite(x) and x > 0 for x in w):
                raise ValueError("weights must be finite and strictly positive")
        object.__setattr__(self, "weights", w)

    @property
    def unit_weights(self) -> bool:
        return all(x == 1.0 for x in self.weights)

    @property
    def exact_norms(self) -> bool:
        """True when induced norms are computed in closed form."""
        return self.p in (1.0, 2.0, math.inf)

    @property
    def is_hilbert(self) -> bool:
        return self.p == 2.0 and self.unit_weights

    @cached_property
    def scaling(self) -> np.ndarray:
        w = np.asarray(self.weights)
        if math.isinf(self.p):
            return w
        return w ** (1.0 / self.p)

    def norm(self, v) -> float:
        return vector_norm(v, self)

    def identity(self) -> "Operator":
        return Operator(np.eye(self.dim), self)

    def zeros(self) -> "Operator":
        return Operator(np.zeros((self.dim, self.dim)), self)


@dataclass(frozen=True)
class NormCertificate:
    """Interval ``[lower, upper]`` known to contain an operator norm."""

    lower: float
    upper: float
    exact: bool = False

    def __post_init__(self):
        if self.lower < 0 or self.upper < 0:
            raise ValueError("norm bounds are nonnegative")
        if self.lower > self.upper:
            raise ValueError(f"lower {self.lower} exceeds upper {self.upper}")
        if self.exact and self.upper - self.lower > EXACT_TOL * (1 + self.upper):
            raise ValueError("exact certificate with a non-degenerate interval")

    @property
    def value(self) -> float:
        return self.upper

    @classmethod
    def point(cls, x: float) -> "NormCertificate":
        x = float(x)
        return cls(x, x, True)

    @classmethod
    def from_bounds(cls, lower: float, upper: float) -> "NormCertificate":
        lower = min(float(lower), float(upper))
        upper = float(upper)
        return cls(lower, upper, upper - lower <= EXACT_TOL * (1 + upper))


@dataclass(frozen=True, eq=False)
class Operator:
    """A square real matrix acting on a :class:`NormedSpace`."""

    entries: np.ndarray
    space: NormedSpace = field(repr=False)

    def __post_init__(self):
        a = np.array(self.entries, dtype=float)
        d = self.space.dim
        if a.shape != (d, d):
            raise DimensionError(f"operator of shape {a.shape} on a space of dim {d}")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def T(self) -> "Operator":
        return Operator(self.entries.T, self.space)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def _other(self, other):
        if isinstance(other, Operator):
            if other.space.dim != self.space.dim:
                raise DimensionError("operators act on spaces of different dimension")
            return other.entries
        return np.asarray(other, dtype=float)

    def __matmul__(self, other):
        if isinstance(other, Operator):
            return Operator(self.entries @ self._other(other), self.space)
        return self.entries @ np.asarray(other, dtype=float)

    def __add__(self, other):
        return Operator(self.entries + self._other(other), self.space)

    def __sub__(self, other):
        return Operator(self.entries - self._other(other), self.space)

    def __rsub__(self, other):
        return Operator(self._other(other) - self.entries, self.space)

    def __mul__(self, scalar):
        return Operator(float(scalar) * self.entries, self.space)

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(-self.entries, self.space)

    def is_zero(self) -> bool:
        return not np.any(self.entries)

    @cached_property
    def norm(self) -> NormCertificate:
        return operator_norm(self)


def _unpack(A, space):
    if isinstance(A, Operator):
        if space is not None and space != A.space:
            raise DimensionError("operator carries a different space")
        return A.entries, A.space
    M = np.asarray(A, dtype=float)
    if space is None:
        space = NormedSpace(M.shape[0])
    if M.shape != (space.dim, space.dim):
        raise DimensionError(f"operator of shape {M.shape} on a space of dim {space.dim}")
    return M, space


def vector_norm(v, space: NormedSpace) -> float:
    v = np.asarray(v, dtype=float)
    if v.shape != (space.dim,):
        raise DimensionError(f"vector of shape {v.shape} in a space of dim {space.dim}")
    return _pnorm(space.scaling * v, space.p)


def _pnorm(x: np.ndarray, p: float) -> float:
    if math.isinf(p):
        return float(np.max(np.abs(x), initial=0.0))
    if p == 1.0:
        return float(np.sum(np.abs(x)))
    if p == 2.0:
        return float(math.sqrt(float(x @ x)))
    ax = np.abs(x)
    m = ax.max(initial=0.0)
    if m == 0.0:
        return 0.0
    return float(m * np.sum((ax / m) ** p) ** (1.0 / p))


def _reduced(M: np.ndarray, space: NormedSpace) -> np.ndarray:
    if space.unit_weights:
        return M
    s = space.scaling
    return (s[:, None] * M) / s[None, :]


# ---------------------------------------------------------------------------
# cyclic Jacobi


def jacobi_eigh(S, tol: float = EXACT_TOL, max_sweeps: int = 60, vectors: bool = False):
    """Eigen-decomposition of a real symmetric matrix by cyclic Jacobi rotations.

    Sweeps over all off-diagonal positions (row-cyclic order) until the
    off-diagonal Frobenius mass drops below ``tol`` times the total Frobenius
    norm.

    Parameters
    ----------
    S : array_like, (n, n)
        Symmetric matrix. Only symmetry up to rounding is assumed; the upper
        triangle drives the rotations.
    tol : float
        Relative off-diagonal tolerance.
    vectors : bool
        Also accumulate the rotations into an orthogonal eigenvector matrix.

    Returns
    -------
    w : ndarray, (n,)
        Eigenvalues in descending order.
    V : ndarray, (n, n)
        Only when ``vectors`` is set; columns are the matching eigenvectors.
    """
    S = np.asarray(S, dtype=float)
    n = S.shape[0]
    if S.shape != (n, n):
        raise DimensionError("jacobi_eigh needs a square matrix")
    S = 0.5 * (S + S.T)
    if n <= _SMALL_JACOBI:
        w, V = _jacobi_lists(S.tolist(), n, tol, max_sweeps, vectors)
        w = np.array(w)
        V = np.array(V) if vectors else None
    else:
        w, V = _jacobi_numpy(S, tol, max_sweeps, vectors)
    order = np.argsort(-w, kind="stable")
    if vectors:
        return w[order], V[:, order]
    return w[order]


def _rotation(app, aqq, apq):
    theta = (aqq - app) / (2.0 * apq)
    if abs(theta) > 1e150:
        t = 0.5 / theta
    else:
        t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
    c = 1.0 / math.sqrt(t * t + 1.0)
    return t, c, t * c


def _jacobi_lists(a, n, tol, max_sweeps, vectors):
    v = [[float(i == j) for j in range(n)] for i in range(n)] if vectors else None
    total = sum(x * x for row in a for x in row)
    thresh = tol * tol * total
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            row = a[p]
            for q in range(p + 1, n):
                off += row[q] * row[q]
        if 2.0 * off <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if apq == 0.0:
                    continue
                app, aqq = a[p][p], a[q][q]
                t, c, s = _rotation(app, aqq, apq)
                for k in range(n):
                    if k != p and k != q:
                        akp, akq = a[k][p], a[k][q]
                        x = c * akp - s * akq
                        y = s * akp + c * akq
                        a[k][p] = a[p][k] = x
                        a[k][q] = a[q][k] = y
                a[p][p] = app - t * apq
                a[q][q] = aqq + t * apq
                a[p][q] = a[q][p] = 0.0
                if vectors:
                    for k in range(n):
                        vkp, vkq = v[k][p], v[k][q]
                        v[k][p] = c * vkp - s * vkq
                        v[k][q] = s * vkp + c * vkq
    return [a[i][i] for i in range(n)], v


def _jacobi_numpy(a, tol, max_sweeps, vectors):
    a = a.copy()
    n = a.shape[0]
    V = np.eye(n) if vectors else None
    thresh = tol * tol * float(np.sum(a * a))
    iu = np.triu_indices(n, 1)
    for _ in range(max_sweeps):
        if 2.0 * float(np.sum(a[iu] ** 2)) <= thresh:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                t, c, s = _rotation(a[p, p], a[q, q], apq)
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                a[p, q] = a[q, p] = 0.0
                if vectors:
                    vp, vq = V[:, p].copy(), V[:, q].copy()
                    V[:, p] = c * vp - s * vq
                    V[:, q] = s * vp + c * vq
    return np.diag(a).copy(), V


def spectral_norm(M) -> float:
    """Largest singular value, via Jacobi on the Gram matrix."""
    M = np.asarray(M, dtype=float)
    if not np.any(M):
        return 0.0
    G = M.T @ M if M.shape[0] >= M.shape[1] else M @ M.T
    lam = float(jacobi_eigh(G)[0])
    return math.sqrt(max(lam, 0.0))


def _exact_norm(B: np.ndarray, p: float) -> float:
    if p == 1.0:
        return float(np.max(np.sum(np.abs(B), axis=0), initial=0.0))
    if math.isinf(p):
        return float(np.max(np.sum(np.abs(B), axis=1), initial=0.0))
    return spectral_norm(B)


def interpolation_bound(B: np.ndarray, p: float) -> float:
    """Riesz-Thorin bound ``||B||_1^(1/p) ||B||_inf^(1-1/p)`` (unit weights)."""
    n1 = _exact_norm(B, 1.0)
    ninf = _exact_norm(B, math.inf)
    if n1 == 0.0 or ninf == 0.0:
        return 0.0
    if math.isinf(p):
        return ninf
    return n1 ** (1.0 / p) * ninf ** (1.0 - 1.0 / p)


def operator_norm(A, space: NormedSpace = None, *, starts: int = 16, seed: int = 0) -> NormCertificate:
    """Certified induced norm of ``A`` on ``space``.

    For p in {1, 2, inf} the weighted problem is reduced by a diagonal
    similarity and solved in closed form.  Otherwise ``lower`` comes from
    multi-start ascent and ``upper`` from Riesz-Thorin interpolation.
    """
    M, space = _unpack(A, space)
    B = _reduced(M, space)
    if space.exact_norms:
        return NormCertificate.point(_exact_norm(B, space.p))
    return _ascent_certificate(B, space.p, starts, seed)


def estimate_norm_ascent(A, starts: int = 16, seed: int = 0, space: NormedSpace = None) -> NormCertificate:
    """Multi-start normalized-gradient ascent of ``||Av|| / ||v||``.

    The lower end is the best ratio found; it is deterministic in ``seed``
    and never decreases when ``starts`` grows, because start ``k`` is always
    the ``k``-th draw of the same generator.
    """
    M, space = _unpack(A, space)
    return _ascent_certificate(_reduced(M, space), space.p, starts, seed)


def _ascent_certificate(B, p, starts, seed):
    upper = interpolation_bound(B, p)
    if upper == 0.0 or not np.any(B):
        return NormCertificate.point(0.0)
    lower = _multistart_ascent(B, p, starts, seed)
    return NormCertificate.from_bounds(lower, upper)


def _dual_direction(x: np.ndarray, p: float) -> np.ndarray:
    """Gradient of ``||x||_p`` (a subgradient where it is not smooth)."""
    nx = _pnorm(x, p)
    if nx == 0.0:
        return np.zeros_like(x)
    if math.isinf(p):
        g = np.zeros_like(x)
        k = int(np.argmax(np.abs(x)))
        g[k] = math.copysign(1.0, x[k])
        return g
    if p == 1.0:
        return np.sign(x)
    return np.sign(x) * (np.abs(x) / nx) ** (p - 1.0)


def _ratio(B, v, p):
    nv = _pnorm(v, p)
    return _pnorm(B @ v, p) / nv if nv > 0 else 0.0


def _ascend(B, v, p, iters=200, rtol=1e-10):
    v = v / _pnorm(v, p)
    f = _ratio(B, v, p)
    step = 1.0
    for _ in range(iters):
        grad = B.T @ _dual_direction(B @ v, p) - f * _dual_direction(v, p)
        gn = float(np.linalg.norm(grad))
        if gn == 0.0:
            break
        d = grad / gn
        improved = False
        t = step
        for _ in range(50):
            w = v + t * d
            nw = _pnorm(w, p)
            if nw > 0:
                fw = _ratio(B, w, p)
                if fw > f:
                    improved = True
                    break
            t *= 0.5
        if not improved:
            break
        rel = (fw - f) / max(f, 1e-300)
        v, f = w / nw, fw
        step = min(2.0 * t, 1.0)
        if rel < rtol:
            break
    return f


def _multistart_ascent(B, p, starts, seed):
    rng = np.random.default_rng(seed)
    best = 0.0
    for _ in range(max(int(starts), 1)):
        v0 = rng.standard_normal(B.shape[0])
        best = max(best, _ascend(B, v0, p))
    return best


def operator_norm_upper(A, space: NormedSpace = None) -> float:
    """Upper end of :func:`operator_norm` without running the ascent."""
    M, space = _unpack(A, space)
    B = _reduced(M, space)
    if space.exact_norms:
        return _exact_norm(B, space.p)
    return interpolation_bound(B, space.p)
