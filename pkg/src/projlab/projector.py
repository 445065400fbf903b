"""Projectors, intersection projectors and consistency certificates.

Rank decisions are made from singular values with a cutoff of ``RANK_TOL``
times the largest one.  A pair projector ``P12`` onto ``Im P1 & Im P2`` is
only accepted when both ``||P12 P1 - P12||_2`` and ``||P12 P2 - P12||_2`` stay
below ``COMPAT_TOL``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    CompatibilityError,
    ConsistencyError,
    DimensionError,
    NonComplementaryError,
    NotIdempotentError,
    RankDeficientError,
)
from .normed_space import NormCertificate, NormedSpace, Operator, operator_norm, spectral_norm

RANK_TOL = 1e-10
IDEMPOTENCE_TOL = 1e-10
COMPAT_TOL = 1e-8


def numerical_rank(M, tol: float = RANK_TOL) -> int:
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass(frozen=True, eq=False)
class SubspaceBasis:
    """Linearly independent vectors, stored as the rows of ``vectors``."""

    vectors: np.ndarray
    dim: int = None

    def __post_init__(self):
        v = np.array(self.vectors, dtype=float)
        if v.size == 0:
            if self.dim is None:
                raise DimensionError("an empty basis needs an explicit dim")
            v = np.zeros((0, int(self.dim)))
        if v.ndim == 1:
            v = v[None, :]
        if v.ndim != 2:
            raise DimensionError("basis vectors must form a 2-d array")
        dim = v.shape[1] if self.dim is None else int(self.dim)
        if v.shape[1] != dim:
            raise DimensionError(f"basis vectors of length {v.shape[1]} in dim {dim}")
        if not np.all(np.isfinite(v)):
            raise ValueError("basis vectors must be finite")
        if v.shape[0] and numerical_rank(v) != v.shape[0]:
            raise RankDeficientError(f"{v.shape[0]} basis vectors span a lower-dimensional subspace")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)
        object.__setattr__(self, "dim", dim)

    @classmethod
    def empty(cls, dim: int) -> "SubspaceBasis":
        return cls(np.zeros((0, dim)), dim)

    @property
    def rank(self) -> int:
        return self.vectors.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Basis as the columns of a (dim, rank) array."""
        return self.vectors.T

    def orthonormal(self) -> np.ndarray:
        if self.rank == 0:
            return np.zeros((self.dim, 0))
        u, _, _ = np.linalg.svd(self.matrix, full_matrices=False)
        return u

    def contains(self, v, tol: float = 1e-9) -> bool:
        Q = self.orthonormal()
        v = np.asarray(v, dtype=float)
        return float(np.linalg.norm(v - Q @ (Q.T @ v))) <= tol * max(1.0, float(np.linalg.norm(v)))


def _column_space(M, tol=RANK_TOL):
    u, s, vt = np.linalg.svd(M)
    r = 0 if s[0] == 0 else int(np.sum(s > tol * s[0]))
    return u[:, :r], vt[r:, :]


@dataclass(frozen=True, eq=False)
class Projector:
    op: Operator
    range_basis: SubspaceBasis
    kernel_basis: SubspaceBasis
    norm_cert: NormCertificate

    @property
    def space(self) -> NormedSpace:
        return self.op.space

    @property
    def matrix(self) -> np.ndarray:
        return self.op.entries

    @property
    def rank(self) -> int:
        return self.range_basis.rank

    @classmethod
    def from_matrix(cls, M, space: NormedSpace, range_basis=None, kernel_basis=None) -> "Projector":
        """Wrap an idempotent matrix, deriving range/kernel bases when not given."""
        op = M if isinstance(M, Operator) else Operator(M, space)
        P = op.entries
        p2 = spectral_norm(P)
        resid = spectral_norm(P @ P - P)
        if resid > IDEMPOTENCE_TOL * (1.0 + p2 * p2):
            raise NotIdempotentError(f"||P^2 - P||_2 = {resid:.3e}")
        if range_basis is None or kernel_basis is None:
            col, null = _column_space(P)
            if range_basis is None:
                range_basis = SubspaceBasis(col.T, space.dim)
            if kernel_basis is None:
                kernel_basis = SubspaceBasis(null, space.dim)
        if range_basis.rank + kernel_basis.rank != space.dim:
            raise DimensionError("range and kernel dimensions do not add up to dim")
        cert = operator_norm(op)
        if not op.is_zero():
            cert = NormCertificate.from_bounds(max(cert.lower, 1.0), max(cert.upper, 1.0))
        return cls(op, range_basis, kernel_basis, cert)


def make_orthogonal_projector(basis: SubspaceBasis, space: NormedSpace) -> Projector:
    """l2-orthogonal projector ``B (B^T B)^-1 B^T`` onto ``span(basis)``."""
    if not isinstance(basis, SubspaceBasis):
        basis = SubspaceBasis(basis, space.dim)
    if basis.dim != space.dim:
        raise DimensionError(f"basis lives in dim {basis.dim}, space has dim {space.dim}")
    if basis.rank == 0:
        P = np.zeros((space.dim, space.dim))
        return Projector.from_matrix(P, space, basis, SubspaceBasis(np.eye(space.dim), space.dim))
    B = basis.matrix
    P = B @ np.linalg.solve(B.T @ B, B.T)
    P = 0.5 * (P + P.T)
    return Projector.from_matrix(P, space, basis, SubspaceBasis(_null_space(B.T), space.dim))


def _null_space(M):
    u, s, vt = np.linalg.svd(M)
    r = 0 if s.size == 0 or s[0] == 0 else int(np.sum(s > RANK_TOL * s[0]))
    return vt[r:, :]


def make_oblique_projector(range_basis: SubspaceBasis, kernel: SubspaceBasis, space: NormedSpace) -> Projector:
    """Projector that fixes ``range_basis`` pointwise and annihilates ``kernel``."""
    if not isinstance(range_basis, SubspaceBasis):
        range_basis = SubspaceBasis(range_basis, space.dim)
    if not isinstance(kernel, SubspaceBasis):
        kernel = SubspaceBasis(kernel, space.dim)
    d = space.dim
    if range_basis.dim != d or kernel.dim != d:
        raise DimensionError("range/kernel bases do not match the space dimension")
    if range_basis.rank + kernel.rank != d:
        raise NonComplementaryError(
            f"range ({range_basis.rank}) and kernel ({kernel.rank}) dimensions do not sum to {d}"
        )
    M = np.hstack([range_basis.matrix, kernel.matrix])
    M_unit = M / np.linalg.norm(M, axis=0)
    s = np.linalg.svd(M_unit, compute_uv=False)
    if s[-1] <= RANK_TOL * s[0]:
        raise NonComplementaryError("range and kernel are not complementary subspaces")
    r = range_basis.rank
    Minv = np.linalg.inv(M)
    P = M[:, :r] @ Minv[:r, :]
    return Projector.from_matrix(P, space, range_basis, kernel)


def intersect_ranges(a: SubspaceBasis, b: SubspaceBasis) -> SubspaceBasis:
    """Orthonormal basis of ``span(a) & span(b)``.

    Null vectors ``(x, y)`` of ``[Qa, -Qb]`` give ``Qa x = Qb y`` in both
    spans; the rank decision is taken on the singular values of that stacked
    matrix.
    """
    if a.dim != b.dim:
        raise DimensionError("bases live in different dimensions")
    d = a.dim
    if a.rank == 0 or b.rank == 0:
        return SubspaceBasis.empty(d)
    Qa, Qb = a.orthonormal(), b.orthonormal()
    K = np.hstack([Qa, -Qb])
    _, s, vt = np.linalg.svd(K)
    r = int(np.sum(s > RANK_TOL * s[0]))
    null = vt[r:, :]
    if null.shape[0] == 0:
        return SubspaceBasis.empty(d)
    W = Qa @ null[:, : a.rank].T
    u, sw, _ = np.linalg.svd(W, full_matrices=False)
    k = int(np.sum(sw > RANK_TOL * sw[0]))
    return SubspaceBasis(u[:, :k].T, d)


def intersect_many(bases) -> SubspaceBasis:
    bases = list(bases)
    out = bases[0]
    for b in bases[1:]:
        out = intersect_ranges(out, b)
    return out


@dataclass(frozen=True, eq=False)
class PairProjector:
    projector: Projector
    pair: tuple
    residual_left: float
    residual_right: float

    @property
    def op(self) -> Operator:
        return self.projector.op

    @property
    def matrix(self) -> np.ndarray:
        return self.projector.matrix


def _label(idx) -> str:
    return "(" + ",".join(str(i + 1) for i in idx) + ")"


def make_pair_projector(P1: Projector, P2: Projector, kernel: SubspaceBasis = None, pair=(0, 1)) -> PairProjector:
    """Certify a projector onto ``Im P1 & Im P2`` with ``P12 P1 = P12 = P12 P2``.

    Without ``kernel`` the candidate is the l2-orthogonal projector onto the
    intersection; with it, the oblique projector along ``kernel``.  Raises
    :class:`CompatibilityError` when either identity fails.
    """
    space = P1.space
    inter = intersect_ranges(P1.range_basis, P2.range_basis)
    if kernel is None:
        P12 = make_orthogonal_projector(inter, space)
    else:
        if not isinstance(kernel, SubspaceBasis):
            kernel = SubspaceBasis(kernel, space.dim)
        try:
            P12 = make_oblique_projector(inter, kernel, space)
        except NonComplementaryError as exc:
            raise CompatibilityError(
                f"pair {_label(pair)}: kernel does not complement the range intersection ({exc})",
                pair=tuple(pair),
            ) from exc
    M = P12.matrix
    left = spectral_norm(M @ P1.matrix - M)
    right = spectral_norm(M @ P2.matrix - M)
    if left > COMPAT_TOL or right > COMPAT_TOL:
        raise CompatibilityError(
            f"pair {_label(pair)}: P12 P1 - P12 has norm {left:.3e}, P12 P2 - P12 has norm {right:.3e}",
            pair=tuple(pair),
            residuals=(left, right),
        )
    return PairProjector(P12, tuple(pair), left, right)


@dataclass(frozen=True, eq=False)
class ConsistencyCertificate:
    global_op: Operator
    residuals: tuple
    level: str = "weak"
    subset_table: dict = field(default_factory=dict)

    @property
    def matrix(self) -> np.ndarray:
        return self.global_op.entries


def _projectors_of(family):
    return list(getattr(family, "projectors", family))


def _subset_candidate(projs, subset, space, candidate=None):
    inter = intersect_many([projs[j].range_basis for j in subset])
    if candidate is None:
        if len(subset) == 1:
            return projs[subset[0]]
        return make_orthogonal_projector(inter, space)
    if isinstance(candidate, Projector):
        cand = candidate
    elif isinstance(candidate, SubspaceBasis):
        cand = make_oblique_projector(inter, candidate, space)
    else:
        cand = Projector.from_matrix(candidate, space)
    # the candidate must project onto the intersection itself
    C = cand.matrix
    if cand.rank != inter.rank or (inter.rank and np.linalg.norm(C @ inter.matrix - inter.matrix) > COMPAT_TOL):
        raise ConsistencyError(
            f"subset {_label(subset)}: candidate does not project onto the range intersection",
            subset=tuple(subset),
        )
    return cand


def _residuals(cand, projs, subset):
    C = cand.matrix
    return tuple(spectral_norm(C @ projs[j].matrix - C) for j in subset)


def check_weak_consistency(family, candidate=None) -> ConsistencyCertificate:
    """Certify ``P_{1..n} P_j = P_{1..n}`` for every j.

    ``candidate`` may be a :class:`Projector`, a matrix, or a kernel
    :class:`SubspaceBasis` for an oblique projector onto the intersection.
    The default is the l2-orthogonal projector (``P`` itself when n = 1).
    """
    projs = _projectors_of(family)
    if not projs:
        raise ValueError("empty projector family")
    space = projs[0].space
    subset = tuple(range(len(projs)))
    cand = _subset_candidate(projs, subset, space, candidate)
    res = _residuals(cand, projs, subset)
    if max(res) > COMPAT_TOL:
        raise ConsistencyError(
            f"subset {_label(subset)}: max residual {max(res):.3e} exceeds {COMPAT_TOL:g}",
            subset=subset,
            residuals=res,
        )
    return ConsistencyCertificate(cand.op, res, "weak", {})


def check_full_consistency(family, kernels: dict = None) -> ConsistencyCertificate:
    """Certify consistency for every subset of size >= 2.

    ``kernels`` maps 0-based index tuples to kernel bases of user-supplied
    oblique candidates; other subsets use the orthogonal projector.  The first
    failing subset (by size, then lexicographically) is reported.
    """
    projs = _projectors_of(family)
    if not projs:
        raise ValueError("empty projector family")
    space = projs[0].space
    n = len(projs)
    kernels = {tuple(sorted(k)): v for k, v in (kernels or {}).items()}
    table = {}
    full = tuple(range(n))
    for size in range(2, n + 1):
        for subset in itertools.combinations(range(n), size):
            cand = _subset_candidate(projs, subset, space, kernels.get(subset))
            res = _residuals(cand, projs, subset)
            if max(res) > COMPAT_TOL:
                raise ConsistencyError(
                    f"subset {_label(subset)}: max residual {max(res):.3e} exceeds {COMPAT_TOL:g}",
                    subset=subset,
                    residuals=res,
                )
            table[subset] = cand
    if n == 1:
        cand = projs[0]
        return ConsistencyCertificate(cand.op, (0.0,), "full", {})
    top = table[full]
    return ConsistencyCertificate(top.op, _residuals(top, projs, full), "full", table)
