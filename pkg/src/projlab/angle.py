"""Cosine of the angle between two projectors, and the commutator estimate.

For projectors P1, P2 with a compatible P12 (``P12 P1 = P12 = P12 P2``) the
cosine is ``max(||P1 (P2 - P12)||, ||P2 (P1 - P12)||)`` in the ambient
operator norm.  It is a property of the triple, not of the two ranges, and
it can exceed 1.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import InapplicableError
from .normed_space import NormCertificate, Operator, operator_norm
from .projector import SubspaceBasis, intersect_ranges

COMMUTATOR_SLACK = 1e-9


def cos_angle(P1, P2, P12) -> NormCertificate:
    """Certified cosine of the angle between ``P1`` and ``P2``.

    ``upper`` is the max of the two upper norm bounds (what every criterion
    consumes); ``lower`` is the max of the lower bounds.
    """
    space = P1.space
    A, B, C = P1.matrix, P2.matrix, P12.matrix
    c1 = operator_norm(A @ (B - C), space)
    c2 = operator_norm(B @ (A - C), space)
    return NormCertificate(max(c1.lower, c2.lower), max(c1.upper, c2.upper), c1.exact and c2.exact)


def friedrichs_cos(a: SubspaceBasis, b: SubspaceBasis, space=None) -> float:
    """Cosine of the Friedrichs angle between ``span(a)`` and ``span(b)``.

    Largest principal cosine between ``a & (a & b)^perp`` and ``b``; only
    meaningful for the Euclidean inner product.
    """
    if space is not None and not space.is_hilbert:
        raise InapplicableError("the Friedrichs angle needs p = 2 with unit weights")
    if a.rank == 0 or b.rank == 0:
        return 0.0
    Qa, Qb = a.orthonormal(), b.orthonormal()
    inter = intersect_ranges(a, b)
    if inter.rank:
        Qi = inter.orthonormal()
        R = Qa - Qi @ (Qi.T @ Qa)
        u, s, _ = np.linalg.svd(R, full_matrices=False)
        # the deflated basis has singular values 1 (complement) or ~0 (intersection)
        Qa = u[:, s > 0.5]
    if Qa.shape[1] == 0:
        return 0.0
    return float(np.linalg.svd(Qa.T @ Qb, compute_uv=False)[0])


@dataclass(frozen=True, eq=False)
class AngleTable:
    lower: np.ndarray
    upper: np.ndarray
    exact: np.ndarray

    @property
    def cosines(self) -> np.ndarray:
        return self.upper

    @property
    def n(self) -> int:
        return self.upper.shape[0]

    @property
    def max_cos(self) -> float:
        return float(self.upper.max(initial=0.0))

    def rows(self):
        for j in range(self.n):
            for k in range(j + 1, self.n):
                yield j, k, float(self.lower[j, k]), float(self.upper[j, k]), bool(self.exact[j, k])

    def write_csv(self, path, friedrichs=None):
        header = ["j1", "j2", "cos_lower", "cos_upper", "exact"]
        if friedrichs is not None:
            header.append("friedrichs")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for j, k, lo, up, ex in self.rows():
                row = [j + 1, k + 1, repr(lo), repr(up), str(ex).lower()]
                if friedrichs is not None:
                    row.append(repr(float(friedrichs[j, k])))
                w.writerow(row)


def angle_table(family) -> AngleTable:
    n = len(family.projectors)
    lower = np.zeros((n, n))
    upper = np.zeros((n, n))
    exact = np.ones((n, n), dtype=bool)
    for j in range(n):
        for k in range(j + 1, n):
            c = cos_angle(family.projectors[j], family.projectors[k], family.pair(j, k))
            lower[j, k] = lower[k, j] = c.lower
            upper[j, k] = upper[k, j] = c.upper
            exact[j, k] = exact[k, j] = c.exact
    return AngleTable(lower, upper, exact)


def friedrichs_table(family) -> np.ndarray:
    n = len(family.projectors)
    out = np.zeros((n, n))
    for j in range(n):
        for k in range(j + 1, n):
            out[j, k] = out[k, j] = friedrichs_cos(
                family.projectors[j].range_basis, family.projectors[k].range_basis, family.space
            )
    return out


@dataclass(frozen=True)
class CommutatorCheck:
    lhs: float
    rhs: float
    cos: float
    beta: float

    @property
    def holds(self) -> bool:
        return self.lhs <= self.rhs + COMMUTATOR_SLACK


def verify_commutator_bound(P1, P2, P12, S, beta: float = None) -> CommutatorCheck:
    """Evaluate both sides of the commutator estimate for one operator ``S``.

    ``lhs`` uses the lower norm certificate of ``(P1 P2 - P2 P1) S`` and
    ``rhs`` upper certificates throughout, so ``holds == False`` is a genuine
    counterexample even when norms are only bracketed.
    """
    space = P1.space
    A, B = P1.matrix, P2.matrix
    S = S.entries if isinstance(S, Operator) else np.asarray(S, dtype=float)
    c = cos_angle(P1, P2, P12).upper
    if c >= 1.0:
        raise InapplicableError(f"cosine {c:.6g} >= 1: commutator bound does not apply")
    if beta is None:
        beta = max(P1.norm_cert.upper, P2.norm_cert.upper)
    I = np.eye(space.dim)
    lhs = operator_norm((A @ B - B @ A) @ S, space).lower
    factor = (beta + beta * beta + c) * c / (1.0 - c)
    rhs = factor * (operator_norm((I - A) @ S, space).upper + operator_norm((I - B) @ S, space).upper)
    return CommutatorCheck(lhs, rhs, c, beta)
