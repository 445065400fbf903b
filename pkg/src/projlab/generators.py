"""Seeded constructors for test and demo families."""

from __future__ import annotations

import math

import numpy as np

from .family import build_family
from .normed_space import NormedSpace
from .projector import SubspaceBasis, make_oblique_projector, make_orthogonal_projector


def random_orthogonal(d: int, rng) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def line(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def lines_family(thetas, space: NormedSpace = None, **kw):
    """Orthogonal projectors onto lines through the origin of R^2 at the given angles."""
    space = space or NormedSpace(2)
    projs = [make_orthogonal_projector(SubspaceBasis([line(t)]), space) for t in thetas]
    return build_family(space, projs, **kw)


def random_subspace_family(dim: int, n: int, rng, common: int = 0, extra=(1, 2), space: NormedSpace = None, **kw):
    """Orthogonal family ``V_j = W + U_j`` with ``dim W = common`` and random ``U_j``.

    ``extra`` bounds the random dimension of each ``U_j``.
    """
    space = space or NormedSpace(dim)
    Q = random_orthogonal(dim, rng)
    W, rest = Q[:, :common], dim - common
    projs = []
    for _ in range(n):
        k = int(rng.integers(extra[0], min(extra[1], rest) + 1)) if rest else 0
        U = np.linalg.qr(rng.standard_normal((rest, k)))[0] if k else np.zeros((rest, 0))
        B = np.hstack([W, Q[:, common:] @ U])
        projs.append(make_orthogonal_projector(SubspaceBasis(B.T, dim), space))
    return build_family(space, projs, **kw)


def near_orthogonal_family(dim: int, n: int, eps: float, rng, common: int = 0, space: NormedSpace = None, **kw):
    """Orthogonal family ``V_j = W + span(u_j)`` with the u_j nearly orthonormal.

    Each ``u_j`` is a column of a random orthonormal frame of ``W^perp``
    tilted by ``eps`` times a Gaussian vector, so pair cosines are O(eps).
    """
    rest = dim - common
    if n > rest:
        raise ValueError(f"need n <= dim - common = {rest}")
    space = space or NormedSpace(dim)
    Q = random_orthogonal(dim, rng)
    W, F = Q[:, :common], Q[:, common:]
    projs = []
    for j in range(n):
        u = F[:, j] + eps * (F @ rng.standard_normal(rest))
        B = np.hstack([W, (u / np.linalg.norm(u))[:, None]])
        projs.append(make_orthogonal_projector(SubspaceBasis(B.T, dim), space))
    return build_family(space, projs, **kw)


def conjugate_family(family, G, **kw):
    """Oblique family ``G P_j G^-1`` with matching pair and global candidates.

    Conjugation preserves every algebraic identity, so the transported pair
    projectors ``G P_jk G^-1`` and ``G P_{1..n} G^-1`` stay compatible.
    """
    G = np.asarray(G, dtype=float)
    space = family.space
    d = space.dim

    def moved(basis):
        return SubspaceBasis((G @ basis.matrix).T, d) if basis.rank else SubspaceBasis.empty(d)

    projs = [make_oblique_projector(moved(P.range_basis), moved(P.kernel_basis), space) for P in family.projectors]
    kernels = {key: moved(pp.projector.kernel_basis) for key, pp in family.pair_projectors.items()}
    glob = None
    if family.consistency is not None:
        Ginv = np.linalg.inv(G)
        M = G @ family.consistency.matrix @ Ginv
        _, s, vt = np.linalg.svd(M)
        r = int(np.sum(s > 1e-10 * max(s[0], 1e-300))) if s[0] > 0 else 0
        glob = SubspaceBasis(vt[r:, :], d) if r < d else SubspaceBasis.empty(d)
    return build_family(space, projs, kernels, global_candidate=glob, **kw)


def near_identity(d: int, delta: float, rng) -> np.ndarray:
    return np.eye(d) + delta * rng.standard_normal((d, d))
