"""Indexed families P_1..P_n with their pair projectors and consistency data."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .criteria import WeightVector
from .errors import ConsistencyError
from .normed_space import NormedSpace
from .projector import (
    ConsistencyCertificate,
    PairProjector,
    Projector,
    check_weak_consistency,
    make_pair_projector,
)


@dataclass(frozen=True, eq=False)
class ProjectorFamily:
    space: NormedSpace
    projectors: tuple
    pair_projectors: dict = field(default_factory=dict)
    consistency: ConsistencyCertificate = None
    alphas: WeightVector = None

    @property
    def n(self) -> int:
        return len(self.projectors)

    def __len__(self):
        return len(self.projectors)

    def __getitem__(self, j) -> Projector:
        return self.projectors[j]

    @property
    def norm_bound(self) -> float:
        """Smallest certified beta: max of the projector norm upper bounds."""
        return max(P.norm_cert.upper for P in self.projectors)

    def pair(self, j: int, k: int) -> PairProjector:
        key = (min(j, k), max(j, k))
        if key not in self.pair_projectors:
            raise KeyError(f"no pair projector for ({key[0] + 1},{key[1] + 1})")
        return self.pair_projectors[key]

    @property
    def weights(self) -> WeightVector:
        return self.alphas if self.alphas is not None else WeightVector.uniform(self.n)

    @property
    def limit(self):
        """The certified P_{1..n}, or None when weak consistency is not known."""
        return None if self.consistency is None else self.consistency.global_op


def build_family(
    space: NormedSpace,
    projectors,
    pair_kernels: dict = None,
    alphas=None,
    pairs: bool = True,
    consistency: bool = True,
    global_candidate=None,
) -> ProjectorFamily:
    """Assemble a family, certifying pair projectors for every unordered pair.

    ``pair_kernels`` maps 0-based ``(j1, j2)`` to a kernel basis for an oblique
    ``P_{j1,j2}``; unlisted pairs get the l2-orthogonal candidate.  A pair
    failing the compatibility identities raises
    :class:`~projlab.errors.CompatibilityError`.  Weak consistency is
    attempted and recorded as ``None`` when the candidate fails, unless an
    explicit ``global_candidate`` was supplied, in which case the failure
    propagates.
    """
    projectors = tuple(projectors)
    if not projectors:
        raise ValueError("a family needs at least one projector")
    for P in projectors:
        if P.space.dim != space.dim:
            raise ValueError("projector dimension does not match the family space")
    kernels = {tuple(sorted(k)): v for k, v in (pair_kernels or {}).items()}
    table = {}
    if pairs:
        for j, k in itertools.combinations(range(len(projectors)), 2):
            table[(j, k)] = make_pair_projector(projectors[j], projectors[k], kernels.get((j, k)), pair=(j, k))
    cert = None
    if consistency:
        try:
            cert = check_weak_consistency(projectors, global_candidate)
        except ConsistencyError:
            if global_candidate is not None:
                raise
    if alphas is not None and not isinstance(alphas, WeightVector):
        alphas = WeightVector(alphas)
    if alphas is not None and len(alphas) != len(projectors):
        raise ValueError(f"{len(alphas)} weights for {len(projectors)} projectors")
    return ProjectorFamily(space, projectors, table, cert, alphas)
