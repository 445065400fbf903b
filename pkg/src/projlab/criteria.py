"""Sufficient conditions and rate envelopes for products of projectors.

Everything here is scalar arithmetic on a handful of certified inputs: the
uniform norm bound ``beta``, the table of pair cosines, the averaging
weights, and for random schedules the sampling distribution ``mu``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InapplicableError

WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class WeightVector:
    alphas: tuple

    def __post_init__(self):
        a = tuple(float(x) for x in self.alphas)
        if not a:
            raise ValueError("empty weight vector")
        if not all(math.isfinite(x) and x > 0 for x in a):
            raise ValueError("weights must be strictly positive")
        if abs(math.fsum(a) - 1.0) > WEIGHT_TOL:
            raise ValueError(f"weights sum to {math.fsum(a)!r}, not 1")
        object.__setattr__(self, "alphas", a)

    @classmethod
    def uniform(cls, n: int) -> "WeightVector":
        return cls((1.0 / n,) * n)

    def __len__(self):
        return len(self.alphas)

    def __iter__(self):
        return iter(self.alphas)

    def __getitem__(self, j):
        return self.alphas[j]

    def as_array(self) -> np.ndarray:
        return np.array(self.alphas)


def _cos_matrix(cosines) -> np.ndarray:
    return np.asarray(getattr(cosines, "upper", cosines), dtype=float)


def beta_limit(n: int) -> float:
    """Exclusive upper limit ``1 + 1/(n-1)`` on the norm bound for n projectors."""
    return math.inf if n <= 1 else 1.0 + 1.0 / (n - 1)


# ---------------------------------------------------------------------------
# averaged projections


@dataclass(frozen=True)
class AveragedRate:
    r: float
    r_min: float
    C: float
    passed: bool
    per_index: tuple
    reason: str = ""


def averaged_rate(cosines, alphas, beta: float) -> AveragedRate:
    """Contraction factor of the energy ``sum_j alpha_j ||(I - P_j) S||``.

    For each j::

        c_j = (1 - a_j) beta + sum_{k != j} 2 a_k (cos_jk + beta + beta^2) cos_jk / (1 - cos_jk)

    ``r`` is the maximum over j, since the energy estimate needs ``c_j <= r``
    for every index; the minimum is kept as ``r_min`` for reference.
    ``C = (1 + beta) / (1 - r)`` when ``r < 1``.
    """
    cos = _cos_matrix(cosines)
    a = np.asarray(list(alphas), dtype=float)
    n = a.size
    if cos.shape != (n, n):
        raise ValueError(f"cosine table of shape {cos.shape} for {n} weights")
    off = ~np.eye(n, dtype=bool)
    if n > 1 and np.max(cos[off]) >= 1.0:
        raise InapplicableError(f"a pair cosine is >= 1 (max {np.max(cos[off]):.6g})")
    per = []
    for j in range(n):
        s = (1.0 - a[j]) * beta
        for k in range(n):
            if k != j:
                c = cos[j, k]
                s += (c + beta + beta * beta) * c / (1.0 - c) * 2.0 * a[k]
        per.append(float(s))
    r = max(per)
    passed = r < 1.0
    C = (1.0 + beta) / (1.0 - r) if passed else math.inf
    reason = "" if passed else f"r = {r:.6g} >= 1"
    if beta >= min(1.0 / (1.0 - x) if x < 1 else math.inf for x in a):
        reason = "beta out of range"
    return AveragedRate(r, min(per), C, passed, tuple(per), reason)


# ---------------------------------------------------------------------------
# uniform weights: explicit angle budget


def corollary_rate(x: float, beta: float, n: int) -> float:
    """``f(x) = a beta + 2 a (x + beta + beta^2) x / (1 - x)`` with ``a = (n-1)/n``."""
    a = (n - 1) / n
    return a * beta + 2.0 * a * (x + beta + beta * beta) * x / (1.0 - x)


@dataclass(frozen=True)
class GammaSolution:
    gamma_prime: float
    gamma: float
    r: float
    C: float


def solve_gamma(beta: float, n: int) -> GammaSolution:
    """Angle budget for uniform averaging of ``n`` projectors with norms <= beta.

    ``gamma_prime`` is the root in (0, 1) of ``f(x) = 1``, i.e. of
    ``2a x^2 + (2a(beta + beta^2) + 1 - a beta) x - (1 - a beta) = 0``;
    the budget is ``gamma = gamma_prime / 2`` with ``r = f(gamma)``.
    """
    n = int(n)
    if n < 2:
        raise ValueError("solve_gamma needs n >= 2")
    if not (0.0 <= beta < beta_limit(n)):
        raise InapplicableError(f"beta = {beta!r} outside [0, {beta_limit(n)!r})")
    a = (n - 1) / n
    A = 2.0 * a
    slack = 1.0 - a * beta
    B = 2.0 * a * (beta + beta * beta) + slack
    # positive root written without cancellation
    gp = 2.0 * slack / (B + math.sqrt(B * B + 4.0 * A * slack))
    g = 0.5 * gp
    r = corollary_rate(g, beta, n)
    return GammaSolution(gp, g, r, (1.0 + beta) / (1.0 - r))


def product_deviation_bound(beta: float, gamma: float, C: float, r: float, m: int, i: int) -> float:
    """Bound on ``||P_s(m) ... P_s(1) - T_inf||`` for a surjective word of length m.

    ``beta^m C r^i + 2 gamma beta^(m-2) (m-1) ((2+beta)^i - 1)``.  The
    ``(m-1)`` factor counts the adjacent transpositions needed to bring any
    index to the front; it is 1 for m = 2.
    """
    if m < 2 or i < 0:
        raise ValueError("need m >= 2 and i >= 0")
    head = beta**m * C * r**i
    if gamma == 0.0:
        return head
    try:
        return head + 2.0 * gamma * beta ** (m - 2) * (m - 1) * ((2.0 + beta) ** i - 1.0)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class QualityBudget:
    gamma: float
    i0: int
    gamma1: float
    gamma2: float
    r: float
    C: float


def gamma_for_quality(beta: float, n: int, m: int, q: float) -> QualityBudget:
    """Angle budget under which every surjective length-m word is q-close to T_inf.

    ``i0`` is the least ``i >= 1`` with ``beta^m C r^i <= q/2``; the second
    term of :func:`product_deviation_bound` at ``i0`` is then held to ``q/2``.
    """
    if m < n:
        raise ValueError(f"window length m = {m} is shorter than n = {n}")
    if not (0.0 < q < 1.0):
        raise ValueError(f"q must lie in (0, 1), got {q!r}")
    sol = solve_gamma(beta, n)
    C, r = sol.C, sol.r
    head = beta**m * C
    i0 = 1
    while head * r**i0 > 0.5 * q:
        i0 += 1
    if beta == 0.0 and m > 2:
        gamma2 = math.inf  # the angle term vanishes
    else:
        # log scale: near the beta limit i0 is large and (2+beta)^i0 overflows
        log_denom = (math.log(2.0) + (m - 2) * math.log(beta) if m > 2 else math.log(2.0)) + math.log(m - 1)
        log_denom += i0 * math.log(2.0 + beta) + math.log1p(-((2.0 + beta) ** -i0))
        expo = math.log(0.5 * q) - log_denom
        gamma2 = math.exp(expo) if expo < 700.0 else math.inf
    gamma = min(sol.gamma, gamma2)
    while product_deviation_bound(beta, gamma, C, r, m, i0) > q:
        gamma = math.nextafter(gamma, 0.0)
    return QualityBudget(gamma, i0, sol.gamma, gamma2, r, C)


# ---------------------------------------------------------------------------
# random schedules


@dataclass(frozen=True)
class RandomParams:
    freq: float
    lam: float
    q: float


def validate_distribution(mu, n: int) -> np.ndarray:
    mu = np.asarray(mu, dtype=float)
    if mu.shape != (n,):
        raise ValueError(f"mu has {mu.size} entries for {n} projectors")
    if not np.all(mu > 0):
        raise ValueError("every mu(j) must be strictly positive")
    if abs(math.fsum(mu) - 1.0) > WEIGHT_TOL:
        raise ValueError(f"mu sums to {math.fsum(mu)!r}, not 1")
    return mu


def random_params(beta: float, n: int, mu, lam: float = None, target: float = 0.99, q_cap: float = 0.999) -> RandomParams:
    """Block statistics and per-block quality for i.i.d. schedules.

    ``freq = n! prod mu(j)`` is the probability that a length-n block is a
    permutation of 1..n.  ``q`` is the largest value with
    ``beta^(n(1-lam)) q^lam <= target``, capped at ``q_cap``.
    """
    mu = validate_distribution(mu, n)
    freq = float(math.factorial(n) * np.prod(mu))
    if lam is None:
        lam = 0.5 * freq
    if not (0.0 < lam <= freq):
        raise ValueError(f"lambda must lie in (0, {freq}], got {lam!r}")
    q = (target * beta ** (-n * (1.0 - lam))) ** (1.0 / lam)
    return RandomParams(freq, float(lam), min(q, q_cap))


# ---------------------------------------------------------------------------
# envelopes


def cyclic_envelope(q: float, i: int) -> float:
    if not (0.0 < q < 1.0):
        raise ValueError("q must lie in (0, 1)")
    return q**i


def quasi_periodic_envelope(beta: float, q: float, m: int, i: int) -> float:
    return beta ** (m - 1) * q ** (i // m)


def random_envelope(beta: float, q: float, n: int, lam: float, norm_I_minus_P: float, i: int) -> float:
    factor = beta ** (n * (1.0 - lam)) * q**lam
    if factor >= 1.0:
        raise InapplicableError(f"per-block factor {factor:.6g} >= 1: envelope is not contractive")
    return norm_I_minus_P * beta ** (n - 1) * factor ** (i // n)


# ---------------------------------------------------------------------------
# report


THEOREMS = ("averaged", "corollary", "cyclic", "quasi_periodic", "random")


@dataclass
class Hypothesis:
    passed: bool
    reason: str = ""
    rate: float = None
    C: float = None
    gamma: float = None


@dataclass
class CriteriaReport:
    beta: float
    n: int
    cos_table: object = None
    max_cos: float = None
    weakly_consistent: bool = False
    r: float = None
    r_min: float = None
    C: float = None
    gamma: float = None
    gamma_prime: float = None
    q: float = None
    m: int = None
    i0: int = None
    lam: float = None
    freq: float = None
    hypotheses: dict = field(default_factory=dict)

    @property
    def all_passed(self) -> bool:
        return all(h.passed for h in self.hypotheses.values())

    def to_dict(self) -> dict:
        d = {k: v for k, v in asdict(self).items() if k not in ("cos_table", "hypotheses")}
        if self.cos_table is not None:
            d["cos_table"] = {
                "lower": np.asarray(self.cos_table.lower).tolist(),
                "upper": np.asarray(self.cos_table.upper).tolist(),
                "exact": np.asarray(self.cos_table.exact).tolist(),
            }
        d["hypotheses"] = {k: asdict(v) for k, v in self.hypotheses.items()}
        return _json_safe(d)

    def write_json(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["name", "pass", "r_or_q", "C", "gamma", "reason"])
            for name, h in self.hypotheses.items():
                w.writerow([name, "pass" if h.passed else "fail", _fmt(h.rate), _fmt(h.C), _fmt(h.gamma), h.reason])


def _fmt(x):
    return "" if x is None else repr(float(x))


def _json_safe(obj):
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return _json_safe(obj.item())
    return obj


def evaluate_criteria(
    cos_table,
    beta: float,
    requested=("averaged", "corollary"),
    alphas=None,
    weakly_consistent: bool = False,
    q: float = 0.5,
    m: int = None,
    mu=None,
    lam: float = None,
) -> CriteriaReport:
    """Run every requested theorem check against one family's data.

    ``cos_table`` is an angle table (or an array of upper cosines).  Each
    entry of ``hypotheses`` records pass/fail with the governing rate
    (``r`` for averaging, ``q`` for products), ``C`` and the angle budget.
    """
    cos = _cos_matrix(cos_table)
    n = cos.shape[0]
    off = ~np.eye(n, dtype=bool)
    max_cos = float(cos[off].max()) if n > 1 else 0.0
    alphas = WeightVector.uniform(n) if alphas is None else alphas
    if not isinstance(alphas, WeightVector):
        alphas = WeightVector(alphas)
    rep = CriteriaReport(beta=float(beta), n=n, cos_table=cos_table if hasattr(cos_table, "upper") else None,
                         max_cos=max_cos, weakly_consistent=weakly_consistent)
    for name in requested:
        if name not in THEOREMS:
            raise ValueError(f"unknown criterion {name!r}")
        rep.hypotheses[name] = _check(name, rep, cos, alphas, beta, n, max_cos, weakly_consistent, q, m, mu, lam)
    return rep


def _check(name, rep, cos, alphas, beta, n, max_cos, consistent, q, m, mu, lam):
    if name == "averaged":
        if beta >= min(1.0 / (1.0 - a) for a in alphas):
            return Hypothesis(False, "beta out of range")
        try:
            ar = averaged_rate(cos, alphas, beta)
        except InapplicableError as exc:
            return Hypothesis(False, str(exc))
        rep.r, rep.r_min, rep.C = ar.r, ar.r_min, ar.C
        return Hypothesis(ar.passed, ar.reason, ar.r, ar.C if ar.passed else None)
    if n < 2 or not (0.0 <= beta < beta_limit(n)):
        return Hypothesis(False, "beta out of range" if n >= 2 else "needs n >= 2")
    if name == "corollary":
        sol = solve_gamma(beta, n)
        rep.gamma_prime, rep.gamma = sol.gamma_prime, sol.gamma
        ok = max_cos <= sol.gamma
        reason = "" if ok else f"max cosine {max_cos:.6g} > gamma {sol.gamma:.6g}"
        return Hypothesis(ok, reason, sol.r, sol.C, sol.gamma)
    if name == "random":
        if mu is None:
            return Hypothesis(False, "mu required")
        rp = random_params(beta, n, mu, lam)
        rep.freq, rep.lam = rp.freq, rp.lam
        q_used, window = rp.q, n
    elif name == "cyclic":
        q_used, window = q, n
    else:
        if m is None:
            return Hypothesis(False, "quasi-period m required")
        q_used, window = q, int(m)
    budget = gamma_for_quality(beta, n, window, q_used)
    rep.q, rep.m, rep.i0 = q_used, window, budget.i0
    reasons = []
    if max_cos > budget.gamma:
        reasons.append(f"max cosine {max_cos:.6g} > gamma {budget.gamma:.6g}")
    if not consistent:
        reasons.append("not weakly consistent")
    return Hypothesis(not reasons, "; ".join(reasons), q_used, budget.C, budget.gamma)
