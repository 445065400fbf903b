"""Schedules, operator products and their comparison with rate envelopes."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .angle import angle_table
from .criteria import (
    WeightVector,
    averaged_rate,
    quasi_periodic_envelope,
    random_envelope,
    validate_distribution,
)
from .errors import (
    ConsistencyError,
    DivergenceError,
    InapplicableError,
    NonConvergenceError,
    ScheduleError,
)
from .normed_space import operator_norm_upper, spectral_norm

VIOLATION_SLACK = 1e-9
LIMIT_TOL = 1e-13
LIMIT_BUDGET = 100_000
DIVERGENCE_NORM = 1e6

KINDS = ("averaged", "cyclic", "quasi_periodic", "random")


# ---------------------------------------------------------------------------
# schedules


@dataclass(frozen=True)
class ScheduleSpec:
    kind: str
    steps: int
    alphas: tuple = None
    m: int = None
    tau: object = None  # 0-based sequence, or callable i -> index
    mu: tuple = None
    seed: int = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ScheduleError("steps must be a positive integer")


@dataclass(frozen=True, eq=False)
class Schedule:
    kind: str
    n: int
    steps: int
    tau: np.ndarray
    m: int = None
    mu: np.ndarray = None
    seed: int = None

    def __len__(self):
        return self.steps

    def one_based(self) -> list:
        return [int(t) + 1 for t in self.tau]


def check_quasi_periodic(tau, n: int, m: int) -> None:
    """Raise at the first length-m window that misses an index (1-based start)."""
    tau = np.asarray(tau)
    full = set(range(n))
    for i in range(len(tau) - m + 1):
        if set(tau[i : i + m].tolist()) != full:
            raise ScheduleError(f"window starting at step {i + 1} does not cover all {n} indices", index=i + 1)


def random_quasi_periodic(n: int, m: int, steps: int, seed: int) -> np.ndarray:
    """Seeded sequence in which every length-m window covers 0..n-1.

    Each index carries a deadline (last occurrence + m); at every step a
    uniformly random index is drawn among those whose choice keeps all
    deadlines meetable.
    """
    if m < n:
        raise ScheduleError(f"quasi-period m = {m} is shorter than n = {n}")
    rng = np.random.default_rng(seed)
    deadline = [m - 1] * n
    out = np.empty(steps, dtype=int)
    for i in range(steps):
        allowed = []
        for s in range(n):
            d = sorted(i + m if t == s else deadline[t] for t in range(n))
            if all(d[k] >= i + 1 + k for k in range(n)):
                allowed.append(s)
        s = int(allowed[rng.integers(len(allowed))])
        out[i] = s
        deadline[s] = i + m
    return out


def make_schedule(spec: ScheduleSpec, n: int) -> Schedule:
    steps = int(spec.steps)
    if spec.kind == "averaged":
        return Schedule("averaged", n, steps, np.empty(0, dtype=int))
    if spec.kind == "cyclic":
        return Schedule("cyclic", n, steps, np.arange(steps) % n)
    if spec.kind == "quasi_periodic":
        m = spec.m
        if m is None or m < n:
            raise ScheduleError(f"quasi-periodic schedule needs m >= n = {n}, got {m!r}")
        if callable(spec.tau):
            tau = np.array([spec.tau(i) for i in range(steps)], dtype=int)
        elif spec.tau is not None:
            base = np.asarray(spec.tau, dtype=int)
            if base.size == 0:
                raise ScheduleError("empty tau")
            tau = np.resize(base, steps)
        elif spec.seed is not None:
            tau = random_quasi_periodic(n, m, steps, spec.seed)
        else:
            raise ScheduleError("quasi-periodic schedule needs tau or seed")
        _check_range(tau, n)
        check_quasi_periodic(tau, n, m)
        return Schedule("quasi_periodic", n, steps, tau, m=m, seed=spec.seed)
    if spec.seed is None:
        raise ScheduleError("seed required")
    mu = np.full(n, 1.0 / n) if spec.mu is None else validate_distribution(spec.mu, n)
    rng = np.random.default_rng(spec.seed)
    tau = rng.choice(n, size=steps, p=mu)
    return Schedule("random", n, steps, tau, mu=mu, seed=spec.seed)


def _check_range(tau, n):
    bad = np.flatnonzero((tau < 0) | (tau >= n))
    if bad.size:
        raise ScheduleError(f"tau[{bad[0] + 1}] is not an index in 1..{n}", index=int(bad[0]) + 1)


def block_frequencies(tau, n: int, k_max: int = None) -> np.ndarray:
    """Running fraction ``|A(tau, k)| / k`` of non-overlapping length-n blocks
    that are permutations of 0..n-1, for k = 1..k_max."""
    tau = np.asarray(tau, dtype=int)
    avail = len(tau) // n
    k_max = avail if k_max is None else int(k_max)
    if k_max > avail:
        raise ValueError(f"only {avail} complete blocks available, {k_max} requested")
    blocks = np.sort(tau[: k_max * n].reshape(k_max, n), axis=1)
    good = np.all(blocks == np.arange(n), axis=1)
    counts = np.cumsum(good)
    return counts / np.arange(1, k_max + 1)


def lln_statistics(schedule: Schedule, k_max: int = None) -> np.ndarray:
    if schedule.kind != "random":
        raise ScheduleError(f"block statistics need a random schedule, got {schedule.kind!r}")
    return block_frequencies(schedule.tau, schedule.n, k_max)


def first_stable_index(freqs, lam: float):
    """Least k such that ``freqs[k'] >= lam`` for every k' >= k within the horizon."""
    below = np.flatnonzero(np.asarray(freqs) < lam)
    if below.size == 0:
        return 1
    k = int(below[-1]) + 2
    return k if k <= len(freqs) else None


# ---------------------------------------------------------------------------
# traces


@dataclass
class StepRecord:
    i: int
    deviation: float
    envelope: float = None
    violated: bool = False


@dataclass
class IterationTrace:
    kind: str
    steps: list
    limit_op: np.ndarray
    k_tau: int = None
    block_stats: np.ndarray = None
    info: dict = field(default_factory=dict)

    @property
    def deviations(self) -> np.ndarray:
        return np.array([s.deviation for s in self.steps])

    @property
    def violations(self) -> int:
        return sum(s.violated for s in self.steps)

    @property
    def final_deviation(self) -> float:
        return self.steps[-1].deviation if self.steps else float("nan")

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "deviation", "envelope", "violated"])
            for s in self.steps:
                env = "" if s.envelope is None else repr(float(s.envelope))
                w.writerow([s.i, repr(float(s.deviation)), env, "true" if s.violated else "false"])

    def write_svg(self, path, width: int = 720, height: int = 420):
        from .svg import line_chart

        series = {"deviation": [(s.i, s.deviation) for s in self.steps]}
        env = [(s.i, s.envelope) for s in self.steps if s.envelope is not None]
        if env:
            series["envelope"] = env
        with open(path, "w") as fh:
            fh.write(line_chart(series, title=f"{self.kind} product", width=width, height=height))


def _record(i, dev, env):
    violated = env is not None and dev > env + VIOLATION_SLACK
    return StepRecord(i, float(dev), None if env is None else float(env), bool(violated))


def _monitor(M, step):
    if np.linalg.norm(M) > DIVERGENCE_NORM:
        nrm = spectral_norm(M)
        if nrm > DIVERGENCE_NORM:
            raise DivergenceError(f"||product||_2 = {nrm:.3e} at step {step}", step=step, norm=nrm)
    if not np.all(np.isfinite(M)):
        raise DivergenceError(f"non-finite product at step {step}", step=step)


# ---------------------------------------------------------------------------
# averaged projections


def averaged_operator(family, alphas=None) -> np.ndarray:
    a = family.weights if alphas is None else alphas
    return sum(float(w) * P.matrix for w, P in zip(a, family.projectors))


def estimate_limit(T, tol: float = LIMIT_TOL, budget: int = LIMIT_BUDGET) -> np.ndarray:
    """Cauchy limit of ``T^i``: stop once consecutive powers differ by <= tol.

    The Frobenius norm is used for the stopping test; it dominates the
    spectral norm, so the rule is at least as strict.
    """
    T = np.asarray(T, dtype=float)
    X = T.copy()
    for i in range(1, budget + 1):
        Y = X @ T
        if np.linalg.norm(Y - X) <= tol:
            return Y
        _monitor(Y, i + 1)
        X = Y
    raise NonConvergenceError(f"T^i not Cauchy within {budget} steps; the r-criterion is not in force")


def energy(family, alphas, S) -> float:
    """``sum_j alpha_j ||(I - P_j) S||`` with upper norm certificates."""
    S = np.asarray(getattr(S, "entries", S), dtype=float)
    a = family.weights if alphas is None else alphas
    return math.fsum(float(w) * operator_norm_upper(S - P.matrix @ S, family.space) for w, P in zip(a, family.projectors))


def run_averaged(family, steps: int, alphas=None, mode: str = "certified_limit", beta: float = None) -> IterationTrace:
    """Iterate ``T = sum_k alpha_k P_k`` and track ``||T^i - T_inf||``.

    When the averaged r-criterion passes, each step carries the envelope
    ``C r^i``.  ``mode="certified_limit"`` takes ``T_inf`` from the family's
    weak-consistency certificate when there is one; otherwise, and always
    for ``"estimate_limit"``, the limit is the Cauchy limit of the powers.
    """
    if mode not in ("certified_limit", "estimate_limit"):
        raise ValueError(f"unknown mode {mode!r}")
    alphas = family.weights if alphas is None else alphas
    if not isinstance(alphas, WeightVector):
        alphas = WeightVector(alphas)
    beta = family.norm_bound if beta is None else beta
    T = averaged_operator(family, alphas)
    info = {"beta": beta}
    envelope = None
    if family.n >= 2 and family.pair_projectors:
        try:
            rate = averaged_rate(angle_table(family), alphas, beta)
        except InapplicableError as exc:
            info["reason"] = str(exc)
        else:
            info.update(r=rate.r, C=rate.C, passed=rate.passed)
            if rate.passed:
                envelope = (rate.C, rate.r)
    if mode == "certified_limit" and family.limit is not None:
        L = family.limit.entries
        info["limit"] = "certified"
    else:
        L = estimate_limit(T)
        info["limit"] = "estimated"
    space = family.space
    X = np.eye(space.dim)
    records = []
    for i in range(1, int(steps) + 1):
        X = X @ T
        _monitor(X, i)
        dev = operator_norm_upper(X - L, space)
        env = envelope[0] * envelope[1] ** i if envelope else None
        records.append(_record(i, dev, env))
    return IterationTrace("averaged", records, L, info=info)


# ---------------------------------------------------------------------------
# products along a schedule


@dataclass(frozen=True)
class Envelope:
    """Envelope function together with the first step it applies to."""

    func: object
    start: int = 1

    def __call__(self, i):
        return self.func(i)


def product_envelope(schedule: Schedule, beta: float, q: float, lam: float = None, norm_I_minus_P: float = 1.0) -> Envelope:
    """Theorem envelope for a product schedule.

    Cyclic: ``beta^(i mod n) q^(i // n)`` (exactly ``q^k`` after k sweeps),
    from the first complete sweep.  Quasi-periodic:
    ``beta^(m-1) q^(i // m)`` from the first complete window.  Random: the
    block envelope; :func:`run_product` moves its start past ``n k_tau``.
    """
    n = schedule.n
    if schedule.kind == "cyclic":
        return Envelope(lambda i: beta ** (i % n) * q ** (i // n), n)
    if schedule.kind == "quasi_periodic":
        m = schedule.m
        return Envelope(lambda i: quasi_periodic_envelope(beta, q, m, i), m)
    if schedule.kind == "random":
        if lam is None:
            raise ValueError("random envelope needs lambda")
        random_envelope(beta, q, n, lam, norm_I_minus_P, 0)  # raises if not contractive
        return Envelope(lambda i: random_envelope(beta, q, n, lam, norm_I_minus_P, i), n)
    raise ValueError(f"no product envelope for {schedule.kind!r}")


def run_product(family, schedule: Schedule, envelope=None, lam: float = None) -> IterationTrace:
    """Left-multiply ``P_tau(i)`` step by step and record ``||Pi_i - P_{1..n}||``.

    ``envelope`` is a callable or an :class:`Envelope`; violations are
    recorded, never raised.  Random schedules also get block statistics and,
    given ``lam``, the index ``k_tau`` after which the running block
    frequency stays >= lam; the envelope is only compared from step
    ``n * k_tau`` on.
    """
    if family.limit is None:
        raise ConsistencyError("product runs need a weakly consistent family")
    if schedule.kind == "averaged":
        raise ValueError("use run_averaged for averaged schedules")
    if schedule.n != family.n:
        raise ValueError(f"schedule over {schedule.n} indices for {family.n} projectors")
    space = family.space
    L = family.limit.entries
    mats = [P.matrix for P in family.projectors]
    start = getattr(envelope, "start", 1)
    k_tau = stats = None
    if schedule.kind == "random":
        stats = block_frequencies(schedule.tau, schedule.n)
        if lam is not None and stats.size:
            k_tau = first_stable_index(stats, lam)
            start = max(start, schedule.n * k_tau) if k_tau is not None else None
    X = np.eye(space.dim)
    records = []
    for i, j in enumerate(schedule.tau, start=1):
        X = mats[j] @ X
        _monitor(X, i)
        dev = operator_norm_upper(X - L, space)
        env = envelope(i) if envelope is not None and start is not None and i >= start else None
        records.append(_record(i, dev, env))
    info = {"envelope_start": start}
    return IterationTrace(schedule.kind, records, L, k_tau=k_tau, block_stats=stats, info=info)
