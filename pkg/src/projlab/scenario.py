"""Scenario files: JSON description of a space, a family and a schedule.

Indices are 1-based in JSON (``pair``, ``tau``) and 0-based in Python.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .criteria import THEOREMS, WeightVector
from .engine import KINDS, ScheduleSpec
from .errors import ScenarioError
from .family import build_family
from .normed_space import NormedSpace
from .projector import SubspaceBasis, make_oblique_projector, make_orthogonal_projector


@dataclass
class ProjectorSpec:
    range: list
    kernel: list = None


@dataclass
class PairSpec:
    pair: tuple  # 1-based
    kernel: list


@dataclass
class Scenario:
    space: NormedSpace
    projectors: list
    schedule: dict
    pair_projectors: object = "auto"
    alphas: tuple = None
    criteria: list = None
    beta: float = None
    q: float = 0.5
    lam: float = None
    global_kernel: list = None
    output: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.projectors)

    def schedule_spec(self, steps: int = None, seed: int = None) -> ScheduleSpec:
        s = self.schedule
        tau = s.get("tau")
        return ScheduleSpec(
            kind=s["kind"],
            steps=int(steps if steps is not None else s["steps"]),
            alphas=self.alphas,
            m=s.get("m"),
            tau=None if tau is None else [t - 1 for t in tau],
            mu=None if s.get("mu") is None else tuple(s["mu"]),
            seed=seed if seed is not None else s.get("seed"),
        )

    def requested_criteria(self) -> list:
        if self.criteria:
            return list(self.criteria)
        req = ["averaged", "corollary"]
        if self.schedule["kind"] != "averaged":
            req.append(self.schedule["kind"])
        return req

    def build_family(self, pairs: bool = True):
        space = self.space
        projs = []
        for spec in self.projectors:
            rng = SubspaceBasis(np.array(spec.range, dtype=float).reshape(-1, space.dim), space.dim)
            if spec.kernel is None:
                projs.append(make_orthogonal_projector(rng, space))
            else:
                ker = SubspaceBasis(np.array(spec.kernel, dtype=float).reshape(-1, space.dim), space.dim)
                projs.append(make_oblique_projector(rng, ker, space))
        kernels = {}
        if self.pair_projectors != "auto":
            for ps in self.pair_projectors:
                j, k = ps.pair
                kernels[(j - 1, k - 1)] = SubspaceBasis(np.array(ps.kernel, dtype=float).reshape(-1, space.dim), space.dim)
        glob = None
        if self.global_kernel is not None:
            glob = SubspaceBasis(np.array(self.global_kernel, dtype=float).reshape(-1, space.dim), space.dim)
        return build_family(space, projs, kernels, self.alphas, pairs=pairs, global_candidate=glob)

    def to_dict(self) -> dict:
        sp = {"dim": self.space.dim, "p": "inf" if math.isinf(self.space.p) else self.space.p}
        if not self.space.unit_weights:
            sp["weights"] = list(self.space.weights)
        d = {
            "space": sp,
            "projectors": [
                {"range": p.range} if p.kernel is None else {"range": p.range, "kernel": p.kernel}
                for p in self.projectors
            ],
            "pair_projectors": "auto"
            if self.pair_projectors == "auto"
            else [{"pair": list(ps.pair), "kernel": ps.kernel} for ps in self.pair_projectors],
            "alphas": list(self.alphas),
            "schedule": dict(self.schedule),
            "q": self.q,
        }
        for key in ("criteria", "beta", "lam", "global_kernel"):
            val = getattr(self, key)
            if val is not None:
                d[key] = val
        if self.output:
            d["output"] = dict(self.output)
        return d


def save_scenario(scenario: Scenario, path) -> None:
    with open(path, "w") as fh:
        json.dump(scenario.to_dict(), fh, indent=2)
        fh.write("\n")


def load_scenario(path) -> Scenario:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}", line=exc.lineno, column=exc.colno) from exc
    return parse_scenario(raw)


# ---------------------------------------------------------------------------
# validation


def _fail(fieldname, msg):
    raise ScenarioError(f"{fieldname}: {msg}", field=fieldname)


def _number(x, fieldname):
    if isinstance(x, bool) or not isinstance(x, (int, float)) or not math.isfinite(x):
        _fail(fieldname, f"expected a finite number, got {x!r}")
    return float(x)


def _integer(x, fieldname, minimum=None):
    if isinstance(x, bool) or not isinstance(x, int):
        _fail(fieldname, f"expected an integer, got {x!r}")
    if minimum is not None and x < minimum:
        _fail(fieldname, f"must be >= {minimum}, got {x}")
    return x


def _matrix(x, fieldname, dim, allow_empty=True):
    if not isinstance(x, list) or not all(isinstance(r, list) for r in x):
        _fail(fieldname, "expected a list of vectors")
    if not x and not allow_empty:
        _fail(fieldname, "must not be empty")
    out = []
    for i, row in enumerate(x):
        if len(row) != dim:
            _fail(f"{fieldname}[{i}]", f"expected {dim} entries, got {len(row)}")
        out.append([_number(v, f"{fieldname}[{i}]") for v in row])
    return out


def _distribution(x, fieldname, n):
    if not isinstance(x, list) or len(x) != n:
        _fail(fieldname, f"expected {n} entries")
    vals = [_number(v, fieldname) for v in x]
    if any(v <= 0 for v in vals):
        _fail(fieldname, "entries must be strictly positive")
    if abs(math.fsum(vals) - 1.0) > 1e-12:
        _fail(fieldname, f"entries sum to {math.fsum(vals)!r}, not 1")
    return vals


_TOP_KEYS = {"space", "projectors", "pair_projectors", "alphas", "schedule", "criteria", "beta", "q", "lam",
             "global_kernel", "output"}


def parse_scenario(raw) -> Scenario:
    if not isinstance(raw, dict):
        _fail("<root>", "expected a JSON object")
    extra = sorted(set(raw) - _TOP_KEYS)
    if extra:
        _fail(extra[0], "unknown field")

    sp = raw.get("space")
    if not isinstance(sp, dict):
        _fail("space", "required object")
    dim = _integer(sp.get("dim"), "space.dim", 1)
    p = sp.get("p", 2)
    if p == "inf":
        p = math.inf
    else:
        p = _number(p, "space.p")
        if p < 1:
            _fail("space.p", f"must be >= 1 or \"inf\", got {p}")
    weights = sp.get("weights")
    if weights is not None:
        if not isinstance(weights, list) or len(weights) != dim:
            _fail("space.weights", f"expected {dim} entries, got {len(weights) if isinstance(weights, list) else weights!r}")
        weights = [_number(w, "space.weights") for w in weights]
        if any(w <= 0 for w in weights):
            _fail("space.weights", "entries must be strictly positive")
    space = NormedSpace(dim, p, weights)

    projs = raw.get("projectors")
    if not isinstance(projs, list) or not projs:
        _fail("projectors", "required non-empty list")
    specs = []
    for j, pj in enumerate(projs):
        f = f"projectors[{j}]"
        if not isinstance(pj, dict) or "range" not in pj:
            _fail(f, "expected an object with a \"range\" basis")
        rng = _matrix(pj["range"], f + ".range", dim)
        ker = pj.get("kernel")
        if ker is not None:
            ker = _matrix(ker, f + ".kernel", dim)
            if len(rng) + len(ker) != dim:
                _fail(f + ".kernel", f"range and kernel dimensions must sum to {dim}")
        specs.append(ProjectorSpec(rng, ker))
    n = len(specs)

    pp = raw.get("pair_projectors", "auto")
    if pp != "auto":
        if not isinstance(pp, list):
            _fail("pair_projectors", "expected \"auto\" or a list")
        pairs = []
        for i, item in enumerate(pp):
            f = f"pair_projectors[{i}]"
            if not isinstance(item, dict):
                _fail(f, "expected an object")
            pr = item.get("pair")
            if not isinstance(pr, list) or len(pr) != 2 or not all(isinstance(x, int) and 1 <= x <= n for x in pr) or pr[0] == pr[1]:
                _fail(f + ".pair", f"expected two distinct indices in 1..{n}")
            pairs.append(PairSpec(tuple(sorted(pr)), _matrix(item.get("kernel"), f + ".kernel", dim)))
        pp = pairs

    alphas = raw.get("alphas")
    if alphas is None:
        alphas = tuple(WeightVector.uniform(n))
    else:
        alphas = tuple(_distribution(alphas, "alphas", n))

    sch = raw.get("schedule")
    if not isinstance(sch, dict):
        _fail("schedule", "required object")
    kind = sch.get("kind")
    if kind not in KINDS:
        _fail("schedule.kind", f"expected one of {', '.join(KINDS)}")
    schedule = {"kind": kind, "steps": _integer(sch.get("steps"), "schedule.steps", 1)}
    if kind == "quasi_periodic":
        schedule["m"] = _integer(sch.get("m"), "schedule.m", n)
        if sch.get("tau") is None and sch.get("seed") is None:
            _fail("schedule.tau", "tau or seed required")
    if sch.get("tau") is not None:
        tau = sch["tau"]
        if not isinstance(tau, list) or not tau or not all(isinstance(t, int) and not isinstance(t, bool) and 1 <= t <= n for t in tau):
            _fail("schedule.tau", f"expected a non-empty list of indices in 1..{n}")
        schedule["tau"] = list(tau)
    if kind == "random":
        if sch.get("seed") is None:
            _fail("schedule.seed", "seed required")
        mu = sch.get("mu")
        schedule["mu"] = [1.0 / n] * n if mu is None else _distribution(mu, "schedule.mu", n)
    if sch.get("seed") is not None:
        schedule["seed"] = _integer(sch["seed"], "schedule.seed")
    unknown = sorted(set(sch) - {"kind", "steps", "m", "tau", "mu", "seed"})
    if unknown:
        _fail(f"schedule.{unknown[0]}", "unknown field")

    criteria = raw.get("criteria")
    if criteria is not None:
        if not isinstance(criteria, list) or not all(c in THEOREMS for c in criteria):
            _fail("criteria", f"expected a list drawn from {', '.join(THEOREMS)}")
        criteria = list(criteria)

    beta = raw.get("beta")
    if beta is not None:
        beta = _number(beta, "beta")
        if beta < 0:
            _fail("beta", "must be nonnegative")
    q = _number(raw.get("q", 0.5), "q")
    if not 0 < q < 1:
        _fail("q", "must lie in (0, 1)")
    lam = raw.get("lam")
    if lam is not None:
        lam = _number(lam, "lam")
        if not 0 < lam <= 1:
            _fail("lam", "must lie in (0, 1]")
    gk = raw.get("global_kernel")
    if gk is not None:
        gk = _matrix(gk, "global_kernel", dim)
    output = raw.get("output") or {}
    if not isinstance(output, dict):
        _fail("output", "expected an object")
    return Scenario(space, specs, schedule, pp, alphas, criteria, beta, q, lam, gk, dict(output))
