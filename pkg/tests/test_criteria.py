import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from projlab.criteria import (
    WeightVector,
    averaged_rate,
    beta_limit,
    corollary_rate,
    cyclic_envelope,
    evaluate_criteria,
    gamma_for_quality,
    product_deviation_bound,
    quasi_periodic_envelope,
    random_envelope,
    random_params,
    solve_gamma,
)
from projlab.errors import InapplicableError

# frozen from an independent closed-form solve of 2a x^2 + B x - slack = 0 (n=2, beta=1)
GAMMA_PRIME_N2 = 0.18614066163450715
GAMMA_N2 = 0.09307033081725358
R_N2 = 0.7147936656306338
C_N2 = 7.012466972103895


def zero_table(n):
    return np.zeros((n, n))


def pair_table(c):
    return np.array([[0.0, c], [c, 0.0]])


# ---------------------------------------------------------------------------
# weights


def test_weight_vector():
    assert list(WeightVector.uniform(4)) == [0.25] * 4
    with pytest.raises(ValueError):
        WeightVector((0.5, 0.6))
    with pytest.raises(ValueError):
        WeightVector((1.0, 0.0))


# ---------------------------------------------------------------------------
# averaged rate


def test_averaged_orthogonal_lines():
    ar = averaged_rate(zero_table(2), (0.5, 0.5), 1.0)
    assert ar.r == 0.5 and ar.C == 4.0 and ar.passed


def test_averaged_small_cosine():
    ar = averaged_rate(pair_table(0.1), (0.5, 0.5), 1.0)
    assert ar.r == pytest.approx(0.5 + 2.1 * 0.1 / 0.9, abs=1e-15)
    assert ar.r == pytest.approx(0.7333333333333334, abs=1e-12)


def test_averaged_beta_out_of_range():
    ar = averaged_rate(zero_table(2), (0.5, 0.5), 2.0)
    assert not ar.passed and ar.reason == "beta out of range"


def test_averaged_cosine_at_least_one():
    with pytest.raises(InapplicableError):
        averaged_rate(pair_table(1.0), (0.5, 0.5), 1.0)


def test_averaged_uses_max_over_indices():
    cos = np.array([[0, 0.2, 0.0], [0.2, 0, 0.0], [0.0, 0.0, 0]])
    ar = averaged_rate(cos, (0.2, 0.3, 0.5), 1.0)
    assert ar.r == max(ar.per_index) and ar.r_min == min(ar.per_index)
    assert ar.r > ar.r_min


@given(
    st.lists(st.floats(0.01, 1.0), min_size=2, max_size=6),
    st.floats(0.0, 3.0),
)
def test_averaged_zero_cosines_closed_form(raw, beta):
    a = np.array(raw) / sum(raw)
    ar = averaged_rate(zero_table(a.size), a, beta)
    assert ar.r == max((1 - x) * beta for x in a)
    if ar.passed:
        assert ar.C == pytest.approx((1 + beta) / (1 - ar.r))
        assert beta < min(1 / (1 - x) for x in a)


@given(st.floats(0.0, 0.9), st.floats(0.0, 0.9), st.floats(0.5, 1.5))
def test_averaged_monotone_in_cosine(c1, c2, beta):
    lo, hi = sorted((c1, c2))
    assert averaged_rate(pair_table(lo), (0.5, 0.5), beta).r <= averaged_rate(pair_table(hi), (0.5, 0.5), beta).r


# ---------------------------------------------------------------------------
# corollary


def test_solve_gamma_n2_beta1():
    sol = solve_gamma(1.0, 2)
    assert sol.gamma_prime == pytest.approx((-5 + math.sqrt(33)) / 4, abs=1e-15)
    assert sol.gamma_prime == pytest.approx(GAMMA_PRIME_N2, abs=1e-15)
    assert sol.gamma == pytest.approx(GAMMA_N2, abs=1e-15)
    assert sol.r == pytest.approx(R_N2, abs=1e-14)
    assert sol.C == pytest.approx(C_N2, abs=1e-12)
    # the rounded figures quoted alongside the closed form
    assert sol.gamma_prime == pytest.approx(0.1861407, abs=1e-7)
    assert sol.C == pytest.approx(7.0122, abs=1e-3)


def test_solve_gamma_shrinks_with_n():
    assert solve_gamma(1.0, 2).gamma_prime > solve_gamma(1.0, 3).gamma_prime
    assert solve_gamma(1.0, 3).gamma_prime == pytest.approx(0.10610722522451316, abs=1e-15)


def test_solve_gamma_out_of_range():
    with pytest.raises(InapplicableError):
        solve_gamma(2.0, 2)
    with pytest.raises(InapplicableError):
        solve_gamma(1.5, 3)


@settings(max_examples=200)
@given(st.integers(2, 12), st.floats(0.0, 0.999))
def test_solve_gamma_root_property(n, frac):
    beta = frac * beta_limit(n)
    sol = solve_gamma(beta, n)
    assert 0 < sol.gamma_prime < 1
    assert corollary_rate(sol.gamma_prime, beta, n) == pytest.approx(1.0, abs=1e-12)
    assert sol.r < 1
    assert sol.gamma == sol.gamma_prime / 2


# ---------------------------------------------------------------------------
# product bound and quality budget


def test_product_bound_examples():
    assert product_deviation_bound(1.3, 0.01, 2.0, 0.5, 3, 0) == pytest.approx(1.3**3 * 2.0)
    assert product_deviation_bound(1.0, GAMMA_N2, C_N2, R_N2, 2, 3) == pytest.approx(7.400676874488456, abs=1e-12)
    assert product_deviation_bound(1.0, GAMMA_N2, C_N2, R_N2, 2, 3) == pytest.approx(7.4008, abs=2e-4)
    assert product_deviation_bound(1.1, 0.0, 3.0, 0.7, 4, 5) == pytest.approx(1.1**4 * 3.0 * 0.7**5)


def test_gamma_for_quality_example():
    b = gamma_for_quality(1.0, 2, 2, 0.5)
    assert b.i0 == 10
    assert b.gamma2 == pytest.approx(0.25 / (2 * (3**10 - 1)), rel=1e-15)
    assert b.gamma2 == pytest.approx(2.116921826310798e-06, rel=1e-12)
    assert b.gamma <= b.gamma2 and b.gamma == pytest.approx(b.gamma2, rel=1e-12)


def test_gamma_for_quality_tends_to_gamma1():
    sol = solve_gamma(1.0, 2)
    gammas = [gamma_for_quality(1.0, 2, 2, q).gamma for q in (0.5, 0.9, 0.999)]
    assert all(g <= sol.gamma for g in gammas)
    assert gammas == sorted(gammas)


def test_gamma_for_quality_decreases_with_m():
    gs = [gamma_for_quality(1.05, 3, m, 0.5).gamma for m in (3, 4, 6, 9)]
    assert all(a > b for a, b in zip(gs, gs[1:]))


@settings(max_examples=100)
@given(st.integers(2, 5), st.floats(0.0, 0.99), st.integers(0, 4), st.floats(0.05, 0.95))
def test_gamma_for_quality_split(n, frac, extra, q):
    beta = frac * beta_limit(n)
    m = n + extra
    b = gamma_for_quality(beta, n, m, q)
    assert product_deviation_bound(beta, b.gamma, b.C, b.r, m, b.i0) <= q
    assert beta**m * b.C * b.r**b.i0 <= q / 2
    if b.gamma > 0:
        # the bound without the (m-1) transposition count is smaller still
        assert beta**m * b.C * b.r**b.i0 + 2 * b.gamma * beta ** (m - 2) * ((2 + beta) ** b.i0 - 1) <= q


def test_gamma_for_quality_near_beta_limit():
    # r close to 1 pushes i0 past the range where (2 + beta)^i0 is a float
    b = gamma_for_quality(1.97, 2, 2, 0.5)
    assert b.i0 > 1000
    assert b.gamma == 0.0


# ---------------------------------------------------------------------------
# random schedules


def permutation_probability(mu):
    """Exact probability that an i.i.d. block of length n is a permutation."""
    mu = [Fraction(x) for x in mu]
    n = len(mu)
    total = Fraction(0)
    for word in itertools.product(range(n), repeat=n):
        if len(set(word)) == n:
            p = Fraction(1)
            for j in word:
                p *= mu[j]
            total += p
    return total


@pytest.mark.parametrize(
    "mu",
    [(0.5, 0.5), (0.9, 0.1), (1 / 3, 1 / 3, 1 / 3), (0.25, 0.25, 0.25, 0.25), (0.1, 0.2, 0.3, 0.4), (1.0,)],
)
def test_freq_matches_enumeration(mu):
    rp = random_params(1.0, len(mu), mu)
    assert rp.freq == pytest.approx(float(permutation_probability(mu)), rel=1e-12)


def test_random_params_examples():
    assert random_params(1.0, 2, (0.5, 0.5)).freq == 0.5
    assert random_params(1.0, 2, (0.9, 0.1)).freq == pytest.approx(0.18, abs=1e-15)
    assert random_params(1.0, 1, (1.0,)).freq == 1.0
    assert float(permutation_probability((0.25,) * 4)) == pytest.approx(3 / 32)


def test_random_params_q():
    rp = random_params(1.02, 3, (0.3, 0.3, 0.4))
    assert rp.lam == 0.5 * rp.freq
    assert 1.02 ** (3 * (1 - rp.lam)) * rp.q**rp.lam <= 0.99 * (1 + 1e-12) or rp.q == 0.999
    with pytest.raises(ValueError):
        random_params(1.0, 2, (0.5, 0.6))
    with pytest.raises(ValueError):
        random_params(1.0, 2, (1.0, 0.0))


@given(st.lists(st.floats(0.05, 1.0), min_size=1, max_size=6))
def test_freq_range(raw):
    mu = np.array(raw) / sum(raw)
    f = random_params(1.0, mu.size, mu).freq
    assert 0 < f <= 1 + 1e-12
    if mu.size > 1:
        assert f < 1


# ---------------------------------------------------------------------------
# envelopes


def test_envelope_examples():
    assert cyclic_envelope(0.3, 0) == 1.0
    assert cyclic_envelope(0.5, 10) == pytest.approx(9.765625e-4)
    assert cyclic_envelope(0.9, 100) == pytest.approx(2.6561398887587544e-05, rel=1e-12)
    assert quasi_periodic_envelope(1.2, 0.5, 4, 3) == pytest.approx(1.2**3)
    assert quasi_periodic_envelope(1.0, 0.5, 3, 9) == 0.125
    assert quasi_periodic_envelope(1.05, 0.6, 4, 12) == pytest.approx(0.250047, rel=1e-12)
    assert random_envelope(1.0, 0.25, 2, 0.5, 2.0, 8) == pytest.approx(0.125)
    assert random_envelope(1.3, 0.4, 3, 1.0, 1.0, 6) == pytest.approx(1.3**2 * 0.4**2)
    assert random_envelope(1.1, 0.5, 3, 0.4, 1.5, 2) == pytest.approx(1.5 * 1.1**2)
    with pytest.raises(InapplicableError):
        random_envelope(1.5, 0.9, 2, 0.5, 1.0, 4)


@given(st.floats(0.01, 0.99), st.floats(1.0, 1.5), st.integers(2, 6), st.integers(0, 200))
def test_envelopes_nonincreasing(q, beta, m, i):
    assert cyclic_envelope(q, i + 1) <= cyclic_envelope(q, i)
    assert quasi_periodic_envelope(beta, q, m, i + 1) <= quasi_periodic_envelope(beta, q, m, i)


# ---------------------------------------------------------------------------
# report


def test_report_passing_and_json(tmp_path):
    rep = evaluate_criteria(pair_table(1e-7), 1.0, ["averaged", "corollary", "cyclic"], weakly_consistent=True)
    assert rep.all_passed
    assert rep.C == pytest.approx((1 + 1.0) / (1 - rep.r))
    rep.write_json(tmp_path / "c.json")
    data = json.loads((tmp_path / "c.json").read_text())
    assert data["hypotheses"]["cyclic"]["passed"] is True
    rep.write_csv(tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "name,pass,r_or_q,C,gamma,reason"
    assert [row.split(",")[0] for row in lines[1:]] == ["averaged", "corollary", "cyclic"]


def test_report_failing_reasons():
    rep = evaluate_criteria(pair_table(0.996), 1.0, ["averaged", "corollary", "cyclic"])
    assert not rep.all_passed
    assert rep.r > 1
    h = rep.hypotheses
    assert "gamma" in h["corollary"].reason
    assert "not weakly consistent" in h["cyclic"].reason
    rep = evaluate_criteria(zero_table(3), 1.6, ["averaged", "corollary", "quasi_periodic"], m=4)
    assert all(x.reason == "beta out of range" for x in rep.hypotheses.values())
    assert json.dumps(rep.to_dict())
