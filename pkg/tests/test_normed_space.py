import math

import numpy as np
import pytest

from projlab.errors import DimensionError
from projlab.normed_space import (
    NormCertificate,
    NormedSpace,
    Operator,
    estimate_norm_ascent,
    jacobi_eigh,
    operator_norm,
    operator_norm_upper,
    spectral_norm,
    vector_norm,
)

SPACES = [
    NormedSpace(3, 1),
    NormedSpace(3, 2),
    NormedSpace(3, math.inf),
    NormedSpace(3, 3),
    NormedSpace(3, 1.5, (0.5, 2.0, 1.0)),
    NormedSpace(3, math.inf, (3.0, 1.0, 0.25)),
]


@pytest.mark.parametrize(
    "v, p, expected",
    [((1, 0), 2, 1.0), ((3, -4), 2, 5.0), ((1, -2, 3), 1, 6.0), ((1, -2, 3), math.inf, 3.0)],
)
def test_vector_norm_examples(v, p, expected):
    assert vector_norm(v, NormedSpace(len(v), p)) == pytest.approx(expected, abs=1e-15)


def test_weighted_vector_norm():
    sp = NormedSpace(2, 2, (4.0, 1.0))
    assert vector_norm([1, 1], sp) == pytest.approx(math.sqrt(5))
    sp = NormedSpace(2, math.inf, (4.0, 1.0))
    assert vector_norm([1, 3], sp) == 4.0


def test_vector_norm_dimension_mismatch():
    with pytest.raises(DimensionError):
        vector_norm([1, 2, 3], NormedSpace(2))


@pytest.mark.parametrize("kwargs", [{"dim": 0}, {"dim": 2, "p": 0.5}, {"dim": 2, "weights": (1, 0)}, {"dim": 2, "weights": (1,)}])
def test_space_invariants(kwargs):
    with pytest.raises((ValueError, DimensionError)):
        NormedSpace(**kwargs)


@pytest.mark.parametrize("space", SPACES, ids=lambda s: f"p={s.p},w={s.weights}")
def test_norm_axioms(space):
    rng = np.random.default_rng(11)
    for _ in range(1000):
        u, v = rng.standard_normal((2, space.dim))
        a = rng.standard_normal()
        nu, nv = vector_norm(u, space), vector_norm(v, space)
        assert vector_norm(u + v, space) <= nu + nv + 1e-10
        assert vector_norm(a * u, space) == pytest.approx(abs(a) * nu, abs=1e-10)


# ---------------------------------------------------------------------------
# Jacobi


def test_jacobi_matches_numpy():
    rng = np.random.default_rng(0)
    for n in (1, 2, 3, 5, 8, 30):
        X = rng.standard_normal((n, n))
        S = X + X.T
        w, V = jacobi_eigh(S, vectors=True)
        assert np.allclose(w, np.sort(np.linalg.eigvalsh(S))[::-1], atol=1e-10)
        assert np.allclose(V.T @ V, np.eye(n), atol=1e-10)
        assert np.allclose(S @ V, V * w, atol=1e-9)


def test_spectral_norm_by_characteristic_polynomial():
    # A^T A = [[1,1],[1,1]] has eigenvalues 0 and 2
    assert spectral_norm([[1, 1], [0, 0]]) == pytest.approx(math.sqrt(2), abs=1e-14)


# ---------------------------------------------------------------------------
# operator norms


@pytest.mark.parametrize("space", SPACES, ids=lambda s: f"p={s.p},w={s.weights}")
def test_identity_norm_is_one(space):
    cert = operator_norm(np.eye(space.dim), space)
    assert cert.exact
    assert cert.lower == pytest.approx(1.0, abs=1e-12)
    assert cert.upper == pytest.approx(1.0, abs=1e-12)


def test_max_column_sum_p1():
    cert = operator_norm([[1, -2], [3, 4]], NormedSpace(2, 1))
    # brute force over the l1 sphere (vertices included) gives 6
    assert cert.exact and cert.upper == 6.0


def test_spectral_p2():
    cert = operator_norm([[1, 1], [0, 0]], NormedSpace(2, 2))
    assert cert.exact and cert.upper == pytest.approx(1.41421356, abs=1e-8)


def test_duality_one_inf():
    rng = np.random.default_rng(3)
    for _ in range(50):
        A = rng.standard_normal((4, 4))
        assert operator_norm(A, NormedSpace(4, 1)).upper == pytest.approx(
            operator_norm(A.T, NormedSpace(4, math.inf)).upper, abs=1e-12
        )


def test_weighted_exact_by_similarity():
    sp = NormedSpace(2, 2, (4.0, 1.0))
    A = np.array([[0.0, 1.0], [0.0, 0.0]])
    # ||A v|| = 2|v2| and ||v|| = sqrt(4 v1^2 + v2^2) >= |v2|
    cert = operator_norm(A, sp)
    assert cert.exact and cert.upper == pytest.approx(2.0)


def test_operator_wrapper_and_caching():
    sp = NormedSpace(2)
    A = Operator([[2, 0], [0, 1]], sp)
    assert A.norm.upper == pytest.approx(2.0)
    assert A.norm is A.norm
    assert (A @ A).norm.upper == pytest.approx(4.0)
    assert (A - A).is_zero()
    with pytest.raises(DimensionError):
        Operator(np.eye(3), sp)


def test_certificate_invariants():
    with pytest.raises(ValueError):
        NormCertificate(2.0, 1.0)
    with pytest.raises(ValueError):
        NormCertificate(1.0, 2.0, True)
    assert NormCertificate.from_bounds(1.0, 1.0 + 1e-14).exact


# ---------------------------------------------------------------------------
# ascent


def test_ascent_zero_operator():
    cert = estimate_norm_ascent(np.zeros((3, 3)), 4, 0, NormedSpace(3, 3))
    assert cert.lower == cert.upper == 0.0


def test_ascent_scalar_operator():
    cert = estimate_norm_ascent(3 * np.eye(3), 4, 7, NormedSpace(3, 3))
    assert cert.lower == pytest.approx(3.0, abs=1e-12)
    assert cert.upper == pytest.approx(3.0, abs=1e-12)
    assert cert.exact


def test_ascent_shear_p3_against_sphere_sampling():
    A = np.array([[1.0, 1.0], [0.0, 1.0]])
    cert = estimate_norm_ascent(A, 32, 1, NormedSpace(2, 3))
    assert 1.0 <= cert.lower <= 2.0
    assert cert.upper == pytest.approx(2.0, abs=1e-12)
    # dense sampling of 10^4 directions gives 1.6566252...
    assert cert.lower >= 1.65662528899 - 1e-9
    assert cert.lower <= cert.upper


def test_ascent_deterministic_and_monotone_in_starts():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((4, 4))
    sp = NormedSpace(4, 3.5)
    a = estimate_norm_ascent(A, 8, 42, sp)
    assert a == estimate_norm_ascent(A, 8, 42, sp)
    lows = [estimate_norm_ascent(A, k, 42, sp).lower for k in (1, 2, 4, 8, 16)]
    assert all(x <= y for x, y in zip(lows, lows[1:]))


@pytest.mark.parametrize("space", [NormedSpace(3, 3), NormedSpace(3, 1.5, (0.5, 2.0, 1.0)), NormedSpace(3, 4, (1, 2, 3))])
def test_certificate_soundness_against_sampling(space):
    rng = np.random.default_rng(9)
    for _ in range(10):
        A = rng.standard_normal((3, 3))
        cert = operator_norm(A, space)
        V = rng.standard_normal((3, 4000))
        ratios = [vector_norm(A @ v, space) / vector_norm(v, space) for v in V.T]
        assert max(ratios) <= cert.upper + 1e-12
        # ascent should do at least as well as crude sampling, up to a small resolution margin
        assert cert.lower >= max(ratios) * (1 - 1e-3)


def test_submultiplicativity():
    rng = np.random.default_rng(2)
    for space in SPACES:
        for _ in range(20):
            A, B = rng.standard_normal((2, 3, 3))
            assert operator_norm_upper(A @ B, space) <= operator_norm_upper(A, space) * operator_norm_upper(B, space) + 1e-9
