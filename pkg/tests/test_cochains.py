import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from simdist.cochains import (
    Cochain,
    adjoint_differential,
    cohomology_dim,
    differential,
    differential_matrix,
    exact_rank,
    inner_product,
    norm,
    numerical_rank,
    random_cochain,
    spectrum,
    upper_laplacian,
)
from simdist.complexes import DegreeError, NotPureError, build_complex, complete_complex
from simdist.random_complexes import LmParams, linial_meshulam


def _rng(seed=0):
    return np.random.Generator(np.random.Philox(key=seed))


def test_differential_indicator_on_edge():
    x = build_complex([(0, 1)])
    phi = Cochain.indicator(x, (0,))
    d_phi = differential(x, phi)
    assert d_phi((0, 1)) == -1.0  # phi(1) - phi(0)


def test_differential_of_constant_vanishes():
    x = complete_complex(5, 1)
    phi = Cochain(x, 0, np.full(5, 3.25))
    assert np.allclose(differential(x, phi).values, 0.0)


def test_dd_zero_exactly():
    complexes = [
        complete_complex(6, 2),
        build_complex([(0, 1, 2, 3), (1, 2, 3, 4), (0, 2, 4, 5)]),
        linial_meshulam(LmParams(9, 0.6, 2, seed=5)),
    ]
    for x in complexes:
        for k in range(x.dim - 1):
            product = differential_matrix(x, k + 1) @ differential_matrix(x, k)
            assert product.nnz == 0 or np.all(product.data == 0)


def test_cochain_evaluation_signs():
    x = build_complex([(0, 1, 2)])
    phi = Cochain.indicator(x, (0, 1))
    assert phi((0, 1)) == 1.0
    assert phi((1, 0)) == -1.0
    assert phi((0, 0)) == 0.0


def test_inner_product_k2_indicator():
    x = complete_complex(2, 1)
    phi = Cochain.indicator(x, (0,))
    assert inner_product(x, phi, phi) == 1.0  # vertex weight is 1 in K_2


def test_inner_product_disjoint_supports():
    x = complete_complex(6, 1)
    phi = Cochain.indicator(x, (0,))
    psi = Cochain.indicator(x, (3,))
    assert inner_product(x, phi, psi) == 0.0


def test_inner_product_degree_mismatch():
    x = complete_complex(4, 2)
    with pytest.raises(DegreeError):
        inner_product(x, Cochain.zeros(x, 0), Cochain.zeros(x, 1))


def test_inner_product_rejects_non_pure():
    x = build_complex([(0, 1, 2), (2, 3)])
    with pytest.raises(NotPureError):
        inner_product(x, Cochain.zeros(x, 0), Cochain.zeros(x, 0))


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32))
def test_positive_definiteness(seed):
    x = complete_complex(5, 2)
    phi = random_cochain(x, 1, _rng(seed))
    value = inner_product(x, phi, phi)
    assert value >= 0.0
    assert (value == 0.0) == bool(np.all(phi.values == 0.0))


def test_k2_spectrum():
    result = spectrum(complete_complex(2, 1), 0)
    assert np.allclose(result.eigenvalues, [0.0, 2.0], atol=1e-12)
    assert result.zero_multiplicity == 1
    assert result.lambda_min_nonzero == pytest.approx(2.0, abs=1e-12)


def test_k3_spectrum():
    result = spectrum(complete_complex(3, 1), 0)
    assert np.allclose(result.eigenvalues, [0.0, 1.5, 1.5], atol=1e-12)


def test_complete_graph_spectrum_pattern():
    for n in (4, 7, 10):
        result = spectrum(complete_complex(n, 1), 0)
        expected = np.concatenate([[0.0], np.full(n - 1, n / (n - 1))])
        assert np.allclose(result.eigenvalues, expected, atol=1e-9)


def test_complete_two_complex_regression():
    # all nonzero eigenvalues coincide; value frozen from the dense solve
    result = spectrum(complete_complex(5, 2), 1)
    nonzero = result.eigenvalues[result.eigenvalues > result.tolerance]
    assert np.allclose(nonzero, nonzero[0], atol=1e-9)
    assert nonzero[0] == pytest.approx(5.0 / 3.0, abs=1e-9)
    assert result.zero_multiplicity == 4


def test_disconnected_graph_zero_multiplicity():
    x = build_complex([(0, 1), (2, 3)])
    result = spectrum(x, 0)
    assert result.zero_multiplicity == 2


def test_tolerance_mismatch_is_hard_error():
    from simdist.cochains import SpectralMismatchError

    # a tolerance above the gap misclassifies eigenvalues; the exact kernel
    # cross-check refuses to report such a spectrum
    with pytest.raises(SpectralMismatchError):
        spectrum(complete_complex(2, 1), 0, tolerance=3.0)


def test_iterative_gap_matches_dense(monkeypatch):
    import simdist.cochains as cochains_module

    samples = [
        (complete_complex(8, 1), 0),
        (linial_meshulam(LmParams(9, 0.9, 1, seed=6)), 1),
    ]
    dense = [spectrum(x, k).lambda_min_nonzero for x, k in samples]
    monkeypatch.setattr(cochains_module, "DENSE_EIGENSOLVE_LIMIT", 1)
    for (x, k), reference in zip(samples, dense):
        result = spectrum(x, k)
        assert not result.dense
        assert result.lambda_min_nonzero == pytest.approx(reference, rel=1e-6)


def test_spectrum_eigenvalue_range():
    samples = [
        (complete_complex(6, 2), 0),
        (complete_complex(6, 2), 1),
        (linial_meshulam(LmParams(8, 0.9, 1, seed=3)), 1),
        (linial_meshulam(LmParams(10, 0.8, 0, seed=4)), 0),
    ]
    for x, k in samples:
        if not x.is_pure:
            continue
        result = spectrum(x, k)
        assert result.eigenvalues[0] >= -1e-9
        assert result.eigenvalues[-1] <= k + 2 + 1e-9


def test_adjointness_and_rayleigh():
    x = linial_meshulam(LmParams(9, 0.85, 1, seed=11))
    assert x.is_pure
    lap = upper_laplacian(x, 1)
    rng = _rng(2)
    for _ in range(20):
        phi = random_cochain(x, 1, rng)
        psi = random_cochain(x, 2, rng)
        lhs = inner_product(x, differential(x, phi), psi)
        rhs = inner_product(x, phi, adjoint_differential(x, psi))
        assert abs(lhs - rhs) <= 1e-10 * (norm(x, phi) * norm(x, psi) + 1.0)
        d_phi = differential(x, phi)
        energy = inner_product(x, d_phi, d_phi)
        rayleigh = float(np.dot(lap.weights_k * lap.apply(phi.values), phi.values))
        assert abs(energy - rayleigh) <= 1e-9 * (abs(energy) + 1.0)


def test_laplacian_psd():
    for x, k in [(complete_complex(6, 2), 1), (complete_complex(7, 1), 0)]:
        eigs = np.linalg.eigvalsh(upper_laplacian(x, k).dense())
        assert eigs.min() >= -1e-9


# -- rank and cohomology -------------------------------------------------------


def _fraction_rank(matrix):
    rows = [[Fraction(int(v)) for v in row] for row in np.atleast_2d(matrix)]
    rank = 0
    n_cols = len(rows[0]) if rows else 0
    for col in range(n_cols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = Fraction(1) / rows[rank][col]
        rows[rank] = [v * inv for v in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 6), st.integers(1, 6))
def test_exact_rank_matches_fraction_oracle(seed, rows, cols):
    rng = _rng(seed)
    matrix = rng.integers(-4, 5, size=(rows, cols))
    assert exact_rank(matrix) == _fraction_rank(matrix)


def test_exact_rank_on_boundary_matrices():
    x = complete_complex(7, 2)
    mat = differential_matrix(x, 1)
    assert exact_rank(mat) == _fraction_rank(mat.toarray())
    assert numerical_rank(mat, 1e-10) == exact_rank(mat)


def test_cohomology_complete_complex_vanishes():
    x = complete_complex(6, 3)
    for k in range(1, 3):
        assert cohomology_dim(x, k) == 0


def test_cohomology_reduced_degree_zero():
    cycle = build_complex([(0, 1), (1, 2), (0, 2)])
    assert cohomology_dim(cycle, 0) == 0  # connected
    two = build_complex([(0, 1, 2), (3, 4, 5)])
    assert cohomology_dim(two, 0) == 1  # two components


def test_cohomology_circle_has_loop():
    cycle = build_complex([(0, 1), (1, 2), (0, 2)])
    assert cohomology_dim(cycle, 1) == 1


def test_cohomology_matches_rank_oracle():
    x = linial_meshulam(LmParams(8, 0.5, 1, seed=9))
    mat_up = differential_matrix(x, 1).toarray()
    ker = mat_up.shape[1] - _fraction_rank(mat_up)
    img = _fraction_rank(differential_matrix(x, 0).toarray())
    assert cohomology_dim(x, 1) == ker - img


def test_cochain_json_roundtrip():
    x = build_complex([(0, 1, 2)])
    phi = Cochain(x, 1, np.array([0.5, -1.25, 3.0]))
    data = phi.to_dict()
    assert data["values"]["0->1"] == 0.5
    psi = Cochain.from_dict(x, data)
    assert np.array_equal(phi.values, psi.values)


def test_degree_bounds():
    x = build_complex([(0, 1, 2)])
    with pytest.raises(DegreeError):
        differential(x, Cochain.zeros(x, 2))
    with pytest.raises(DegreeError):
        upper_laplacian(x, 2)
    with pytest.raises(DegreeError):
        cohomology_dim(x, 3)
