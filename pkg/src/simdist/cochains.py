"""Cochain spaces with weighted inner products, differentials, and spectra.

A degree-k cochain is stored as a float vector aligned with the canonical
k-simplices of its complex; evaluation on an arbitrary ordered tuple picks up
the permutation sign. The inner product weights each canonical simplex by the
integer weight of the complex, which absorbs the (k+1)! orderings exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as sparse_linalg

from .complexes import (
    DegreeError,
    NotPureError,
    SimplicialComplex,
    sort_with_sign,
)

__all__ = [
    "Cochain",
    "SpectralError",
    "SpectralMismatchError",
    "SpectralResult",
    "UpperLaplacian",
    "adjoint_differential",
    "cohomology_dim",
    "differential",
    "differential_matrix",
    "exact_rank",
    "inner_product",
    "norm",
    "numerical_rank",
    "random_cochain",
    "spectrum",
    "upper_laplacian",
]

DENSE_EIGENSOLVE_LIMIT = 3000
EXACT_RANK_LIMIT = 2000
DEFAULT_TOLERANCE = 1e-8

# 31-bit primes: entries stay below p, so int64 products in the vectorized
# elimination cannot overflow.
_RANK_PRIMES = (2147483647, 2147483629)


class SpectralError(RuntimeError):
    """Eigensolver failure (never silently truncated)."""


class SpectralMismatchError(SpectralError):
    """Tolerance-based zero count disagrees with the exact kernel dimension."""


@dataclass
class Cochain:
    """Real-valued alternating function on the ordered k-simplices."""

    complex: SimplicialComplex
    k: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        expected = self.complex.simplex_count(self.k)
        if self.values.shape != (expected,):
            raise DegreeError(
                f"degree-{self.k} cochain needs {expected} values, "
                f"got shape {self.values.shape}"
            )

    @classmethod
    def zeros(cls, complex_: SimplicialComplex, k: int) -> "Cochain":
        return cls(complex_, k, np.zeros(complex_.simplex_count(k)))

    @classmethod
    def indicator(cls, complex_: SimplicialComplex, simplex) -> "Cochain":
        s = tuple(sorted(simplex))
        k = len(s) - 1
        values = np.zeros(complex_.simplex_count(k))
        values[complex_.index_of(s)] = 1.0
        return cls(complex_, k, values)

    def __call__(self, ordered_vertices) -> float:
        """Evaluate on an ordered tuple, with the permutation sign."""
        canonical, sign = sort_with_sign(ordered_vertices)
        if sign == 0:
            return 0.0
        return sign * float(self.values[self.complex.index_of(canonical)])

    def to_dict(self) -> dict:
        keys = (
            "->".join(str(v) for v in self.complex.to_labels(s))
            for s in self.complex.simplices(self.k)
        )
        return {"k": self.k, "values": dict(zip(keys, self.values.tolist()))}

    @classmethod
    def from_dict(cls, complex_: SimplicialComplex, data: dict) -> "Cochain":
        k = int(data["k"])
        values = np.zeros(complex_.simplex_count(k))
        for key, val in data["values"].items():
            s = complex_.from_labels(int(tok) for tok in key.split("->"))
            if len(s) - 1 != k:
                raise DegreeError(f"key {key!r} is not a {k}-simplex")
            values[complex_.index_of(s)] = float(val)
        return cls(complex_, k, values)


def differential_matrix(complex_: SimplicialComplex, k: int) -> sparse.csr_matrix:
    """Signed incidence matrix of d_k: rows (k+1)-simplices, columns k-simplices.

    Entries are exact integers. Valid on non-pure complexes too; k equal to
    the dimension gives the zero map (no rows).
    """
    if k < 0 or k > complex_.dim:
        raise DegreeError(f"degree {k} outside 0..{complex_.dim}")
    n_rows = complex_.simplex_count(k + 1)
    n_cols = complex_.simplex_count(k)
    if n_rows == 0:
        return sparse.csr_matrix((0, n_cols), dtype=np.int64)
    rows, cols, data = [], [], []
    index = {s: i for i, s in enumerate(complex_.simplices(k))}
    for j, s in enumerate(complex_.simplices(k + 1)):
        for i in range(k + 2):
            facet = s[:i] + s[i + 1:]
            rows.append(j)
            cols.append(index[facet])
            data.append(1 if i % 2 == 0 else -1)
    return sparse.csr_matrix(
        (np.array(data, dtype=np.int64), (rows, cols)),
        shape=(n_rows, n_cols),
    )


def differential(complex_: SimplicialComplex, phi: Cochain) -> Cochain:
    """Apply d_k: (d phi)(v_0..v_{k+1}) = sum_i (-1)^i phi(v_0..^v_i..v_{k+1})."""
    if phi.k >= complex_.dim:
        raise DegreeError(f"no degree-{phi.k + 1} cochains on a {complex_.dim}-complex")
    mat = differential_matrix(complex_, phi.k)
    return Cochain(complex_, phi.k + 1, mat @ phi.values)


def _weights_array(complex_: SimplicialComplex, k: int) -> np.ndarray:
    return np.asarray(complex_.weights_of_dim(k), dtype=float)


def inner_product(complex_: SimplicialComplex, phi: Cochain, psi: Cochain) -> float:
    """Weighted inner product: sum over canonical simplices of m * phi * psi."""
    if phi.k != psi.k:
        raise DegreeError(f"degree mismatch: {phi.k} vs {psi.k}")
    w = _weights_array(complex_, phi.k)
    return float(np.dot(w * phi.values, psi.values))


def norm(complex_: SimplicialComplex, phi: Cochain) -> float:
    return math.sqrt(max(inner_product(complex_, phi, phi), 0.0))


def adjoint_differential(complex_: SimplicialComplex, psi: Cochain) -> Cochain:
    """Adjoint of d_{k-1} with respect to the weighted inner products."""
    if psi.k < 1:
        raise DegreeError("adjoint differential needs degree >= 1")
    mat = differential_matrix(complex_, psi.k - 1)
    w_hi = _weights_array(complex_, psi.k)
    w_lo = _weights_array(complex_, psi.k - 1)
    return Cochain(complex_, psi.k - 1, (mat.T @ (w_hi * psi.values)) / w_lo)


@dataclass
class UpperLaplacian:
    """d_k* d_k, exposed through the symmetric conjugate W^{1/2} . W^{-1/2}.

    The symmetric matrix has the same spectrum as the operator itself.
    """

    complex: SimplicialComplex
    k: int
    boundary: sparse.csr_matrix  # exact integer d_k
    weights_k: np.ndarray
    weights_k1: np.ndarray
    symmetric: sparse.csr_matrix = field(repr=False)

    @property
    def dim(self) -> int:
        return self.boundary.shape[1]

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Apply the operator itself (not the symmetrized conjugate)."""
        return (self.boundary.T @ (self.weights_k1 * (self.boundary @ values))) / self.weights_k

    def dense(self) -> np.ndarray:
        return self.symmetric.toarray()


def upper_laplacian(complex_: SimplicialComplex, k: int) -> UpperLaplacian:
    if not complex_.is_pure:
        raise NotPureError("Laplacians are defined on pure complexes only")
    if k < 0 or k > complex_.dim - 1:
        raise DegreeError(f"degree {k} outside 0..{complex_.dim - 1}")
    mat = differential_matrix(complex_, k)
    w_k = _weights_array(complex_, k)
    w_k1 = _weights_array(complex_, k + 1)
    half = sparse.diags(1.0 / np.sqrt(w_k))
    sym = half @ mat.T.astype(float) @ sparse.diags(w_k1) @ mat.astype(float) @ half
    return UpperLaplacian(complex_, k, mat, w_k, w_k1, sparse.csr_matrix(sym))


@dataclass
class SpectralResult:
    """Eigenvalues of an upper Laplacian with a verified zero/nonzero split."""

    eigenvalues: np.ndarray
    zero_multiplicity: int
    lambda_min_nonzero: float | None
    tolerance: float
    dense: bool = True

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "zero_multiplicity": self.zero_multiplicity,
            "lambda_min_nonzero": self.lambda_min_nonzero,
            "tolerance": self.tolerance,
            "dense": self.dense,
        }


def spectrum(
    complex_: SimplicialComplex,
    k: int,
    tolerance: float = DEFAULT_TOLERANCE,
) -> SpectralResult:
    """All eigenvalues of the upper k-Laplacian (iterative gap above the dense limit).

    The tolerance-based zero count is cross-checked against the exact kernel
    dimension from integer rank; a mismatch raises SpectralMismatchError
    instead of reporting a spectral gap that may be a numerical artifact.
    """
    lap = upper_laplacian(complex_, k)
    n_k = lap.dim
    kernel_dim = n_k - exact_rank(lap.boundary)
    if n_k <= DENSE_EIGENSOLVE_LIMIT:
        try:
            eigenvalues = np.linalg.eigvalsh(lap.dense())
        except np.linalg.LinAlgError as exc:
            raise SpectralError(f"dense eigensolver failed: {exc}") from exc
        zero_multiplicity = int(np.sum(eigenvalues <= tolerance))
        if zero_multiplicity != kernel_dim:
            raise SpectralMismatchError(
                f"{zero_multiplicity} eigenvalues below {tolerance} but the "
                f"kernel of the degree-{k} coboundary has dimension {kernel_dim}"
            )
        nonzero = eigenvalues[eigenvalues > tolerance]
        lam = float(nonzero[0]) if nonzero.size else None
        return SpectralResult(eigenvalues, zero_multiplicity, lam, tolerance, True)

    # Iterative path: only the least nonzero eigenvalue, deflating the known
    # kernel (image of d_{k-1}, plus constants at k=0) by a spectral shift.
    basis = _kernel_image_basis(complex_, k, lap)
    if basis.shape[1] != kernel_dim:
        raise SpectralMismatchError(
            f"coboundary image spans {basis.shape[1]} of {kernel_dim} kernel "
            f"dimensions (nonzero cohomology); iterative gap solve unavailable"
        )
    shift = float(k + 3)  # above the spectral ceiling k+2

    def matvec(v):
        return lap.symmetric @ v + shift * (basis @ (basis.T @ v))

    op = sparse_linalg.LinearOperator((n_k, n_k), matvec=matvec)
    try:
        vals = sparse_linalg.eigsh(op, k=1, which="SA", return_eigenvectors=False)
    except sparse_linalg.ArpackNoConvergence as exc:
        raise SpectralError(f"iterative eigensolver did not converge: {exc}") from exc
    lam = float(vals[0])
    if lam <= tolerance:
        raise SpectralMismatchError(
            f"iterative gap {lam} is below tolerance {tolerance} after deflation"
        )
    return SpectralResult(np.array([lam]), kernel_dim, lam, tolerance, False)


def _kernel_image_basis(
    complex_: SimplicialComplex, k: int, lap: UpperLaplacian
) -> np.ndarray:
    """Orthonormal basis of the symmetrized image of d_{k-1} (constants at k=0)."""
    scale = np.sqrt(lap.weights_k)
    if k == 0:
        cols = scale.reshape(-1, 1)
    else:
        lower = differential_matrix(complex_, k - 1).toarray().astype(float)
        cols = scale[:, None] * lower
    q, r = np.linalg.qr(cols)
    keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, np.abs(r).max())
    return q[:, keep]


# -- exact and numerical rank -------------------------------------------------


def _as_int_array(matrix) -> np.ndarray:
    if sparse.issparse(matrix):
        arr = matrix.toarray()
    else:
        arr = np.asarray(matrix)
    out = np.asarray(arr, dtype=np.int64)
    if not np.array_equal(out, arr):
        raise ValueError("exact rank needs an integer matrix")
    return out


def _rank_mod_p(matrix: np.ndarray, p: int) -> int:
    a = np.mod(matrix, p)
    n_rows, n_cols = a.shape
    rank = 0
    for col in range(n_cols):
        pivots = np.nonzero(a[rank:, col])[0]
        if pivots.size == 0:
            continue
        pivot_row = rank + int(pivots[0])
        if pivot_row != rank:
            a[[rank, pivot_row]] = a[[pivot_row, rank]]
        inv = pow(int(a[rank, col]), p - 2, p)
        a[rank, col:] = (a[rank, col:] * inv) % p
        below = np.nonzero(a[rank + 1:, col])[0] + rank + 1
        if below.size:
            a[below, col:] = (
                a[below, col:] - np.outer(a[below, col], a[rank, col:])
            ) % p
        rank += 1
        if rank == n_rows:
            break
    return rank


def _rank_over_rationals(matrix: np.ndarray) -> int:
    rows = [[Fraction(int(x)) for x in row] for row in matrix]
    n_cols = matrix.shape[1]
    rank = 0
    for col in range(n_cols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [x * inv for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                factor = rows[i][col]
                rows[i] = [x - factor * y for x, y in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def exact_rank(matrix) -> int:
    """Rank of an integer matrix over the rationals.

    Elimination runs over two fixed 31-bit prime fields (each gives a lower
    bound on the rational rank); disagreement falls back to exact Fraction
    elimination. Both primes dividing a nonzero invariant factor at desk
    scale is the only way the fast path could be wrong.
    """
    a = _as_int_array(matrix)
    if min(a.shape) == 0:
        return 0
    r0 = _rank_mod_p(a, _RANK_PRIMES[0])
    r1 = _rank_mod_p(a, _RANK_PRIMES[1])
    if r0 == r1:
        return r0
    return _rank_over_rationals(a)


def numerical_rank(matrix, tolerance: float) -> int:
    if sparse.issparse(matrix):
        matrix = matrix.toarray()
    arr = np.asarray(matrix, dtype=float)
    if min(arr.shape) == 0:
        return 0
    singulars = np.linalg.svd(arr, compute_uv=False)
    return int(np.sum(singulars > tolerance))


def cohomology_dim(
    complex_: SimplicialComplex,
    k: int,
    tolerance: float = DEFAULT_TOLERANCE,
) -> int:
    """dim ker d_k - rank d_{k-1}, with the reduced convention at k=0.

    The reduced convention takes the degree -1 space to be the constants, so
    the degree-0 dimension counts connected components minus one. Rank is
    exact up to EXACT_RANK_LIMIT columns, numerical above.
    """
    if k < 0 or k > complex_.dim:
        raise DegreeError(f"degree {k} outside 0..{complex_.dim}")
    n_k = complex_.simplex_count(k)

    def _rank(mat):
        if n_k <= EXACT_RANK_LIMIT:
            return exact_rank(mat)
        return numerical_rank(mat, tolerance)

    rank_up = 0 if k == complex_.dim else _rank(differential_matrix(complex_, k))
    if k == 0:
        rank_down = 1 if complex_.num_vertices else 0
    else:
        rank_down = _rank(differential_matrix(complex_, k - 1))
    return (n_k - rank_up) - rank_down


def random_cochain(
    complex_: SimplicialComplex, k: int, rng: np.random.Generator
) -> Cochain:
    return Cochain(complex_, k, rng.standard_normal(complex_.simplex_count(k)))
