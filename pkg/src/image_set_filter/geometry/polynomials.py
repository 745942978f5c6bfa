"""
Polynomials in the monomial basis.

Coefficient vectors are indexed by a graded-lexicographic monomial basis:
all monomials of total degree <= sigma, ordered by degree and, within a
degree, lexicographically with x1 > x2 > ... . A basis of degree k is a prefix
of every basis of higher degree in the same dimension.
"""

import itertools
from dataclasses import dataclass, field
from functools import cache
from math import comb

import numpy as np

from .box import Box


@cache
def monomial_exponents(n: int, degree: int) -> tuple[tuple[int, ...], ...]:
    """Exponent tuples of all monomials of degree <= degree in graded-lex order."""
    if n < 1 or degree < 0:
        raise ValueError(f"Invalid monomial basis request n={n}, degree={degree}")
    exponents = []
    for total in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(n), total):
            e = [0] * n
            for j in combo:
                e[j] += 1
            exponents.append(tuple(e))
    return tuple(exponents)


def basis_size(n: int, degree: int) -> int:
    """Number of monomials of degree <= degree in n variables."""
    return comb(n + degree, n)


def half_degree_for_size(n: int, size: int) -> int:
    """Inverse of basis_size: the degree whose basis has the given length."""
    k = 0
    while basis_size(n, k) < size:
        k += 1
    if basis_size(n, k) != size:
        raise ValueError(f"No monomial basis in {n} variables has {size} elements")
    return k


@dataclass(frozen=True)
class MonomialBasis:
    """Graded-lexicographic monomial basis of degree <= degree in n variables."""

    n: int
    degree: int
    exponents: np.ndarray = field(init=False, repr=False, compare=False)
    _index: dict[tuple[int, ...], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        exps = monomial_exponents(self.n, self.degree)
        arr = np.array(exps, dtype=np.int64).reshape(len(exps), self.n)
        arr.flags.writeable = False
        object.__setattr__(self, "exponents", arr)
        object.__setattr__(self, "_index", {e: i for i, e in enumerate(exps)})

    def __len__(self) -> int:
        return int(self.exponents.shape[0])

    def index(self, exponent: tuple[int, ...]) -> int:
        return self._index[tuple(int(v) for v in exponent)]

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Monomial values at points: an (N, len) matrix."""
        pts = np.asarray(points, dtype=float)
        return np.prod(pts[:, None, :] ** self.exponents[None, :, :], axis=2)

    def labels(self) -> list[str]:
        """Readable monomial names, e.g. "x1^2*x2"."""
        names = []
        for e in self.exponents:
            factors = [
                f"x{j + 1}" if k == 1 else f"x{j + 1}^{k}"
                for j, k in enumerate(e)
                if k > 0
            ]
            names.append("*".join(factors) if factors else "1")
        return names


def box_moments(box: Box, degree: int) -> np.ndarray:
    """
    Integrals of every basis monomial over a box.

    The integral of prod_j x_j^k_j over the box is
    prod_j (u_j^(k_j+1) - l_j^(k_j+1)) / (k_j + 1).

    Args:
        box: Integration domain
        degree: Basis degree

    Returns:
        Moment vector aligned with MonomialBasis(box.dimension, degree)
    """
    basis = MonomialBasis(box.dimension, degree)
    k = basis.exponents + 1
    factors = (box.upper[None, :] ** k - box.lower[None, :] ** k) / k
    return np.prod(factors, axis=1)


def substitution_matrix(
    basis: MonomialBasis, scale: np.ndarray, shift: np.ndarray
) -> np.ndarray:
    """
    Matrix M with basis(scale * x + shift) = M @ basis(x).

    Each monomial of the affinely mapped variables is expanded binomially, one
    coordinate at a time.
    """
    size = len(basis)
    matrix = np.zeros((size, size))
    for row, exponent in enumerate(basis.exponents):
        per_coordinate = [
            [
                (t, comb(int(k), t) * scale[j] ** t * shift[j] ** (int(k) - t))
                for t in range(int(k) + 1)
            ]
            for j, k in enumerate(exponent)
        ]
        for choice in itertools.product(*per_coordinate):
            target = tuple(t for t, _ in choice)
            coefficient = float(np.prod([c for _, c in choice]))
            matrix[row, basis.index(target)] += coefficient
    return matrix


def gram_polynomial(
    gram: np.ndarray, half_basis: MonomialBasis, target: MonomialBasis
) -> np.ndarray:
    """Coefficients of basis(x)^T Q basis(x) expressed in the target basis."""
    coefficients = np.zeros(len(target))
    exps = half_basis.exponents
    for a in range(len(half_basis)):
        for b in range(len(half_basis)):
            coefficients[target.index(tuple(exps[a] + exps[b]))] += gram[a, b]
    return coefficients


def multiply_affine(
    coefficients: np.ndarray,
    basis: MonomialBasis,
    coordinate: int,
    constant: float,
    slope: float,
) -> np.ndarray:
    """
    Multiply a polynomial by (constant + slope * x_coordinate).

    The result is expressed in the same basis; the caller guarantees the
    product degree fits.
    """
    result = constant * np.asarray(coefficients, dtype=float)
    for i, e in enumerate(basis.exponents):
        if coefficients[i] == 0.0:
            continue
        shifted = e.copy()
        shifted[coordinate] += 1
        result[basis.index(tuple(shifted))] += slope * coefficients[i]
    return result


def box_faces(box: Box) -> list[tuple[int, float, float]]:
    """
    Affine face polynomials of a box as (coordinate, constant, slope).

    Faces are ordered by coordinate, upper face u_j - x_j first, then the
    lower face x_j - l_j.
    """
    faces = []
    for j in range(box.dimension):
        faces.append((j, float(box.upper[j]), -1.0))
        faces.append((j, float(-box.lower[j]), 1.0))
    return faces


def putinar_polynomial(
    box: Box, r0_gram: np.ndarray, face_grams: tuple[np.ndarray, ...]
) -> tuple[MonomialBasis, np.ndarray]:
    """
    Expand r0 + sum_i r_i b_i from its Gram matrices.

    Args:
        box: Box whose faces b_i multiply the face multipliers
        r0_gram: Gram matrix of the free SOS term
        face_grams: Gram matrices of the face multipliers (empty, or one per face)

    Returns:
        Tuple of the basis the expansion lives in and its coefficient vector
    """
    n = box.dimension
    k0 = half_degree_for_size(n, r0_gram.shape[0])
    degree = 2 * k0
    k1 = -1
    if face_grams:
        k1 = half_degree_for_size(n, face_grams[0].shape[0])
        degree = max(degree, 2 * k1 + 1)
    target = MonomialBasis(n, degree)
    coefficients = gram_polynomial(r0_gram, MonomialBasis(n, k0), target)
    if face_grams:
        half = MonomialBasis(n, k1)
        for (j, constant, slope), gram in zip(box_faces(box), face_grams, strict=True):
            r = gram_polynomial(gram, half, target)
            coefficients += multiply_affine(r, target, j, constant, slope)
    return target, coefficients
