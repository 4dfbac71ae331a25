"""Hermitian kernels shared by the estimators and the beamformer."""

import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import scipy.linalg

from asn_rtf.exceptions import DefinitenessError, EigenSolverError, NotHermitianError
from asn_rtf.models.layout import NodeLayout, block_spans

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
RESIDUAL_TOL = 1e-10
DEFINITENESS_TOL = 1e-12


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray


def as_hermitian(matrix: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Symmetrize a (numerically) Hermitian matrix, reject anything else."""
    a = np.asarray(matrix, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotHermitianError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NotHermitianError("matrix has non-finite entries")
    skew = np.linalg.norm(a - a.conj().T)
    if skew / max(1.0, np.linalg.norm(a)) > tol:
        raise NotHermitianError(f"matrix is not Hermitian (relative skew {skew:.3e})")
    return 0.5 * (a + a.conj().T)


def fix_phase(vector: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude entry (lowest index on ties) is real and >= 0."""
    pivot = int(np.argmax(np.abs(vector)))
    magnitude = np.abs(vector[pivot])
    if magnitude == 0:
        return vector
    rotated = vector * (np.conj(vector[pivot]) / magnitude)
    rotated[pivot] = magnitude
    return rotated


def principal_eigenpair(matrix: np.ndarray) -> EigenPair:
    a = as_hermitian(matrix)
    try:
        values, vectors = scipy.linalg.eigh(a, check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise EigenSolverError(f"Hermitian eigensolver failed: {e}") from e

    value = float(values[-1])
    vector = vectors[:, -1]
    vector = fix_phase(vector / np.linalg.norm(vector))

    residual = float(np.linalg.norm(a @ vector - value * vector))
    if residual > RESIDUAL_TOL * max(np.linalg.norm(a), np.finfo(float).tiny):
        raise EigenSolverError(f"eigenpair residual {residual:.3e} above tolerance", residual)
    return EigenPair(value=value, vector=vector)


def eigenvalues(matrix: np.ndarray) -> np.ndarray:
    """Ascending real spectrum."""
    return scipy.linalg.eigvalsh(as_hermitian(matrix), check_finite=False)


def load_diagonal(matrix: np.ndarray, delta: float) -> np.ndarray:
    dim = matrix.shape[0]
    return matrix + delta * np.real(np.trace(matrix)) / dim * np.eye(dim)


def cholesky(matrix: np.ndarray, node: Optional[int] = None) -> np.ndarray:
    """Lower-triangular L with A = L L^H and a real positive diagonal."""
    a = as_hermitian(matrix)
    dim = a.shape[0]
    where = "" if node is None else f" (node {node})"
    trace = float(np.real(np.trace(a)))
    if trace <= 0:
        raise DefinitenessError(f"matrix{where} has non-positive trace", node)
    try:
        lower = scipy.linalg.cholesky(a, lower=True, check_finite=False)
    except np.linalg.LinAlgError as e:
        raise DefinitenessError(f"matrix{where} is not positive definite: {e}", node) from e

    pivots = np.real(np.diag(lower)) ** 2
    if pivots.min() <= DEFINITENESS_TOL * trace / dim:
        raise DefinitenessError(f"matrix{where} is numerically singular (pivot {pivots.min():.3e})", node)
    return lower


def cholesky_with_loading(matrix: np.ndarray, loading: float, node: Optional[int] = None) -> np.ndarray:
    """Cholesky factor, retried once with diagonal loading if the first attempt fails."""
    try:
        return cholesky(matrix, node)
    except DefinitenessError:
        if loading <= 0:
            raise
        where = "" if node is None else f" of node {node}"
        logger.warning(f"Applying diagonal loading {loading:g} to covariance{where}")
        return cholesky(load_diagonal(as_hermitian(matrix), loading), node)


def hermitian_sqrt(matrix: np.ndarray) -> np.ndarray:
    """Principal square root A^{1/2} = U diag(sqrt(λ)) U^H of a positive definite matrix."""
    a = as_hermitian(matrix)
    values, vectors = scipy.linalg.eigh(a, check_finite=False)
    if values[0] <= DEFINITENESS_TOL * max(values.sum(), 0.0) / a.shape[0]:
        raise DefinitenessError("matrix is not positive definite")
    return (vectors * np.sqrt(values)) @ vectors.conj().T


def block_cholesky(rv: np.ndarray, layout: NodeLayout, loading: float = 0.0) -> List[np.ndarray]:
    """Cholesky factors of the node-wise diagonal blocks; off-diagonal blocks are ignored."""
    factors = []
    for node, (start, size) in enumerate(block_spans(layout)):
        block = rv[start:start + size, start:start + size]
        factors.append(cholesky_with_loading(block, loading, node))
    return factors


def block_sqrt(rv: np.ndarray, layout: NodeLayout, loading: float = 0.0) -> np.ndarray:
    return scipy.linalg.block_diag(*block_cholesky(rv, layout, loading))


def block_roots(rv: np.ndarray, layout: NodeLayout, loading: float = 0.0) -> Tuple[np.ndarray, np.ndarray]:
    """Block-diagonal (L, L^{-1}) built from a single factorization of every node block."""
    factors = block_cholesky(rv, layout, loading)
    return (scipy.linalg.block_diag(*factors),
            scipy.linalg.block_diag(*[lower_inverse(factor) for factor in factors]))


def lower_inverse(lower: np.ndarray) -> np.ndarray:
    identity = np.eye(lower.shape[0], dtype=np.complex128)
    return scipy.linalg.solve_triangular(lower, identity, lower=True, check_finite=False)


def block_inverse_sqrt(rv: np.ndarray, layout: NodeLayout, loading: float = 0.0) -> np.ndarray:
    """Block-diagonal matrix of the per-node inverse Cholesky factors L_n^{-1}."""
    return block_roots(rv, layout, loading)[1]
