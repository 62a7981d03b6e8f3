"""
Frames, symmetric eigendecomposition and subspace angles.

A frame is a d x k array with orthonormal columns. Frames are passed around
as plain numpy arrays; `is_frame` checks the invariant.
"""

from typing import NamedTuple, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.stats import ortho_group

from recon.errors import DomainError, NumericError, RankDeficient

FRAME_TOL = 1e-10


class SymmetricSpectrum(NamedTuple):
    """Eigenvalues in ascending order and the matching eigenvector columns."""
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def is_frame(F: np.ndarray, tol: float = FRAME_TOL) -> bool:
    """True if F has orthonormal columns within `tol` (max abs deviation of FᵗF from I)."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[1] > F.shape[0] or F.shape[1] == 0:
        return False
    gram = F.T @ F
    return bool(np.max(np.abs(gram - np.eye(F.shape[1]))) <= tol)


def _fix_signs(V: np.ndarray) -> np.ndarray:
    # largest-magnitude entry of each column positive; argmax takes the lowest index on ties
    pivots = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[pivots, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def sym_eig(C: np.ndarray) -> SymmetricSpectrum:
    """
    Eigendecomposition of a symmetric matrix.

    The input is symmetrized as (C + Cᵗ)/2 first. Eigenvalues come back in
    ascending order and every eigenvector is signed so that its
    largest-magnitude entry is positive, which makes the output a
    deterministic function of C.

    Raises:
        NumericError: C has non-finite entries.
    """
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise NumericError("matrix has non-finite entries")

    S = 0.5 * (C + C.T)
    eigenvalues, eigenvectors = np.linalg.eigh(S)
    return SymmetricSpectrum(eigenvalues, _fix_signs(eigenvectors))


def _as_columns(F) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    return F.reshape(-1, 1) if F.ndim == 1 else F


def subspace_angle(U: np.ndarray, V: np.ndarray) -> float:
    """
    Angle between col U and col V, measured from the smaller subspace.

    Computed as arcsin of the largest singular value of (I - VVᵗ)U, i.e. the
    largest angle any vector of col U makes with col V.

    Args:
        U: d x k1 frame
        V: d x k2 frame with k1 <= k2

    Returns:
        Angle in radians within [0, π/2]
    """
    U = _as_columns(U)
    V = _as_columns(V)
    if U.shape[0] != V.shape[0]:
        raise DomainError(f"ambient dimensions differ: {U.shape[0]} vs {V.shape[0]}")
    if U.shape[1] > V.shape[1]:
        raise DomainError(f"first subspace is larger ({U.shape[1]} > {V.shape[1]} columns)")

    residual = U - V @ (V.T @ U)
    sigma = np.linalg.norm(residual, ord=2)
    return float(np.arcsin(np.clip(sigma, 0.0, 1.0)))


def orthonormalize(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """
    Modified Gram-Schmidt on a list of d-vectors.

    Returns:
        d x k frame spanning the same space as the inputs

    Raises:
        RankDeficient: a vector's residual falls below 1e-10 of its norm
    """
    columns = [np.asarray(v, dtype=float).ravel() for v in vectors]
    if not columns:
        raise DomainError("no vectors given")

    basis = []
    for v in columns:
        scale = np.linalg.norm(v)
        w = v.copy()
        for q in basis:
            w -= (q @ w) * q
        residual = np.linalg.norm(w)
        if scale == 0.0 or residual < 1e-10 * scale:
            raise RankDeficient(f"vector {len(basis)} is linearly dependent on the previous ones")
        basis.append(w / residual)

    return np.column_stack(basis)


def complement_frame(F: np.ndarray) -> np.ndarray:
    """Frame spanning the orthogonal complement of col F."""
    F = np.asarray(F, dtype=float)
    return _fix_signs(null_space(F.T))


def random_rotation(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-distributed orthogonal d x d matrix."""
    return ortho_group.rvs(d, random_state=rng)
