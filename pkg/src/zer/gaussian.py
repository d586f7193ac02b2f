"""Correlation-matrix toolkit: restrictions, entanglement spectra and rotations."""

import numpy as np

from .errors import NonUnitaryError, SingularEntanglementError
from .model import CorrelationMatrix

DELTA_CLIP = 1e-12
ENTROPY_FLOOR = 1e-15
UNITARY_TOL = 1e-10


def restrict(C: CorrelationMatrix, modes) -> CorrelationMatrix:
    """Principal submatrix on ``modes``, labels inherited."""
    modes = np.asarray(modes, dtype=int).ravel()
    if modes.size == 0:
        raise ValueError("empty mode set")
    if modes.min() < 0 or modes.max() >= C.n_modes:
        raise ValueError(f"mode index out of range for {C.n_modes} modes")
    if np.unique(modes).size != modes.size:
        raise ValueError("mode indices must be distinct")
    sub = C.data[np.ix_(modes, modes)]
    return CorrelationMatrix(sub, C.labels[modes], C.lattice_constant_exponent)


def entanglement_spectrum(C: CorrelationMatrix) -> np.ndarray:
    """Eigenvalues ``xi`` of a (restricted) correlation matrix, descending, clipped to [0, 1]."""
    xi = np.linalg.eigvalsh(C.data)
    return np.clip(xi, 0.0, 1.0)[::-1]


def binary_entropy(xi):
    """Elementwise ``-xi ln xi - (1-xi) ln(1-xi)``; frozen values contribute exactly 0."""
    xi = np.clip(np.asarray(xi, dtype=float), 0.0, 1.0)
    frozen = (xi <= DELTA_CLIP) | (xi >= 1 - DELTA_CLIP)
    x = np.where(frozen, 0.5, xi)
    s = -(x * np.log(x) + (1 - x) * np.log1p(-x))
    s = np.where(frozen | (s < ENTROPY_FLOOR), 0.0, s)
    return s if s.ndim else float(s)


def entanglement_entropy(xi) -> float:
    """von Neumann entropy (nats) of a Gaussian state with occupations ``xi``."""
    return float(np.sum(binary_entropy(xi)))


def region_entropy(C: CorrelationMatrix, modes=None) -> float:
    sub = C if modes is None else restrict(C, modes)
    return entanglement_entropy(entanglement_spectrum(sub))


def entanglement_hamiltonian(C_R: CorrelationMatrix) -> np.ndarray:
    """Single-particle entanglement Hamiltonian ``(ln((1 - C_R) / C_R))^T``."""
    xi, v = np.linalg.eigh(C_R.data)
    bad = np.flatnonzero((xi <= DELTA_CLIP) | (xi >= 1 - DELTA_CLIP))
    if bad.size:
        raise SingularEntanglementError(
            f"modes {bad.tolist()} have occupation 0 or 1 (infinite entanglement energy)",
            bad.tolist(),
        )
    energies = np.log((1 - xi) / xi)
    return ((v * energies) @ v.conj().T).T


def occupations_from_entanglement_hamiltonian(h: np.ndarray) -> np.ndarray:
    """Inverse map ``C_R = (1 / (1 + exp(h^T)))``, returned in correlation convention."""
    e, v = np.linalg.eigh(h.T)
    return (v * (1 / (1 + np.exp(e)))) @ v.conj().T


def check_unitary(u, tol=UNITARY_TOL):
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise NonUnitaryError(f"expected a square matrix, got shape {u.shape}")
    err = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() if u.size else 0.0
    if err > tol:
        raise NonUnitaryError(f"matrix is not unitary (max |u^dag u - 1| = {err:.2e})")
    return float(err)


def rotate(C: CorrelationMatrix, u, labels=None, *, tol=UNITARY_TOL) -> CorrelationMatrix:
    """Basis change ``C'^T = u^dag C^T u``: column ``j`` of ``u`` becomes mode ``j``."""
    u = np.asarray(u)
    if u.shape[0] != C.n_modes:
        raise NonUnitaryError(f"dimension mismatch: {u.shape} vs {C.n_modes} modes")
    check_unitary(u, tol)
    density = u.conj().T @ C.density @ u
    density = (density + density.conj().T) / 2
    return CorrelationMatrix(
        density.T.copy(),
        C.labels if labels is None else labels,
        C.lattice_constant_exponent,
    )


def mode_occupations(C: CorrelationMatrix, vectors) -> np.ndarray:
    """``<f_j^dag f_j>`` for the (not necessarily orthogonal) mode columns of ``vectors``."""
    vectors = np.asarray(vectors)
    return np.einsum("ij,ik,kj->j", vectors.conj(), C.density, vectors).real
