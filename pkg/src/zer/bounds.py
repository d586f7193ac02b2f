"""Upper bound on the frozen|courier entanglement from the local thresholds.

The local frozen modes of all translated regions are aggregated into one
(generally non-orthogonal) column set ``phi``.  If ``phi = U s W^dag`` then
the orthonormal modes ``U`` have occupations at most ``eps / min s^2``, and
concavity of the binary entropy turns that into an entropy bound.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from . import lattice
from .distiller import EMPTY, FILLED, LocalDistillation
from .errors import EmptyBandGroupError
from .gaussian import DELTA_CLIP

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class BoundReport:
    """Entanglement bound of one RG step, all entropies in nats.

    ``bound_*`` use the tightened thresholds (largest actual occupation of a
    frozen local mode); ``raw_bound_total`` uses the configured epsilon.
    ``applicable`` is false when ``eps / min lambda^2 > 1/2`` for a group,
    where the monotonicity step of the argument breaks down.
    """

    n_cells: int
    z_e: int
    z_f: int
    lambda_min_sq: float
    mu_min_sq: float
    eps_e: float
    eps_f: float
    bound_e: float
    bound_f: float
    bound_total: float
    raw_bound_total: float
    S_courier_measured: float
    applicable: bool

    @property
    def bound_per_cell(self):
        return self.bound_total / self.n_cells

    @property
    def entropy_per_cell(self):
        return self.S_courier_measured / self.n_cells

    @property
    def holds(self):
        return self.S_courier_measured <= self.bound_total

    def as_dict(self):
        return asdict(self)


def _entropy(x):
    """Binary entropy without the frozen-mode clipping used for measured spectra."""
    x = float(x)
    return 0.0 if x <= 0 else -(x * np.log(x) + (1 - x) * np.log1p(-x))


def _group_vectors(local: LocalDistillation, group):
    if group == EMPTY:
        return local.empty_vectors
    if group == FILLED:
        return local.filled_vectors
    raise ValueError(f"group must be {EMPTY!r} or {FILLED!r}, got {group!r}")


def aggregate_local_modes(local: LocalDistillation, n_cells: int, group: str) -> np.ndarray:
    """Dense ``phi`` whose column block ``x`` is the group's local modes moved by ``x`` cells."""
    vecs = _group_vectors(local, group)
    z = vecs.shape[1]
    if z == 0:
        raise EmptyBandGroupError(f"no local {group} modes")
    m, w = local.orbitals_per_cell, local.width_cells
    if w > n_cells:
        raise ValueError("region wider than the ring")
    phi = np.zeros((n_cells * m, n_cells * z), dtype=complex)
    cells = vecs.reshape(w, m, z)
    for x in range(n_cells):
        for a in range(w):
            c = (x + a) % n_cells
            phi[c * m:(c + 1) * m, x * z:(x + 1) * z] += cells[a]
    return phi


def orthonormalize_modes(phi: np.ndarray, rtol=RANK_RTOL):
    """``(U_r, s_r)``: left singular vectors and values of ``phi`` above ``rtol * s_max``."""
    u, s, _ = np.linalg.svd(phi, full_matrices=False)
    keep = s > rtol * s.max() if s.size else s.astype(bool)
    return u[:, keep], s[keep]


def local_mode_spectrum(local: LocalDistillation, n_cells: int, group: str) -> np.ndarray:
    """Squared singular values of ``phi`` resolved by momentum, shape ``(L, z)``, descending.

    ``phi^dag phi`` is block circulant, so its eigenvalues are those of
    ``E(k)^dag E(k)`` with ``E(k) = sum_a exp(-i k a) e_a`` and ``e_a`` the
    cell-``a`` block of the local modes.
    """
    vecs = _group_vectors(local, group)
    z = vecs.shape[1]
    if z == 0:
        raise EmptyBandGroupError(f"no local {group} modes")
    w, m = local.width_cells, local.orbitals_per_cell
    ks = lattice.momenta(n_cells)
    phases = np.exp(-1j * np.outer(ks, np.arange(w)))
    ek = np.einsum("ka,aij->kij", phases, vecs.reshape(w, m, z))
    gram = ek.conj().transpose(0, 2, 1) @ ek
    return np.linalg.eigvalsh(gram)[:, ::-1]


def _min_sq(spectrum, keep):
    """Smallest retained squared singular value.

    ``keep`` is the number of distilled bands of the group; ``None`` drops
    only numerically vanishing values.
    """
    if keep is None:
        flat = spectrum.ravel()
        return float(flat[flat > RANK_RTOL * flat.max()].min())
    return float(spectrum[:, :keep].min())


def entanglement_bound(local: LocalDistillation, n_cells: int, *, keep_e=None, keep_f=None,
                       courier_entropy=0.0) -> BoundReport:
    """Bound ``S_courier <= z_e L S(eps_e / lambda^2) + z_f L S(eps_f / mu^2)``.

    ``keep_e`` and ``keep_f`` are the numbers of empty and filled bands that
    were actually distilled (zero switches the group off).
    """
    L = n_cells
    out = {}
    applicable = True
    raw_total = 0.0
    for group, keep, occ in (
        (EMPTY, keep_e, local.empty_occupations),
        (FILLED, keep_f, 1 - local.filled_occupations),
    ):
        z = _group_vectors(local, group).shape[1]
        if z == 0 or keep == 0:
            out[group] = (np.nan, 0.0, 0.0)
            continue
        lam2 = _min_sq(local_mode_spectrum(local, L, group), keep)
        eps_t = max(float(np.max(occ)), DELTA_CLIP)
        ratio = eps_t / lam2 if lam2 > 0 else np.inf
        raw_ratio = local.epsilon / lam2 if lam2 > 0 else np.inf
        if ratio > 0.5 or not np.isfinite(ratio):
            applicable = False
        value = z * L * _entropy(min(ratio, 0.5))
        raw_total += z * L * _entropy(min(raw_ratio, 0.5))
        out[group] = (lam2, eps_t, value)
    lam2, eps_e, b_e = out[EMPTY]
    mu2, eps_f, b_f = out[FILLED]
    return BoundReport(
        n_cells=L,
        z_e=local.z_empty,
        z_f=local.z_filled,
        lambda_min_sq=lam2,
        mu_min_sq=mu2,
        eps_e=eps_e,
        eps_f=eps_f,
        bound_e=b_e,
        bound_f=b_f,
        bound_total=b_e + b_f,
        raw_bound_total=raw_total,
        S_courier_measured=float(courier_entropy),
        applicable=applicable,
    )
