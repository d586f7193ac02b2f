"""Wannier bases from the projected cyclic position operator on a ring.

On a ring of ``L`` cells the position operator is replaced by the unitary
``X = diag(exp(2 pi i x / L))``.  Eigenvectors of ``P X P`` restricted to
the range of a band projector ``P`` are exponentially localized, and the
phases of their eigenvalues give the Wannier centers.

Two routes are provided.  :func:`wannierize` diagonalizes the dense
restricted operator directly.  :func:`wannierize_bands` works from Bloch
eigenvectors: in the Bloch basis ``P X P`` only couples ``k`` to
``k - 2 pi / L``, so its eigenproblem reduces to the ``n_b x n_b`` loop
product of neighbouring overlap matrices.  Only the home-cell eigenvectors
are propagated; all others follow by translation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lattice
from .distiller import DistillerBands
from .errors import EmptyBandGroupError, WannierizationError

MAX_CONDITION = 1e8
SPAN_TOL = 1e-8
NOISE_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class WannierBasis:
    """Orthonormal localized columns spanning one band group.

    ``centers`` are in cells (mod ``n_cells``); ``spreads`` are second
    moments in cells squared; ``decay_rate`` is the slowest fitted
    exponential tail rate over the columns (``inf`` for compact columns).
    """

    vectors: np.ndarray
    centers: np.ndarray
    spreads: np.ndarray
    decay_rate: float
    n_cells: int
    bands_per_cell: int

    @property
    def n_vectors(self):
        return self.vectors.shape[1]


def band_projector(bands: DistillerBands, group: str) -> np.ndarray:
    """Dense projector onto all Bloch states of one band group."""
    u = bands.group_vectors(group)
    if u.shape[2] == 0:
        raise EmptyBandGroupError(f"band group {group!r} is empty")
    return lattice.dense_from_bloch(u @ u.conj().transpose(0, 2, 1))


def _cell_weights(vectors, n_cells):
    n, cols = vectors.shape
    m = n // n_cells
    return (np.abs(vectors) ** 2).reshape(n_cells, m, cols).sum(axis=1)


def _centers(weights, n_cells):
    phase = np.exp(2j * np.pi * np.arange(n_cells) / n_cells)
    return (np.angle(phase @ weights) * n_cells / (2 * np.pi)) % n_cells


def _decay_rate(weights, centers, n_cells):
    """Least-squares tail rate of ln|w| against distance over the inner half ring."""
    x = np.arange(n_cells)
    rates = []
    for j in range(weights.shape[1]):
        mag = np.sqrt(weights[:, j])
        dist = np.abs(lattice.circular_distance(x, centers[j], n_cells))
        keep = (dist >= 1) & (dist <= n_cells / 4) & (mag > NOISE_FLOOR * mag.max())
        if keep.sum() < 3:
            rates.append(np.inf)
            continue
        slope = np.polyfit(dist[keep], np.log(mag[keep]), 1)[0]
        rates.append(max(-slope, 0.0))
    return float(min(rates)) if rates else np.inf


def _localization(vectors, n_cells):
    weights = _cell_weights(vectors, n_cells)
    centers = _centers(weights, n_cells)
    d = lattice.circular_distance(np.arange(n_cells)[:, None], centers[None, :], n_cells)
    spreads = (weights * d**2).sum(axis=0)
    return weights, centers, spreads


def _fix_phases(vectors):
    idx = np.argmax(np.abs(vectors), axis=0)
    top = vectors[idx, np.arange(vectors.shape[1])]
    return vectors * (np.abs(top) / top)[None, :]


def _lowdin(vectors):
    s = vectors.conj().T @ vectors
    ev, q = np.linalg.eigh(s)
    if ev.min() <= 0 or ev.max() / ev.min() > MAX_CONDITION:
        raise WannierizationError(
            f"orthonormalization ill-conditioned (overlap eigenvalues {ev.min():.2e}..{ev.max():.2e})"
        )
    return vectors @ (q * ev**-0.5) @ q.conj().T


def wannierize(P, positions, n_cells=None, *, tie_tol=1e-8) -> WannierBasis:
    """Dense route: diagonalize ``Q^dag X Q`` with ``Q`` an orthonormal basis of ``range(P)``.

    ``positions`` gives each mode's cell index.  Columns are sorted by
    center; centers closer than ``tie_tol`` are ordered by decreasing weight
    on the cell at position 0.
    """
    P = np.asarray(P)
    positions = np.asarray(positions, dtype=float)
    if n_cells is None:
        n_cells = int(round(positions.max())) + 1
    ev, vecs = np.linalg.eigh(P)
    if np.abs(ev - np.round(ev)).max() > 1e-8:
        raise WannierizationError("input is not a projector")
    q = vecs[:, ev > 0.5]
    if q.shape[1] == 0:
        raise EmptyBandGroupError("projector has rank 0")
    xc = np.exp(2j * np.pi * positions / n_cells)
    mu, c = np.linalg.eig(q.conj().T @ (xc[:, None] * q))
    w = q @ c
    w = w / np.linalg.norm(w, axis=0)
    centers = (np.angle(mu) * n_cells / (2 * np.pi)) % n_cells
    ref = (np.abs(w) ** 2)[np.isclose(positions % n_cells, 0)].sum(axis=0)
    # sort by center, ties broken by weight on the reference cell
    rounded = np.round(centers / tie_tol) * tie_tol
    order = np.lexsort((-ref, rounded))
    w = _fix_phases(_lowdin(w[:, order]))
    if np.abs(w @ w.conj().T - P).max() > SPAN_TOL:
        raise WannierizationError("Wannier columns do not span the band projector")
    weights, centers, spreads = _localization(w, n_cells)
    return WannierBasis(
        vectors=w,
        centers=centers,
        spreads=spreads,
        decay_rate=_decay_rate(weights, centers, n_cells),
        n_cells=n_cells,
        bands_per_cell=w.shape[1] // n_cells if w.shape[1] % n_cells == 0 else 0,
    )


def _home_window(fractional):
    """Shift fractional centers (in cells) into a window starting after their largest gap."""
    f = np.sort(fractional % 1.0)
    gaps = np.diff(np.concatenate([f, [f[0] + 1.0]]))
    i = int(np.argmax(gaps))
    cut = (f[i] + gaps[i] / 2) % 1.0
    # map into [cut - 1, cut) so the window is centred near the origin cell
    return (fractional - cut) % 1.0 + cut - 1.0


def wannierize_bands(u_k) -> WannierBasis:
    """Translation-covariant Wannier basis from band eigenvectors ``u_k``, shape ``(L, m, n_b)``.

    Column ``x0 * n_b + j`` is home function ``j`` translated by ``x0``
    cells; home functions are sorted by center.
    """
    u_k = np.asarray(u_k)
    L, m, nb = u_k.shape
    if nb == 0:
        raise EmptyBandGroupError("band group is empty")
    # P X P couples k_j to k_{j-1}:  mu c(k_j) = M_j c(k_{j-1}),  M_j = u(k_j)^dag u(k_{j-1})
    overlaps = u_k.conj().transpose(0, 2, 1) @ np.roll(u_k, 1, axis=0)
    loop = np.eye(nb, dtype=complex)
    for j in range(1, L):
        loop = overlaps[j] @ loop
    loop = overlaps[0] @ loop
    w_eig, c0 = np.linalg.eig(loop)
    if np.abs(w_eig).min() < np.finfo(float).tiny:
        raise WannierizationError("loop product is singular; band group not smooth")
    frac = _home_window(np.angle(w_eig) / (2 * np.pi))
    order = np.argsort(frac, kind="stable")
    frac, c0, w_eig = frac[order], c0[:, order], w_eig[order]
    mu = np.abs(w_eig) ** (1.0 / L) * np.exp(2j * np.pi * frac / L)

    coeff = np.empty((L, nb, nb), dtype=complex)
    coeff[0] = c0 / np.linalg.norm(c0, axis=0)
    for j in range(1, L):
        coeff[j] = overlaps[j] @ coeff[j - 1] / mu[None, :]
    # symmetric orthonormalization of all translates == S(k)^{-1/2} at each k
    s = coeff.conj().transpose(0, 2, 1) @ coeff
    ev, q = np.linalg.eigh(s)
    if ev.min() <= 0 or (ev.max(axis=1) / ev.min(axis=1)).max() > MAX_CONDITION:
        raise WannierizationError("Wannier orthonormalization ill-conditioned")
    coeff = coeff @ (q * ev[:, None, :] ** -0.5) @ q.conj().transpose(0, 2, 1)
    v_k = u_k @ coeff
    span = np.abs(v_k @ v_k.conj().transpose(0, 2, 1) - u_k @ u_k.conj().transpose(0, 2, 1)).max()
    if span > SPAN_TOL:
        raise WannierizationError(f"Wannier span deviates from band projector by {span:.2e}")

    home = np.fft.ifft(v_k, axis=0)  # w(x) = (1/L) sum_k e^{ikx} v(k)
    flat = _fix_phases(home.reshape(L * m, nb))
    home = flat.reshape(L, m, nb)
    # column block x0 holds home[(x - x0) mod L]
    vectors = lattice.circulant(home[(-np.arange(L)) % L])
    weights = _cell_weights(flat, L)
    centers = _centers(weights, L)
    d = lattice.circular_distance(np.arange(L)[:, None], centers[None, :], L)
    spreads = (weights * d**2).sum(axis=0)
    decay = _decay_rate(weights, centers, L)
    all_centers = (centers[None, :] + np.arange(L)[:, None]) % L
    return WannierBasis(
        vectors=vectors,
        centers=all_centers.ravel(),
        spreads=np.tile(spreads, L),
        decay_rate=decay,
        n_cells=L,
        bands_per_cell=nb,
    )
