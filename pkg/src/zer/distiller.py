"""Local and global distiller Hamiltonians and the frozen/courier band split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lattice
from .errors import TranslationInvarianceError
from .model import CorrelationMatrix

FILLED, COURIER, EMPTY = "filled", "courier", "empty"
DELTA_NULL = 1e-6
GAP_MIN = 0.1
TI_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class LocalDistillation:
    """Frozen eigenmodes of the correlation matrix restricted to one region.

    Vectors are columns over the region's modes, in the region's order.
    ``occupations`` holds every eigenvalue of the restricted density,
    ascending.
    """

    region: np.ndarray
    epsilon: float
    occupations: np.ndarray
    filled_vectors: np.ndarray
    empty_vectors: np.ndarray
    filled_occupations: np.ndarray
    empty_occupations: np.ndarray
    h_local: np.ndarray
    orbitals_per_cell: int = 1

    @property
    def z_filled(self):
        return self.filled_vectors.shape[1]

    @property
    def z_empty(self):
        return self.empty_vectors.shape[1]

    @property
    def width_cells(self):
        return len(self.region) // self.orbitals_per_cell

    @property
    def is_trivial(self):
        return self.z_filled + self.z_empty == 0


def reference_region(C: CorrelationMatrix, width_cells: int) -> np.ndarray:
    """Mode indices of cells ``0 .. width_cells-1``."""
    m = C.orbitals_per_cell
    if width_cells > C.cells:
        raise ValueError(f"region of {width_cells} cells exceeds a ring of {C.cells}")
    return np.arange(width_cells * m)


def local_distill(C: CorrelationMatrix, region, epsilon: float) -> LocalDistillation:
    """Split the region's eigenmodes into filled (> 1-eps), empty (< eps) and the rest."""
    if not 0 < epsilon < 0.5:
        raise ValueError(f"epsilon must lie in (0, 1/2), got {epsilon}")
    region = np.asarray(region, dtype=int)
    if region.size == 0 or region.min() < 0 or region.max() >= C.n_modes:
        raise ValueError("invalid region")
    density = C.density[np.ix_(region, region)]
    xi, v = np.linalg.eigh(density)
    filled = xi > 1 - epsilon
    empty = xi < epsilon
    vf, ve = v[:, filled], v[:, empty]
    h_local = ve @ ve.conj().T - vf @ vf.conj().T
    return LocalDistillation(
        region=region,
        epsilon=float(epsilon),
        occupations=xi,
        filled_vectors=vf,
        empty_vectors=ve,
        filled_occupations=xi[filled],
        empty_occupations=xi[empty],
        h_local=h_local,
        orbitals_per_cell=C.orbitals_per_cell,
    )


@dataclass(frozen=True, eq=False)
class GlobalDistiller:
    """Sum of all cell translates of a local distiller on a ring of ``n_cells``."""

    blocks: dict
    bloch: np.ndarray
    n_cells: int

    def dense(self):
        return lattice.dense_from_bloch(self.bloch)


def global_distiller(local: LocalDistillation, n_cells: int, C=None) -> GlobalDistiller:
    """Translation-invariant ``h_distill = sum_x T^x h_local T^-x``.

    The local distiller must live on the reference region (cells
    ``0 .. w-1``).  When ``C`` is given, its translation invariance is
    verified first.
    """
    m = local.orbitals_per_cell
    w = local.width_cells
    if not np.array_equal(local.region, np.arange(w * m)):
        raise ValueError("local distiller must be computed on the reference region")
    if C is not None:
        defect = lattice.translation_defect(C.data, m)
        if defect > TI_TOL:
            raise TranslationInvarianceError(
                f"correlation matrix breaks translation invariance by {defect:.2e}"
            )
    blocks = {}
    h = local.h_local
    for a in range(w):
        for b in range(w):
            d = (b - a) % n_cells
            blk = h[a * m:(a + 1) * m, b * m:(b + 1) * m]
            blocks[d] = blocks.get(d, 0) + blk
    bloch = lattice.bloch_from_blocks(blocks, n_cells)
    bloch = (bloch + bloch.conj().transpose(0, 2, 1)) / 2
    return GlobalDistiller(blocks=blocks, bloch=bloch, n_cells=n_cells)


@dataclass(frozen=True, eq=False)
class DistillerBands:
    """Bloch spectrum of the global distiller with its band classification.

    ``status`` is ``accepted``, ``trivial`` (distiller vanishes) or
    ``rejected``.  In the latter two cases every band is courier.
    ``demoted`` counts bands that are not exact null bands but were
    relabelled courier because they approach zero or a neighbouring group.
    """

    momenta: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    labels: np.ndarray
    counts: tuple
    gap: float
    separation: float
    status: str
    reason: str = ""
    demoted: int = 0

    @property
    def rejected(self):
        return self.status != "accepted"

    def group_vectors(self, group):
        """Bloch eigenvectors ``(L, m, n_b)`` of one band group."""
        zf, nc, ze = self.counts
        sl = {FILLED: slice(0, zf), COURIER: slice(zf, zf + nc), EMPTY: slice(zf + nc, zf + nc + ze)}
        return self.eigenvectors[:, :, sl[group]]

    def records(self):
        """Flat ``(k, band, eigenvalue, label)`` rows."""
        L, m = self.eigenvalues.shape
        return [
            (float(self.momenta[j]), b, float(self.eigenvalues[j, b]), str(self.labels[j, b]))
            for j in range(L)
            for b in range(m)
        ]


def _all_courier(momenta, lam, vec, status, reason, gap=0.0):
    L, m = lam.shape
    return DistillerBands(
        momenta=momenta,
        eigenvalues=lam,
        eigenvectors=vec,
        labels=np.full((L, m), COURIER),
        counts=(0, m, 0),
        gap=gap,
        separation=0.0,
        status=status,
        reason=reason,
    )


def classify_bands(bloch, delta_null=DELTA_NULL, gap_min=GAP_MIN, mode="bandwise") -> DistillerBands:
    """Label every ``(k, band)`` of the distiller as filled, courier or empty.

    ``mode="strict"`` thresholds each eigenvalue at ``delta_null`` and
    rejects the whole step when the frozen gap falls below ``gap_min`` or
    the counts vary with ``k``.  ``mode="bandwise"`` keeps a band frozen only
    if it stays beyond ``gap_min`` at every ``k`` and is separated from the
    next group by at least ``gap_min``; remaining bands become courier and
    the step is rejected only if nothing frozen survives.
    """
    if mode not in ("strict", "bandwise"):
        raise ValueError(f"unknown classification mode {mode!r}")
    bloch = np.asarray(bloch)
    L, m, _ = bloch.shape
    momenta = lattice.momenta(L)
    lam, vec = np.linalg.eigh(bloch)
    nonzero = np.abs(lam) >= delta_null
    if not nonzero.any():
        return _all_courier(momenta, lam, vec, "trivial", "distiller vanishes")

    if mode == "strict":
        nf = (lam <= -delta_null).sum(axis=1)
        ne = (lam >= delta_null).sum(axis=1)
        gap = float(np.abs(lam[nonzero]).min())
        if np.unique(nf).size > 1 or np.unique(ne).size > 1:
            return _all_courier(momenta, lam, vec, "rejected", "band counts vary with k", gap)
        if gap < gap_min:
            return _all_courier(momenta, lam, vec, "rejected", f"frozen gap {gap:.3g} < {gap_min}", gap)
        zf, ze = int(nf[0]), int(ne[0])
        demoted = 0
    else:
        zf = int((lam.max(axis=0) < -gap_min).sum())
        ze = int((lam.min(axis=0) > gap_min).sum())
        while zf and (lam[:, zf] - lam[:, zf - 1]).min() < gap_min:
            zf -= 1
        while ze and (lam[:, m - ze] - lam[:, m - ze - 1]).min() < gap_min:
            ze -= 1
        null_bands = int((np.abs(lam).max(axis=0) < delta_null).sum())
        demoted = (m - zf - ze) - null_bands
        if zf + ze == 0:
            gap = float(np.abs(lam[nonzero]).min())
            return _all_courier(momenta, lam, vec, "rejected", "no band separated from zero", gap)
        frozen = np.concatenate([-lam[:, :zf].ravel(), lam[:, m - ze:].ravel()])
        gap = float(frozen.min())

    nc = m - zf - ze
    seps = []
    if zf and nc + ze:
        seps.append((lam[:, zf] - lam[:, zf - 1]).min())
    if ze and zf + nc:
        seps.append((lam[:, m - ze] - lam[:, m - ze - 1]).min())
    labels = np.empty((L, m), dtype=object)
    labels[:, :zf] = FILLED
    labels[:, zf:zf + nc] = COURIER
    labels[:, zf + nc:] = EMPTY
    return DistillerBands(
        momenta=momenta,
        eigenvalues=lam,
        eigenvectors=vec,
        labels=labels.astype(str),
        counts=(zf, nc, ze),
        gap=gap,
        separation=float(min(seps)) if seps else float("inf"),
        status="accepted",
        demoted=int(demoted),
    )
