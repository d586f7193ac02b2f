"""Zipper unitary, factorization residuals, rounding and blocking."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ResidualAbort, ZipperError
from .gaussian import UNITARY_TOL
from .model import CorrelationMatrix, cell_labels


@dataclass(eq=False)
class ZipperStep:
    """Everything measured while unzipping one RG step.

    ``counts`` are per cell; ``sizes`` the total (filled, courier, empty)
    mode numbers, i.e. the column blocks of ``u_zipper``.
    """

    u_zipper: np.ndarray
    counts: tuple
    sizes: tuple
    residual_offblock: float
    residual_frozen: float
    S_courier_exact: float
    epsilon_used: float
    unitarity_residual: float
    bound_value: float = float("nan")
    rejected: bool = False
    courier_deviation: float = 0.0
    rounding_shift: float = 0.0
    extra: dict = field(default_factory=dict)


def assemble_zipper(*bases) -> np.ndarray:
    """Column blocks ``(psi_filled | psi_courier | psi_empty)`` as one unitary.

    Arguments are :class:`~zer.wannier.WannierBasis` objects, raw column
    matrices or ``None`` for an empty group.
    """
    cols = []
    n = None
    for b in bases:
        if b is None:
            continue
        v = b.vectors if hasattr(b, "vectors") else np.asarray(b)
        n = v.shape[0] if n is None else n
        if v.shape[0] != n:
            raise ZipperError("band groups live on different spaces")
        cols.append(v)
    if not cols:
        raise ZipperError("no columns to assemble")
    u = np.concatenate(cols, axis=1)
    if u.shape[0] != u.shape[1]:
        raise ZipperError(f"band groups are not jointly complete: {u.shape[1]} columns for {u.shape[0]} modes")
    err = np.abs(u.conj().T @ u - np.eye(n)).max()
    if err > UNITARY_TOL:
        raise ZipperError(f"zipper is not unitary (residual {err:.2e})")
    return u


def _blocks(sizes):
    nf, nc, ne = sizes
    return slice(0, nf), slice(nf, nf + nc), slice(nf + nc, nf + nc + ne)


def factorization_residual(C_rot: CorrelationMatrix, sizes):
    """``(residual_offblock, residual_frozen)`` of a rotated correlation matrix.

    ``sizes`` are the total numbers of filled, courier and empty modes in
    the column order of the zipper.
    """
    d = C_rot.density
    f, c, e = _blocks(sizes)
    off = d.copy()
    for s in (f, c, e):
        off[s, s] = 0
    offblock = float(np.abs(off).max()) if off.size else 0.0
    frozen = 0.0
    if sizes[0]:
        frozen = max(frozen, float(np.abs(d[f, f] - np.eye(sizes[0])).max()))
    if sizes[2]:
        frozen = max(frozen, float(np.abs(d[e, e]).max()))
    return offblock, frozen


def round_to_factorized(C_rot: CorrelationMatrix, sizes, *, mode="projector", abort=None,
                        labels=None) -> CorrelationMatrix:
    """Drop the off-block couplings and return the renormalized courier block.

    Filled and empty blocks are deformed to the identity and zero.  With
    ``mode="projector"`` the courier block is replaced by the projector onto
    its eigenvectors with occupation above 1/2; ``mode="clip"`` only
    re-Hermitizes it and clips the spectrum to [0, 1].
    """
    if mode not in ("projector", "clip"):
        raise ValueError(f"unknown rounding mode {mode!r}")
    if abort is not None:
        _, frozen = factorization_residual(C_rot, sizes)
        if frozen > abort:
            raise ResidualAbort(f"frozen-block residual {frozen:.2e} exceeds abort threshold {abort:.2e}")
    _, c, _ = _blocks(sizes)
    block = C_rot.density[c, c]
    block = (block + block.conj().T) / 2
    if block.size:
        ev, q = np.linalg.eigh(block)
        if mode == "projector":
            keep = q[:, ev > 0.5]
            block = keep @ keep.conj().T
        else:
            block = (q * np.clip(ev, 0.0, 1.0)) @ q.conj().T
    if labels is None:
        labels = C_rot.labels[c]
    return CorrelationMatrix(block.T.copy(), labels, C_rot.lattice_constant_exponent)


def courier_deviation(block: np.ndarray) -> float:
    """Largest distance of a courier-block eigenvalue from {0, 1}."""
    if not block.size:
        return 0.0
    ev = np.linalg.eigvalsh(block)
    return float(np.minimum(np.abs(ev), np.abs(1 - ev)).max())


def block(C: CorrelationMatrix, factor: int) -> CorrelationMatrix:
    """Merge ``factor`` consecutive cells into one supercell (pure relabelling)."""
    if factor < 1:
        raise ValueError("blocking factor must be positive")
    L, m = C.cells, C.orbitals_per_cell
    if L % factor:
        raise ValueError(f"{L} cells are not divisible by blocking factor {factor}")
    if factor == 1:
        return C
    return CorrelationMatrix(C.data, cell_labels(L // factor, m * factor),
                             C.lattice_constant_exponent + 1)
