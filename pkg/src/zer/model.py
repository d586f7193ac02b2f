"""Translation-invariant tight-binding models and their Gaussian ground states."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import lattice
from .errors import DegenerateFermiLevelError, ModelValidationError

logger = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
DEGENERACY_TOL = 1e-10


@dataclass(frozen=True)
class Hopping:
    """Amplitude ``t`` of the term ``t c^dag_{x+shift, alpha} c_{x, beta}``."""

    shift: int
    alpha: int
    beta: int
    amplitude: complex

    @property
    def key(self):
        return (self.shift, self.alpha, self.beta)

    def partner(self):
        return Hopping(-self.shift, self.beta, self.alpha, complex(self.amplitude).conjugate())


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(str(value))


@dataclass(frozen=True)
class ModelSpec:
    """A 1D ring of ``cells`` unit cells with ``orbitals_per_cell`` orbitals each.

    Each listed hopping implies its Hermitian partner; listing the partner
    explicitly is allowed as long as it carries the conjugate amplitude.
    ``filling`` is the fraction of all ``cells * orbitals_per_cell``
    single-particle modes that are occupied.
    """

    cells: int
    orbitals_per_cell: int
    hoppings: tuple[Hopping, ...]
    filling: Fraction
    name: str = ""
    _terms: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "hoppings", tuple(self.hoppings))
        object.__setattr__(self, "filling", as_fraction(self.filling))
        L, m = self.cells, self.orbitals_per_cell
        if not isinstance(L, (int, np.integer)) or L < 2:
            raise ModelValidationError(f"cells must be an integer >= 2, got {L!r}")
        if not isinstance(m, (int, np.integer)) or m <= 0:
            raise ModelValidationError(f"orbitals_per_cell must be a positive integer, got {m!r}")
        if not 0 < self.filling < 1:
            raise ModelValidationError(f"filling must lie in (0, 1), got {self.filling}")
        if not 0 < self.n_filled < L * m:
            raise ModelValidationError(
                f"filling {self.filling} gives {self.n_filled} particles for {L * m} modes"
            )
        object.__setattr__(self, "_terms", self._close_terms())

    def _close_terms(self):
        L, m = self.cells, self.orbitals_per_cell
        listed = {}
        for h in self.hoppings:
            if not (0 <= h.alpha < m and 0 <= h.beta < m):
                raise ModelValidationError(f"orbital index out of range in {h}")
            if 2 * abs(h.shift) >= L:
                raise ModelValidationError(f"|shift| must be < cells/2, got {h.shift} for {L} cells")
            if h.key in listed:
                raise ModelValidationError(f"duplicate hopping {h.key}")
            listed[h.key] = complex(h.amplitude)
        terms = dict(listed)
        for key, t in listed.items():
            partner = (-key[0], key[2], key[1])
            if partner in listed:
                if abs(listed[partner] - t.conjugate()) > HERMITIAN_TOL:
                    raise ModelValidationError(
                        f"hoppings {key} and {partner} are not Hermitian conjugates "
                        f"({t} vs {listed[partner]})"
                    )
            else:
                terms[partner] = t.conjugate()
        return terms

    @property
    def n_modes(self):
        return self.cells * self.orbitals_per_cell

    @property
    def n_filled(self):
        return math.floor(self.filling * self.n_modes + Fraction(1, 2))

    @property
    def actual_filling(self):
        return Fraction(self.n_filled, self.n_modes)

    def shift_blocks(self):
        """``{shift: H_shift}`` with ``(H_shift)[alpha, beta]`` the summed amplitudes."""
        m = self.orbitals_per_cell
        blocks = {}
        for (s, a, b), t in self._terms.items():
            blocks.setdefault(s, np.zeros((m, m), dtype=complex))[a, b] += t
        return blocks


def bloch_hamiltonian(spec: ModelSpec, k: float) -> np.ndarray:
    """``h(k) = sum_shift exp(-i k shift) H_shift``."""
    m = spec.orbitals_per_cell
    h = np.zeros((m, m), dtype=complex)
    for s, H in spec.shift_blocks().items():
        h += np.exp(-1j * k * s) * H
    return h


def bloch_hamiltonians(spec: ModelSpec) -> np.ndarray:
    """``h(k)`` at all ``L`` momenta ``2 pi j / L``, shape ``(L, m, m)``."""
    blocks = {-s: H for s, H in spec.shift_blocks().items()}
    if not blocks:
        m = spec.orbitals_per_cell
        return np.zeros((spec.cells, m, m), dtype=complex)
    return lattice.bloch_from_blocks(blocks, spec.cells)


def real_space_hamiltonian(spec: ModelSpec) -> np.ndarray:
    """Dense ``L*m x L*m`` single-particle Hamiltonian on the periodic ring."""
    L, m = spec.cells, spec.orbitals_per_cell
    h = np.zeros((L * m, L * m), dtype=complex)
    for (s, a, b), t in spec._terms.items():
        for x in range(L):
            h[((x + s) % L) * m + a, x * m + b] += t
    return h


def cell_labels(cells, m):
    """``(cell, orbital)`` label array for cell-major ordering."""
    return np.stack(np.divmod(np.arange(cells * m), m), axis=1)


@dataclass(frozen=True, eq=False)
class CorrelationMatrix:
    """``data[i, j] = <c^dag_i c_j>`` with ``labels[i] = (cell, orbital)``.

    ``data.T`` is the single-particle density matrix acting on mode
    vectors: a mode ``f^dag = sum_i phi_i c^dag_i`` has occupation
    ``phi^dag data.T phi``.
    """

    data: np.ndarray
    labels: np.ndarray
    lattice_constant_exponent: int = 0

    def __post_init__(self):
        data = np.asarray(self.data)
        labels = np.asarray(self.labels, dtype=int).reshape(-1, 2)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise ValueError(f"correlation matrix must be square, got {data.shape}")
        if labels.shape[0] != data.shape[0]:
            raise ValueError("labels and matrix size disagree")
        if data.size and np.abs(data - data.conj().T).max() > 1e-10:
            raise ValueError("correlation matrix is not Hermitian")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", labels)

    @classmethod
    def on_cells(cls, data, cells, m, exponent=0):
        return cls(data, cell_labels(cells, m), exponent)

    @property
    def n_modes(self):
        return self.data.shape[0]

    @property
    def cells(self):
        return int(self.labels[:, 0].max()) + 1 if self.n_modes else 0

    @property
    def orbitals_per_cell(self):
        return self.n_modes // self.cells if self.n_modes else 0

    @property
    def density(self):
        """Single-particle density matrix ``C^T`` (columns span filled modes)."""
        return self.data.T

    def spectrum(self):
        return np.linalg.eigvalsh(self.data)

    def particle_number(self):
        return float(np.trace(self.data).real)


@dataclass(frozen=True)
class FillingReport:
    n_filled: int
    filling: Fraction
    fermi_energy: float
    next_energy: float
    degenerate: tuple[tuple[int, int], ...] = ()
    chosen: tuple[tuple[int, int], ...] = ()

    def as_dict(self):
        return {
            "n_filled": self.n_filled,
            "filling": str(self.filling),
            "filling_float": float(self.filling),
            "fermi_energy": self.fermi_energy,
            "next_energy": self.next_energy,
            "fermi_level_degenerate": [list(p) for p in self.degenerate],
            "tie_break_chosen": [list(p) for p in self.chosen],
        }


def fill_levels(spec: ModelSpec, *, tie_break=True, tol=DEGENERACY_TOL):
    """Occupy the ``n_filled`` lowest ``(k, band)`` levels.

    Returns the boolean occupation mask ``(L, m)``, the Bloch eigenvectors
    ``(L, m, m)`` and a :class:`FillingReport`.  Levels degenerate with the
    Fermi level are filled in ascending (momentum index, band) order when
    ``tie_break`` is set; otherwise the degeneracy is an error.
    """
    energies, vectors = np.linalg.eigh(bloch_hamiltonians(spec))
    L, m = energies.shape
    n = spec.n_filled
    flat = energies.ravel()
    # lexsort: last key is primary -> energy, then k index, then band
    order = np.lexsort((np.tile(np.arange(m), L), np.repeat(np.arange(L), m), flat))
    e_fermi, e_next = flat[order[n - 1]], flat[order[n]]
    mask = np.zeros(L * m, dtype=bool)
    degenerate, chosen = (), ()
    if e_next - e_fermi < tol:
        cluster = np.abs(flat - e_fermi) < tol
        below = flat < e_fermi - tol
        cands = np.flatnonzero(cluster)  # ascending flat index == (k, band) order
        need = n - int(below.sum())
        degenerate = tuple(divmod(int(c), m) for c in cands)
        if not tie_break:
            raise DegenerateFermiLevelError(
                f"{len(cands)} levels degenerate at the Fermi level {e_fermi:.3e}, "
                f"{need} of them must be filled: {degenerate}",
                degenerate,
            )
        chosen = degenerate[:need]
        mask[below] = True
        mask[cands[:need]] = True
        logger.info("Fermi-level tie broken: filled %s out of %s", chosen, degenerate)
    else:
        mask[order[:n]] = True
    report = FillingReport(
        n_filled=n,
        filling=spec.actual_filling,
        fermi_energy=float(e_fermi),
        next_energy=float(e_next),
        degenerate=degenerate,
        chosen=chosen,
    )
    return mask.reshape(L, m), vectors, report


def ground_state_correlation(spec: ModelSpec, *, tie_break=True) -> CorrelationMatrix:
    mask, vectors, _ = fill_levels(spec, tie_break=tie_break)
    occupied = vectors * mask[:, None, :]
    projector_k = occupied @ occupied.conj().transpose(0, 2, 1)
    density = lattice.dense_from_bloch(projector_k)
    density = (density + density.conj().T) / 2
    return CorrelationMatrix.on_cells(density.T.copy(), spec.cells, spec.orbitals_per_cell)


def ssh_model(cells=729, t1=-0.4, t2=-0.6, filling=Fraction(1, 2)):
    """Two orbitals (A=0, B=1); ``t1`` intra-cell, ``t2`` from B(x) to A(x+1)."""
    return ModelSpec(
        cells=cells,
        orbitals_per_cell=2,
        hoppings=(Hopping(0, 0, 1, t1), Hopping(1, 0, 1, t2)),
        filling=filling,
        name="ssh",
    )


def chain_model(cells=1024, t1=-1.0, t2=0.0, filling=Fraction(1, 2)):
    """One-band chain with nearest (``t1``) and next-nearest (``t2``) hopping."""
    hops = [Hopping(1, 0, 0, t1)]
    if t2:
        hops.append(Hopping(2, 0, 0, t2))
    return ModelSpec(cells=cells, orbitals_per_cell=1, hoppings=tuple(hops), filling=filling,
                     name="chain")
