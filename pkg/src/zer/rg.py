"""The renormalization loop: distill, unzip, round, block, repeat."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import gaussian, lattice
from .bounds import BoundReport, entanglement_bound
from .distiller import (
    COURIER, DELTA_NULL, EMPTY, FILLED, GAP_MIN, DistillerBands, classify_bands,
    global_distiller, local_distill, reference_region,
)
from .errors import ConfigError, ResidualAbort, WannierizationError, ZERError
from .model import CorrelationMatrix, FillingReport, ModelSpec, fill_levels, ground_state_correlation
from .wannier import wannierize_bands
from .zipper import (
    ZipperStep, assemble_zipper, block, courier_deviation, factorization_residual,
    round_to_factorized,
)

logger = logging.getLogger(__name__)

ACCEPTED, TRIVIAL, REJECTED = "accepted", "trivial", "rejected"
TERMINATIONS = ("core_threshold", "fully_distilled", "max_steps", "consecutive_rejections")


@dataclass(frozen=True)
class RGConfig:
    epsilon_schedule: tuple = (1e-4,)
    region_width_cells: int = 2
    blocking_factor: int = 2
    delta_null: float = DELTA_NULL
    gap_min: float = GAP_MIN
    max_steps: int = 40
    core_size_threshold: int = 8
    residual_abort_multiplier: float = 10.0
    band_rejection: str = "bandwise"
    courier_rounding: str = "projector"

    def __post_init__(self):
        object.__setattr__(self, "epsilon_schedule", tuple(float(e) for e in self.epsilon_schedule))
        problems = []
        if not self.epsilon_schedule:
            problems.append("epsilon_schedule must not be empty")
        if any(not 0 < e < 0.5 for e in self.epsilon_schedule):
            problems.append("epsilon_schedule values must lie in (0, 1/2)")
        for name in ("region_width_cells", "blocking_factor", "max_steps", "core_size_threshold"):
            if getattr(self, name) < 1:
                problems.append(f"{name} must be a positive integer")
        for name in ("delta_null", "gap_min", "residual_abort_multiplier"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be positive")
        if self.band_rejection not in ("bandwise", "strict"):
            problems.append("band_rejection must be 'bandwise' or 'strict'")
        if self.courier_rounding not in ("projector", "clip"):
            problems.append("courier_rounding must be 'projector' or 'clip'")
        if problems:
            raise ConfigError("; ".join(problems), problems)

    def epsilon(self, step):
        return self.epsilon_schedule[min(step, len(self.epsilon_schedule) - 1)]


@dataclass(eq=False)
class StepRecord:
    """One pass of the loop.  ``n_cells``/``orbitals_per_cell`` describe the input state."""

    index: int
    n_cells: int
    orbitals_per_cell: int
    lattice_constant_exponent: int
    epsilon: float
    status: str
    reason: str = ""
    local_counts: tuple = (0, 0)
    local_occupations: np.ndarray | None = None
    bands: DistillerBands | None = None
    zipper: ZipperStep | None = None
    bound: BoundReport | None = None
    wannier: dict = field(default_factory=dict)
    filled_embedding: np.ndarray | None = None
    courier_embedding: np.ndarray | None = None
    blocked: bool = False

    @property
    def accepted(self):
        return self.status == ACCEPTED

    @property
    def counts(self):
        return self.bands.counts if self.accepted else (0, self.orbitals_per_cell, 0)

    def summary(self):
        out = {
            "index": self.index,
            "status": self.status,
            "reason": self.reason,
            "n_cells": self.n_cells,
            "orbitals_per_cell": self.orbitals_per_cell,
            "lattice_constant_exponent": self.lattice_constant_exponent,
            "epsilon": self.epsilon,
            "local_counts": {"filled": self.local_counts[0], "empty": self.local_counts[1]},
            "blocked": self.blocked,
        }
        if self.bands is not None:
            out["bands"] = {
                "counts": dict(zip((FILLED, COURIER, EMPTY), self.bands.counts)),
                "gap": self.bands.gap,
                "separation": self.bands.separation,
                "status": self.bands.status,
                "reason": self.bands.reason,
                "demoted": self.bands.demoted,
            }
        if self.zipper is not None:
            z = self.zipper
            out["zipper"] = {
                "sizes": dict(zip((FILLED, COURIER, EMPTY), z.sizes)),
                "residual_offblock": z.residual_offblock,
                "residual_frozen": z.residual_frozen,
                "unitarity_residual": z.unitarity_residual,
                "S_courier_exact": z.S_courier_exact,
                "courier_deviation": z.courier_deviation,
                "rounding_shift": z.rounding_shift,
            }
        if self.bound is not None:
            out["bound"] = self.bound.as_dict()
        if self.wannier:
            out["wannier"] = {
                g: {"decay_rate": b.decay_rate, "home_centers": b.centers[: b.bands_per_cell].tolist(),
                    "home_spreads": b.spreads[: b.bands_per_cell].tolist()}
                for g, b in self.wannier.items()
            }
        return out


@dataclass(eq=False)
class RGTrace:
    spec: ModelSpec
    config: RGConfig
    exact: CorrelationMatrix
    filling: FillingReport
    steps: list
    core: CorrelationMatrix
    core_embedding: np.ndarray
    termination_reason: str

    @property
    def core_modes(self):
        return self.core.n_modes

    @property
    def nontrivial_steps(self):
        return sum(s.accepted for s in self.steps)

    def accepted_steps(self):
        return [s for s in self.steps if s.accepted]


def _wannierize_groups(bands: DistillerBands):
    out = {}
    for g in (FILLED, COURIER, EMPTY):
        u_k = bands.group_vectors(g)
        if u_k.shape[2]:
            out[g] = wannierize_bands(u_k)
    return out


def _unzip(C, local, bands, config, eps):
    """Rotate with the zipper, measure and round.  Returns (ZipperStep, bound, bases, courier C)."""
    L = C.cells
    bases = _wannierize_groups(bands)
    u = assemble_zipper(*(bases.get(g) for g in (FILLED, COURIER, EMPTY)))
    unitarity = gaussian.check_unitary(u)
    zf, nc, ze = bands.counts
    sizes = (zf * L, nc * L, ze * L)
    C_rot = gaussian.rotate(C, u)
    offblock, frozen = factorization_residual(C_rot, sizes)
    c = slice(sizes[0], sizes[0] + sizes[1])
    raw = C_rot.density[c, c]
    raw = (raw + raw.conj().T) / 2
    s_courier = gaussian.entanglement_entropy(np.linalg.eigvalsh(raw)) if raw.size else 0.0
    courier = round_to_factorized(
        C_rot, sizes,
        mode=config.courier_rounding,
        abort=config.residual_abort_multiplier * eps,
        labels=None,
    )
    bound = entanglement_bound(local, L, keep_e=ze, keep_f=zf, courier_entropy=s_courier)
    step = ZipperStep(
        u_zipper=u,
        counts=bands.counts,
        sizes=sizes,
        residual_offblock=offblock,
        residual_frozen=frozen,
        S_courier_exact=s_courier,
        epsilon_used=eps,
        unitarity_residual=unitarity,
        bound_value=bound.bound_total,
        courier_deviation=courier_deviation(raw),
        rounding_shift=float(np.abs(courier.density - raw).max()) if raw.size else 0.0,
    )
    return step, bound, bases, courier


def _relabel_courier(courier: CorrelationMatrix, L, nc, exponent):
    return CorrelationMatrix.on_cells(courier.data, L, nc, exponent) if nc else courier


def run_zer(spec: ModelSpec, config: RGConfig, *, tie_break=True) -> RGTrace:
    """Run the full loop on the ground state of ``spec``.

    Numerical errors raised inside a step carry that step's index.
    """
    _, _, filling = fill_levels(spec, tie_break=tie_break)
    exact = ground_state_correlation(spec, tie_break=tie_break)
    C = exact
    V = np.eye(exact.n_modes, dtype=complex)
    steps = []
    reason = "max_steps"
    consecutive = 0
    for i in range(config.max_steps):
        try:
            record, C, V, done = _step(i, C, V, config)
        except ZERError as err:
            err.step = i
            raise
        steps.append(record)
        logger.info("step %d: %s %s", i, record.status, record.reason)
        if done:
            reason = done
            break
        if record.accepted:
            consecutive = 0
        elif not record.blocked or record.reason == "ring smaller than region":
            consecutive += 1
            if consecutive >= 2:
                reason = "consecutive_rejections"
                break
    return RGTrace(
        spec=spec,
        config=config,
        exact=exact,
        filling=filling,
        steps=steps,
        core=C,
        core_embedding=V,
        termination_reason=reason,
    )


def _step(i, C, V, config):
    L, m = C.cells, C.orbitals_per_cell
    eps = config.epsilon(i)
    w = config.region_width_cells
    record = StepRecord(index=i, n_cells=L, orbitals_per_cell=m,
                        lattice_constant_exponent=C.lattice_constant_exponent,
                        epsilon=eps, status=REJECTED)
    if L < w:
        record.reason = "ring smaller than region"
    else:
        local = local_distill(C, reference_region(C, w), eps)
        record.local_counts = (local.z_filled, local.z_empty)
        record.local_occupations = local.occupations
        if local.is_trivial:
            record.status, record.reason = TRIVIAL, "no frozen local modes"
        else:
            gd = global_distiller(local, L, C)
            bands = classify_bands(gd.bloch, config.delta_null, config.gap_min, config.band_rejection)
            record.bands = bands
            if bands.rejected:
                record.status, record.reason = bands.status, bands.reason
            else:
                try:
                    zstep, bound, bases, courier = _unzip(C, local, bands, config, eps)
                except (WannierizationError, ResidualAbort) as err:
                    record.reason = f"{type(err).__name__}: {err}"
                else:
                    record.status = ACCEPTED
                    record.zipper, record.bound, record.wannier = zstep, bound, bases
                    if FILLED in bases:
                        record.filled_embedding = V @ bases[FILLED].vectors
                    psi_c = bases[COURIER].vectors if COURIER in bases else np.zeros((V.shape[1], 0))
                    V = V @ psi_c
                    record.courier_embedding = V
                    nc = bands.counts[1]
                    C = _relabel_courier(courier, L, nc, C.lattice_constant_exponent)
                    if nc == 0:
                        return record, C, V, "fully_distilled"

    if C.n_modes <= config.core_size_threshold:
        return record, C, V, "core_threshold"
    f = config.blocking_factor
    if C.cells % f == 0 and C.cells >= f:
        C = block(C, f)
        record.blocked = True
    return record, C, V, None


def reconstruct(trace: RGTrace) -> CorrelationMatrix:
    """``C_approx`` in the original basis, as the sum of :func:`level_decomposition`."""
    total = sum(level for _, level in level_decomposition(trace))
    return CorrelationMatrix(total.T.copy(), trace.exact.labels)


def level_decomposition(trace: RGTrace):
    """``[(name, density contribution)]``: one entry per accepted step plus the core.

    Contributions are single-particle density matrices (``C^T``); steps that
    distilled no filled modes contribute zero.
    """
    n = trace.exact.n_modes
    out = []
    for s in trace.accepted_steps():
        phi = s.filled_embedding
        out.append((f"step{s.index}", phi @ phi.conj().T if phi is not None else np.zeros((n, n), complex)))
    V = trace.core_embedding
    core = V @ trace.core.density @ V.conj().T if V.shape[1] else np.zeros((n, n), complex)
    out.append(("core", core))
    return out


def _bloch_amplitudes(vectors, n_cells, m):
    """``<k, alpha | column>`` for every momentum, shape ``(L, m, cols)``."""
    cols = vectors.shape[1]
    return np.fft.fft(vectors.reshape(n_cells, m, cols), axis=0) / np.sqrt(n_cells)


def momentum_occupation(trace: RGTrace):
    """``[(name, n(k, alpha))]`` per level and for the exact state, each ``(L, m)``."""
    L, m = trace.spec.cells, trace.spec.orbitals_per_cell
    out = []
    for s in trace.accepted_steps():
        if s.filled_embedding is None:
            out.append((f"step{s.index}", np.zeros((L, m))))
            continue
        a = _bloch_amplitudes(s.filled_embedding, L, m)
        out.append((f"step{s.index}", (np.abs(a) ** 2).sum(axis=2)))
    V = trace.core_embedding
    if V.shape[1]:
        a = _bloch_amplitudes(V, L, m)
        core = np.einsum("kai,ij,kaj->ka", a, trace.core.density, a.conj()).real  # a = <k|V>
    else:
        core = np.zeros((L, m))
    out.append(("core", core))
    exact = lattice.bloch_from_dense(trace.exact.density, m)
    out.append(("exact", np.einsum("kaa->ka", exact).real))
    return out


def correlation_profile(density: np.ndarray, m: int, orbital: int = 0):
    """``<c^dag_{x, beta} c_{0, orbital}>`` as an ``(L, m)`` array from a density matrix ``C^T``."""
    col = density[orbital, :]  # C[i, 0] = density[0, i]
    return col.reshape(-1, m)


def particle_ledger(trace: RGTrace):
    """``(trace(C), sum_i z_f L_i + trace(C_core), budget)``."""
    frozen = sum(s.zipper.sizes[0] for s in trace.accepted_steps())
    budget = sum((s.zipper.sizes[0] + s.zipper.sizes[2]) * s.epsilon for s in trace.accepted_steps())
    return trace.exact.particle_number(), frozen + trace.core.particle_number(), budget
