"""Artifact writers.  Every number is printed with 12 significant digits."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import shutil
import tempfile
from pathlib import Path

import numpy as np

from .config import RunConfig, dump_yaml
from .rg import RGTrace, correlation_profile, level_decomposition, momentum_occupation, reconstruct

FMT = ".12g"


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, FMT)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return float(fmt(x)) if math.isfinite(x) else fmt(x)
    return obj


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def trace_document(trace: RGTrace, cfg: RunConfig, files) -> dict:
    exact = trace.exact.particle_number()
    return {
        "config": cfg.echo(),
        "model": {
            "modes": trace.spec.n_modes,
            "particles": trace.spec.n_filled,
            "actual_filling": str(trace.spec.actual_filling),
            "filling_report": trace.filling.as_dict(),
        },
        "result": {
            "termination_reason": trace.termination_reason,
            "core_modes": trace.core_modes,
            "core_cells": trace.core.cells,
            "nontrivial_steps": trace.nontrivial_steps,
            "total_steps": len(trace.steps),
            "particles_exact": exact,
            "particles_core": trace.core.particle_number(),
        },
        "steps": [s.summary() for s in trace.steps],
        "files": sorted(files),
    }


def band_structure_csv(trace: RGTrace) -> str:
    rows = []
    for s in trace.steps:
        if s.bands is None:
            continue
        for j, (k, b, lam, label) in enumerate(s.bands.records()):
            rows.append((s.index, j // s.orbitals_per_cell, k, b, lam, label))
    return _csv(("step", "k_index", "k", "band", "eigenvalue", "label"), rows)


def correlations_csv(trace: RGTrace, levels, approx) -> str:
    m = trace.spec.orbitals_per_cell
    exact = correlation_profile(trace.exact.density, m)
    recon = correlation_profile(approx.density, m)
    per_level = [(name, correlation_profile(mat, m)) for name, mat in levels]
    header = ["x", "orbital", "exact_re", "exact_im", "zer_re", "zer_im", "abs_diff"]
    for name, _ in per_level:
        header += [f"{name}_re", f"{name}_im"]
    rows = []
    for x in range(exact.shape[0]):
        for a in range(m):
            row = [x, a, exact[x, a].real, exact[x, a].imag, recon[x, a].real, recon[x, a].imag,
                   float(abs(exact[x, a] - recon[x, a]))]
            for _, p in per_level:
                row += [p[x, a].real, p[x, a].imag]
            rows.append(row)
    return _csv(header, rows)


def level_decomposition_csv(trace: RGTrace, levels) -> str:
    m = trace.spec.orbitals_per_cell
    rows = []
    for name, mat in levels:
        prof = correlation_profile(mat, m)
        diag = np.diag(mat).real
        for x in range(prof.shape[0]):
            for a in range(m):
                rows.append((name, x, a, prof[x, a].real, prof[x, a].imag, diag[x * m + a]))
    return _csv(("level", "x", "orbital", "corr_re", "corr_im", "density"), rows)


def momentum_occupation_csv(trace: RGTrace) -> str:
    L = trace.spec.cells
    rows = []
    for name, occ in momentum_occupation(trace):
        for j in range(L):
            for a in range(occ.shape[1]):
                rows.append((name, j, 2 * np.pi * j / L, a, occ[j, a]))
    return _csv(("level", "k_index", "k", "orbital", "n_k"), rows)


def bounds_csv(trace: RGTrace) -> str:
    rows = []
    for s in trace.accepted_steps():
        b = s.bound
        rows.append((s.index, s.n_cells, b.entropy_per_cell, b.bound_per_cell,
                     b.raw_bound_total / b.n_cells, b.lambda_min_sq, b.mu_min_sq, int(b.applicable)))
    return _csv(("step", "n_cells", "S_per_cell", "bound_per_cell", "raw_bound_per_cell",
                 "lambda_min_sq", "mu_min_sq", "applicable"), rows)


def check_output_dir(path) -> Path:
    """Fail early (before any computation or write) if ``path`` cannot become a directory."""
    out = Path(path).expanduser().absolute()
    if out.exists() and not out.is_dir():
        raise OSError(f"output path {out} exists and is not a directory")
    parent = out if out.exists() else out.parent
    if not parent.is_dir():
        raise OSError(f"parent directory {parent} does not exist")
    if not os.access(parent, os.W_OK | os.X_OK):
        raise OSError(f"directory {parent} is not writable")
    return out


def write_artifacts(trace: RGTrace, cfg: RunConfig, out_dir, artifacts) -> list:
    """Write the requested artifacts; files appear in ``out_dir`` only after all are staged."""
    out = check_output_dir(out_dir)
    artifacts = set(artifacts)
    files = {"config.yaml": dump_yaml(cfg)}
    levels = approx = None
    if artifacts & {"correlations", "level_decomposition", "matrices"}:
        levels = level_decomposition(trace)
        approx = reconstruct(trace)
    if "band_structure" in artifacts:
        files["band_structure.csv"] = band_structure_csv(trace)
    if "correlations" in artifacts:
        files["correlations.csv"] = correlations_csv(trace, levels, approx)
    if "level_decomposition" in artifacts:
        files["level_decomposition.csv"] = level_decomposition_csv(trace, levels)
    if "momentum_occupation" in artifacts:
        files["momentum_occupation.csv"] = momentum_occupation_csv(trace)
    if "bounds" in artifacts:
        files["bounds.csv"] = bounds_csv(trace)
    arrays = {}
    if "matrices" in artifacts:
        arrays = {
            "matrices/exact.npy": trace.exact.data,
            "matrices/reconstructed.npy": approx.data,
            "matrices/core.npy": trace.core.data,
            "matrices/core_embedding.npy": trace.core_embedding,
        }
    names = sorted(files) + sorted(arrays)
    if "trace" in artifacts:
        names = sorted(names + ["trace.json"])
        doc = trace_document(trace, cfg, names)
        files["trace.json"] = json.dumps(_jsonable(doc), indent=2, sort_keys=False) + "\n"

    stage = Path(tempfile.mkdtemp(prefix=".zer-stage-", dir=out if out.exists() else out.parent))
    try:
        for name, text in files.items():
            (stage / name).write_text(text)
        if arrays:
            (stage / "matrices").mkdir()
            for name, arr in arrays.items():
                np.save(stage / name, np.ascontiguousarray(arr))
        if not out.exists():
            stage.chmod(0o755)  # mkdtemp creates 0700
            os.replace(stage, out)
        else:
            for name in sorted(files) + sorted(arrays):
                target = out / name
                target.parent.mkdir(exist_ok=True)
                os.replace(stage / name, target)
            shutil.rmtree(stage)
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    return sorted(files) + sorted(arrays)
