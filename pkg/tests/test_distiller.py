import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zer import lattice
from zer.distiller import (
    COURIER, EMPTY, FILLED, classify_bands, global_distiller, local_distill, reference_region,
)
from zer.errors import TranslationInvarianceError
from zer.model import CorrelationMatrix, chain_model, ground_state_correlation, ssh_model
from zer.zipper import block


def explicit_sum_of_translates(local, n_cells):
    """Oracle: embed h_local on every region x..x+w-1 and add them up."""
    m, w = local.orbitals_per_cell, local.width_cells
    n = n_cells * m
    h = np.zeros((n, n), complex)
    for x in range(n_cells):
        idx = np.concatenate([((x + a) % n_cells) * m + np.arange(m) for a in range(w)])
        h[np.ix_(idx, idx)] += local.h_local
    return h


def test_thresholds_split_spectrum():
    C = ground_state_correlation(ssh_model(32, -0.4, -0.6))
    local = local_distill(C, reference_region(C, 2), 1e-3)
    assert np.all(local.filled_occupations > 1 - 1e-3)
    assert np.all(local.empty_occupations < 1e-3)
    assert local.z_filled + local.z_empty <= 4
    with pytest.raises(ValueError):
        local_distill(C, reference_region(C, 2), 0.6)


def test_half_filled_metal_has_no_frozen_two_site_modes():
    C = ground_state_correlation(chain_model(64))
    local = local_distill(C, reference_region(C, 2), 1e-4)
    assert local.is_trivial
    assert np.abs(local.h_local).max() == 0


def test_dimerized_ssh_local_modes():
    # region = cells 0, 1 holds the full bond (0,B)-(1,A) and two dangling half-filled sites
    C = ground_state_correlation(ssh_model(16, 0.0, -1.0))
    local = local_distill(C, reference_region(C, 2), 1e-6)
    assert (local.z_filled, local.z_empty) == (1, 1)
    assert np.sort(local.occupations) == pytest.approx([0, 0.5, 0.5, 1], abs=1e-12)


@given(L=st.integers(4, 24), w=st.integers(1, 3), t2=st.floats(-1.5, -0.2), eps=st.sampled_from([1e-1, 1e-2]))
def test_circulant_distiller_matches_sum_of_translates(L, w, t2, eps):
    C = block(ground_state_correlation(ssh_model(2 * L, -0.3, t2)), 2)
    if w > C.cells:
        return
    local = local_distill(C, reference_region(C, w), eps)
    gd = global_distiller(local, C.cells, C)
    assert np.abs(gd.dense() - explicit_sum_of_translates(local, C.cells)).max() < 1e-12


def test_translation_invariance_is_checked():
    C = ground_state_correlation(chain_model(16, -1.0, -2.0))
    local = local_distill(C, reference_region(C, 2), 0.4)
    broken = C.data.copy()
    broken[0, 0] += 0.1
    with pytest.raises(TranslationInvarianceError):
        global_distiller(local, 16, CorrelationMatrix.on_cells(broken, 16, 1))


def bands_from(lam):
    """Diagonal Bloch matrices with the given (L, m) eigenvalues."""
    L, m = lam.shape
    return np.einsum("ka,ab->kab", lam, np.eye(m))


def test_classification_counts_and_labels():
    lam = np.tile([-1.0, 0.0, 0.0, 2.0], (8, 1))
    bands = classify_bands(bands_from(lam))
    assert bands.status == "accepted" and bands.counts == (1, 2, 1)
    assert set(bands.labels[:, 0]) == {FILLED} and set(bands.labels[:, 3]) == {EMPTY}
    assert set(bands.labels[:, 1:3].ravel()) == {COURIER}
    assert bands.gap == 1.0
    assert len(bands.records()) == 32


def test_trivial_when_distiller_vanishes():
    bands = classify_bands(np.zeros((8, 2, 2)))
    assert bands.status == "trivial" and bands.counts == (0, 2, 0)


def test_strict_mode_rejects_small_gap_but_bandwise_keeps_clean_band():
    k = lattice.momenta(16)
    lam = np.stack([-1 + 0 * k, 0.05 + 0.01 * np.cos(k), 1.5 + 0 * k], axis=1)
    strict = classify_bands(bands_from(lam), mode="strict")
    assert strict.rejected and "gap" in strict.reason
    bandwise = classify_bands(bands_from(lam))
    assert bandwise.counts == (1, 1, 1) and bandwise.demoted == 1


def test_strict_mode_rejects_k_dependent_counts():
    k = lattice.momenta(16)
    lam = np.stack([np.cos(k), 2 + 0 * k], axis=1)
    assert classify_bands(bands_from(lam), mode="strict").reason == "band counts vary with k"
    assert classify_bands(bands_from(lam)).counts == (0, 1, 1)


def test_bandwise_rejects_when_nothing_survives():
    k = lattice.momenta(16)
    lam = np.stack([0.05 + 0 * k, np.cos(k)], axis=1)
    bands = classify_bands(bands_from(lam))
    assert bands.rejected and bands.counts == (0, 2, 0)
