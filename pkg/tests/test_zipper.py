import numpy as np
import pytest
from conftest import random_unitary

from zer import gaussian
from zer.errors import ResidualAbort, ZipperError
from zer.model import CorrelationMatrix, chain_model, ground_state_correlation, ssh_model
from zer.zipper import assemble_zipper, block, factorization_residual, round_to_factorized


def block_diag(*blocks):
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), complex)
    i = 0
    for b in blocks:
        out[i:i + len(b), i:i + len(b)] = b
        i += len(b)
    return out


def test_assemble_accepts_missing_groups(rng):
    u = random_unitary(rng, 6)
    assert np.allclose(assemble_zipper(None, u, None), u)
    assert np.allclose(assemble_zipper(u[:, :2], u[:, 2:5], u[:, 5:]), u)


def test_assemble_rejects_incomplete_or_overlapping(rng):
    u = random_unitary(rng, 6)
    with pytest.raises(ZipperError, match="complete"):
        assemble_zipper(u[:, :2], u[:, 2:4])
    with pytest.raises(ZipperError, match="unitary"):
        assemble_zipper(u[:, :3], u[:, :3])


def test_exactly_factorized_input_has_zero_residual_and_is_kept():
    courier = np.array([[0.7, 0.2j], [-0.2j, 0.3]])
    d = block_diag(np.eye(2), courier, np.zeros((3, 3)))
    C = CorrelationMatrix.on_cells(d.T.copy(), 7, 1)
    assert factorization_residual(C, (2, 2, 3)) == (0.0, 0.0)
    kept = round_to_factorized(C, (2, 2, 3), mode="clip")
    assert np.abs(kept.density - courier).max() < 1e-15


def test_projector_rounding_and_idempotence(rng):
    q = random_unitary(rng, 4)
    courier = (q * np.array([0.001, 0.002, 0.998, 0.6])) @ q.conj().T
    d = block_diag(np.eye(1), courier, np.zeros((1, 1)))
    C = CorrelationMatrix.on_cells(d.T.copy(), 6, 1)
    rounded = round_to_factorized(C, (1, 4, 1))
    assert np.sort(rounded.spectrum()) == pytest.approx([0, 0, 1, 1], abs=1e-12)
    again = round_to_factorized(rounded, (0, 4, 0))
    assert np.abs(again.data - rounded.data).max() < 1e-12
    clipped = round_to_factorized(C, (1, 4, 1), mode="clip")
    assert np.abs(round_to_factorized(clipped, (0, 4, 0), mode="clip").data - clipped.data).max() < 1e-12


def test_abort_threshold():
    d = block_diag(np.eye(1) * 0.99, np.eye(1) * 0.5)
    C = CorrelationMatrix.on_cells(d.T.copy(), 2, 1)
    with pytest.raises(ResidualAbort):
        round_to_factorized(C, (1, 1, 0), abort=1e-3)
    assert round_to_factorized(C, (1, 1, 0), abort=0.1).n_modes == 1


def test_empty_courier_block():
    C = CorrelationMatrix.on_cells(block_diag(np.eye(2), np.zeros((2, 2))), 4, 1)
    assert round_to_factorized(C, (2, 0, 2)).n_modes == 0


def test_blocking_is_a_relabelling():
    C = ground_state_correlation(chain_model(32, -1.0, -0.4))
    b2 = block(C, 2)
    assert (b2.cells, b2.orbitals_per_cell, b2.lattice_constant_exponent) == (16, 2, 1)
    assert np.array_equal(b2.data, C.data)
    assert block(C, 1) is C
    b4 = block(C, 4)
    assert np.array_equal(block(b2, 2).data, b4.data)
    assert np.array_equal(block(b2, 2).labels, b4.labels)
    with pytest.raises(ValueError):
        block(C, 3)


def test_blocking_preserves_cell_aligned_entropies():
    C = ground_state_correlation(ssh_model(24, -0.4, -0.6))
    b = block(C, 3)
    for cells in (1, 2, 5):
        modes = np.arange(cells * b.orbitals_per_cell)
        assert gaussian.region_entropy(b, modes) == pytest.approx(gaussian.region_entropy(C, modes))
