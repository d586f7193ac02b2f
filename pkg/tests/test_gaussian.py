import math

import numpy as np
import pytest
from conftest import random_unitary
from hypothesis import given
from hypothesis import strategies as st

from zer import gaussian
from zer.errors import NonUnitaryError, SingularEntanglementError
from zer.model import CorrelationMatrix, chain_model, ground_state_correlation


def test_binary_entropy_values():
    assert gaussian.binary_entropy(0.5) == pytest.approx(math.log(2))
    assert gaussian.binary_entropy(1e-4) == pytest.approx(1.0210e-3, abs=5e-8)
    assert gaussian.binary_entropy(0.0) == 0.0
    assert gaussian.binary_entropy(1 - 1e-13) == 0.0


@given(x=st.floats(0, 1))
def test_binary_entropy_symmetric_and_bounded(x):
    s = gaussian.binary_entropy(x)
    assert 0 <= s <= math.log(2) + 1e-15
    assert s == pytest.approx(gaussian.binary_entropy(1 - x), abs=1e-12)


def test_half_chain_entropy_grows_logarithmically():
    C = ground_state_correlation(chain_model(256))
    s8, s32 = (gaussian.region_entropy(C, np.arange(n)) for n in (8, 32))
    # critical chain: S(l) ~ (1/3) ln l
    assert (s32 - s8) == pytest.approx(math.log(4) / 3, abs=0.02)


def test_restrict_checks_indices():
    C = CorrelationMatrix.on_cells(np.eye(4) / 2, 4, 1)
    with pytest.raises(ValueError):
        gaussian.restrict(C, [0, 4])
    with pytest.raises(ValueError):
        gaussian.restrict(C, [1, 1])
    assert gaussian.restrict(C, [2, 0]).labels.tolist() == [[2, 0], [0, 0]]


def test_entanglement_hamiltonian_roundtrip():
    C = ground_state_correlation(chain_model(32))
    sub = gaussian.restrict(C, np.arange(6))
    h = gaussian.entanglement_hamiltonian(sub)
    assert np.abs(gaussian.occupations_from_entanglement_hamiltonian(h) - sub.data).max() < 1e-9


def test_entanglement_hamiltonian_rejects_frozen_modes():
    C = CorrelationMatrix.on_cells(np.diag([1.0, 0.3]), 2, 1)
    with pytest.raises(SingularEntanglementError) as info:
        gaussian.entanglement_hamiltonian(C)
    assert info.value.modes == [1]  # eigh orders ascending: 0.3, 1.0


def test_rotate_preserves_spectrum(rng):
    C = ground_state_correlation(chain_model(24, -1.0, -0.5))
    u = random_unitary(rng, 24)
    rot = gaussian.rotate(C, u)
    assert np.abs(np.sort(rot.spectrum()) - np.sort(C.spectrum())).max() < 1e-10
    assert gaussian.mode_occupations(C, u) == pytest.approx(np.diag(rot.density).real)


def test_rotate_rejects_non_unitary():
    C = CorrelationMatrix.on_cells(np.eye(3) / 2, 3, 1)
    with pytest.raises(NonUnitaryError):
        gaussian.rotate(C, np.eye(3) * 1.01)
    with pytest.raises(NonUnitaryError):
        gaussian.rotate(C, np.eye(2))
