import numpy as np
import pytest
from hypothesis import settings

from zer.config import load_preset
from zer.rg import run_zer

settings.register_profile("zer", max_examples=25, deadline=None)
settings.load_profile("zer")

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture(scope="session")
def preset_traces():
    """The three benchmark runs, computed once per session."""
    out = {}
    for name in ("ssh", "nn", "extended"):
        cfg = load_preset(name)
        out[name] = (cfg, run_zer(cfg.model.to_spec(), cfg.rg.to_rg()))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} ({detail})")
