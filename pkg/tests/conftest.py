import numpy as np
import pytest

from smivb.eds import make_compound_spectrum
from smivb.model import WaveGrid, synth_eds_basis

ACCEPTANCE = {}


def record(criterion, passed, detail):
    ACCEPTANCE[criterion] = (bool(passed), detail)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if passed else 'FAIL'}  {detail}")


@pytest.fixture(scope="session")
def eds_grid():
    return WaveGrid(np.arange(1, 1025) * 0.01)


@pytest.fixture(scope="session")
def eds_basis(eds_grid):
    return synth_eds_basis(20, eds_grid, 0)


@pytest.fixture(scope="session")
def overlapping_instance(eds_basis):
    """Compound of two overlapping partners plus a third element, with noise."""
    formula = (("E00", 2), ("E01", 1), ("E06", 1))
    smi = make_compound_spectrum(eds_basis, formula, events=10_000, noise=0.02, seed=0)
    return eds_basis, smi
