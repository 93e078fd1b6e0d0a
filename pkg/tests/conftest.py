import os
import sys

import pytest

sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from constitutive.models import PowerLawCoupled, QuadraticThermoelastic, RankOneDefective  # noqa: E402
from fields.grid import make_grid  # noqa: E402


@pytest.fixture
def quadratic():
    return QuadraticThermoelastic(alpha=1.0, dim=2)


@pytest.fixture
def quadratic_1d():
    return QuadraticThermoelastic(alpha=1.0, dim=1)


@pytest.fixture
def powerlaw():
    return PowerLawCoupled(p=4.0, q=2.0, kappa=0.1, alpha=1.0, dim=2, K=5.0)


@pytest.fixture
def defective():
    return RankOneDefective(beta=2.0, dim=2)


@pytest.fixture
def grid2():
    return make_grid(2, 16)


@pytest.fixture
def grid1():
    return make_grid(1, 64)


@pytest.fixture
def output_dir(tmp_path, monkeypatch):
    """Isolated output directory; manifests stay unsigned."""
    monkeypatch.setenv('THERMOLAB_OUTPUT_DIR', str(tmp_path / 'runs'))
    monkeypatch.delenv('THERMOLAB_SIGNING_KEY', raising=False)
    return tmp_path / 'runs'
