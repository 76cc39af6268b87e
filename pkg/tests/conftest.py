"""Shared fixtures. Log files are disabled before any project module is imported."""
import pytest

from config import Config

Config.LOG_TO_FILE = False

from physics import DetectorParams, QuadratureSpec  # noqa: E402
from utils.logger import set_log_level  # noqa: E402


@pytest.fixture(autouse=True)
def restore_log_level():
    """Undo any --log-level change a test makes."""
    level = Config.LOG_LEVEL
    yield
    set_log_level(level)


@pytest.fixture
def fast_spec():
    """Looser tolerances that keep exact-quadrature tests quick."""
    return QuadratureSpec(rel_tol=1e-6, abs_tol=1e-12, n_sigma=6.0)


@pytest.fixture
def fig1a_pair():
    """Fig. 1(a) detector pair at its first grid point."""
    p = Config.FIG1_PRESETS['a']
    return DetectorParams.pair(p['a'], p['omega_min'], p['d_width'], p['s_width'])


@pytest.fixture
def fig1b_pair():
    """Fig. 1(b) detector pair at its first grid point."""
    p = Config.FIG1_PRESETS['b']
    return DetectorParams.pair(p['a'], p['omega_min'], p['d_width'], p['s_width'])
