# tests/conftest.py

import pytest

from principal_trace.fock import build_toeplitz
from principal_trace.symbols import Axis, PlanarSymbol, SwitchFunction
from principal_trace.trace import TruncationScheme

# Las matrices de M = 256 cuestan varios segundos en precisión extendida:
# se construyen una sola vez por sesión (y quedan además en la caché del módulo).
ACCEPTANCE_M = 256


def _pair(profile: SwitchFunction, b: float = 2.0, M: int = ACCEPTANCE_M):
    A = build_toeplitz(PlanarSymbol(profile, Axis.FIRST, b), M)
    B = build_toeplitz(PlanarSymbol(profile, Axis.SECOND, b), M)
    return A, B


@pytest.fixture(scope="session")
def heaviside_pair():
    """Par (A, B) de cortes de Heaviside en 0 con b = 2 y M = 256."""
    return _pair(SwitchFunction.heaviside(0.0))


@pytest.fixture(scope="session")
def ramp_pair():
    """Par (A, B) con rampas lineales en [−1, 1], b = 2, M = 256."""
    return _pair(SwitchFunction.linear_ramp(-1.0, 1.0))


@pytest.fixture(scope="session")
def small_heaviside_pair():
    """Par de Heaviside pequeño (M = 48) para pruebas rápidas."""
    return _pair(SwitchFunction.heaviside(0.0), M=48)


@pytest.fixture
def acceptance_scheme():
    return TruncationScheme(ACCEPTANCE_M, ACCEPTANCE_M // 2)
