# src/principal_trace/symbols.py

import math
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numpy as np
from loguru import logger
from scipy.integrate import quad
from scipy.special import erf

# Fuera de [center − 6w, center + 6w] la rampa erf queda fijada a 0 o 1:
# erfc(6) < 1e-16, por debajo de la resolución de un double.
ERF_RAMP_HALF_WIDTH = 6.0


class SwitchKind(str, Enum):
    HEAVISIDE = "heaviside"
    LINEAR_RAMP = "linear_ramp"
    ERF_RAMP = "erf_ramp"


class Axis(str, Enum):
    FIRST = "first"
    SECOND = "second"


def _require_finite(**values: float):
    for name, value in values.items():
        if not math.isfinite(value):
            raise ValueError(f"Parámetro no finito en la función de corte: {name}={value}")


@dataclass(frozen=True)
class SwitchFunction:
    """
    Perfil de corte Λ: no decreciente, con valores en [0, 1], igual a 0 a la
    izquierda de su intervalo de interpolación y a 1 a la derecha.
    """

    kind: SwitchKind
    parameters: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", SwitchKind(self.kind))
        params = tuple(float(p) for p in self.parameters)
        object.__setattr__(self, "parameters", params)
        expected = {SwitchKind.HEAVISIDE: 1, SwitchKind.LINEAR_RAMP: 2, SwitchKind.ERF_RAMP: 2}
        if len(params) != expected[self.kind]:
            raise ValueError(f"{self.kind.value} necesita {expected[self.kind]} parámetros")
        _require_finite(**{f"p{i}": p for i, p in enumerate(params)})
        if self.kind == SwitchKind.LINEAR_RAMP and not params[0] < params[1]:
            raise ValueError(f"linear_ramp requiere c < d (c={params[0]}, d={params[1]})")
        if self.kind == SwitchKind.ERF_RAMP and not params[1] > 0:
            raise ValueError(f"erf_ramp requiere width > 0 (width={params[1]})")

    @classmethod
    def heaviside(cls, a: float = 0.0) -> "SwitchFunction":
        return cls(SwitchKind.HEAVISIDE, (a,))

    @classmethod
    def linear_ramp(cls, c: float, d: float) -> "SwitchFunction":
        return cls(SwitchKind.LINEAR_RAMP, (c, d))

    @classmethod
    def erf_ramp(cls, center: float, width: float) -> "SwitchFunction":
        return cls(SwitchKind.ERF_RAMP, (center, width))

    @property
    def interpolation_interval(self) -> tuple[float, float]:
        if self.kind == SwitchKind.HEAVISIDE:
            (a,) = self.parameters
            return a, a
        if self.kind == SwitchKind.LINEAR_RAMP:
            return self.parameters
        center, width = self.parameters
        return center - ERF_RAMP_HALF_WIDTH * width, center + ERF_RAMP_HALF_WIDTH * width

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Puntos donde el perfil deja de ser analítico (para partir cuadraturas)."""
        c, d = self.interpolation_interval
        return (c,) if c == d else (c, d)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == SwitchKind.HEAVISIDE:
            (a,) = self.parameters
            return np.heaviside(x - a, 0.5)
        if self.kind == SwitchKind.LINEAR_RAMP:
            c, d = self.parameters
            return np.clip((x - c) / (d - c), 0.0, 1.0)
        center, width = self.parameters
        lo, hi = self.interpolation_interval
        value = 0.5 * (1.0 + erf((x - center) / width))
        return np.where(x < lo, 0.0, np.where(x > hi, 1.0, value))

    def rescaled(self, scale: float) -> "SwitchFunction":
        """Perfil x ↦ Λ(scale·x); todos los parámetros se dividen por scale."""
        if not scale > 0:
            raise ValueError("La escala debe ser positiva")
        return replace(self, parameters=tuple(p / scale for p in self.parameters))

    def __str__(self):
        args = ",".join(f"{p:g}" for p in self.parameters)
        return f"{self.kind.value}({args})"


@dataclass(frozen=True)
class PlanarSymbol:
    """Símbolo f(u) = Λ(u₁) (eje first) o Λ(u₂) (eje second) con campo b."""

    profile: SwitchFunction
    axis: Axis = Axis.FIRST
    b: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "axis", Axis(self.axis))
        _require_finite(b=self.b)
        if not self.b > 0:
            raise ValueError(f"La intensidad de campo debe ser positiva (b={self.b})")

    def at_unit_field(self) -> "PlanarSymbol":
        """
        Símbolo equivalente con b = 2: la matriz con campo b de Λ(x) es la
        matriz con b = 2 de Λ(x·√(2/b)).
        """
        if self.b == 2.0:
            return self
        scale = math.sqrt(2.0 / self.b)
        return PlanarSymbol(self.profile.rescaled(scale), self.axis, 2.0)

    def __call__(self, z):
        """Valor del símbolo en puntos complejos u = u₁ + i u₂ (solo para b = 2)."""
        z = np.asarray(z)
        coordinate = z.real if self.axis == Axis.FIRST else z.imag
        return self.profile(coordinate)

    def __str__(self):
        return f"{self.profile} axis={self.axis.value} b={self.b:g}"


def smooth_symbol(profile: SwitchFunction) -> Callable:
    """
    Perfil suavizado por el calor Λ̃(u) = (1/√π)∫Λ(x)e^{−(x−u)²}dx, en forma cerrada.
    """
    if profile.kind == SwitchKind.HEAVISIDE:
        (a,) = profile.parameters
        return lambda u: 0.5 * (1.0 + erf(np.asarray(u, dtype=float) - a))

    if profile.kind == SwitchKind.ERF_RAMP:
        center, width = profile.parameters
        sigma = math.sqrt(1.0 + width * width)
        return lambda u: 0.5 * (1.0 + erf((np.asarray(u, dtype=float) - center) / sigma))

    c, d = profile.parameters

    def _primitive(t):
        # t + E(t) con E(t) = t·erf(t) + e^{−t²}/√π
        return t + t * erf(t) + np.exp(-t * t) / math.sqrt(math.pi)

    def _linear(u):
        u = np.asarray(u, dtype=float)
        return (_primitive(u - c) - _primitive(u - d)) / (2.0 * (d - c))

    return _linear


def switch_integral_check(profile: SwitchFunction, a: float) -> float:
    """∫ (Λ(x + a) − Λ(x)) dx, que debe ser igual a a para cualquier perfil."""
    _require_finite(a=a)
    lo, hi = profile.interpolation_interval
    left = min(lo, lo - a) - 1.0
    right = max(hi, hi - a) + 1.0
    points = sorted({lo, hi, lo - a, hi - a})

    def integrand(x):
        return float(profile(x + a) - profile(x))

    value, abserr = quad(integrand, left, right, points=points, limit=200, epsabs=1e-13, epsrel=1e-12)
    logger.debug(f"∫(Λ(x+{a})−Λ(x)) para {profile}: {value:.15g} (error {abserr:.1e})")
    return value
