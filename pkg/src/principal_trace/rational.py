# src/principal_trace/rational.py

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import PolynomialSyntaxError

# Literales aceptados: "-3/7", "2i", "-1/2i", "(-3/7+1/2i)", "1.25"
_NUMBER = r"(?:\d+\.\d+|\d+(?:/\d+)?)"
_IMAG_ONLY = re.compile(rf"^(?P<sign>[+-]?)(?P<num>{_NUMBER})?i$")
_COMPLEX = re.compile(
    rf"^(?P<re>[+-]?{_NUMBER})(?:(?P<isign>[+-])(?P<inum>{_NUMBER})?i)?$"
)

RationalLike = Union[int, Fraction, "GaussianRational"]


def _as_fraction(value) -> Fraction:
    # Los float quedan fuera a propósito: la aritmética de este módulo es exacta.
    if isinstance(value, bool) or isinstance(value, float):
        raise TypeError(f"Se esperaba un racional exacto, no {type(value).__name__}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    raise TypeError(f"Tipo no soportado para un racional: {type(value).__name__}")


@dataclass(frozen=True)
class GaussianRational:
    """Número complejo con partes real e imaginaria racionales exactas."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "re", _as_fraction(self.re))
        object.__setattr__(self, "im", _as_fraction(self.im))

    @classmethod
    def coerce(cls, value: RationalLike) -> "GaussianRational":
        if isinstance(value, GaussianRational):
            return value
        return cls(_as_fraction(value))

    @classmethod
    def parse(cls, text: str) -> "GaussianRational":
        """Interpreta un literal racional o gaussiano, con o sin paréntesis."""
        raw = text
        body = "".join(text.split())
        if body.startswith("(") and body.endswith(")"):
            body = body[1:-1]
        if not body:
            raise PolynomialSyntaxError(raw, 0, "Literal racional vacío")

        match = _IMAG_ONLY.match(body)
        if match:
            magnitude = Fraction(match.group("num") or 1)
            sign = -1 if match.group("sign") == "-" else 1
            return cls(Fraction(0), sign * magnitude)

        match = _COMPLEX.match(body)
        if not match:
            raise PolynomialSyntaxError(raw, 0, f"Literal racional no válido: '{text}'")
        real = Fraction(match.group("re"))
        imag = Fraction(0)
        if match.group("isign"):
            imag = Fraction(match.group("inum") or 1)
            if match.group("isign") == "-":
                imag = -imag
        return cls(real, imag)

    # --- Aritmética exacta ---

    def __add__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        norm = other.re * other.re + other.im * other.im
        if norm == 0:
            raise ZeroDivisionError("División por cero en GaussianRational")
        return self * GaussianRational(other.re / norm, -other.im / norm)

    def __rtruediv__(self, other):
        return GaussianRational.coerce(other) / self

    def __eq__(self, other):
        try:
            other = GaussianRational.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def to_complex(self) -> complex:
        """Conversión a punto flotante (solo para reportes y comparaciones numéricas)."""
        return complex(float(self.re), float(self.im))

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"

    def __repr__(self):
        return f"GaussianRational({self})"


ZERO = GaussianRational()
ONE = GaussianRational(Fraction(1))
I = GaussianRational(Fraction(0), Fraction(1))
