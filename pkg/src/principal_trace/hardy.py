# src/principal_trace/hardy.py

from dataclasses import dataclass, field
from fractions import Fraction
from types import MappingProxyType
from typing import Mapping, Optional

from loguru import logger

from .errors import PolynomialSyntaxError
from .poisson import QPolynomial2, integrate_unit_disc, poisson_bracket
from .rational import I, ZERO, GaussianRational, RationalLike

# Convención de Toeplitz: T_f(m, n) = coeficiente(m − n), de modo que T_z es el
# desplazamiento unilateral S y Tr[T_z̄, T_z] = Tr[S*, S] = +1.


@dataclass(frozen=True)
class LaurentSymbol:
    """Polinomio de Laurent f(z) = Σ c_k z^k sobre el círculo unidad."""

    coefficients: Mapping[int, GaussianRational] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, c in self.coefficients.items():
            if isinstance(k, bool) or not isinstance(k, int):
                raise ValueError(f"Potencia de Laurent no entera: {k!r}")
            value = GaussianRational.coerce(c)
            if value:
                clean[k] = value
        object.__setattr__(self, "coefficients", MappingProxyType(clean))

    @classmethod
    def monomial(cls, k: int, coefficient: RationalLike = 1) -> "LaurentSymbol":
        return cls({k: coefficient})

    @classmethod
    def parse(cls, text: str) -> "LaurentSymbol":
        """Formato `k:coef` separado por comas, p. ej. `1:1, -1:1/2` o `2:(1/3-2i)`."""
        coefficients: dict[int, GaussianRational] = {}
        offset = 0
        if not text.strip():
            raise PolynomialSyntaxError(text, 0, "Símbolo de Laurent vacío")
        for chunk in text.split(","):
            position = offset + (len(chunk) - len(chunk.lstrip()))
            offset += len(chunk) + 1
            power_text, sep, coefficient_text = chunk.partition(":")
            if not sep:
                raise PolynomialSyntaxError(text, position, "Se esperaba `k:coeficiente`")
            try:
                power = int(power_text.strip())
            except ValueError:
                raise PolynomialSyntaxError(
                    text, position, f"Potencia no entera '{power_text.strip()}'"
                ) from None
            try:
                value = GaussianRational.parse(coefficient_text)
            except PolynomialSyntaxError as e:
                coefficient_position = position + len(power_text) + 1
                raise PolynomialSyntaxError(text, coefficient_position, e.message) from None
            coefficients[power] = coefficients.get(power, ZERO) + value
        return cls(coefficients)

    @property
    def bandwidth(self) -> int:
        return max((abs(k) for k in self.coefficients), default=0)

    def coefficient(self, k: int) -> GaussianRational:
        return self.coefficients.get(k, ZERO)

    def __str__(self):
        if not self.coefficients:
            return "0:0"
        return ", ".join(f"{k}:{self.coefficients[k]}" for k in sorted(self.coefficients))


@dataclass(frozen=True)
class HardyToeplitzMatrix:
    """Truncación L×L de T_f en H²(𝕋): entrada (m, n) = coeficiente(m − n)."""

    symbol: LaurentSymbol
    size: int

    def __post_init__(self):
        if self.size < 1:
            raise ValueError("El tamaño de una matriz de Hardy debe ser ≥ 1")

    def entry(self, m: int, n: int) -> GaussianRational:
        return self.symbol.coefficient(m - n)

    def product_diagonal(self, other: "HardyToeplitzMatrix", window: int) -> list[GaussianRational]:
        """Diagonal exacta de (self @ other) para los índices m < window, usando la banda."""
        if other.size != self.size:
            raise ValueError("Las matrices de Hardy deben tener el mismo tamaño")
        band = other.symbol.bandwidth
        diagonal = []
        for m in range(window):
            total = ZERO
            for k in range(max(0, m - band), min(self.size, m + band + 1)):
                left = self.entry(m, k)
                if left:
                    total = total + left * other.entry(k, m)
            diagonal.append(total)
        return diagonal


def exact_commutator_trace(
    f: LaurentSymbol, g: LaurentSymbol, size: Optional[int] = None
) -> GaussianRational:
    """
    Tr[T_f, T_g] exacto. El conmutador solo tiene entradas no nulas con
    min(m, n) < K_f + K_g, así que basta una ventana L = 2(K_f + K_g) + 2;
    las matrices se rellenan K_f + K_g filas más allá de la ventana para que
    la diagonal de los productos coincida con la del operador infinito.
    """
    reach = f.bandwidth + g.bandwidth
    minimal = 2 * reach + 2
    window = minimal if size is None else size
    if window < minimal:
        raise ValueError(f"La ventana {window} es menor que el mínimo exacto {minimal}")
    padded = window + reach
    T_f = HardyToeplitzMatrix(f, padded)
    T_g = HardyToeplitzMatrix(g, padded)
    fg = T_f.product_diagonal(T_g, window)
    gf = T_g.product_diagonal(T_f, window)
    trace = ZERO
    for a, b in zip(fg, gf):
        trace = trace + (a - b)
    logger.debug(f"Tr[T_f,T_g] con L={window} (relleno {reach}): {trace}")
    return trace


def harmonic_extension(f: LaurentSymbol) -> QPolynomial2:
    """Extensión al disco: z^k ↦ (x+iy)^k y z^{−k} ↦ (x−iy)^k."""
    z = QPolynomial2({(1, 0): 1, (0, 1): I})
    zbar = QPolynomial2({(1, 0): 1, (0, 1): -I})
    result = QPolynomial2()
    for k, c in f.coefficients.items():
        base = z if k >= 0 else zbar
        result = result + (base ** abs(k)) * c
    return result


def alternative_extension(f: LaurentSymbol) -> QPolynomial2:
    """Otra extensión con los mismos valores en |z| = 1: z^{−k} ↦ (x−iy)^k (x²+y²)."""
    z = QPolynomial2({(1, 0): 1, (0, 1): I})
    zbar = QPolynomial2({(1, 0): 1, (0, 1): -I})
    radius_sq = QPolynomial2({(2, 0): 1, (0, 2): 1})
    result = QPolynomial2()
    for k, c in f.coefficients.items():
        term = z ** k if k >= 0 else (zbar ** (-k)) * radius_sq
        result = result + term * c
    return result


_EXTENSIONS = {"harmonic": harmonic_extension, "alternative": alternative_extension}


@dataclass(frozen=True)
class HeltonHoweResult:
    lhs: GaussianRational
    rhs: GaussianRational
    equal: bool


def helton_howe_check(
    f: LaurentSymbol, g: LaurentSymbol, extension: str = "harmonic"
) -> HeltonHoweResult:
    """
    Compara Tr[T_f, T_g] con (1/2πi)∫_D {f̃, g̃}. La integral del disco es Π·π,
    y (1/2πi)·Π·π = −i·Π/2: el factor π se cancela sin redondeo.
    """
    try:
        extend = _EXTENSIONS[extension]
    except KeyError:
        raise ValueError(f"Extensión desconocida: {extension}") from None

    lhs = exact_commutator_trace(f, g)
    integral = integrate_unit_disc(poisson_bracket(extend(f), extend(g)))
    # Para polinomios la integral del disco no tiene parte racional.
    rhs = integral.pi_part * (-I) * Fraction(1, 2)
    result = HeltonHoweResult(lhs=lhs, rhs=rhs, equal=(lhs == rhs))
    if not result.equal:
        logger.error(f"Helton–Howe no se cumple para f={f}, g={g}: {lhs} ≠ {rhs}")
    return result
