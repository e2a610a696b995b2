# src/principal_trace/poisson.py

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from types import MappingProxyType
from typing import Iterator, Mapping, Optional, Sequence

from loguru import logger

from .errors import EssentialSpectrumError, PolynomialSyntaxError
from .rational import I, ONE, ZERO, GaussianRational, RationalLike

# Todo este módulo es aritmética exacta: ningún float entra en un polinomio,
# una integral o una predicción de traza.

Monomial = tuple[int, int]


class QPolynomial2:
    """
    Polinomio en dos variables reales x, y con coeficientes racionales gaussianos.
    Los coeficientes nulos nunca se almacenan.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Monomial, RationalLike]] = None):
        clean: dict[Monomial, GaussianRational] = {}
        for monomial, coefficient in (terms or {}).items():
            a, b = monomial
            if not isinstance(a, int) or not isinstance(b, int) or a < 0 or b < 0:
                raise ValueError(f"Exponentes inválidos en el monomio {monomial}")
            value = GaussianRational.coerce(coefficient)
            if value:
                clean[(a, b)] = value
        self._terms = clean

    @classmethod
    def constant(cls, value: RationalLike) -> "QPolynomial2":
        return cls({(0, 0): value})

    @classmethod
    def monomial(cls, a: int, b: int, coefficient: RationalLike = 1) -> "QPolynomial2":
        return cls({(a, b): coefficient})

    @classmethod
    def x(cls) -> "QPolynomial2":
        return cls.monomial(1, 0)

    @classmethod
    def y(cls) -> "QPolynomial2":
        return cls.monomial(0, 1)

    @property
    def terms(self) -> Mapping[Monomial, GaussianRational]:
        return MappingProxyType(self._terms)

    def items(self) -> Iterator[tuple[Monomial, GaussianRational]]:
        return iter(sorted(self._terms.items()))

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def degree(self) -> int:
        return max((a + b for a, b in self._terms), default=-1)

    @property
    def has_real_coefficients(self) -> bool:
        return all(c.is_real for c in self._terms.values())

    @property
    def is_univariate(self) -> bool:
        """Verdadero si solo aparece la primera variable (polinomio en t)."""
        return all(b == 0 for _, b in self._terms)

    def coefficient(self, a: int, b: int) -> GaussianRational:
        return self._terms.get((a, b), ZERO)

    # --- Aritmética ---

    @staticmethod
    def _coerce(other) -> "QPolynomial2":
        if isinstance(other, QPolynomial2):
            return other
        return QPolynomial2.constant(GaussianRational.coerce(other))

    def __add__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        result = dict(self._terms)
        for monomial, coefficient in other._terms.items():
            result[monomial] = result.get(monomial, ZERO) + coefficient
        return QPolynomial2(result)

    __radd__ = __add__

    def __neg__(self):
        return QPolynomial2({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        result: dict[Monomial, GaussianRational] = {}
        for (a1, b1), c1 in self._terms.items():
            for (a2, b2), c2 in other._terms.items():
                key = (a1 + a2, b1 + b2)
                result[key] = result.get(key, ZERO) + c1 * c2
        return QPolynomial2(result)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("Solo se admiten potencias enteras no negativas")
        result = QPolynomial2.constant(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other):
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    # --- Cálculo ---

    def dx(self) -> "QPolynomial2":
        return QPolynomial2(
            {(a - 1, b): c * a for (a, b), c in self._terms.items() if a > 0}
        )

    def dy(self) -> "QPolynomial2":
        return QPolynomial2(
            {(a, b - 1): c * b for (a, b), c in self._terms.items() if b > 0}
        )

    def compose(self, inner: "QPolynomial2") -> "QPolynomial2":
        """
        Sustituye t := inner en un polinomio de una variable (r ∘ s).
        Expansión exacta por Horner, sin puntos de evaluación.
        """
        if not self.is_univariate:
            raise ValueError("compose() requiere un polinomio de una sola variable")
        result = QPolynomial2()
        for power in range(self.degree, -1, -1):
            result = result * inner + self.coefficient(power, 0)
        return result

    # --- Representación ---

    def to_string(self, variables: Sequence[str] = ("x", "y")) -> str:
        if self.is_zero:
            return "0"
        ordered = sorted(self._terms.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][0]))
        pieces = []
        for index, ((a, b), c) in enumerate(ordered):
            sign, body = _format_term(c, a, b, variables)
            if index == 0:
                pieces.append(body if sign == "+" else f"-{body}")
            else:
                pieces.append(f" {sign} {body}")
        return "".join(pieces)

    def __str__(self):
        return self.to_string()

    def __repr__(self):
        return f"QPolynomial2('{self}')"


def _format_term(c: GaussianRational, a: int, b: int, variables: Sequence[str]):
    factors = []
    for name, power in zip(variables, (a, b)):
        if power == 1:
            factors.append(name)
        elif power > 1:
            factors.append(f"{name}^{power}")
    if c.is_real:
        sign = "-" if c.re < 0 else "+"
        magnitude = abs(c.re)
        coefficient = None if (magnitude == 1 and factors) else str(magnitude)
    else:
        sign = "+"
        im_sign = "+" if c.im >= 0 else "-"
        coefficient = f"({c.re}{im_sign}{abs(c.im)}i)"
    if coefficient is not None:
        factors.insert(0, coefficient)
    return sign, "*".join(factors)


# ==============================================================================
# Gramática de entrada: sumas de términos c*x^a*y^b
# ==============================================================================
class _PolynomialParser:
    def __init__(self, text: str, variables: Sequence[str]):
        self.text = text
        self.variables = tuple(variables)
        self.pos = 0

    def _skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def _peek(self) -> str:
        self._skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def _fail(self, message: str, position: Optional[int] = None):
        raise PolynomialSyntaxError(
            self.text, self.pos if position is None else position, message
        )

    def parse(self) -> QPolynomial2:
        if not self._peek():
            self._fail("Polinomio vacío")
        result = QPolynomial2()
        sign = 1
        if self._peek() in "+-":
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
        result = result + self._term() * sign
        while self._peek() in ("+", "-"):
            sign = -1 if self.text[self.pos] == "-" else 1
            self.pos += 1
            result = result + self._term() * sign
        if self._peek():
            self._fail(f"Carácter inesperado '{self.text[self.pos]}'")
        return result

    def _term(self) -> QPolynomial2:
        coefficient = ONE
        exponents = [0, 0]
        coefficient = self._factor(coefficient, exponents)
        while self._peek() == "*":
            self.pos += 1
            coefficient = self._factor(coefficient, exponents)
        return QPolynomial2.monomial(exponents[0], exponents[1], coefficient)

    def _factor(self, coefficient: GaussianRational, exponents: list[int]) -> GaussianRational:
        char = self._peek()
        start = self.pos
        if char == "(":
            end = self.text.find(")", start)
            if end < 0:
                self._fail("Paréntesis sin cerrar")
            try:
                value = GaussianRational.parse(self.text[start : end + 1])
            except PolynomialSyntaxError as e:
                self._fail(e.message, start)
            self.pos = end + 1
            return coefficient * value
        if char.isdigit():
            while self.pos < len(self.text) and (
                self.text[self.pos].isdigit() or self.text[self.pos] in "./"
            ):
                self.pos += 1
            literal = self.text[start : self.pos]
            if self.pos < len(self.text) and self.text[self.pos] == "i":
                self.pos += 1
                literal += "i"
            try:
                value = GaussianRational.parse(literal)
            except PolynomialSyntaxError:
                self._fail(f"Número no válido '{literal}'", start)
            return coefficient * value
        if char == "i" and "i" not in self.variables:
            self.pos += 1
            return coefficient * I
        if char in self.variables:
            index = self.variables.index(char)
            self.pos += 1
            power = 1
            if self._peek() == "^":
                self.pos += 1
                if self._peek() == "-":
                    self._fail(
                        "Exponente negativo: solo se admite en símbolos de Laurent"
                    )
                digits_start = self.pos
                while self.pos < len(self.text) and self.text[self.pos].isdigit():
                    self.pos += 1
                if digits_start == self.pos:
                    self._fail("Se esperaba un exponente entero")
                power = int(self.text[digits_start : self.pos])
            exponents[index] += power
            return coefficient
        if not char:
            self._fail("Fin inesperado del polinomio")
        self._fail(f"Se esperaba un coeficiente o una variable, no '{char}'")


def parse_polynomial(text: str, variables: Sequence[str] = ("x", "y")) -> QPolynomial2:
    """Interpreta `c*x^a*y^b + ...`; con variables=("t",) produce un polinomio en t."""
    if not 1 <= len(variables) <= 2:
        raise ValueError("Se admiten una o dos variables")
    return _PolynomialParser(text, variables).parse()


# ==============================================================================
# Corchete de Poisson e integrales exactas
# ==============================================================================
def poisson_bracket(p: QPolynomial2, q: QPolynomial2) -> QPolynomial2:
    """{p,q} = ∂p/∂x ∂q/∂y − ∂p/∂y ∂q/∂x."""
    return p.dx() * q.dy() - p.dy() * q.dx()


@dataclass(frozen=True)
class ExactValue:
    """Valor exacto rational_part + pi_part·π."""

    rational_part: GaussianRational = ZERO
    pi_part: GaussianRational = ZERO

    @property
    def has_pi_content(self) -> bool:
        return bool(self.pi_part)

    def to_complex(self) -> complex:
        return self.rational_part.to_complex() + self.pi_part.to_complex() * math.pi

    def __str__(self):
        if not self.pi_part:
            return str(self.rational_part)
        if not self.rational_part:
            return f"{self.pi_part}·π"
        return f"{self.rational_part} + {self.pi_part}·π"


def _double_factorial(n: int) -> int:
    return math.prod(range(n, 0, -2)) if n > 0 else 1


def integrate_unit_square(p: QPolynomial2) -> ExactValue:
    """∫_S p sobre S = [0,1]², regla ∫ x^a y^b = 1/((a+1)(b+1)). Nunca aparece π."""
    total = ZERO
    for (a, b), c in p.terms.items():
        total = total + c * Fraction(1, (a + 1) * (b + 1))
    return ExactValue(rational_part=total)


def integrate_unit_disc(p: QPolynomial2) -> ExactValue:
    """∫_D x^a y^b = 2π (a−1)!!(b−1)!!/(a+b+2)!! si a, b son pares; 0 si no."""
    total = ZERO
    for (a, b), c in p.terms.items():
        if a % 2 or b % 2:
            continue
        weight = Fraction(
            2 * _double_factorial(a - 1) * _double_factorial(b - 1),
            _double_factorial(a + b + 2),
        )
        total = total + c * weight
    return ExactValue(pi_part=total)


class Region(str, Enum):
    UNIT_SQUARE = "unit_square"
    UNIT_DISC = "unit_disc"


def integrate_over(region: Region, p: QPolynomial2) -> ExactValue:
    if region == Region.UNIT_SQUARE:
        return integrate_unit_square(p)
    return integrate_unit_disc(p)


@dataclass(frozen=True)
class PrincipalFunction:
    """G_{A,B} = multiplier · χ_region."""

    multiplier: int
    region: Region

    def __post_init__(self):
        if isinstance(self.multiplier, bool) or not isinstance(self.multiplier, int):
            raise ValueError("El multiplicador de la función principal debe ser entero")
        object.__setattr__(self, "region", Region(self.region))

    def __str__(self):
        return f"{self.multiplier}·χ_{self.region.value}"


@dataclass(frozen=True)
class ExactTrace:
    """
    Predicción exacta de una traza: rational_part + per_two_pi_i/(2πi).
    Para la región cuadrada rational_part es siempre cero, así que
    2πi·Tr = per_two_pi_i es un racional (gaussiano) exacto.
    """

    per_two_pi_i: GaussianRational = ZERO
    rational_part: GaussianRational = ZERO

    @property
    def is_rational_multiple(self) -> bool:
        return not self.rational_part

    def to_complex(self) -> complex:
        return self.rational_part.to_complex() + self.per_two_pi_i.to_complex() / (
            2j * math.pi
        )

    def __str__(self):
        pieces = []
        if self.per_two_pi_i:
            pieces.append(f"{self.per_two_pi_i}/(2πi)")
        if self.rational_part:
            pieces.append(str(self.rational_part))
        return " + ".join(pieces) if pieces else "0"


def chhp_prediction(
    G: PrincipalFunction, p: QPolynomial2, q: QPolynomial2
) -> ExactTrace:
    """
    Tr[p(A,B), q(A,B)] = (i/2π) ∫ {p,q} G dμ con G = n·χ_region.
    El factor π del disco se cancela exactamente.
    """
    integral = integrate_over(G.region, poisson_bracket(p, q))
    n = G.multiplier
    # (i/2π)·n·R = −n·R/(2πi) ;  (i/2π)·n·Π·π = i·n·Π/2
    prediction = ExactTrace(
        per_two_pi_i=integral.rational_part * (-n),
        rational_part=I * integral.pi_part * Fraction(n, 2),
    )
    logger.debug(f"Predicción CHHP para G={G}: ∫{{p,q}} = {integral} -> {prediction}")
    return prediction


_BOUNDARY_TOL = 1e-12


def index_at(G: PrincipalFunction, z: complex) -> int:
    """Índice de Fredholm de A+iB−z fuera del espectro esencial (borde de la región)."""
    z = complex(z)
    if G.region == Region.UNIT_SQUARE:
        x, y = z.real, z.imag
        closed = -_BOUNDARY_TOL <= x <= 1 + _BOUNDARY_TOL and -_BOUNDARY_TOL <= y <= 1 + _BOUNDARY_TOL
        interior = _BOUNDARY_TOL < x < 1 - _BOUNDARY_TOL and _BOUNDARY_TOL < y < 1 - _BOUNDARY_TOL
    else:
        radius = abs(z)
        closed = radius <= 1 + _BOUNDARY_TOL
        interior = radius < 1 - _BOUNDARY_TOL
    if closed and not interior:
        raise EssentialSpectrumError(
            f"z={z} está sobre el borde de {G.region.value}: el índice no está definido"
        )
    return G.multiplier if interior else 0


def collapsing_check(r1: QPolynomial2, r2: QPolynomial2, s: QPolynomial2) -> bool:
    """Propiedad de colapso: {r1∘s, r2∘s} es el polinomio cero."""
    return poisson_bracket(r1.compose(s), r2.compose(s)).is_zero
