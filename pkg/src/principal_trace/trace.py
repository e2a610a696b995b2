# src/principal_trace/trace.py

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np
from loguru import logger

from .fock import ToeplitzMatrix
from .poisson import QPolynomial2

ALPHABET = frozenset("AB")


@dataclass(frozen=True)
class TruncationScheme:
    """Corte exterior M del operador y ventana interior N de la traza."""

    M: int
    N: Optional[int] = None
    extrapolate: bool = False

    def __post_init__(self):
        if self.M < 1:
            raise ValueError(f"M debe ser ≥ 1 (M={self.M})")
        if self.N is None:
            object.__setattr__(self, "N", max(1, self.M // 2))
        if not 1 <= self.N <= self.M:
            raise ValueError(f"La ventana debe cumplir 1 ≤ N ≤ M (N={self.N}, M={self.M})")

    @property
    def is_full_window(self) -> bool:
        return self.N == self.M


@dataclass(frozen=True)
class OperatorWord:
    letters: str

    def __post_init__(self):
        if not self.letters:
            raise ValueError("Una palabra de operadores no puede estar vacía")
        unknown = set(self.letters) - ALPHABET
        if unknown:
            raise ValueError(f"Letras fuera del alfabeto {{A, B}}: {sorted(unknown)}")

    def __str__(self):
        return self.letters


@dataclass(frozen=True)
class WeightedWord:
    coefficient: complex
    word: OperatorWord


@dataclass(frozen=True)
class TraceReport:
    value: complex
    M: int
    N: int
    tail_estimate: float
    per_index_diagonal: tuple[complex, ...] = field(repr=False)

    @property
    def two_pi_i_value(self) -> complex:
        return 2j * math.pi * self.value

    def to_dict(self) -> dict:
        return {
            "value_re": float(self.value.real),
            "value_im": float(self.value.imag),
            "M": self.M,
            "N": self.N,
            "tail_estimate": float(self.tail_estimate),
            "diagonal": [[float(d.real), float(d.imag)] for d in self.per_index_diagonal],
        }


def _as_weighted(words: Sequence) -> list[WeightedWord]:
    weighted = []
    for item in words:
        if isinstance(item, WeightedWord):
            weighted.append(item)
        elif isinstance(item, OperatorWord):
            weighted.append(WeightedWord(1.0, item))
        else:
            weighted.append(WeightedWord(1.0, OperatorWord(str(item))))
    return weighted


def _word_diagonal(word: OperatorWord, letters: dict, rows: int) -> np.ndarray:
    """Primeras `rows` entradas de la diagonal del producto, sin formar la matriz entera."""
    if len(word.letters) == 1:
        return np.diagonal(letters[word.letters])[:rows].copy()
    partial = letters[word.letters[0]][:rows, :]
    for letter in word.letters[1:-1]:
        partial = partial @ letters[letter]
    return np.einsum("ij,ji->i", partial, letters[word.letters[-1]][:, :rows])


def windowed_trace(
    word_plus: Sequence,
    word_minus: Sequence,
    A: ToeplitzMatrix,
    B: ToeplitzMatrix,
    scheme: TruncationScheme,
) -> TraceReport:
    """
    Suma parcial Σ_{m<N} Z_mm con Z = Σ(word_plus) − Σ(word_minus) formada con los
    bloques M×M principales de A y B.
    """
    if A.M != B.M:
        raise ValueError(f"Dimensiones distintas: A es {A.M}×{A.M}, B es {B.M}×{B.M}")
    if A.M < scheme.M:
        raise ValueError(f"Las matrices ({A.M}) son menores que el corte M={scheme.M}")
    M, N = scheme.M, scheme.N
    letters = {"A": A.entries[:M, :M], "B": B.entries[:M, :M]}

    diagonal = np.zeros(N, dtype=complex)
    for sign, words in ((1.0, word_plus), (-1.0, word_minus)):
        for item in _as_weighted(words):
            diagonal += sign * item.coefficient * _word_diagonal(item.word, letters, N)

    value = complex(np.sum(diagonal))
    tail = abs(diagonal[N - 1]) * N
    if scheme.is_full_window:
        logger.warning(
            f"Ventana completa N=M={M}: la traza de un conmutador de matrices finitas "
            f"es idénticamente cero (trampa de ciclicidad)"
        )
    logger.debug(f"Traza con ventana M={M}, N={N}: {value:.12g} (cola ≈ {tail:.2e})")
    return TraceReport(value, M, N, tail, tuple(complex(d) for d in diagonal))


def commutator_trace(A: ToeplitzMatrix, B: ToeplitzMatrix, scheme: TruncationScheme) -> TraceReport:
    return windowed_trace([OperatorWord("AB")], [OperatorWord("BA")], A, B, scheme)


def word_power_trace(
    n: int, A: ToeplitzMatrix, B: ToeplitzMatrix, scheme: TruncationScheme
) -> TraceReport:
    """Tr((AB)ⁿ − (BA)ⁿ): asimetría quiral de orden n."""
    if n < 1:
        raise ValueError(f"El orden de la palabra debe ser ≥ 1 (n={n})")
    return windowed_trace([OperatorWord("AB" * n)], [OperatorWord("BA" * n)], A, B, scheme)


class Ordering(str, Enum):
    LEFT_NORMAL = "left_normal"
    RIGHT_NORMAL = "right_normal"


_ORDERINGS: dict[Ordering, Callable[[int, int], str]] = {
    Ordering.LEFT_NORMAL: lambda a, b: "A" * a + "B" * b,
    Ordering.RIGHT_NORMAL: lambda a, b: "B" * b + "A" * a,
}


def polynomial_words(p: QPolynomial2, ordering: Ordering) -> list[tuple[complex, str]]:
    """Monomios c·x^a y^b como (c, palabra); el término constante da la palabra vacía."""
    to_word = _ORDERINGS[ordering]
    return [(c.to_complex(), to_word(a, b)) for (a, b), c in p.items()]


def word_trace_for_polynomials(
    p: QPolynomial2,
    q: QPolynomial2,
    ordering,
    A: ToeplitzMatrix,
    B: ToeplitzMatrix,
    scheme: TruncationScheme,
) -> TraceReport:
    """Traza con ventana de [p(A,B), q(A,B)] bajo la ordenación elegida."""
    try:
        ordering = Ordering(ordering)
    except ValueError:
        raise ValueError(f"Ordenación no soportada: {ordering}") from None
    if not (p.has_real_coefficients and q.has_real_coefficients):
        raise ValueError("Los polinomios de la traza numérica deben tener coeficientes reales")

    plus, minus = [], []
    for cp, wp in polynomial_words(p, ordering):
        for cq, wq in polynomial_words(q, ordering):
            # Las constantes conmutan con todo: su contribución al conmutador es nula.
            if not wp or not wq:
                continue
            weight = cp * cq
            plus.append(WeightedWord(weight, OperatorWord(wp + wq)))
            minus.append(WeightedWord(weight, OperatorWord(wq + wp)))
    logger.debug(f"[p,q] desarrollado en {len(plus)} pares de palabras ({ordering.value})")
    return windowed_trace(plus, minus, A, B, scheme)


def hall_conductance(A: ToeplitzMatrix, B: ToeplitzMatrix, scheme: TruncationScheme) -> float:
    """σ = −i·Tr[A, B]; el residuo imaginario se registra como diagnóstico."""
    report = commutator_trace(A, B, scheme)
    sigma = -1j * report.value
    if abs(sigma.imag) > 1e-8:
        logger.warning(f"Residuo imaginario en la conductancia de Hall: {sigma.imag:.3e}")
    else:
        logger.debug(f"Residuo imaginario de la conductancia: {sigma.imag:.1e}")
    return float(sigma.real)


@dataclass(frozen=True)
class ExtrapolationResult:
    value: complex
    error_estimate: float


# Por debajo de este cociente |d₂/d₁| la contracción es más rápida que geométrica
# (caso típico al duplicar M con núcleos gaussianos) y la corrección de Aitken
# queda por debajo de lo que el modelo geométrico puede resolver.
SUPERGEOMETRIC_RATIO = 0.05
ROUNDING_FACTOR = 64


def richardson_extrapolate(values: Sequence[tuple[int, complex]]) -> ExtrapolationResult:
    """
    Límite M → ∞ suponiendo error geométrico: Δ² de Aitken sobre las tres
    últimas muestras.

    Se devuelve la última muestra cuando el modelo no aplica: diferencias que no
    se contraen, contracción lenta (corrección mayor que |d₂|), contracción más
    rápida que geométrica o |d₂| al nivel del redondeo. La cota de error es
    entonces la corrección descartada, o |d₂| si no llega a calcularse.
    """
    if len(values) < 2:
        raise ValueError("Se necesitan al menos 2 muestras para extrapolar")
    ordered = sorted(values, key=lambda item: item[0])
    sizes = [m for m, _ in ordered]
    if len(set(sizes)) != len(sizes):
        raise ValueError("Las muestras deben tener M distintos")
    samples = [complex(v) for _, v in ordered]

    if len(samples) == 2:
        return ExtrapolationResult(samples[-1], abs(samples[-1] - samples[-2]))

    x0, x1, x2 = samples[-3:]
    d1, d2 = x1 - x0, x2 - x1
    if d1 == 0 or d2 == 0:
        return ExtrapolationResult(x2, abs(d2))
    if abs(d2) <= ROUNDING_FACTOR * np.finfo(float).eps * abs(x2):
        logger.debug(f"|d₂| = {abs(d2):.1e} al nivel del redondeo; se devuelve la última muestra")
        return ExtrapolationResult(x2, abs(d2))
    denominator = d2 - d1
    ratio = abs(d2 / d1)
    if ratio >= 1 or denominator == 0:
        logger.warning(
            f"Las diferencias no se contraen (cociente {ratio:.3f}); se devuelve la última muestra"
        )
        return ExtrapolationResult(x2, abs(d2))
    correction = d2 * d2 / denominator
    if abs(correction) > abs(d2):
        logger.warning(
            f"Contracción lenta (cociente {ratio:.3f}): la corrección {abs(correction):.3e} "
            f"supera |d₂|; se devuelve la última muestra"
        )
        return ExtrapolationResult(x2, abs(correction))
    if ratio < SUPERGEOMETRIC_RATIO:
        logger.debug(
            f"Contracción más rápida que geométrica (cociente {ratio:.1e}); se devuelve la última muestra"
        )
        return ExtrapolationResult(x2, abs(correction))
    return ExtrapolationResult(x2 - correction, abs(correction))


@dataclass(frozen=True)
class SweepStep:
    M: int
    report: TraceReport


def convergence_sweep(
    evaluate: Callable[[TruncationScheme], TraceReport],
    scheme: TruncationScheme,
    start_M: int = 64,
) -> tuple[list[SweepStep], Optional[ExtrapolationResult]]:
    """
    Evalúa la traza con M = start_M, 2·start_M, … hasta scheme.M manteniendo N/M.
    Con scheme.extrapolate y al menos dos pasos, añade la extrapolación.
    """
    steps = []
    sizes = []
    size = min(start_M, scheme.M)
    while size < scheme.M:
        sizes.append(size)
        size *= 2
    sizes.append(scheme.M)

    for M in sizes:
        N = M if scheme.is_full_window else max(1, (scheme.N * M) // scheme.M)
        report = evaluate(TruncationScheme(M, N, scheme.extrapolate))
        logger.info(f"Paso del barrido M={M}, N={N}: 2πi·traza = {report.two_pi_i_value:.10g}")
        steps.append(SweepStep(M, report))

    extrapolation = None
    if scheme.extrapolate and len(steps) >= 2:
        extrapolation = richardson_extrapolate([(s.M, s.report.value) for s in steps])
    return steps, extrapolation
