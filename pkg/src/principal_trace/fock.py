# src/principal_trace/fock.py

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Optional

import mpmath
import numpy as np
from loguru import logger
from scipy.special import gammaln
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from .errors import PrecisionLossError, ResourceCapError
from .quadrature import (
    compressed_matrix,
    fock_basis_values,
    planar_grid,
    shift_weight_quadrature,
    truncation_radius,
)
from .symbols import Axis, PlanarSymbol, SwitchFunction, SwitchKind

VALIDATION_TOLERANCE = 1e-9
PRECISION_MARGIN_BITS = 64


# ==============================================================================
# Núcleo reproductor
# ==============================================================================
@dataclass(frozen=True)
class KernelPoint:
    z: complex
    w: complex


def wedge(u: complex, v: complex) -> float:
    """u∧v = u₁v₂ − v₁u₂."""
    return u.real * v.imag - v.real * u.imag


def kernel_eval(point: KernelPoint) -> complex:
    """P(z,w) = (1/π) e^{−(|z|²+|w|²)/2} e^{z w̄}."""
    z, w = complex(point.z), complex(point.w)
    exponent = -0.5 * (abs(z) ** 2 + abs(w) ** 2) + z * w.conjugate()
    return complex(np.exp(exponent)) / math.pi


def kernel_eval_wedge_form(point: KernelPoint) -> complex:
    """P(z,w) = (1/π) e^{−|z−w|²/2} e^{i w∧z}."""
    z, w = complex(point.z), complex(point.w)
    exponent = -0.5 * abs(z - w) ** 2 + 1j * wedge(w, z)
    return complex(np.exp(exponent)) / math.pi


# ==============================================================================
# Matriz de Toeplitz truncada
# ==============================================================================
@dataclass(frozen=True, eq=False)
class ToeplitzMatrix:
    """
    Truncación densa M×M de una compresión P f P en una base ortonormal explícita.
    `basis_labels` guarda (nivel, miembro) cuando la base no es la de Fock pura.
    """

    entries: np.ndarray
    symbol: Optional[PlanarSymbol] = None
    basis_tag: str = "fock_lll"
    basis_labels: Optional[tuple[tuple[int, int], ...]] = field(default=None)

    def __post_init__(self):
        entries = np.array(self.entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError(f"Se esperaba una matriz cuadrada, no {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def M(self) -> int:
        return self.entries.shape[0]

    def leading(self, size: int) -> "ToeplitzMatrix":
        """Bloque principal size×size (las entradas no dependen del corte)."""
        if not 1 <= size <= self.M:
            raise ValueError(f"Bloque {size} fuera de rango para M={self.M}")
        labels = self.basis_labels[:size] if self.basis_labels else None
        return ToeplitzMatrix(self.entries[:size, :size], self.symbol, self.basis_tag, labels)

    def dump_header(self) -> str:
        if self.symbol is None:
            return f"# symbol=none axis=none b=none M={self.M}"
        s = self.symbol
        return f"# symbol={s.profile.kind.value} axis={s.axis.value} b={s.b:g} M={self.M}"

    def dump_rows(self) -> Iterator[tuple[int, int, float, float]]:
        for m in range(self.M):
            for n in range(self.M):
                value = self.entries[m, n]
                yield m, n, float(value.real), float(value.imag)


def dump_matrix_csv(matrix: ToeplitzMatrix) -> str:
    lines = [matrix.dump_header(), f"# basis={matrix.basis_tag}", "m,n,re,im"]
    lines.extend(f"{m},{n},{re:.17g},{im:.17g}" for m, n, re, im in matrix.dump_rows())
    return "\n".join(lines) + "\n"


# ==============================================================================
# Serie de precisión extendida
# ==============================================================================
def _hermite_values(x, count: int) -> list:
    """H_0(x) … H_{count−1}(x) por la recurrencia H_{n+1} = 2xH_n − 2nH_{n−1}."""
    values = [mpmath.mpf(1), 2 * x]
    for n in range(1, count - 1):
        values.append(2 * x * values[n] - 2 * n * values[n - 1])
    return values[:count]


def _smoothed_derivatives(profile: SwitchFunction, count: int) -> list:
    """D_k = Λ̃^{(k)}(0) para k < count, en la precisión mpmath activa."""
    sqrt_pi = mpmath.sqrt(mpmath.pi)
    hermite_count = max(count, 2)

    if profile.kind == SwitchKind.LINEAR_RAMP:
        c, d = (mpmath.mpf(p) for p in profile.parameters)

        def primitive(t):
            return t + t * mpmath.erf(t) + mpmath.exp(-t * t) / sqrt_pi

        values = [
            (primitive(-c) - primitive(-d)) / (2 * (d - c)),
            (mpmath.erf(d) - mpmath.erf(c)) / (2 * (d - c)),
        ]
        hc = _hermite_values(c, hermite_count)
        hd = _hermite_values(d, hermite_count)
        gc, gd = mpmath.exp(-c * c), mpmath.exp(-d * d)
        for k in range(2, count):
            values.append((hc[k - 2] * gc - hd[k - 2] * gd) / ((d - c) * sqrt_pi))
        return values[:count]

    if profile.kind == SwitchKind.HEAVISIDE:
        (alpha,) = (mpmath.mpf(p) for p in profile.parameters)
        sigma = mpmath.mpf(1)
    else:
        center, width = (mpmath.mpf(p) for p in profile.parameters)
        sigma = mpmath.sqrt(1 + width * width)
        alpha = center / sigma

    values = [mpmath.erfc(alpha) / 2]
    hermite = _hermite_values(alpha, hermite_count)
    gauss = mpmath.exp(-alpha * alpha) / sqrt_pi
    scale = mpmath.mpf(1)
    for k in range(1, count):
        scale /= sigma
        values.append(scale * gauss * hermite[k - 1])
    return values


def _moments(profile: SwitchFunction, top_order: int) -> list:
    """μ_k = D_k / 2^k; los ceros exactos se conservan para saltarlos."""
    derivatives = _smoothed_derivatives(profile, top_order + 1)
    return [mpmath.ldexp(d, -k) for k, d in enumerate(derivatives)]


def _inverse_sqrt_factorials(count: int) -> list:
    # 1/√(m!) en escala logarítmica
    return [mpmath.exp(-mpmath.loggamma(m + 1) / 2) for m in range(count)]


def _series_entry(m: int, n: int, mu: list, inv_sqrt: list):
    """
    A_{mn} = Σ_j C(m,j)C(n,j) j! μ_{m+n−2j} / √(m!n!). Los coeficientes son
    enteros exactos y fdot redondea una sola vez.
    """
    coefficients, moments = [], []
    coefficient = 1
    for j in range(min(m, n) + 1):
        moment = mu[m + n - 2 * j]
        if moment:
            coefficients.append(coefficient)
            moments.append(moment)
        coefficient = coefficient * (m - j) * (n - j) // (j + 1)
    if not moments:
        return mpmath.mpf(0)
    return mpmath.fdot(coefficients, moments) * inv_sqrt[m] * inv_sqrt[n]


def _assemble_rows(task: tuple) -> list[tuple[int, list[float]]]:
    """Filas [start, stop) del triángulo superior (n ≥ m). Ejecutable en otro proceso."""
    profile, size, start, stop, bits = task
    with mpmath.workprec(bits):
        mu = _moments(profile, 2 * (size - 1))
        inv_sqrt = _inverse_sqrt_factorials(size)
        rows = []
        for m in range(start, stop):
            rows.append((m, [float(_series_entry(m, n, mu, inv_sqrt)) for n in range(m, size)]))
    return rows


def _validate_precision(profile: SwitchFunction, size: int, bits: int, matrix: np.ndarray):
    """Recalcula muestras de la última columna (la peor cancelación) con el doble de bits."""
    last = size - 1
    sample = sorted({0, size // 4, size // 2, (3 * size) // 4, max(last - 1, 0), last})
    with mpmath.workprec(2 * bits):
        mu = _moments(profile, 2 * last)
        inv_sqrt = _inverse_sqrt_factorials(size)
        reference = [float(_series_entry(m, last, mu, inv_sqrt)) for m in sample]
    worst = max(abs(matrix[m, last] - ref) for m, ref in zip(sample, reference))
    logger.debug(f"Validación de precisión ({bits} bits, M={size}): desviación {worst:.2e}")
    if worst > VALIDATION_TOLERANCE:
        raise PrecisionLossError(
            f"La serie con {bits} bits difiere {worst:.2e} del cálculo con {2 * bits} bits"
        )


def default_precision_bits(size: int) -> int:
    return PRECISION_MARGIN_BITS + 2 * 2 * max(size - 1, 0)


def _row_blocks(size: int, threads: int) -> list[tuple[int, int]]:
    # Bloques contiguos de filas; cada fila se calcula igual en cualquier proceso
    count = max(1, min(size, 4 * threads))
    edges = np.linspace(0, size, count + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _assemble(profile: SwitchFunction, size: int, bits: int, threads: int) -> np.ndarray:
    blocks = _row_blocks(size, threads)
    tasks = [(profile, size, start, stop, bits) for start, stop in blocks]
    if threads > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_assemble_rows, tasks))
    else:
        results = [_assemble_rows(task) for task in tasks]

    matrix = np.zeros((size, size), dtype=float)
    for rows in results:
        for m, values in rows:
            matrix[m, m:] = values
    upper = np.triu(matrix, 1)
    return matrix + upper.T


@lru_cache(maxsize=8)
def _unit_field_matrix(
    profile: SwitchFunction, size: int, precision_bits: Optional[int], threads: int
) -> np.ndarray:
    """Matriz real simétrica de Λ(u₁) con b = 2 en la base φ_n."""
    bits = precision_bits or default_precision_bits(size)
    state = {"bits": bits}

    def _before_retry(retry_state):
        state["bits"] *= 2
        logger.warning(
            f"Pérdida de precisión en la serie (intento {retry_state.attempt_number}); "
            f"se reintenta con {state['bits']} bits"
        )

    for attempt in Retrying(
        stop=stop_after_attempt(3),
        retry=retry_if_exception_type(PrecisionLossError),
        before_sleep=_before_retry,
        reraise=True,
    ):
        with attempt:
            matrix = _assemble(profile, size, state["bits"], threads)
            _validate_precision(profile, size, state["bits"], matrix)
    matrix.setflags(write=False)
    logger.info(f"Matriz de {profile} construida: M={size}, {state['bits']} bits")
    return matrix


def rotation_phases(labels) -> np.ndarray:
    """i^{label} para cada etiqueta angular."""
    return np.array([1j ** (int(k) % 4) for k in labels], dtype=complex)


def _apply_axis(entries: np.ndarray, axis: Axis, labels=None) -> np.ndarray:
    """Eje second: entrada(m,n) = i^{n−m}·entrada del eje first (z = i w)."""
    if axis == Axis.FIRST:
        return entries.astype(complex)
    phases = rotation_phases(range(entries.shape[0]) if labels is None else labels)
    return np.conj(phases)[:, None] * entries * phases[None, :]


def _check_indices(*indices: int):
    for index in indices:
        if isinstance(index, bool) or not isinstance(index, (int, np.integer)) or index < 0:
            raise ValueError(f"Índice de base inválido: {index}")


def matrix_element(m: int, n: int, symbol: PlanarSymbol) -> complex:
    """⟨φ_m, f φ_n⟩ por la serie de momentos, validada al doble de precisión."""
    _check_indices(m, n)
    unit = symbol.at_unit_field()
    lo, hi = min(m, n), max(m, n)
    bits = default_precision_bits(lo + hi + 1)

    def _entry(b: int) -> float:
        with mpmath.workprec(b):
            mu = _moments(unit.profile, lo + hi)
            return float(_series_entry(lo, hi, mu, _inverse_sqrt_factorials(hi + 1)))

    value = _entry(bits)
    if abs(value - _entry(2 * bits)) > VALIDATION_TOLERANCE:
        raise PrecisionLossError(f"Elemento ({m},{n}) inestable con {bits} bits")
    if unit.axis == Axis.SECOND:
        return complex(1j ** ((n - m) % 4) * value)
    return complex(value)


def build_toeplitz(
    symbol: PlanarSymbol,
    M: int,
    *,
    max_M: Optional[int] = None,
    precision_bits: Optional[int] = None,
    threads: int = 1,
) -> ToeplitzMatrix:
    """Matriz M×M de P_f en la base de Fock; determinista bit a bit."""
    if M < 1:
        raise ValueError(f"M debe ser ≥ 1 (M={M})")
    if max_M is not None and M > max_M:
        raise ResourceCapError(f"M={M} supera el máximo configurado {max_M}")
    unit = symbol.at_unit_field()
    entries = _unit_field_matrix(unit.profile, M, precision_bits, max(1, threads))
    return ToeplitzMatrix(_apply_axis(entries, unit.axis), symbol, "fock_lll")


def quadrature_matrix_element(m: int, n: int, symbol: PlanarSymbol, nodes: int = 200) -> complex:
    """Oráculo: ⟨φ_m, f φ_n⟩ por cuadratura 2D cartesiana."""
    _check_indices(m, n)
    unit = symbol.at_unit_field()
    breaks = unit.profile.breakpoints
    radius = truncation_radius(max(m, n))
    z, w = planar_grid(
        radius,
        x_breaks=breaks if unit.axis == Axis.FIRST else (),
        y_breaks=breaks if unit.axis == Axis.SECOND else (),
        nodes=nodes,
    )
    left = fock_basis_values([m], z)
    right = fock_basis_values([n], z)
    return complex(compressed_matrix(left, w * unit(z), right)[0, 0])


# ==============================================================================
# Desplazamiento ponderado P (z/|z|) P
# ==============================================================================
def shift_weights(count: int) -> np.ndarray:
    """c_n = Γ(n+3/2)/√(n!(n+1)!) para n < count, en escala logarítmica."""
    if count < 1:
        raise ValueError("count debe ser ≥ 1")
    n = np.arange(count, dtype=float)
    return np.exp(gammaln(n + 1.5) - 0.5 * (gammaln(n + 1) + gammaln(n + 2)))


def shift_weights_quadrature(count: int) -> np.ndarray:
    return np.array([shift_weight_quadrature(n) for n in range(count)])


@dataclass(frozen=True)
class ShiftIndex:
    kernel_dimension: int
    cokernel_dimension: int

    @property
    def index(self) -> int:
        return self.kernel_dimension - self.cokernel_dimension


def weighted_shift_index(weights: np.ndarray, lower_bound: float = 1e-2) -> ShiftIndex:
    """
    Índice de e_n ↦ c_n e_{n+1}: núcleo trivial si todos los pesos son no nulos
    y acotados inferiormente; el conúcleo es siempre span{e_0}.

    La cota inferior se comprueba sobre la muestra: min c_n ≥ lower_bound.
    Pesos que caen por debajo no dan un operador de Fredholm y se rechazan.
    """
    weights = np.asarray(weights, dtype=float)
    if weights.size == 0 or not np.all(weights > 0):
        raise ValueError("Los pesos del desplazamiento deben ser positivos")
    floor = float(weights.min())
    if floor < lower_bound:
        raise ValueError(
            f"Pesos no acotados inferiormente: mínimo {floor:.3e} < {lower_bound:g} (índice {int(np.argmin(weights))})"
        )
    logger.debug(f"Pesos del desplazamiento acotados por {floor:.6f}; índice −1")
    return ShiftIndex(kernel_dimension=0, cokernel_dimension=1)


def phase_compression_matrix(M: int, nodes: int = 200) -> np.ndarray:
    """Matriz de P(z/|z|)P por cuadratura; solo la primera subdiagonal es no nula."""
    radius = truncation_radius(M)
    # z/|z| no es suave en el origen: la malla se parte ahí.
    z, w = planar_grid(radius, x_breaks=(0.0,), y_breaks=(0.0,), nodes=nodes)
    safe = np.where(z == 0, 1.0, z)
    phase = np.where(z == 0, 0.0, safe / np.abs(safe))
    basis = fock_basis_values(range(M), z)
    return compressed_matrix(basis, w * phase)
