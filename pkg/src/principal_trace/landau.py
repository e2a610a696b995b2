# src/principal_trace/landau.py

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from scipy.special import gammaln, poch

from .errors import ResourceCapError
from .fock import ToeplitzMatrix, build_toeplitz, rotation_phases
from .quadrature import compressed_matrix, planar_grid, polar_parts, truncation_radius
from .symbols import Axis, PlanarSymbol, SwitchFunction
from .trace import TraceReport, TruncationScheme, word_power_trace

SUPPORTED_LEVELS = (0, 1)


def _check_level(j: int, name: str = "nivel"):
    if j not in SUPPORTED_LEVELS:
        raise ValueError(f"{name} no soportado: {j} (solo {SUPPORTED_LEVELS})")


@dataclass(frozen=True)
class LandauBasis:
    """
    Autofunciones del nivel j: ψ_{j,m} ∝ z^m L_j^{(m)}(|z|²) e^{−|z|²/2}, m ≥ −j.
    Nivel 1: L_1^{(m)}(t) = (m+1) − t; el miembro m = −1 es −z̄·e^{−|z|²/2}.
    """

    level: int

    def __post_init__(self):
        _check_level(self.level)

    def members(self, count: int) -> range:
        return range(-self.level, count - self.level)

    def _radial_coefficients(self, m: int) -> list[int]:
        # Coeficientes en t de L_j^{(m)}(t)
        return [1] if self.level == 0 else [m + 1, -1]

    def log_norm_squared(self, m: int) -> float:
        """
        log ‖z^m L(|z|²) e^{−|z|²/2}‖² = log(π Σ_i c_i Γ(m+1+i)) con c los
        coeficientes de L(t)²; se factoriza Γ del primer término no nulo.
        """
        if m < -self.level:
            raise ValueError(f"Miembro {m} fuera de rango para el nivel {self.level}")
        radial = self._radial_coefficients(m)
        squared = np.convolve(radial, radial)
        nonzero = [i for i, c in enumerate(squared) if c != 0]
        first = nonzero[0]
        base = m + 1 + first
        total = sum(float(squared[i]) * poch(base, i - first) for i in nonzero)
        if total <= 0:
            raise ArithmeticError(f"Norma no positiva para el miembro {m}")
        return math.log(math.pi) + gammaln(base) + math.log(total)

    def normalization(self, m: int) -> float:
        return math.exp(-0.5 * self.log_norm_squared(m))

    def values(self, members: Sequence[int], z: np.ndarray) -> np.ndarray:
        """Filas: miembros; columnas: puntos. Evaluación estable por log-módulo y fase."""
        log_r, r2, theta = polar_parts(z)
        out = np.empty((len(members), z.size), dtype=complex)
        for row, m in enumerate(members):
            log_n = -0.5 * self.log_norm_squared(m)
            if m == -1:
                out[row] = -np.conj(z) * np.exp(log_n - 0.5 * r2)
                continue
            radial = log_n - 0.5 * r2
            if m > 0:
                radial = radial + m * log_r
            envelope = np.exp(radial + 1j * m * theta)
            polynomial = 1.0 if self.level == 0 else (m + 1) - r2
            out[row] = envelope * polynomial
        return out


def _quadrature_grid(symbol: Optional[PlanarSymbol], max_member: int, nodes: int):
    radius = truncation_radius(max_member + 1)
    if symbol is None:
        return planar_grid(radius, nodes=nodes)
    breaks = symbol.profile.breakpoints
    return planar_grid(
        radius,
        x_breaks=breaks if symbol.axis == Axis.FIRST else (),
        y_breaks=breaks if symbol.axis == Axis.SECOND else (),
        nodes=nodes,
    )


def level_matrix_element(j: int, m: int, n: int, symbol: PlanarSymbol, nodes: int = 200) -> complex:
    """⟨ψ_{j,m}, f ψ_{j,n}⟩ por cuadratura 2D."""
    _check_level(j)
    basis = LandauBasis(j)
    if min(m, n) < -j:
        raise ValueError(f"Miembros inválidos ({m}, {n}) para el nivel {j}")
    unit = symbol.at_unit_field()
    z, w = _quadrature_grid(unit, max(m, n) + 2 * j, nodes)
    left = basis.values([m], z)
    right = basis.values([n], z)
    return complex(compressed_matrix(left, w * unit(z), right)[0, 0])


def landau_gram_matrix(j: int, count: int, other_level: Optional[int] = None, nodes: int = 200) -> np.ndarray:
    """⟨ψ_{j,m}, ψ_{j′,n}⟩ para los primeros `count` miembros de cada nivel."""
    _check_level(j)
    k = j if other_level is None else other_level
    _check_level(k, "nivel de la derecha")
    left_basis, right_basis = LandauBasis(j), LandauBasis(k)
    z, w = _quadrature_grid(None, count + 2, nodes)
    left = left_basis.values(list(left_basis.members(count)), z)
    right = right_basis.values(list(right_basis.members(count)), z)
    return compressed_matrix(left, w, right)


# ==============================================================================
# Ruta de producción: reducción exacta a los momentos del nivel 0
# ==============================================================================
def _padded_level_zero(symbol: PlanarSymbol, members: int, max_M=None, **build) -> np.ndarray:
    """
    A del nivel 0 (eje first, b = 2) de tamaño members + 1 con una fila y una
    columna nulas delante: Ap[m+1, n+1] = A[m, n]. El límite se aplica a members.
    """
    if max_M is not None and members > max_M:
        raise ResourceCapError(f"M={members} supera el máximo configurado {max_M}")
    size = members + 1
    unit = symbol.at_unit_field()
    first = PlanarSymbol(unit.profile, Axis.FIRST, 2.0)
    A = build_toeplitz(first, size, **build).entries.real
    padded = np.zeros((size + 1, size + 1))
    padded[1:, 1:] = A
    return padded


def _level_one_block(Ap: np.ndarray, M: int) -> np.ndarray:
    """
    Ã_{mn} = √((m+1)(n+1)) A_{m,n} − (m+n+2) A_{m+1,n+1} + √((m+2)(n+2)) A_{m+2,n+2}
    para m, n ∈ [−1, M−2], indexado por s = m + 1.
    """
    s = np.arange(M)
    S_m, S_n = np.meshgrid(s, s, indexing="ij")
    return (
        np.sqrt(S_m * S_n) * Ap[S_m, S_n]
        - (S_m + S_n) * Ap[S_m + 1, S_n + 1]
        + np.sqrt((S_m + 1) * (S_n + 1)) * Ap[S_m + 2, S_n + 2]
    )


def _cross_block(Ap: np.ndarray, M: int) -> np.ndarray:
    """C_{mn} = ⟨ψ_{0,m}, f ψ_{1,n}⟩ = √(n+1) A_{m,n} − √(m+1) A_{m+1,n+1}, n ∈ [−1, M−2]."""
    m = np.arange(M)
    s = np.arange(M)
    R, S = np.meshgrid(m, s, indexing="ij")
    return np.sqrt(S) * Ap[R + 1, S] - np.sqrt(R + 1) * Ap[R + 2, S + 1]


def _rotate(entries: np.ndarray, axis: Axis, row_labels, col_labels) -> np.ndarray:
    if axis == Axis.FIRST:
        return entries.astype(complex)
    return np.conj(rotation_phases(row_labels))[:, None] * entries * rotation_phases(col_labels)[None, :]


def level_matrix(j: int, symbol: PlanarSymbol, M: int, **build) -> ToeplitzMatrix:
    """Matriz M×M de P_j f P_j en la base ψ_{j,m}, m = −j … M−1−j."""
    _check_level(j)
    labels = tuple((j, m) for m in LandauBasis(j).members(M))
    if j == 0:
        entries = build_toeplitz(symbol, M, **build).entries
        return ToeplitzMatrix(entries, symbol, "landau_level(0)", labels)

    Ap = _padded_level_zero(symbol, M, **build)
    block = _level_one_block(Ap, M)
    angular = [m for _, m in labels]
    entries = _rotate(block, symbol.axis, angular, angular)
    logger.debug(f"Matriz del nivel 1 construida (M={M}, eje {symbol.axis.value})")
    return ToeplitzMatrix(entries, symbol, "landau_level(1)", labels)


def cumulative_labels(ell: int, M: int) -> tuple[tuple[int, int], ...]:
    """Orden entrelazado (0,k), (1,k−1), … por número cuántico de centro guía k."""
    return tuple((j, k - j) for k in range(M) for j in range(ell + 1))


def cumulative_matrix(ell: int, symbol: PlanarSymbol, M: int, **build) -> ToeplitzMatrix:
    """
    Compresión de f al rango de P^{(ℓ)} = ⊕_{j≤ℓ} P_j, con los bloques cruzados
    incluidos. M cuenta miembros por nivel: la matriz es (ℓ+1)M × (ℓ+1)M.
    """
    _check_level(ell, "ℓ")
    if ell == 0:
        entries = build_toeplitz(symbol, M, **build).entries
        return ToeplitzMatrix(entries, symbol, "landau_cumulative(0)", cumulative_labels(0, M))

    Ap = _padded_level_zero(symbol, M, **build)
    level0 = Ap[1 : M + 1, 1 : M + 1]
    level1 = _level_one_block(Ap, M)
    cross = _cross_block(Ap, M)

    full = np.empty((2 * M, 2 * M))
    full[0::2, 0::2] = level0
    full[1::2, 1::2] = level1
    full[0::2, 1::2] = cross
    full[1::2, 0::2] = cross.T

    labels = cumulative_labels(1, M)
    angular = [m for _, m in labels]
    entries = _rotate(full, symbol.axis, angular, angular)
    logger.info(f"Matriz acumulada ℓ=1 construida: {2 * M}×{2 * M}")
    return ToeplitzMatrix(entries, symbol, "landau_cumulative(1)", labels)


def _level_pair(j: int, profile: SwitchFunction, b: float, M: int, **build):
    first = level_matrix(j, PlanarSymbol(profile, Axis.FIRST, b), M, **build)
    second = level_matrix(j, PlanarSymbol(profile, Axis.SECOND, b), M, **build)
    return first, second


def level_commutator_trace(
    j: int,
    scheme: TruncationScheme,
    profile: SwitchFunction = SwitchFunction.heaviside(0.0),
    b: float = 2.0,
    word_n: int = 1,
    **build,
) -> TraceReport:
    """Traza con ventana de (AB)ⁿ − (BA)ⁿ en la base del nivel j."""
    _check_level(j)
    A, B = _level_pair(j, profile, b, scheme.M, **build)
    return word_power_trace(word_n, A, B, scheme)


@dataclass(frozen=True)
class AdditivityResult:
    cumulative: TraceReport
    levels: tuple[TraceReport, ...]

    @property
    def residual(self) -> float:
        return abs(self.cumulative.value - sum(r.value for r in self.levels))


def additivity_residual(
    ell: int,
    scheme: TruncationScheme,
    profile: SwitchFunction = SwitchFunction.heaviside(0.0),
    b: float = 2.0,
    word_n: int = 1,
    **build,
) -> AdditivityResult:
    """
    Compara la traza acumulada con la suma de trazas por nivel. La ventana de la
    acumulada, (ℓ+1)N, cubre exactamente los N primeros miembros de cada nivel.
    """
    _check_level(ell, "ℓ")
    M, N = scheme.M, scheme.N
    A = cumulative_matrix(ell, PlanarSymbol(profile, Axis.FIRST, b), M, **build)
    B = cumulative_matrix(ell, PlanarSymbol(profile, Axis.SECOND, b), M, **build)
    cumulative = word_power_trace(word_n, A, B, TruncationScheme((ell + 1) * M, (ell + 1) * N))
    levels = tuple(
        level_commutator_trace(j, scheme, profile, b, word_n, **build) for j in range(ell + 1)
    )
    result = AdditivityResult(cumulative, levels)
    logger.info(f"Aditividad ℓ={ell}, n={word_n}: residuo {result.residual:.3e}")
    return result
