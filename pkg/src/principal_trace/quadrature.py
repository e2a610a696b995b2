# src/principal_trace/quadrature.py

# Oráculos lentos pero independientes de la serie: cuadratura de Gauss–Legendre
# en un rectángulo del plano y cuadratura radial adaptativa.

import math
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import gammaln

DEFAULT_NODES = 200


def truncation_radius(max_index: int) -> float:
    """Radio a partir del cual las colas gaussianas de la base quedan bajo 1e-14."""
    return math.sqrt(2.0 * max(max_index, 0)) + 8.0


def gauss_legendre(a: float, b: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodos y pesos de Gauss–Legendre de n puntos en [a, b]."""
    knots, weights = leggauss(n)
    half = 0.5 * (b - a)
    return half * knots + 0.5 * (a + b), half * weights


def _pieces(radius: float, breaks: Iterable[float], nodes: int) -> tuple[np.ndarray, np.ndarray]:
    cuts = sorted({-radius, radius, *(t for t in breaks if -radius < t < radius)})
    xs, ws = [], []
    for a, b in zip(cuts[:-1], cuts[1:]):
        x, w = gauss_legendre(a, b, nodes)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def planar_grid(
    radius: float,
    x_breaks: Sequence[float] = (),
    y_breaks: Sequence[float] = (),
    nodes: int = DEFAULT_NODES,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Malla producto en [−R, R]² partida en las discontinuidades del símbolo.
    Devuelve los puntos complejos z = x + iy y sus pesos, aplanados.
    """
    x, wx = _pieces(radius, x_breaks, nodes)
    y, wy = _pieces(radius, y_breaks, nodes)
    X, Y = np.meshgrid(x, y, indexing="ij")
    W = np.outer(wx, wy)
    return (X + 1j * Y).ravel(), W.ravel()


def polar_parts(z: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(log|z|, |z|², ángulo) con log|0| = −inf."""
    r2 = (z * np.conj(z)).real
    with np.errstate(divide="ignore"):
        log_r = 0.5 * np.log(r2)
    return log_r, r2, np.angle(z)


def fock_basis_values(indices: Sequence[int], z: np.ndarray) -> np.ndarray:
    """
    φ_n(z) = zⁿ e^{−|z|²/2}/√(π n!) evaluada como exp(log-módulo + i·fase)
    para no desbordar con n grande. Filas: índices; columnas: puntos.
    """
    log_r, r2, theta = polar_parts(z)
    values = np.empty((len(indices), z.size), dtype=complex)
    for row, n in enumerate(indices):
        if n < 0:
            raise ValueError(f"Índice de base negativo: {n}")
        radial = -0.5 * r2 - 0.5 * (math.log(math.pi) + gammaln(n + 1))
        if n > 0:
            radial = radial + n * log_r
        values[row] = np.exp(radial + 1j * n * theta)
    return values


def compressed_matrix(
    basis: np.ndarray, weight: np.ndarray, right: Optional[np.ndarray] = None
) -> np.ndarray:
    """
    ⟨b_m, w·b'_n⟩ por cuadratura: `weight` ya incluye los pesos de la malla
    multiplicados por el símbolo. Sin `right` se usa la misma base a ambos lados.
    """
    right = basis if right is None else right
    return np.conj(basis) @ (weight[None, :] * right).T


def shift_weight_quadrature(n: int) -> float:
    """
    c_n = ⟨φ_{n+1}, (z/|z|) φ_n⟩ = 2∫₀^∞ r^{2n+2} e^{−r²} dr / √(n!(n+1)!),
    integrado numéricamente con el integrando en escala logarítmica.
    """
    if n < 0:
        raise ValueError(f"Índice de peso negativo: {n}")
    log_norm = 0.5 * (gammaln(n + 1) + gammaln(n + 2))
    peak = math.sqrt(n + 1.0)

    def integrand(r):
        if r == 0.0:
            return 0.0
        return math.exp((2 * n + 2) * math.log(r) - r * r - log_norm)

    value, _ = quad(integrand, 0.0, peak + 12.0, points=[peak], limit=200, epsabs=1e-14, epsrel=1e-12)
    return 2.0 * value
