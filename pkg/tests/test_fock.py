# tests/test_fock.py

import math

import numpy as np
import pytest

from principal_trace import fock
from principal_trace.errors import ResourceCapError
from principal_trace.fock import (
    KernelPoint,
    ToeplitzMatrix,
    build_toeplitz,
    dump_matrix_csv,
    kernel_eval,
    kernel_eval_wedge_form,
    matrix_element,
    phase_compression_matrix,
    quadrature_matrix_element,
    rotation_phases,
    shift_weights,
    shift_weights_quadrature,
    wedge,
    weighted_shift_index,
)
from principal_trace.quadrature import (
    compressed_matrix,
    fock_basis_values,
    gauss_legendre,
    planar_grid,
    truncation_radius,
)
from principal_trace.symbols import Axis, PlanarSymbol, SwitchFunction

HEAVISIDE = SwitchFunction.heaviside(0.0)


# ==============================================================================
# Núcleo reproductor
# ==============================================================================
def _random_points(rng, count, radius=10.0):
    r = radius * np.sqrt(rng.random(count))
    theta = 2 * math.pi * rng.random(count)
    return r * np.exp(1j * theta)


def test_kernel_forms_agree_on_random_points():
    """Las dos formas cerradas del núcleo coinciden en 10⁴ pares aleatorios con |z|,|w| ≤ 10."""
    # 1. Preparación
    rng = np.random.default_rng(20240611)
    zs = _random_points(rng, 10_000)
    ws = _random_points(rng, 10_000)

    # 2. Acción
    first = np.array([kernel_eval(KernelPoint(z, w)) for z, w in zip(zs, ws)])
    second = np.array([kernel_eval_wedge_form(KernelPoint(z, w)) for z, w in zip(zs, ws)])

    # 3. Aserción
    assert np.all(np.abs(first - second) <= 1e-12 * np.abs(second))


def test_kernel_examples():
    z = 0.7 - 1.9j
    w = 2.0 + 0.0j
    assert kernel_eval(KernelPoint(z, z)) == pytest.approx(1 / math.pi, rel=1e-14)
    assert kernel_eval(KernelPoint(0, w)) == pytest.approx(math.exp(-abs(w) ** 2 / 2) / math.pi, rel=1e-14)

    point = KernelPoint(1 + 1j, 2)
    expected = math.exp(-abs(point.z - point.w) ** 2 / 2) / math.pi
    assert abs(kernel_eval(point)) == pytest.approx(expected, rel=1e-13)


def test_kernel_is_hermitian():
    point = KernelPoint(1.2 - 0.4j, -0.3 + 2.2j)
    swapped = KernelPoint(point.w, point.z)
    assert kernel_eval(swapped) == pytest.approx(kernel_eval(point).conjugate(), rel=1e-14)


def test_kernel_translation_covariance():
    """P(u−t, v−t)·e^{−iu∧t}·e^{iv∧t} = P(u, v) y |P(u−t, v−t)| = |P(u, v)|."""
    rng = np.random.default_rng(7)
    us, vs, ts = (_random_points(rng, 200, radius=4.0) for _ in range(3))

    for u, v, t in zip(us, vs, ts):
        original = kernel_eval_wedge_form(KernelPoint(u, v))
        moved = kernel_eval_wedge_form(KernelPoint(u - t, v - t))
        phase = np.exp(-1j * wedge(u, t)) * np.exp(1j * wedge(v, t))

        assert abs(moved) == pytest.approx(abs(original), rel=1e-12)
        assert abs(moved * phase - original) <= 1e-12 * abs(original)


def test_wedge_is_antisymmetric():
    u, v = 1.5 + 2.0j, -0.5 + 3.0j
    assert wedge(u, v) == pytest.approx(1.5 * 3.0 - (-0.5) * 2.0)
    assert wedge(u, v) == -wedge(v, u)
    assert wedge(u, u) == 0.0


# ==============================================================================
# Elementos de matriz
# ==============================================================================
@pytest.mark.parametrize(
    "m, n, expected",
    [
        (0, 0, 0.5),
        (7, 7, 0.5),
        (33, 33, 0.5),
        (0, 1, 1 / (2 * math.sqrt(math.pi))),
        (0, 2, 0.0),
    ],
)
def test_matrix_element_heaviside_examples(m, n, expected):
    value = matrix_element(m, n, PlanarSymbol(HEAVISIDE, Axis.FIRST))
    assert value == pytest.approx(expected, abs=1e-14)


def test_matrix_element_rejects_negative_indices():
    with pytest.raises(ValueError):
        matrix_element(-1, 0, PlanarSymbol(HEAVISIDE))
    with pytest.raises(ValueError):
        quadrature_matrix_element(0, -2, PlanarSymbol(HEAVISIDE))


def test_matrix_element_second_axis_rotation():
    first = PlanarSymbol(SwitchFunction.linear_ramp(-0.5, 1.0), Axis.FIRST)
    second = PlanarSymbol(SwitchFunction.linear_ramp(-0.5, 1.0), Axis.SECOND)
    for m, n in [(0, 1), (2, 5), (4, 3), (6, 6)]:
        assert matrix_element(m, n, second) == pytest.approx(
            1j ** ((n - m) % 4) * matrix_element(m, n, first), abs=1e-14
        )


def _oracle_block(symbol: PlanarSymbol, size: int, chunk: int = 8) -> np.ndarray:
    """Matriz size×size por cuadratura 2D, en bloques de filas para acotar la memoria."""
    unit = symbol.at_unit_field()
    breaks = unit.profile.breakpoints
    z, w = planar_grid(
        truncation_radius(size - 1),
        x_breaks=breaks if unit.axis == Axis.FIRST else (),
        y_breaks=breaks if unit.axis == Axis.SECOND else (),
    )
    weight = w * unit(z)
    result = np.empty((size, size), dtype=complex)
    for start in range(0, size, chunk):
        rows = list(range(start, min(size, start + chunk)))
        left = fock_basis_values(rows, z)
        for col_start in range(0, size, chunk):
            cols = list(range(col_start, min(size, col_start + chunk)))
            right = fock_basis_values(cols, z)
            result[np.ix_(rows, cols)] = compressed_matrix(left, weight, right)
    return result


@pytest.mark.slow
@pytest.mark.parametrize(
    "symbol",
    [
        PlanarSymbol(HEAVISIDE, Axis.FIRST),
        PlanarSymbol(SwitchFunction.linear_ramp(-1.0, 1.0), Axis.FIRST),
        PlanarSymbol(SwitchFunction.erf_ramp(0.25, 0.8), Axis.SECOND),
    ],
    ids=str,
)
def test_series_matches_quadrature_oracle_up_to_index_40(symbol):
    """La serie en precisión extendida y la cuadratura 2D coinciden a 1e−9 para m, n ≤ 40."""
    # 1. Preparación
    size = 41

    # 2. Acción
    series = build_toeplitz(symbol, size).entries
    oracle = _oracle_block(symbol, size)

    # 3. Aserción
    assert np.max(np.abs(series - oracle)) <= 1e-9


def test_quadrature_matrix_element_matches_series():
    symbol = PlanarSymbol(HEAVISIDE, Axis.SECOND, b=3.0)
    for m, n in [(0, 1), (3, 8), (5, 2)]:
        assert quadrature_matrix_element(m, n, symbol) == pytest.approx(
            matrix_element(m, n, symbol), abs=1e-9
        )


# ==============================================================================
# Matrices truncadas
# ==============================================================================
def test_build_toeplitz_single_entry():
    matrix = build_toeplitz(PlanarSymbol(HEAVISIDE), 1)
    assert matrix.M == 1
    assert matrix.entries[0, 0] == 0.5
    assert matrix.basis_tag == "fock_lll"


def test_build_toeplitz_respects_resource_cap():
    with pytest.raises(ResourceCapError):
        build_toeplitz(PlanarSymbol(HEAVISIDE), 65, max_M=64)
    with pytest.raises(ValueError):
        build_toeplitz(PlanarSymbol(HEAVISIDE), 0)


def test_first_axis_matrix_is_real_symmetric_contraction():
    """Compresión de una contracción positiva: hermítica con espectro en [−ε, 1+ε]."""
    # 1. Preparación / 2. Acción
    A = build_toeplitz(PlanarSymbol(HEAVISIDE, Axis.FIRST), 64).entries

    # 3. Aserción
    assert np.max(np.abs(A.imag)) == 0.0
    assert np.max(np.abs(A - A.T)) <= 1e-12
    eigenvalues = np.linalg.eigvalsh(A)
    assert eigenvalues.min() >= -1e-10
    assert eigenvalues.max() <= 1 + 1e-10


def test_second_axis_matrix_is_rotated_first_axis_matrix():
    """B = D̄·A·D con D = diag(iⁿ), entrada a entrada."""
    profile = SwitchFunction.erf_ramp(-0.4, 0.6)
    A = build_toeplitz(PlanarSymbol(profile, Axis.FIRST), 40).entries
    B = build_toeplitz(PlanarSymbol(profile, Axis.SECOND), 40).entries

    D = np.diag(rotation_phases(range(40)))
    assert np.max(np.abs(B - D.conj() @ A @ D)) <= 1e-14
    assert np.max(np.abs(B - B.conj().T)) <= 1e-14


def test_build_is_deterministic_and_independent_of_cutoff():
    """Dos construcciones (sin caché) son idénticas bit a bit; el bloque principal no depende de M."""
    symbol = PlanarSymbol(SwitchFunction.linear_ramp(-1.0, 2.0))

    first = build_toeplitz(symbol, 32).entries.copy()
    fock._unit_field_matrix.cache_clear()
    second = build_toeplitz(symbol, 32).entries
    larger = build_toeplitz(symbol, 48)

    assert np.array_equal(first, second)
    assert np.max(np.abs(larger.leading(32).entries - first)) <= 1e-14


def test_parallel_assembly_is_bit_identical():
    symbol = PlanarSymbol(SwitchFunction.linear_ramp(-1.0, 1.0))
    serial = build_toeplitz(symbol, 24, threads=1).entries
    parallel = build_toeplitz(symbol, 24, threads=2).entries
    assert np.array_equal(serial, parallel)


def test_field_strength_is_a_rescaling():
    """La matriz con campo b de Λ(x) es la de b = 2 con Λ(x·√(2/b))."""
    ramp = SwitchFunction.linear_ramp(-1.0, 1.0)
    with_field = build_toeplitz(PlanarSymbol(ramp, Axis.FIRST, b=4.0), 16).entries
    rescaled = build_toeplitz(PlanarSymbol(ramp.rescaled(math.sqrt(0.5)), Axis.FIRST), 16).entries
    assert np.array_equal(with_field, rescaled)


def test_toeplitz_matrix_is_read_only_and_square():
    matrix = ToeplitzMatrix(np.eye(3))
    with pytest.raises(ValueError):
        matrix.entries[0, 0] = 2.0
    with pytest.raises(ValueError):
        ToeplitzMatrix(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        matrix.leading(4)


def test_dump_matrix_csv_format():
    matrix = build_toeplitz(PlanarSymbol(HEAVISIDE, Axis.SECOND, b=2.0), 2)

    lines = dump_matrix_csv(matrix).splitlines()

    assert lines[0] == "# symbol=heaviside axis=second b=2 M=2"
    assert lines[1] == "# basis=fock_lll"
    assert lines[2] == "m,n,re,im"
    assert len(lines) == 3 + 4
    assert lines[3] == "0,0,0.5,0"


# ==============================================================================
# Desplazamiento ponderado
# ==============================================================================
def test_shift_weights_closed_form_and_monotonicity():
    """c₀ = √π/2; los pesos crecen estrictamente hacia 1 y c₁₉₉ > 0.995."""
    weights = shift_weights(200)

    assert weights[0] == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-14)
    assert np.all(np.diff(weights) > 0)
    assert np.all((weights > 0) & (weights < 1))
    assert weights[199] > 0.995


def test_shift_weights_match_radial_quadrature():
    assert np.max(np.abs(shift_weights(200) - shift_weights_quadrature(200))) <= 1e-8


def test_shift_weights_are_overflow_safe():
    weights = shift_weights(5000)
    assert np.all(np.isfinite(weights))
    assert weights[-1] == pytest.approx(1.0, abs=1e-4)
    with pytest.raises(ValueError):
        shift_weights(0)


def test_weighted_shift_index_is_minus_one():
    index = weighted_shift_index(shift_weights(200))
    assert index.kernel_dimension == 0
    assert index.cokernel_dimension == 1
    assert index.index == -1
    with pytest.raises(ValueError):
        weighted_shift_index(np.array([0.5, 0.0]))


def test_weighted_shift_index_requires_a_lower_bound():
    """Pesos c_n = 1/(n+1) no están acotados inferiormente: no hay índice."""
    decaying = 1.0 / np.arange(1, 201)
    with pytest.raises(ValueError):
        weighted_shift_index(decaying)
    assert weighted_shift_index(decaying, lower_bound=1e-3).index == -1


def test_phase_compression_is_a_weighted_shift():
    """P(z/|z|)P solo tiene la primera subdiagonal, con los pesos c_n."""
    # 1. Preparación
    M = 6

    # 2. Acción
    matrix = phase_compression_matrix(M)

    # 3. Aserción
    subdiagonal = np.array([matrix[n + 1, n] for n in range(M - 1)])
    assert np.max(np.abs(subdiagonal - shift_weights(M - 1))) <= 1e-6
    mask = ~np.eye(M, k=-1, dtype=bool)
    assert np.max(np.abs(matrix[mask])) <= 1e-6


# ==============================================================================
# Cuadratura
# ==============================================================================
def test_gauss_legendre_integrates_polynomials_exactly():
    x, w = gauss_legendre(0.0, 2.0, 8)
    assert np.sum(w * x**5) == pytest.approx(2.0**6 / 6, rel=1e-14)


def test_fock_basis_is_orthonormal_under_quadrature():
    z, w = planar_grid(truncation_radius(12), nodes=120)
    basis = fock_basis_values(range(12), z)
    gram = compressed_matrix(basis, w)
    assert np.max(np.abs(gram - np.eye(12))) <= 1e-10


def test_fock_basis_values_do_not_overflow():
    z = np.array([0.0, 20.0 + 5.0j])
    values = fock_basis_values([0, 300], z)
    assert np.all(np.isfinite(values))
    assert values[1, 0] == 0.0
