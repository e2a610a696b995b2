# tests/test_trace.py

import math

import numpy as np
import pytest

from principal_trace.fock import ToeplitzMatrix, build_toeplitz
from principal_trace.poisson import parse_polynomial
from principal_trace.symbols import Axis, PlanarSymbol, SwitchFunction
from principal_trace.trace import (
    ExtrapolationResult,
    OperatorWord,
    Ordering,
    TruncationScheme,
    WeightedWord,
    commutator_trace,
    convergence_sweep,
    hall_conductance,
    polynomial_words,
    richardson_extrapolate,
    windowed_trace,
    word_power_trace,
    word_trace_for_polynomials,
)

TWO_PI_I = 2j * math.pi


# ==============================================================================
# Tipos
# ==============================================================================
def test_truncation_scheme_defaults_and_bounds():
    assert TruncationScheme(256).N == 128
    assert TruncationScheme(1).N == 1
    assert TruncationScheme(10, 10).is_full_window
    with pytest.raises(ValueError):
        TruncationScheme(10, 11)
    with pytest.raises(ValueError):
        TruncationScheme(0)


def test_operator_word_alphabet():
    assert str(OperatorWord("ABBA")) == "ABBA"
    with pytest.raises(ValueError):
        OperatorWord("")
    with pytest.raises(ValueError):
        OperatorWord("ABC")


def test_polynomial_words_orderings():
    p = parse_polynomial("2*x^2*y - 3")
    assert polynomial_words(p, Ordering.LEFT_NORMAL) == [(-3 + 0j, ""), (2 + 0j, "AAB")]
    assert polynomial_words(p, Ordering.RIGHT_NORMAL) == [(-3 + 0j, ""), (2 + 0j, "BAA")]


# ==============================================================================
# Traza con ventana sobre matrices pequeñas
# ==============================================================================
def test_windowed_trace_report_invariants(small_heaviside_pair):
    """value es la suma de la diagonal por índice y la cola acota el último sumando."""
    A, B = small_heaviside_pair

    report = commutator_trace(A, B, TruncationScheme(48, 20))

    assert len(report.per_index_diagonal) == 20
    assert report.value == pytest.approx(sum(report.per_index_diagonal), abs=1e-15)
    assert report.tail_estimate >= abs(report.per_index_diagonal[-1])
    payload = report.to_dict()
    assert set(payload) == {"value_re", "value_im", "M", "N", "tail_estimate", "diagonal"}
    assert payload["M"] == 48 and payload["N"] == 20


def test_windowed_trace_matches_dense_products(small_heaviside_pair):
    A, B = small_heaviside_pair
    scheme = TruncationScheme(40, 12)
    a, b = A.entries[:40, :40], B.entries[:40, :40]

    report = windowed_trace(
        [WeightedWord(2.0, OperatorWord("ABB")), "A"], [OperatorWord("BAB")], A, B, scheme
    )

    dense = 2.0 * a @ b @ b + a - b @ a @ b
    assert report.value == pytest.approx(np.trace(dense[:12, :12]), abs=1e-13)


def test_commutator_diagonal_is_purely_imaginary(small_heaviside_pair):
    """[A, B] con A, B hermíticas es antihermítico: cada sumando es imaginario puro."""
    A, B = small_heaviside_pair

    report = commutator_trace(A, B, TruncationScheme(48, 24))

    diagonal = np.array(report.per_index_diagonal)
    assert np.max(np.abs(diagonal.real)) <= 1e-10 * max(np.max(np.abs(diagonal)), 1.0)


def test_self_commutator_vanishes(small_heaviside_pair):
    A, _ = small_heaviside_pair
    assert commutator_trace(A, A, TruncationScheme(48)).value == 0
    assert hall_conductance(A, A, TruncationScheme(48)) == 0.0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_full_window_hits_the_cyclicity_trap(small_heaviside_pair, n):
    """Con N = M la traza de (AB)ⁿ − (BA)ⁿ de matrices finitas es cero."""
    A, B = small_heaviside_pair
    report = word_power_trace(n, A, B, TruncationScheme(48, 48))
    assert abs(report.value) <= 1e-12


def test_windowed_trace_rejects_mismatched_sizes(small_heaviside_pair):
    A, _ = small_heaviside_pair
    other = ToeplitzMatrix(np.eye(10))
    with pytest.raises(ValueError):
        commutator_trace(A, other, TruncationScheme(10))
    with pytest.raises(ValueError):
        commutator_trace(other, other, TruncationScheme(20))


def test_word_trace_base_case_reproduces_commutator(small_heaviside_pair):
    A, B = small_heaviside_pair
    scheme = TruncationScheme(48)

    words = word_trace_for_polynomials(parse_polynomial("x"), parse_polynomial("y"), "left_normal", A, B, scheme)

    assert words.value == pytest.approx(commutator_trace(A, B, scheme).value, abs=1e-15)


def test_word_trace_rejects_bad_inputs(small_heaviside_pair):
    A, B = small_heaviside_pair
    x, y = parse_polynomial("x"), parse_polynomial("y")
    with pytest.raises(ValueError):
        word_trace_for_polynomials(x, y, "middle_normal", A, B, TruncationScheme(48))
    with pytest.raises(ValueError):
        word_trace_for_polynomials(parse_polynomial("(1+2i)*x"), y, "left_normal", A, B, TruncationScheme(48))


def test_constant_terms_do_not_contribute(small_heaviside_pair):
    A, B = small_heaviside_pair
    scheme = TruncationScheme(48)
    plain = word_trace_for_polynomials(parse_polynomial("x"), parse_polynomial("y"), "left_normal", A, B, scheme)
    shifted = word_trace_for_polynomials(
        parse_polynomial("x + 5"), parse_polynomial("y - 1/2"), "left_normal", A, B, scheme
    )
    assert shifted.value == pytest.approx(plain.value, abs=1e-15)


# ==============================================================================
# Extrapolación
# ==============================================================================
def test_richardson_on_geometric_sequence():
    result = richardson_extrapolate([(64, 1.5), (128, 1.25), (256, 1.125)])
    assert isinstance(result, ExtrapolationResult)
    assert result.value == pytest.approx(1.0, abs=1e-14)
    assert result.error_estimate == pytest.approx(0.125, abs=1e-14)


def test_richardson_constant_and_equal_values():
    assert richardson_extrapolate([(64, 0.3), (128, 0.3), (256, 0.3)]).value == 0.3
    two = richardson_extrapolate([(64, 0.7 - 0.1j), (128, 0.7 - 0.1j)])
    assert two.value == 0.7 - 0.1j
    assert two.error_estimate == 0.0


def test_richardson_falls_back_when_not_contracting():
    result = richardson_extrapolate([(64, 1.0), (128, 2.0), (256, 4.0)])
    assert result.value == 4.0


def test_richardson_keeps_last_sample_on_supergeometric_decay():
    """Errores 1e−6, 1e−9, 5e−15: Aitken sobrecorregiría, se conserva la última muestra."""
    result = richardson_extrapolate([(64, 1 + 1e-6), (128, 1 + 1e-9), (256, 1 + 5e-15)])
    assert result.value == 1 + 5e-15
    assert result.error_estimate < 1e-11


def test_richardson_keeps_last_sample_on_slow_contraction():
    result = richardson_extrapolate([(64, 0.0), (128, 1.0), (256, 1.8)])
    assert result.value == 1.8
    assert result.error_estimate == pytest.approx(3.2)


def test_richardson_requires_two_distinct_samples():
    with pytest.raises(ValueError):
        richardson_extrapolate([(64, 1.0)])
    with pytest.raises(ValueError):
        richardson_extrapolate([(64, 1.0), (64, 2.0)])


def test_convergence_sweep_doubles_at_fixed_ratio(small_heaviside_pair):
    A, B = small_heaviside_pair
    seen = []

    def evaluate(scheme):
        seen.append((scheme.M, scheme.N))
        return commutator_trace(A, B, scheme)

    steps, extrapolation = convergence_sweep(evaluate, TruncationScheme(48, 24, extrapolate=True), start_M=12)

    assert seen == [(12, 6), (24, 12), (48, 24)]
    assert [s.M for s in steps] == [12, 24, 48]
    assert extrapolation is not None


# ==============================================================================
# Criterios de aceptación (M = 256)
# ==============================================================================
@pytest.mark.slow
def test_commutator_trace_is_one_over_two_pi_i(heaviside_pair, acceptance_scheme):
    """2πi·Tr[A, B] = 1 con cortes de Heaviside, M = 256, N = 128."""
    A, B = heaviside_pair

    report = commutator_trace(A, B, acceptance_scheme)

    assert report.value == pytest.approx(-1j / (2 * math.pi), abs=1e-3 / (2 * math.pi))
    assert abs(TWO_PI_I * report.value - 1) <= 1e-3


@pytest.mark.slow
def test_commutator_error_decreases_with_cutoff(heaviside_pair):
    A, B = heaviside_pair
    errors = [
        abs(TWO_PI_I * commutator_trace(A, B, TruncationScheme(M, M // 2)).value - 1)
        for M in (64, 128, 256)
    ]
    assert errors[0] > errors[1] > errors[2]


@pytest.mark.slow
@pytest.mark.parametrize("n, tolerance", [(2, 2e-3), (3, 2e-3)])
def test_word_power_trace_is_one_over_n(heaviside_pair, acceptance_scheme, n, tolerance):
    A, B = heaviside_pair
    report = word_power_trace(n, A, B, acceptance_scheme)
    assert abs(TWO_PI_I * report.value - 1 / n) <= tolerance


@pytest.mark.slow
def test_principal_function_multiplier_is_minus_one(heaviside_pair, acceptance_scheme):
    """Tr[A, B] / (i/2π) recupera n = −1, el índice de G = −χ_S."""
    A, B = heaviside_pair
    value = commutator_trace(A, B, acceptance_scheme).value
    assert value / (1j / (2 * math.pi)) == pytest.approx(-1.0, abs=1e-3)


@pytest.mark.slow
def test_hall_conductance_is_minus_one_over_two_pi(heaviside_pair, acceptance_scheme):
    A, B = heaviside_pair
    assert hall_conductance(A, B, acceptance_scheme) == pytest.approx(-1 / (2 * math.pi), abs=1e-4)


@pytest.mark.slow
def test_polynomial_word_x3y2_gives_one_third(heaviside_pair, acceptance_scheme):
    A, B = heaviside_pair
    p, q = parse_polynomial("x^3*y^2"), parse_polynomial("y")

    report = word_trace_for_polynomials(p, q, Ordering.LEFT_NORMAL, A, B, acceptance_scheme)

    assert abs(TWO_PI_I * report.value - 1 / 3) <= 2e-3


@pytest.mark.slow
def test_trace_does_not_depend_on_ordering(heaviside_pair, acceptance_scheme):
    A, B = heaviside_pair
    p, q = parse_polynomial("x*y"), parse_polynomial("y")

    left = word_trace_for_polynomials(p, q, "left_normal", A, B, acceptance_scheme)
    right = word_trace_for_polynomials(p, q, "right_normal", A, B, acceptance_scheme)

    assert abs(left.value - right.value) <= 1e-6


@pytest.mark.slow
def test_trace_does_not_depend_on_switch_profile(heaviside_pair, ramp_pair, acceptance_scheme):
    heaviside = commutator_trace(*heaviside_pair, acceptance_scheme).value
    ramp = commutator_trace(*ramp_pair, acceptance_scheme).value
    assert abs(TWO_PI_I * (ramp - heaviside)) <= 2e-3


@pytest.mark.slow
@pytest.mark.parametrize("b", [1.0, 4.0])
def test_trace_does_not_depend_on_field_strength(heaviside_pair, acceptance_scheme, b):
    """Con el corte en 0 el reescalado deja el perfil igual; con la rampa cambia la matriz, no la traza."""
    reference = commutator_trace(*heaviside_pair, acceptance_scheme).value

    ramp = SwitchFunction.linear_ramp(-1.0, 1.0)
    A = build_toeplitz(PlanarSymbol(ramp, Axis.FIRST, b), 256)
    B = build_toeplitz(PlanarSymbol(ramp, Axis.SECOND, b), 256)
    heaviside_A = build_toeplitz(PlanarSymbol(SwitchFunction.heaviside(0.0), Axis.FIRST, b), 256)
    heaviside_B = build_toeplitz(PlanarSymbol(SwitchFunction.heaviside(0.0), Axis.SECOND, b), 256)

    assert abs(TWO_PI_I * (commutator_trace(A, B, acceptance_scheme).value - reference)) <= 2e-3
    assert commutator_trace(heaviside_A, heaviside_B, acceptance_scheme).value == pytest.approx(
        reference, abs=1e-3 / (2 * math.pi)
    )


@pytest.mark.slow
def test_partial_sums_stabilize_inside_the_window(heaviside_pair, acceptance_scheme):
    """|suma(N) − suma(N/2)| queda dentro de la cola estimada con M = 256."""
    # 1. Preparación / 2. Acción
    report = commutator_trace(*heaviside_pair, acceptance_scheme)
    half = sum(report.per_index_diagonal[: report.N // 2])

    # 3. Aserción
    assert abs(report.value - half) <= report.tail_estimate + 64 * np.finfo(float).eps


@pytest.mark.slow
def test_extrapolation_does_not_worsen_the_largest_sample(heaviside_pair):
    """Barrido M ∈ {64, 128, 256}: el valor extrapolado no se aleja de 1 más que el de M = 256."""
    # 1. Preparación
    A, B = heaviside_pair

    # 2. Acción
    steps, extrapolation = convergence_sweep(
        lambda s: commutator_trace(A, B, s), TruncationScheme(256, 128, extrapolate=True), start_M=64
    )

    # 3. Aserción
    assert [s.M for s in steps] == [64, 128, 256]
    raw_error = abs(TWO_PI_I * steps[-1].report.value - 1)
    assert abs(TWO_PI_I * extrapolation.value - 1) <= raw_error
