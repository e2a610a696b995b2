# src/principal_trace/experiments.py

# Capa de orquestación: cada experimento construye un Report en un hilo
# (los motores son CPU-bound) y lo escribe con el escritor configurado.

import asyncio
import math
from datetime import datetime, timezone
from fractions import Fraction

from loguru import logger

from .config import ExperimentConfig
from .fock import (
    ToeplitzMatrix,
    build_toeplitz,
    dump_matrix_csv,
    shift_weights,
    shift_weights_quadrature,
    weighted_shift_index,
)
from .hardy import helton_howe_check
from .landau import additivity_residual, cumulative_matrix
from .poisson import Region, chhp_prediction, integrate_over, poisson_bracket
from .reports import Report, get_writer, write_atomic
from .symbols import Axis, PlanarSymbol, switch_integral_check
from .trace import (
    Ordering,
    TruncationScheme,
    convergence_sweep,
    hall_conductance,
    word_power_trace,
    word_trace_for_polynomials,
)

TRACE_COLUMNS = [
    "M", "N", "value_re", "value_im", "two_pi_i_re", "two_pi_i_im", "abs_error", "tail_estimate",
]


def _metadata(config: ExperimentConfig, **extra) -> dict:
    metadata = {"command": config.command}
    if not config.no_timestamp:
        metadata["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    metadata.update(extra)
    return metadata


def _symbol_metadata(config: ExperimentConfig) -> dict:
    return {"symbol": str(config.profile()), "b": config.b}


def _symbol_pair(config: ExperimentConfig) -> tuple[PlanarSymbol, PlanarSymbol]:
    profile = config.profile()
    return PlanarSymbol(profile, Axis.FIRST, config.b), PlanarSymbol(profile, Axis.SECOND, config.b)


def _matrix_pair(config: ExperimentConfig) -> tuple[ToeplitzMatrix, ToeplitzMatrix]:
    first, second = _symbol_pair(config)
    options = config.build_options()
    return build_toeplitz(first, config.M, **options), build_toeplitz(second, config.M, **options)


async def _emit(config: ExperimentConfig, report: Report) -> Report:
    await get_writer(config.format).write(report, config.out)
    return report


async def _emit_with_dump(config: ExperimentConfig, report: Report, matrix: ToeplitzMatrix) -> Report:
    """Vuelca la matriz y escribe el reporte; si el reporte falla, el volcado se retira."""
    if config.dump is None:
        return await _emit(config, report)

    dump = await write_atomic(config.dump, dump_matrix_csv(matrix), what="el volcado de la matriz")
    try:
        await _emit(config, report)
    except Exception:
        dump.unlink(missing_ok=True)
        logger.warning(f"Volcado {dump} retirado: el reporte no se pudo escribir")
        raise
    logger.info(f"Matriz {matrix.M}×{matrix.M} volcada en {dump}")
    return report


def _trace_row(report, target: complex) -> list:
    two_pi_i = report.two_pi_i_value
    return [
        report.M,
        report.N,
        float(report.value.real),
        float(report.value.imag),
        float(two_pi_i.real),
        float(two_pi_i.imag),
        float(abs(two_pi_i - target)),
        float(report.tail_estimate),
    ]


# ==============================================================================
# trace: barrido de convergencia de Tr((AB)ⁿ − (BA)ⁿ)
# ==============================================================================
def _trace_report(config: ExperimentConfig) -> tuple[Report, ToeplitzMatrix]:
    A, B = _matrix_pair(config)
    scheme = config.scheme()
    n = config.word_n
    target = 1.0 / n

    steps, extrapolation = convergence_sweep(
        lambda s: word_power_trace(n, A, B, s), scheme, start_M=config.sweep_start
    )
    report = Report(
        "trace",
        TRACE_COLUMNS,
        metadata=_metadata(config, **_symbol_metadata(config), word_n=n, target=str(Fraction(1, n))),
    )
    for step in steps:
        report.add_row(*_trace_row(step.report, target))

    if extrapolation is not None:
        two_pi_i = 2j * math.pi * extrapolation.value
        report.metadata.update(
            extrapolated_two_pi_i_re=float(two_pi_i.real),
            extrapolated_two_pi_i_im=float(two_pi_i.imag),
            extrapolated_abs_error=float(abs(two_pi_i - target)),
            extrapolation_error_estimate=float(2 * math.pi * extrapolation.error_estimate),
        )
    if n == 1 and not scheme.is_full_window:
        report.metadata["hall_conductance"] = hall_conductance(A, B, scheme)

    final = steps[-1].report
    if config.format == "json":
        # Sólo JSON admite la diagonal por índice del último paso como metadato.
        report.metadata["final_step"] = final.to_dict()
    logger.success(f"trace M={final.M}, N={final.N}: 2πi·Tr = {final.two_pi_i_value:.10g} (objetivo {target:g})")
    return report, A


async def run_trace(config: ExperimentConfig) -> Report:
    report, A = await asyncio.to_thread(_trace_report, config)
    return await _emit_with_dump(config, report, A)


# ==============================================================================
# word: trazas de [p(A,B), q(A,B)] bajo ambas ordenaciones
# ==============================================================================
def _word_report(config: ExperimentConfig) -> Report:
    p, q = config.polynomials()
    A, B = _matrix_pair(config)
    scheme = config.scheme()
    chosen = Ordering(config.ordering)

    report = Report(
        "word",
        ["ordering", "M", "N", "value_re", "value_im", "two_pi_i_re", "two_pi_i_im", "tail_estimate"],
        metadata=_metadata(config, **_symbol_metadata(config), p=str(p), q=str(q), ordering=chosen.value),
    )
    values = {}
    for ordering in (chosen, *(o for o in Ordering if o != chosen)):
        trace = word_trace_for_polynomials(p, q, ordering, A, B, scheme)
        values[ordering] = trace.value
        two_pi_i = trace.two_pi_i_value
        report.add_row(
            ordering.value, trace.M, trace.N, float(trace.value.real), float(trace.value.imag),
            float(two_pi_i.real), float(two_pi_i.imag), float(trace.tail_estimate),
        )
    difference = abs(values[Ordering.LEFT_NORMAL] - values[Ordering.RIGHT_NORMAL])
    report.metadata["ordering_difference"] = float(difference)
    logger.success(f"word [{p}, {q}]: diferencia entre ordenaciones {difference:.2e}")
    return report


async def run_word(config: ExperimentConfig) -> Report:
    report = await asyncio.to_thread(_word_report, config)
    return await _emit(config, report)


# ==============================================================================
# chhp: predicción exacta por la función principal
# ==============================================================================
def _chhp_report(config: ExperimentConfig) -> Report:
    p, q = config.polynomials()
    G = config.principal_function()
    bracket = poisson_bracket(p, q)
    integral = integrate_over(G.region, bracket)
    prediction = chhp_prediction(G, p, q)
    value = prediction.to_complex()

    report = Report(
        "chhp",
        [
            "p", "q", "principal_function", "bracket", "bracket_integral",
            "per_two_pi_i", "rational_part", "exact", "value_re", "value_im",
        ],
        metadata=_metadata(
            config, region=G.region.value, multiplier=G.multiplier,
            pi_content=integral.has_pi_content,
        ),
    )
    report.add_row(
        str(p), str(q), str(G), str(bracket), str(integral),
        str(prediction.per_two_pi_i), str(prediction.rational_part), str(prediction),
        float(value.real), float(value.imag),
    )
    if G.region == Region.UNIT_SQUARE and integral.has_pi_content:
        # Imposible por construcción: la integral del cuadrado es racional.
        raise ArithmeticError("Contenido en π en una integral sobre el cuadrado unidad")
    logger.success(f"chhp: Tr[p,q] = {prediction}")
    return report


async def run_chhp(config: ExperimentConfig) -> Report:
    report = await asyncio.to_thread(_chhp_report, config)
    return await _emit(config, report)


# ==============================================================================
# compare: motor numérico frente a la predicción exacta con G = −χ_S
# ==============================================================================
def _compare_report(config: ExperimentConfig) -> Report:
    p, q = config.polynomials()
    G = config.principal_function()
    prediction = chhp_prediction(G, p, q)
    exact = prediction.to_complex()

    A, B = _matrix_pair(config)
    numeric = word_trace_for_polynomials(p, q, config.ordering, A, B, config.scheme())
    abs_difference = abs(numeric.value - exact)
    # La tolerancia se aplica en unidades de 1/(2πi), las del valor cuantizado.
    difference = 2 * math.pi * abs_difference
    passed = difference <= config.tolerance

    report = Report(
        "compare",
        [
            "M", "N", "value_re", "value_im", "exact", "exact_re", "exact_im",
            "abs_difference", "two_pi_abs_difference", "tolerance", "passed",
        ],
        metadata=_metadata(
            config, **_symbol_metadata(config), p=str(p), q=str(q),
            principal_function=str(G), ordering=config.ordering,
        ),
    )
    report.add_row(
        numeric.M, numeric.N, float(numeric.value.real), float(numeric.value.imag),
        str(prediction), float(exact.real), float(exact.imag),
        float(abs_difference), float(difference), float(config.tolerance), passed,
    )
    if passed:
        logger.success(f"compare [{p}, {q}]: |2πi·Δ| = {difference:.2e} ≤ {config.tolerance:g}")
    else:
        logger.warning(f"compare [{p}, {q}]: |2πi·Δ| = {difference:.2e} > {config.tolerance:g}")
    return report


async def run_compare(config: ExperimentConfig) -> Report:
    report = await asyncio.to_thread(_compare_report, config)
    return await _emit(config, report)


# ==============================================================================
# hardy: Helton–Howe exacto en H²(𝕋)
# ==============================================================================
def _hardy_report(config: ExperimentConfig) -> Report:
    f, g = config.laurent_symbols()
    harmonic = helton_howe_check(f, g)
    alternative = helton_howe_check(f, g, extension="alternative")
    report = Report(
        "hardy",
        ["f", "g", "lhs", "rhs", "equal", "rhs_alternative", "equal_alternative"],
        metadata=_metadata(config),
    )
    report.add_row(
        str(f), str(g), str(harmonic.lhs), str(harmonic.rhs), harmonic.equal,
        str(alternative.rhs), alternative.equal,
    )
    logger.success(f"hardy: Tr[T_f,T_g] = {harmonic.lhs}, (1/2πi)∫_D{{f̃,g̃}} = {harmonic.rhs}")
    return report


async def run_hardy(config: ExperimentConfig) -> Report:
    report = await asyncio.to_thread(_hardy_report, config)
    return await _emit(config, report)


# ==============================================================================
# landau: trazas por nivel, acumulada y residuo de aditividad
# ==============================================================================
def _landau_report(config: ExperimentConfig) -> tuple[Report, ToeplitzMatrix]:
    ell = config.level
    scheme = config.scheme()
    profile = config.profile()
    options = config.build_options()
    result = additivity_residual(ell, scheme, profile, config.b, config.word_n, **options)

    report = Report(
        "landau",
        ["component", *TRACE_COLUMNS],
        metadata=_metadata(
            config, **_symbol_metadata(config), level=ell, word_n=config.word_n,
            basis_order="(0,k),(1,k-1)" if ell == 1 else "(0,k)",
        ),
    )
    level_target = 1.0 / config.word_n
    for j, trace in enumerate(result.levels):
        report.add_row(f"level_{j}", *_trace_row(trace, level_target))
    report.add_row("cumulative", *_trace_row(result.cumulative, (ell + 1) * level_target))
    report.metadata["additivity_residual"] = float(result.residual)

    A = cumulative_matrix(ell, PlanarSymbol(profile, Axis.FIRST, config.b), config.M, **options)
    if config.word_n == 1:
        B = cumulative_matrix(ell, PlanarSymbol(profile, Axis.SECOND, config.b), config.M, **options)
        cumulative_scheme = TruncationScheme((ell + 1) * scheme.M, (ell + 1) * scheme.N)
        report.metadata["hall_conductance_cumulative"] = hall_conductance(A, B, cumulative_scheme)

    logger.success(f"landau ℓ={ell}: residuo de aditividad {result.residual:.3e}")
    return report, A


async def run_landau(config: ExperimentConfig) -> Report:
    report, A = await asyncio.to_thread(_landau_report, config)
    return await _emit_with_dump(config, report, A)


# ==============================================================================
# shift-weights y switch-check
# ==============================================================================
def _shift_weights_report(config: ExperimentConfig) -> Report:
    weights = shift_weights(config.count)
    oracle = shift_weights_quadrature(config.count)
    index = weighted_shift_index(weights)
    increasing = bool(all(a < b for a, b in zip(weights[:-1], weights[1:])))

    report = Report(
        "shift-weights",
        ["n", "weight", "quadrature", "abs_difference"],
        metadata=_metadata(
            config, index=index.index, kernel_dimension=index.kernel_dimension,
            cokernel_dimension=index.cokernel_dimension, strictly_increasing=increasing,
            max_abs_difference=float(max(abs(weights - oracle))),
        ),
    )
    for n, (c, o) in enumerate(zip(weights, oracle)):
        report.add_row(n, float(c), float(o), float(abs(c - o)))
    logger.success(f"shift-weights: {config.count} pesos, índice {index.index}")
    return report


async def run_shift_weights(config: ExperimentConfig) -> Report:
    report = await asyncio.to_thread(_shift_weights_report, config)
    return await _emit(config, report)


def _switch_check_report(config: ExperimentConfig) -> Report:
    profile = config.profile()
    report = Report(
        "switch-check",
        ["shift", "integral", "abs_error"],
        metadata=_metadata(config, symbol=str(profile)),
    )
    for a in config.shifts:
        value = switch_integral_check(profile, a)
        report.add_row(float(a), float(value), float(abs(value - a)))
    logger.success(f"switch-check {profile}: {len(config.shifts)} desplazamientos")
    return report


async def run_switch_check(config: ExperimentConfig) -> Report:
    report = await asyncio.to_thread(_switch_check_report, config)
    return await _emit(config, report)


RUNNERS = {
    "trace": run_trace,
    "word": run_word,
    "chhp": run_chhp,
    "compare": run_compare,
    "hardy": run_hardy,
    "landau": run_landau,
    "shift-weights": run_shift_weights,
    "switch-check": run_switch_check,
}
