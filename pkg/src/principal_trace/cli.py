# src/principal_trace/cli.py

import asyncio
import functools
import logging
import sys
from pathlib import Path
from typing import Optional

import click
from loguru import logger

from .config import ExperimentConfig, load_config
from .errors import ConfigError, OutputUnwritableError, ResourceCapError
from .experiments import RUNNERS
from .poisson import Region
from .symbols import SwitchKind
from .trace import Ordering

EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_OUTPUT = 4


# Configurar Loguru para interceptar los logs de la librería estándar
class InterceptHandler(logging.Handler):
    def emit(self, record):
        logger_opt = logger.opt(depth=6, exception=record.exc_info)
        logger_opt.log(record.levelname, record.getMessage())


def setup_logging(config: ExperimentConfig):
    logging.basicConfig(handlers=[InterceptHandler()], level=0, force=True)
    logger.remove()  # Eliminar el manejador por defecto de Loguru

    if config.log_json:
        logger.add(sys.stderr, level=config.log_level, format="{message}", serialize=True)
    else:
        logger.add(sys.stderr, level=config.log_level)


def _window(value: Optional[str]) -> dict:
    if value is None:
        return {}
    if value.strip().lower() == "full":
        return {"full_window": True}
    try:
        return {"window": int(value)}
    except ValueError:
        raise click.BadParameter("debe ser un entero o 'full'", param_hint="--window") from None


def common_options(func):
    """Flags compartidos por todos los subcomandos."""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False, path_type=Path),
                     help="Archivo YAML plano con valores por defecto."),
        click.option("--out", type=click.Path(dir_okay=False, path_type=Path),
                     help="Archivo de reporte (por defecto, stdout)."),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), help="Formato del reporte."),
        click.option("--M", "size", type=int, help="Corte exterior M."),
        click.option("--window", type=str, help="Ventana N de la traza, o 'full' (N = M)."),
        click.option("--b", type=float, help="Intensidad del campo magnético."),
        click.option("--symbol", type=click.Choice([k.value for k in SwitchKind]), help="Perfil de corte."),
        click.option("--a", type=float, help="Salto de heaviside o centro de erf_ramp."),
        click.option("--c", type=float, help="Extremo izquierdo de linear_ramp."),
        click.option("--d", type=float, help="Extremo derecho de linear_ramp."),
        click.option("--width", type=float, help="Anchura de erf_ramp."),
        click.option("--threads", type=int, help="Procesos para ensamblar matrices."),
        click.option("--precision-bits", type=int, help="Bits de trabajo de la serie de momentos."),
        click.option("--no-timestamp", is_flag=True, default=None,
                     help="Omitir generated_at (modo comparación)."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _execute(command: str, config_path: Optional[Path], overrides: dict):
    """Carga, valida y ejecuta; traduce las excepciones de dominio a códigos de salida."""
    try:
        config = load_config(config_path, {"command": command, **overrides})
        setup_logging(config)
        config.validate()
        logger.info(f"Ejecutando '{command}' con M={config.M}")
        asyncio.run(RUNNERS[command](config))
    except ConfigError as e:
        logger.error(f"Configuración inválida: {e}")
        sys.exit(EXIT_CONFIG)
    except ResourceCapError as e:
        logger.error(f"Límite de recursos: {e}")
        sys.exit(EXIT_RESOURCE)
    except OutputUnwritableError as e:
        logger.error(f"Salida no escribible: {e}")
        sys.exit(EXIT_OUTPUT)


def _common_overrides(
    fmt, out, size, window, b, symbol, a, c, d, width, threads, precision_bits, no_timestamp
) -> dict:
    return {
        "format": fmt, "out": out, "M": size, "b": b, "symbol": symbol, "a": a, "c": c, "d": d,
        "width": width, "threads": threads, "precision_bits": precision_bits,
        "no_timestamp": no_timestamp, **_window(window),
    }


def subcommand(name: str):
    """Registra un subcomando con los flags comunes y el contrato de salida."""

    def decorator(func):
        @cli.command(name=name, help=func.__doc__)
        @common_options
        @functools.wraps(func)
        def wrapper(config_path, fmt, out, size, window, b, symbol, a, c, d, width,
                    threads, precision_bits, no_timestamp, **specific):
            overrides = _common_overrides(
                fmt, out, size, window, b, symbol, a, c, d, width, threads, precision_bits, no_timestamp
            )
            overrides.update(func(**specific) or {})
            _execute(name, config_path, overrides)

        return wrapper

    return decorator


@click.group()
def cli():
    """Laboratorio de trazas de conmutadores de Toeplitz: motor numérico y motor exacto."""
    pass


@click.option("--word-n", type=int, help="Orden n de Tr((AB)ⁿ − (BA)ⁿ).")
@click.option("--extrapolate/--no-extrapolate", default=None, help="Extrapolación de Richardson.")
@click.option("--dump", type=click.Path(dir_okay=False, path_type=Path), help="Volcado CSV de la matriz A.")
@subcommand("trace")
def trace(word_n, extrapolate, dump):
    """Barrido de convergencia de la traza con ventana de [A, B] (o de la palabra de orden n)."""
    return {"word_n": word_n, "extrapolate": extrapolate, "dump": dump}


@click.option("--p", type=str, help="Polinomio p(x, y).")
@click.option("--q", type=str, help="Polinomio q(x, y).")
@click.option("--ordering", type=click.Choice([o.value for o in Ordering]))
@subcommand("word")
def word(p, q, ordering):
    """Traza numérica de [p(A,B), q(A,B)] con ambas ordenaciones."""
    return {"p": p, "q": q, "ordering": ordering}


@click.option("--p", type=str, help="Polinomio p(x, y).")
@click.option("--q", type=str, help="Polinomio q(x, y).")
@click.option("--region", type=click.Choice([r.value for r in Region]))
@click.option("--multiplier", type=int, help="Multiplicador entero n de G = n·χ_región.")
@subcommand("chhp")
def chhp(p, q, region, multiplier):
    """Predicción exacta de Tr[p(A,B), q(A,B)] por la función principal."""
    return {"p": p, "q": q, "region": region, "multiplier": multiplier}


@click.option("--p", type=str, help="Polinomio p(x, y).")
@click.option("--q", type=str, help="Polinomio q(x, y).")
@click.option("--ordering", type=click.Choice([o.value for o in Ordering]))
@click.option("--tolerance", type=float, help="Tolerancia sobre |2πi·(numérico − exacto)|.")
@subcommand("compare")
def compare(p, q, ordering, tolerance):
    """Compara el motor numérico con la predicción exacta (G = −χ_S)."""
    return {"p": p, "q": q, "ordering": ordering, "tolerance": tolerance}


@click.option("--f", type=str, help="Símbolo de Laurent f, p. ej. '-1:1'.")
@click.option("--g", type=str, help="Símbolo de Laurent g, p. ej. '1:1'.")
@subcommand("hardy")
def hardy(f, g):
    """Comprobación exacta de Helton–Howe para operadores de Toeplitz en H²."""
    return {"f": f, "g": g}


@click.option("--level", type=int, help="Número de niveles acumulados ℓ (0 o 1).")
@click.option("--word-n", type=int, help="Orden n de la palabra.")
@click.option("--dump", type=click.Path(dir_okay=False, path_type=Path), help="Volcado CSV de la matriz acumulada.")
@subcommand("landau")
def landau(level, word_n, dump):
    """Trazas por nivel de Landau, traza acumulada y residuo de aditividad."""
    return {"level": level, "word_n": word_n, "dump": dump}


@click.option("--count", type=int, help="Número de pesos c_n.")
@subcommand("shift-weights")
def shift_weights(count):
    """Pesos del desplazamiento P(z/|z|)P, oráculo radial e índice."""
    return {"count": count}


@click.option("--shift", "shifts", type=float, multiple=True, help="Desplazamiento a (repetible).")
@subcommand("switch-check")
def switch_check(shifts):
    """Comprueba ∫(Λ(x+a) − Λ(x))dx = a."""
    return {"shifts": list(shifts) or None}


if __name__ == "__main__":
    cli()
