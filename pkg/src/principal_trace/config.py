# src/principal_trace/config.py

import math
import os
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping, Optional

import yaml
from dotenv import load_dotenv
from loguru import logger

from .errors import ConfigError, ResourceCapError
from .hardy import LaurentSymbol
from .poisson import PrincipalFunction, QPolynomial2, Region, parse_polynomial
from .symbols import SwitchFunction, SwitchKind
from .trace import Ordering, TruncationScheme

load_dotenv()

DEFAULT_MAX_M = 1024
FORMATS = ("csv", "json")


@dataclass
class ExperimentConfig:
    command: str = "trace"
    # --- Símbolo ---
    symbol: str = SwitchKind.HEAVISIDE.value
    a: float = 0.0  # salto de heaviside o centro de erf_ramp
    c: float = -1.0
    d: float = 1.0
    width: float = 1.0
    b: float = 2.0
    # --- Esquema de truncación ---
    M: int = 256
    window: Optional[int] = None  # None: N = M/2
    full_window: bool = False
    extrapolate: bool = True
    sweep_start: int = 64
    word_n: int = 1
    # --- Motor exacto ---
    p: str = "x"
    q: str = "y"
    ordering: str = Ordering.LEFT_NORMAL.value
    region: str = Region.UNIT_SQUARE.value
    multiplier: int = -1
    f: str = "-1:1"
    g: str = "1:1"
    tolerance: float = 5e-3
    # --- Niveles de Landau y utilidades ---
    level: int = 1
    count: int = 200
    shifts: list[float] = field(default_factory=lambda: [-1.0, 0.5, 2.5])
    # --- Salida y recursos ---
    format: str = "csv"
    out: Optional[Path] = None
    dump: Optional[Path] = None
    no_timestamp: bool = False
    precision_bits: Optional[int] = None
    threads: int = 1
    max_M: int = DEFAULT_MAX_M
    log_level: str = "INFO"
    log_json: bool = False

    # --- Objetos de dominio derivados ---

    def profile(self) -> SwitchFunction:
        kind = SwitchKind(self.symbol)
        if kind == SwitchKind.HEAVISIDE:
            return SwitchFunction.heaviside(self.a)
        if kind == SwitchKind.LINEAR_RAMP:
            return SwitchFunction.linear_ramp(self.c, self.d)
        return SwitchFunction.erf_ramp(self.a, self.width)

    def scheme(self) -> TruncationScheme:
        N = self.M if self.full_window else self.window
        return TruncationScheme(self.M, N, self.extrapolate)

    def build_options(self) -> dict:
        return {"max_M": self.max_M, "precision_bits": self.precision_bits, "threads": self.threads}

    def polynomials(self) -> tuple[QPolynomial2, QPolynomial2]:
        return parse_polynomial(self.p), parse_polynomial(self.q)

    def laurent_symbols(self) -> tuple[LaurentSymbol, LaurentSymbol]:
        return LaurentSymbol.parse(self.f), LaurentSymbol.parse(self.g)

    def principal_function(self) -> PrincipalFunction:
        return PrincipalFunction(self.multiplier, Region(self.region))

    def validate(self) -> "ExperimentConfig":
        """Comprueba todos los campos antes de cualquier cálculo."""

        def fail(message: str):
            logger.error(f"Configuración inválida: {message}")
            raise ConfigError(message)

        for name in ("a", "c", "d", "width", "b", "tolerance"):
            if not math.isfinite(getattr(self, name)):
                fail(f"{name} debe ser finito")
        if self.b <= 0:
            fail(f"b debe ser positivo (b={self.b})")
        if self.M < 1:
            fail(f"M debe ser ≥ 1 (M={self.M})")
        if self.window is not None and not 1 <= self.window <= self.M:
            fail(f"La ventana debe cumplir 1 ≤ N ≤ M (N={self.window}, M={self.M})")
        if self.sweep_start < 1:
            fail("sweep_start debe ser ≥ 1")
        if self.word_n < 1:
            fail(f"word_n debe ser ≥ 1 (word_n={self.word_n})")
        if self.format not in FORMATS:
            fail(f"Formato desconocido: {self.format}")
        if self.threads < 1:
            fail("threads debe ser ≥ 1")
        if self.precision_bits is not None and self.precision_bits < 53:
            fail("precision_bits debe ser ≥ 53")
        if self.max_M < 1:
            fail("max_M debe ser ≥ 1")
        if self.level not in (0, 1):
            fail(f"Solo se admiten los niveles 0 y 1 (level={self.level})")
        if self.count < 1:
            fail("count debe ser ≥ 1")
        if self.tolerance <= 0:
            fail("tolerance debe ser positiva")
        if not all(math.isfinite(s) for s in self.shifts):
            fail("Los desplazamientos de switch-check deben ser finitos")
        if self.symbol not in {k.value for k in SwitchKind}:
            fail(f"Símbolo desconocido: {self.symbol}")
        if self.ordering not in {o.value for o in Ordering}:
            fail(f"Ordenación desconocida: {self.ordering}")
        if self.region not in {r.value for r in Region}:
            fail(f"Región desconocida: {self.region}")
        try:
            self.profile()
            self.principal_function()
        except ValueError as e:
            fail(str(e))

        # Los errores de sintaxis ya son ConfigError y llevan la posición.
        self.polynomials()
        self.laurent_symbols()

        if self.M > self.max_M:
            logger.error(f"M={self.M} supera el máximo configurado {self.max_M}")
            raise ResourceCapError(f"M={self.M} supera el máximo configurado {self.max_M}")
        return self


# --- Carga desde archivo, entorno y línea de comandos ---

_BOOL_TRUE = {"true", "1", "yes", "on"}
_BOOL_FALSE = {"false", "0", "no", "off"}


def _cast(name: str, raw: Any, default: Any) -> Any:
    if raw is None:
        return None
    if name == "shifts":
        values = raw if isinstance(raw, (list, tuple)) else [raw]
        return [float(v) for v in values]
    if name in ("out", "dump"):
        return Path(raw)
    if isinstance(default, bool) or name in ("full_window", "extrapolate", "no_timestamp", "log_json"):
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in _BOOL_TRUE:
            return True
        if text in _BOOL_FALSE:
            return False
        raise ValueError(f"valor booleano no válido: {raw!r}")
    if name in ("window", "precision_bits") or isinstance(default, int):
        if isinstance(raw, float) and not raw.is_integer():
            raise ValueError(f"se esperaba un entero: {raw!r}")
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return str(raw)


def _apply(config: ExperimentConfig, values: Mapping[str, Any], source: str):
    defaults = {f.name: getattr(ExperimentConfig(), f.name) for f in fields(ExperimentConfig)}
    for key, raw in values.items():
        if key not in defaults:
            logger.error(f"Clave desconocida '{key}' en {source}")
            raise ConfigError(f"Clave desconocida '{key}' en {source}")
        if isinstance(raw, dict) or (isinstance(raw, list) and key != "shifts"):
            raise ConfigError(f"'{key}' en {source}: el archivo de configuración debe ser plano")
        try:
            setattr(config, key, _cast(key, raw, defaults[key]))
        except (TypeError, ValueError) as e:
            logger.error(f"Valor inválido para '{key}' en {source}: {e}")
            raise ConfigError(f"Valor inválido para '{key}' en {source}: {e}") from e


def load_config(
    path: Optional[Path] = None, overrides: Optional[Mapping[str, Any]] = None
) -> ExperimentConfig:
    """
    Valores por defecto < archivo YAML plano < entorno (.env incluido) < flags de la CLI.
    """
    config = ExperimentConfig()

    if path is not None:
        path = Path(path)
        if not path.exists():
            logger.error(f"El archivo de configuración '{path}' no existe")
            raise ConfigError(f"El archivo de configuración '{path}' no existe")
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"YAML inválido en {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{path} debe contener un mapeo clave: valor")
        _apply(config, data, str(path))

    env = {}
    if os.getenv("PRINCIPAL_TRACE_MAX_M"):
        env["max_M"] = os.getenv("PRINCIPAL_TRACE_MAX_M")
    if os.getenv("LOG_LEVEL"):
        env["log_level"] = os.getenv("LOG_LEVEL")
    if os.getenv("LOG_JSON"):
        env["log_json"] = os.getenv("LOG_JSON")
    _apply(config, env, "el entorno")

    if overrides:
        _apply(config, {k: v for k, v in overrides.items() if v is not None}, "la línea de comandos")

    logger.debug(f"Configuración cargada para '{config.command}'")
    return config
