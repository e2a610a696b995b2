# src/principal_trace/errors.py

# Excepciones de dominio. El CLI las traduce a códigos de salida:
#   ConfigError (y PolynomialSyntaxError) -> 2
#   ResourceCapError -> 3
#   OutputUnwritableError -> 4


class ConfigError(ValueError):
    """Configuración inválida detectada antes de cualquier cálculo."""


class PolynomialSyntaxError(ConfigError):
    """Error de sintaxis en un polinomio, símbolo de Laurent o racional gaussiano."""

    def __init__(self, text: str, position: int, message: str):
        self.text = text
        self.position = position
        self.message = message
        pointer = " " * position + "^"
        super().__init__(f"{message} (posición {position})\n  {text}\n  {pointer}")


class ResourceCapError(RuntimeError):
    """El tamaño de matriz pedido supera el máximo configurado."""


class OutputUnwritableError(OSError):
    """No se pudo escribir el archivo de reporte."""


class PrecisionLossError(ArithmeticError):
    """La serie en precisión extendida no se reproduce al doblar la precisión."""


class EssentialSpectrumError(ValueError):
    """El punto cae sobre el espectro esencial: el índice no está definido."""
