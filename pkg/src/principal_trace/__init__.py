# src/principal_trace/__init__.py

# Laboratorio de trazas de conmutadores de Toeplitz en el espacio de Fock.
__version__ = "0.1.0"
