"""Remote state preparation of qubit states over noisy shared entanglement."""

__version__ = "0.1.0"
