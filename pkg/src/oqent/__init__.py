"""Operational-quasiprobability entanglement characterization and an effective
two-spin double-quantum-dot simulator."""

__version__ = "0.1.0"
