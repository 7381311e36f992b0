"""Ideal gates, the rotate-then-entangle state family and the negativity baseline."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .oq import marginal_negativity
from .qcore import SIGMA_I, SIGMA_X, basis_ket, density_matrix, kron, partial_transpose, trace_norm
from .records import SweepRecord


@dataclass(frozen=True)
class GateU:
    matrix: np.ndarray
    arity: int
    label: str


def rx(alpha: float) -> GateU:
    """``R_x(α) = cos(α/2) 𝟙 − i sin(α/2) σx``."""
    m = np.cos(alpha / 2) * SIGMA_I - 1j * np.sin(alpha / 2) * SIGMA_X
    return GateU(m, 1, f"Rx({alpha:.6g})")


def cnot() -> GateU:
    """CNOT with the first tensor factor as control."""
    m = np.eye(4, dtype=complex)[[0, 1, 3, 2]]
    return GateU(m, 2, "CNOT")


SWAP = np.eye(4, dtype=complex)[[0, 2, 1, 3]]


def psi_alpha(alpha: float) -> np.ndarray:
    """``CNOT · (R_x(α) ⊗ 𝟙) |00⟩ = cos(α/2)|00⟩ − i sin(α/2)|11⟩`` for ``0 ≤ α ≤ π``."""
    if not 0.0 <= alpha <= np.pi:
        raise ValueError(f"alpha={alpha!r} outside [0, pi]")
    return cnot().matrix @ kron(rx(alpha).matrix, SIGMA_I) @ basis_ket("00")


def negativity_baseline(rho: np.ndarray) -> float:
    """Partial-transpose negativity scaled so a Bell state scores 1: ``‖ρ^T_B‖₁ − 1``."""
    rho = density_matrix(rho)
    return max(trace_norm(partial_transpose(rho, "second")) - 1.0, 0.0)


def normalize_raw(records: list[SweepRecord]) -> list[SweepRecord]:
    """Fill ``normalized = raw / max(raw)``; an all-zero sweep stays zero."""
    peak = max((r.raw for r in records), default=0.0)
    scale = 1.0 / peak if peak > 0 else 0.0
    return [r.replace(normalized=r.raw * scale) for r in records]


def ideal_sweep(alpha_steps: int = 181) -> list[SweepRecord]:
    """Marginal OQ negativity (σx, σy) and baseline over a uniform grid on ``[0, π]``."""
    if alpha_steps < 2:
        raise ValueError("alpha_steps must be at least 2")
    records = []
    for alpha in np.linspace(0.0, np.pi, alpha_steps):
        rho = density_matrix(psi_alpha(float(alpha)))
        records.append(
            SweepRecord(
                alpha_rad=float(alpha),
                raw=marginal_negativity(rho, 0.0, 0.0),
                baseline=negativity_baseline(rho),
            )
        )
    return normalize_raw(records)
