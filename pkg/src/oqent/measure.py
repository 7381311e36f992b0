"""Dichotomic observables and the sequential projective-measurement engine.

Outcome convention: bit ``0`` is the ``+1`` eigenvalue and bit ``1`` the ``-1``
eigenvalue, so ``A = Π⁰ - Π¹``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .qcore import SIGMA_I, SIGMA_X, SIGMA_Y, SIGMA_Z, DimensionError

IMAG_TOL = 1e-12


@dataclass(frozen=True)
class DichotomicObservable:
    """Two-outcome observable with its orthogonal projectors."""

    matrix: np.ndarray
    proj0: np.ndarray
    proj1: np.ndarray
    label: str = ""

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, label: str = "") -> "DichotomicObservable":
        """Build from a Hermitian involution; projectors are ``(𝟙 ± A)/2``."""
        m = np.asarray(matrix, dtype=complex)
        eye = np.eye(m.shape[0])
        if np.max(np.abs(m - m.conj().T)) > 1e-10 or np.max(np.abs(m @ m - eye)) > 1e-10:
            raise ValueError("a dichotomic observable must be Hermitian with A² = 𝟙")
        return cls(m, (eye + m) / 2, (eye - m) / 2, label)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def projector(self, outcome: int) -> np.ndarray:
        if outcome == 0:
            return self.proj0
        if outcome == 1:
            return self.proj1
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")

    def lift(self, subsystem: int, n_subsystems: int) -> "DichotomicObservable":
        """Embed a single-qubit observable into ``n_subsystems`` qubits."""
        if self.dim != 2:
            raise DimensionError("only single-qubit observables can be lifted")
        if not 0 <= subsystem < n_subsystems:
            raise ValueError(f"subsystem {subsystem} out of range for {n_subsystems} subsystems")

        def embed(op):
            out = np.ones((1, 1), dtype=complex)
            for k in range(n_subsystems):
                out = np.kron(out, op if k == subsystem else SIGMA_I)
            return out

        return DichotomicObservable(
            embed(self.matrix), embed(self.proj0), embed(self.proj1), f"{self.label}@{subsystem}"
        )


def equatorial_observable(azimuth: float, label: str = "") -> DichotomicObservable:
    """Spin observable along ``(cos φ, sin φ, 0)``; projectors built in closed form."""
    m = np.cos(azimuth) * SIGMA_X + np.sin(azimuth) * SIGMA_Y
    eye = np.eye(2)
    return DichotomicObservable(m, (eye + m) / 2, (eye - m) / 2, label)


def pauli_observable(kind: str) -> DichotomicObservable:
    """Pauli ``x``, ``y`` or ``z`` as a dichotomic observable."""
    mats = {"x": SIGMA_X, "y": SIGMA_Y, "z": SIGMA_Z}
    try:
        m = mats[kind]
    except KeyError:
        raise ValueError(f"unknown Pauli observable {kind!r}") from None
    eye = np.eye(2)
    return DichotomicObservable(m.copy(), (eye + m) / 2, (eye - m) / 2, f"sigma_{kind}")


def rotated_pair(theta1: float, theta2: float) -> tuple[DichotomicObservable, DichotomicObservable]:
    """The equatorial pair ``σ₁(θ₁) = cos θ₁ σx − sin θ₁ σy`` and ``σ₂(θ₂) = sin θ₂ σx + cos θ₂ σy``.

    Both angles must lie in ``[0, π/2]``; ``rotated_pair(0, 0)`` is ``(σx, σy)``.
    """
    for name, th in (("theta1", theta1), ("theta2", theta2)):
        if not (-1e-12 <= th <= np.pi / 2 + 1e-12):
            raise ValueError(f"{name}={th!r} outside [0, pi/2]")
    eye = np.eye(2)
    m1 = np.cos(theta1) * SIGMA_X - np.sin(theta1) * SIGMA_Y
    m2 = np.sin(theta2) * SIGMA_X + np.cos(theta2) * SIGMA_Y
    first = DichotomicObservable(m1, (eye + m1) / 2, (eye - m1) / 2, f"sigma1({theta1:.6g})")
    second = DichotomicObservable(m2, (eye + m2) / 2, (eye - m2) / 2, f"sigma2({theta2:.6g})")
    return first, second


def sequential_probability(rho: np.ndarray, steps: Sequence[tuple[DichotomicObservable, int]]) -> float:
    """Probability of an ordered chain of projective outcomes.

    ``steps`` lists ``(observable, outcome)`` pairs in measurement order; every
    observable must already act on the full space of ``rho`` (see
    :meth:`DichotomicObservable.lift`). The result is
    ``Tr[Πₙ…Π₁ ρ (Πₙ…Π₁)†]``.
    """
    rho = np.asarray(rho, dtype=complex)
    chain = np.eye(rho.shape[0], dtype=complex)
    for obs, outcome in steps:
        if obs.dim != rho.shape[0]:
            raise DimensionError(f"observable of dim {obs.dim} applied to state of dim {rho.shape[0]}")
        chain = obs.projector(outcome) @ chain
    p = np.trace(chain @ rho @ chain.conj().T)
    if abs(p.imag) > IMAG_TOL:
        raise ArithmeticError(f"sequential probability has imaginary residue {p.imag!r}")
    return float(p.real)


def _as_observable_lists(observables) -> list[list[DichotomicObservable]]:
    obs = [list(o) for o in observables]
    if not obs or any(len(o) != len(obs[0]) for o in obs):
        raise ValueError("every subsystem needs the same number of measurement slots")
    return obs


def expectation_config(rho: np.ndarray, configs, observables) -> float:
    """Signed expectation ``C(n¹,…,nᴺ)`` of one selective measurement configuration.

    ``configs[i]`` is the tuple ``(n_1, …, n_K)`` of subsystem ``i`` and
    ``observables[i]`` its ordered observables ``(A_1, …, A_K)``. At time slot
    ``k`` every subsystem with ``n_k = 1`` measures ``A_k`` simultaneously;
    unselected subsystems idle. The void configuration returns exactly 1.
    """
    rho = np.asarray(rho, dtype=complex)
    obs = _as_observable_lists(observables)
    n_sub, k_slots = len(obs), len(obs[0])
    if len(configs) != n_sub or any(len(c) != k_slots for c in configs):
        raise ValueError("configs must give one K-tuple per subsystem")
    if rho.shape[0] != 2**n_sub:
        raise DimensionError(f"state of dim {rho.shape[0]} does not hold {n_sub} qubits")

    selected = [
        obs[i][k].lift(i, n_sub) if n_sub > 1 else obs[i][k]
        for k in range(k_slots)
        for i in range(n_sub)
        if configs[i][k]
    ]
    if not selected:
        return 1.0
    total = 0.0
    for bits in itertools.product((0, 1), repeat=len(selected)):
        sign = -1.0 if sum(bits) % 2 else 1.0
        total += sign * sequential_probability(rho, list(zip(selected, bits)))
    return total
