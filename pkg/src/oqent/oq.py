"""Operational quasiprobability tables, their negativity and the marginal filter.

Table layout: the value index is the integer whose bits, most significant
first, are ``(a_1¹ … a_K¹ a_1² … a_K²)``. For two qubits with two slots that is
``(a₁¹ a₂¹ a₁² a₂²)``. Marginal tables are indexed by ``c₁c₂``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .measure import expectation_config, rotated_pair

NORMALIZATION_TOL = 1e-10
ZERO_TOL = 1e-12


def _bits(index: int, width: int) -> tuple[int, ...]:
    return tuple((index >> (width - 1 - b)) & 1 for b in range(width))


@dataclass(frozen=True)
class OQTable:
    n_subsystems: int
    k_slots: int
    values: np.ndarray

    def __post_init__(self):
        width = self.n_subsystems * self.k_slots
        if self.values.shape != (2**width,):
            raise ValueError(f"expected {2**width} values, got shape {self.values.shape}")
        if abs(self.values.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"OQ table sums to {self.values.sum()!r}")

    @property
    def width(self) -> int:
        return self.n_subsystems * self.k_slots

    def outcome(self, index: int) -> tuple[tuple[int, ...], ...]:
        """Per-subsystem outcome tuples for a flat index."""
        flat = _bits(index, self.width)
        k = self.k_slots
        return tuple(flat[i * k : (i + 1) * k] for i in range(self.n_subsystems))

    def rows(self):
        """``(binary index string, value)`` pairs in index order."""
        return [(format(i, f"0{self.width}b"), float(v)) for i, v in enumerate(self.values)]


@dataclass(frozen=True)
class MarginalTable:
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (4,):
            raise ValueError(f"marginal table needs 4 values, got shape {self.values.shape}")
        if abs(self.values.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"marginal table sums to {self.values.sum()!r}")

    def rows(self):
        return [(format(i, "02b"), float(v)) for i, v in enumerate(self.values)]


def _configurations(n_sub: int, k_slots: int):
    """All configuration bit-vectors in table index order."""
    return list(itertools.product((0, 1), repeat=n_sub * k_slots))


def _split(flat, n_sub, k_slots):
    return [tuple(flat[i * k_slots : (i + 1) * k_slots]) for i in range(n_sub)]


def expectations(rho: np.ndarray, observables) -> np.ndarray:
    """Every ``C(n)`` for the given observables, indexed like the OQ table."""
    obs = [list(o) for o in observables]
    n_sub, k_slots = len(obs), len(obs[0])
    return np.array(
        [expectation_config(rho, _split(n, n_sub, k_slots), obs) for n in _configurations(n_sub, k_slots)]
    )


def _sign_matrix(width: int) -> np.ndarray:
    cfg = np.array(_configurations(1, width))
    return (-1.0) ** ((cfg @ cfg.T) % 2)


def oq_table(rho: np.ndarray, observables) -> OQTable:
    """Operational quasiprobability ``W(a) = 2^(-NK) Σ_n (-1)^(a·n) C(n)`` by direct summation."""
    obs = [list(o) for o in observables]
    n_sub, k_slots = len(obs), len(obs[0])
    if n_sub not in (1, 2) or k_slots != 2:
        raise ValueError("oq_table supports one or two subsystems with two slots each")
    width = n_sub * k_slots
    c = expectations(rho, obs)
    values = _sign_matrix(width) @ c / 2**width
    return OQTable(n_sub, k_slots, values)


def inverse_transform(table: OQTable) -> np.ndarray:
    """Recover every ``C(n) = Σ_a (-1)^(a·n) W(a)`` from a table."""
    return _sign_matrix(table.width) @ table.values


def single_marginal(table: OQTable, subsystem: int, slot: int) -> np.ndarray:
    """``[W(a_k = 0), W(a_k = 1)]`` for one subsystem and slot, summing out the rest."""
    pos = subsystem * table.k_slots + slot
    out = np.zeros(2)
    for i, v in enumerate(table.values):
        out[_bits(i, table.width)[pos]] += v
    return out


def _negativity(values: np.ndarray) -> float:
    v = np.where((values > -ZERO_TOL) & (values < 0.0), 0.0, values)
    return float(0.5 * np.sum(np.abs(v) - v))


def oq_negativity(table) -> float:
    """Half the summed magnitude of the negative entries of a table."""
    values = np.asarray(getattr(table, "values", table), dtype=float)
    return _negativity(values)


def marginal_oq(table: OQTable) -> MarginalTable:
    """Spatial marginal through the mod-2 kernel: ``c₁ = a₁¹ ⊕ a₂²``, ``c₂ = a₂¹ ⊕ a₁²``."""
    if table.n_subsystems != 2 or table.k_slots != 2:
        raise ValueError("marginal_oq needs a two-subsystem, two-slot table")
    out = np.zeros(4)
    for i, v in enumerate(table.values):
        a11, a21, a12, a22 = _bits(i, 4)
        out[2 * (a11 ^ a22) + (a21 ^ a12)] += v
    return MarginalTable(out)


def marginal_from_correlators(c1: float, c2: float, c12: float) -> MarginalTable:
    """Marginal table from the three surviving correlators.

    ``c1``: subsystem 1 measures its first observable and subsystem 2 its
    second; ``c2``: the reverse; ``c12``: both subsystems measure both
    observables in sequence.
    """
    for name, v in (("c1", c1), ("c2", c2), ("c12", c12)):
        if not -1 - 1e-12 <= v <= 1 + 1e-12:
            raise ValueError(f"{name}={v!r} outside [-1, 1]")
    out = np.empty(4)
    for idx, (x, y) in enumerate(itertools.product((0, 1), repeat=2)):
        out[idx] = 0.25 * (1 + (-1) ** x * c1 + (-1) ** y * c2 + (-1) ** (x ^ y) * c12)
    return MarginalTable(out)


def marginal_correlators(rho: np.ndarray, observables) -> tuple[float, float, float]:
    """The three correlators feeding :func:`marginal_from_correlators`."""
    (a1, a2), (b1, b2) = observables
    obs = [[a1, a2], [b1, b2]]
    c1 = expectation_config(rho, [(1, 0), (0, 1)], obs)
    c2 = expectation_config(rho, [(0, 1), (1, 0)], obs)
    c12 = expectation_config(rho, [(1, 1), (1, 1)], obs)
    return c1, c2, c12


def marginal_negativity(rho: np.ndarray, theta1: float, theta2: float) -> float:
    """Marginal OQ negativity with ``rotated_pair(theta1, theta2)`` on both qubits."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise ValueError(f"marginal negativity needs a two-qubit state, got shape {rho.shape}")
    pair = rotated_pair(theta1, theta2)
    table = marginal_from_correlators(*marginal_correlators(rho, [pair, pair]))
    return _negativity(table.values)
