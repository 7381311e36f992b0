"""Dense linear algebra and quantum primitives for one- and two-qubit systems.

Operators, kets and density matrices are plain ``numpy`` complex arrays. The
helpers here validate them where a physical constraint matters (Hermiticity,
unit trace, unitarity) and raise ``ValueError`` subclasses otherwise.

Energy convention: Hamiltonian entries are frequencies in Hz, so the
propagator for a duration ``t`` is ``exp(-2j*pi*H*t)``.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy import optimize

SIGMA_I = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

HERMITIAN_TOL = 1e-10
NORM_TOL = 1e-12
DENSITY_TOL = 1e-12
NEG_EIG_TOL = 1e-10
UNITARY_TOL = 1e-8


class InvalidHamiltonianError(ValueError):
    """Raised when a generator passed to :func:`propagator` is not Hermitian."""


class DimensionError(ValueError):
    """Raised on mismatched or unsupported matrix dimensions."""


def _check_finite(m: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains NaN or Inf entries")
    return m


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    m = np.asarray(m)
    return m.ndim == 2 and m.shape[0] == m.shape[1] and np.max(np.abs(m - m.conj().T), initial=0.0) <= tol


def is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) <= tol


def ket(amplitudes) -> np.ndarray:
    """Return a validated, unit-norm state vector."""
    psi = _check_finite(np.asarray(amplitudes, dtype=complex).reshape(-1))
    if abs(np.vdot(psi, psi).real - 1.0) > NORM_TOL:
        raise ValueError(f"ket is not normalized (norm^2 = {np.vdot(psi, psi).real!r})")
    return psi


def basis_ket(bits: str) -> np.ndarray:
    """Computational basis ket from a bit string, e.g. ``basis_ket("01")``."""
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def density_matrix(state) -> np.ndarray:
    """Validate ``state`` as a density matrix, or build the projector of a ket.

    Negative eigenvalues down to ``-1e-10`` are tolerated as rounding; anything
    below that is an error.
    """
    arr = _check_finite(np.asarray(state, dtype=complex))
    if arr.ndim == 1:
        psi = ket(arr)
        return np.outer(psi, psi.conj())
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionError(f"density matrix must be square, got shape {arr.shape}")
    if not is_hermitian(arr, DENSITY_TOL):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(arr).real - 1.0) > DENSITY_TOL:
        raise ValueError(f"density matrix trace is {np.trace(arr).real!r}, expected 1")
    if np.linalg.eigvalsh(arr).min() < -NEG_EIG_TOL:
        raise ValueError("density matrix has a negative eigenvalue")
    return arr


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product ``a ⊗ b``; the first argument is the first tensor factor."""
    return _check_finite(np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)))


def propagator(h: np.ndarray, duration: float) -> np.ndarray:
    """Unitary ``exp(-2πi·h·duration)`` for a Hermitian ``h`` given in Hz.

    Computed from the spectral decomposition of ``h``, so the result is unitary
    to machine precision for the small dimensions used here.
    """
    h = np.asarray(h, dtype=complex)
    if not is_hermitian(h):
        raise InvalidHamiltonianError("Hamiltonian is not Hermitian")
    w, v = np.linalg.eigh(h)
    return _check_finite((v * np.exp(-2j * np.pi * w * duration)) @ v.conj().T)


def propagators(h_stack: np.ndarray, duration: float) -> np.ndarray:
    """Batched :func:`propagator` over a stack of shape ``(n, d, d)``.

    No Hermiticity check; callers build the stack from Hermitian pieces.
    """
    w, v = np.linalg.eigh(h_stack)
    phases = np.exp(-2j * np.pi * w * duration)
    return (v * phases[:, None, :]) @ np.swapaxes(v.conj(), -1, -2)


def ordered_product(u_stack: np.ndarray) -> np.ndarray:
    """Time-ordered product ``U[n-1] @ ... @ U[1] @ U[0]`` of a stack of matrices.

    Uses pairwise reduction so the work is vectorized across the stack.
    """
    u = np.asarray(u_stack)
    if u.shape[0] == 0:
        return np.eye(u.shape[-1], dtype=complex)
    while u.shape[0] > 1:
        if u.shape[0] % 2:
            tail = u[-1:]
            u = u[:-1]
        else:
            tail = None
        u = u[1::2] @ u[0::2]
        if tail is not None:
            u = np.concatenate([u, tail])
    return u[0]


def partial_transpose(rho: np.ndarray, subsystem: str = "second") -> np.ndarray:
    """Partial transpose of a two-qubit operator over ``"first"`` or ``"second"``."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise DimensionError(f"partial transpose supports 4x4 operators only, got {rho.shape}")
    t = rho.reshape(2, 2, 2, 2)  # (i1, i2, j1, j2)
    if subsystem == "second":
        t = t.transpose(0, 3, 2, 1)
    elif subsystem == "first":
        t = t.transpose(2, 1, 0, 3)
    else:
        raise ValueError(f"subsystem must be 'first' or 'second', got {subsystem!r}")
    return t.reshape(4, 4)


def trace_norm(m: np.ndarray) -> float:
    """Sum of absolute eigenvalues of a Hermitian matrix."""
    m = np.asarray(m, dtype=complex)
    if not is_hermitian(m):
        raise ValueError("trace norm requires a Hermitian matrix")
    return float(np.abs(np.linalg.eigvalsh(m)).sum())


def state_fidelity(rho: np.ndarray, target: np.ndarray) -> float:
    """Overlap ``<target|rho|target>`` of a density matrix with a pure target."""
    rho = np.asarray(rho, dtype=complex)
    target = np.asarray(target, dtype=complex).reshape(-1)
    if rho.shape != (target.size, target.size):
        raise DimensionError(f"state of shape {rho.shape} does not match target of size {target.size}")
    f = np.vdot(target, rho @ target).real
    if f < -NORM_TOL or f > 1 + NORM_TOL:
        raise ValueError(f"fidelity {f!r} outside [0, 1]")
    return float(min(max(f, 0.0), 1.0))


def _average_fidelity(overlap_abs: float | np.ndarray, d: int):
    return (overlap_abs**2 + d) / (d * (d + 1))


def _z_phase_diagonals(phases: np.ndarray, n_qubits: int) -> np.ndarray:
    """Diagonal of ``⊗_k diag(1, exp(i·phase_k))`` for each row of ``phases``."""
    bits = np.array(list(itertools.product((0, 1), repeat=n_qubits)), dtype=float)
    return np.exp(1j * np.asarray(phases) @ bits.T)


def optimize_z_phases(u: np.ndarray, v: np.ndarray, grid_steps: int = 12) -> tuple[float, np.ndarray]:
    """Best single-qubit Z corrections before and after ``u`` to match ``v``.

    Maximizes ``|Tr(v† · Zpost · u · Zpre)|`` over one pre and one post phase per
    qubit (``2·n_qubits`` parameters) by a coarse grid followed by Nelder-Mead.

    Returns
    -------
    overlap : float
        The maximized ``|Tr(...)|``.
    phases : ndarray
        ``[pre_1, ..., pre_n, post_1, ..., post_n]`` in radians.
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    d = u.shape[0]
    nq = int(round(np.log2(d)))
    # Tr(v† Zpost u Zpre) = sum_ij conj(v_ij) post_i u_ij pre_j
    kernel = v.conj() * u

    def overlaps(p: np.ndarray) -> np.ndarray:
        pre = _z_phase_diagonals(p[:, :nq], nq)
        post = _z_phase_diagonals(p[:, nq:], nq)
        return np.abs(np.einsum("ni,ij,nj->n", post, kernel, pre))

    axis = np.linspace(0.0, 2 * np.pi, grid_steps, endpoint=False)
    grid = np.array(list(itertools.product(axis, repeat=2 * nq)))
    values = overlaps(grid)
    start = grid[int(np.argmax(values))]
    res = optimize.minimize(
        lambda p: -overlaps(p[None, :])[0],
        start,
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000},
    )
    best = res.x if -res.fun >= values.max() else start
    return float(overlaps(best[None, :])[0]), np.mod(best, 2 * np.pi)


def apply_z_phases(u: np.ndarray, phases: np.ndarray) -> np.ndarray:
    """Return ``Zpost · u · Zpre`` for phases laid out as in :func:`optimize_z_phases`."""
    u = np.asarray(u, dtype=complex)
    nq = int(round(np.log2(u.shape[0])))
    phases = np.asarray(phases, dtype=float)
    pre = _z_phase_diagonals(phases[None, :nq], nq)[0]
    post = _z_phase_diagonals(phases[None, nq:], nq)[0]
    return post[:, None] * u * pre[None, :]


def gate_fidelity(u: np.ndarray, v: np.ndarray, correct_z_phases: bool = False) -> float:
    """Average gate fidelity ``(|Tr(u†v)|² + d) / (d(d+1))``.

    With ``correct_z_phases`` the overlap is first maximized over single-qubit
    Z rotations applied before and after ``u`` (virtual-Z freedom).
    """
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape or u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise DimensionError(f"gate shapes {u.shape} and {v.shape} are incompatible")
    if not (is_unitary(u) and is_unitary(v)):
        raise ValueError("gate fidelity requires unitary inputs")
    d = u.shape[0]
    if correct_z_phases:
        overlap, _ = optimize_z_phases(u, v)
    else:
        overlap = abs(np.trace(u.conj().T @ v))
    return float(min(_average_fidelity(overlap, d), 1.0))
