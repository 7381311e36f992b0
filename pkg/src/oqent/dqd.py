"""Effective two-spin model of a silicon double quantum dot.

Basis and conventions
---------------------
Tensor order is (left, right). Qubit ``|0⟩`` is spin down and ``|1⟩`` spin up,
so the Zeeman energy of a basis state ``|b_L b_R⟩`` is
``E_ZL·(b_L − ½) + E_ZR·(b_R − ½)``. All energies are in Hz.

The Hamiltonian is Zeeman + isotropic exchange + a transverse microwave drive
seen by both spins::

    H(t) = Σ_k E_Zk (b_k − ½) + J/4 (XX + YY + ZZ − 𝟙) + Ω cos(2πft + φ) (X⊗𝟙 + 𝟙⊗X)

``Ω`` is the resonant Rabi frequency of a single spin. Gates are scored in the
frame rotating with each spin's Zeeman frequency. The lab-frame integrator is
accurate to fourth order in the step size; the RWA path integrates directly
in the rotating frame after dropping counter-rotating drive terms.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import optimize

from .circuits import SWAP, cnot, psi_alpha, rx
from .qcore import (
    SIGMA_I,
    SIGMA_X,
    SIGMA_Y,
    SIGMA_Z,
    density_matrix,
    gate_fidelity,
    ordered_product,
    optimize_z_phases,
    propagators,
    state_fidelity,
)
from .records import SweepRecord

RX_TIME = 4.99e-8
CNOT_TARGET_TIME = 1.05e-7
LAB_DT = 1e-12
RWA_DT = 1e-10
MAX_CYCLES_PER_STEP = 0.05
_CHUNK = 1 << 15

_XX = np.kron(SIGMA_X, SIGMA_X)
_YY = np.kron(SIGMA_Y, SIGMA_Y)
_ZZ = np.kron(SIGMA_Z, SIGMA_Z)
_X_BOTH = np.kron(SIGMA_X, SIGMA_I) + np.kron(SIGMA_I, SIGMA_X)
_BITS = np.array([(0, 0), (0, 1), (1, 0), (1, 1)], dtype=float)

# ideal two-qubit CNOT with the right spin as control, in (left, right) order
CNOT_RIGHT_CONTROL = SWAP @ cnot().matrix @ SWAP


class CalibrationError(RuntimeError):
    pass


class TimeStepError(ValueError):
    def __init__(self, dt: float, required: float):
        super().__init__(f"time step {dt:.3g} s is too coarse; need dt <= {required:.3g} s")
        self.dt = dt
        self.required = required


@dataclass(frozen=True)
class DqdParams:
    """Device constants plus calibrated drive settings (``None`` until calibrated)."""

    e_zl: float = 18.31e9
    e_zr: float = 18.45e9
    j_weak: float = 76e3
    j_strong: float = 18.4e6
    drive_amp_rx: float | None = None
    drive_freq_rx: float | None = None
    drive_amp_cnot: float | None = None
    drive_freq_cnot: float | None = None
    rx_time: float = RX_TIME
    cnot_target_time: float = CNOT_TARGET_TIME
    cnot_time: float | None = None
    virtual_z: tuple[float, float, float, float] | None = None
    cnot_fidelity: float | None = None

    def __post_init__(self):
        for name in ("e_zl", "e_zr", "j_weak", "j_strong", "rx_time", "cnot_target_time"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("drive_amp_rx", "drive_freq_rx", "drive_amp_cnot", "drive_freq_cnot", "cnot_time"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise ValueError(f"{name} must be positive")
        if self.e_zl == self.e_zr:
            raise ValueError("left and right Zeeman splittings must differ")
        if self.virtual_z is not None:
            object.__setattr__(self, "virtual_z", tuple(float(p) for p in self.virtual_z))

    @property
    def rx_calibrated(self) -> bool:
        return self.drive_amp_rx is not None and self.drive_freq_rx is not None

    @property
    def cnot_calibrated(self) -> bool:
        return None not in (self.drive_amp_cnot, self.drive_freq_cnot, self.cnot_time, self.virtual_z)

    def zeeman_energies(self) -> np.ndarray:
        """Diagonal of the Zeeman Hamiltonian in the computational basis."""
        return self.e_zl * (_BITS[:, 0] - 0.5) + self.e_zr * (_BITS[:, 1] - 0.5)


@dataclass(frozen=True)
class PulseSegment:
    """Constant-exchange interval with an optional drive ``Ω cos(2πft + φ)`` in lab time."""

    duration: float
    j: float
    drive_freq: float | None = None
    drive_amp: float | None = None
    drive_phase: float = 0.0

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("segment duration must be positive")
        if self.j < 0:
            raise ValueError("exchange must be non-negative")
        if (self.drive_freq is None) != (self.drive_amp is None):
            raise ValueError("drive frequency and amplitude must be given together")

    @property
    def driven(self) -> bool:
        return self.drive_amp is not None and self.drive_amp != 0.0


@dataclass(frozen=True)
class VirtualZ:
    """Instantaneous software Z rotations ``diag(1, e^{iφ})`` on (left, right)."""

    left: float
    right: float

    def diagonal(self) -> np.ndarray:
        return np.exp(1j * (_BITS @ np.array([self.left, self.right])))


@dataclass(frozen=True)
class NoiseSetting:
    """Quasi-static multiplicative exchange error ``J → J(1 + δJ)``."""

    delta_j: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.delta_j <= 1.0:
            raise ValueError(f"delta_j={self.delta_j!r} outside [0, 1]")


@dataclass
class Evolution:
    """Result of :func:`evolve`.

    ``unitary`` is the lab-frame propagator; ``rotating_unitary`` the same
    evolution seen from the frame rotating at each spin's Zeeman frequency.
    Sampled populations are ``(P↑_L, P↑_R)`` per entry of ``times``.
    """

    state: np.ndarray
    unitary: np.ndarray
    rotating_unitary: np.ndarray
    rotating_state: np.ndarray
    t_end: float
    times: np.ndarray | None = None
    populations: np.ndarray | None = None


def hamiltonian(params: DqdParams, j: float, drive: tuple[float, float, float] | None = None, t: float = 0.0) -> np.ndarray:
    """Lab-frame Hamiltonian in Hz; ``drive`` is ``(freq, amp, phase)``."""
    if j < 0:
        raise ValueError("exchange must be non-negative")
    h = np.diag(params.zeeman_energies()).astype(complex)
    h += j / 4 * (_XX + _YY + _ZZ - np.eye(4))
    if drive is not None:
        freq, amp, phase = drive
        h += amp * math.cos(2 * math.pi * freq * t + phase) * _X_BOTH
    return h


def _static_lab(params: DqdParams, j: float) -> np.ndarray:
    return hamiltonian(params, j)


def _frame(params: DqdParams, t: float) -> np.ndarray:
    """Diagonal of ``exp(+2πi H_Z t)``, the map from lab to rotating frame."""
    return np.exp(2j * np.pi * params.zeeman_energies() * t)


def _rwa_terms(params: DqdParams, seg: PulseSegment):
    """Static part and oscillating pieces of the rotating-frame Hamiltonian.

    Returns ``(static, [(freq, matrix)])`` with
    ``H(t) = static + Σ (e^{2πi·freq·t} M + h.c.)``.
    """
    static = seg.j / 4 * (_ZZ - np.eye(4)).astype(complex)
    terms = []
    if seg.j:
        m = np.zeros((4, 4), dtype=complex)
        m[1, 2] = seg.j / 2  # |01⟩⟨10|
        terms.append((params.e_zr - params.e_zl, m))
    if seg.driven:
        for target, ez in ((0, params.e_zl), (1, params.e_zr)):
            lower = np.zeros((2, 2), dtype=complex)
            lower[1, 0] = seg.drive_amp / 2 * np.exp(-1j * seg.drive_phase)  # ⟨1|H|0⟩
            m = np.kron(lower, SIGMA_I) if target == 0 else np.kron(SIGMA_I, lower)
            terms.append((ez - seg.drive_freq, m))
    return static, terms


def required_dt(params: DqdParams, seg: PulseSegment, rwa: bool) -> float:
    """Largest step allowed by the ``dt · rate <= 0.05`` cycle budget."""
    if rwa:
        static, terms = _rwa_terms(params, seg)
        rate = np.abs(static).max() + sum(np.abs(m).max() for _, m in terms)
        rate += max((abs(f) for f, _ in terms), default=0.0)
    else:
        rate = np.abs(_static_lab(params, seg.j)).max() + (abs(seg.drive_amp) if seg.driven else 0.0)
    return MAX_CYCLES_PER_STEP / rate if rate > 0 else math.inf


_GAUSS_OFFSET = math.sqrt(3) / 6  # two-point Gauss nodes at t_mid ± offset·h


def _segment_hamiltonians(params: DqdParams, seg: PulseSegment, rwa: bool, times: np.ndarray) -> np.ndarray:
    """Stack of segment Hamiltonians (lab or rotating frame) at the given times."""
    if rwa:
        static, terms = _rwa_terms(params, seg)
    else:
        static = _static_lab(params, seg.j)
    stack = np.broadcast_to(static, (times.size, 4, 4)).copy()
    if rwa:
        for freq, m in terms:
            ph = np.exp(2j * np.pi * freq * times)[:, None, None]
            stack += ph * m + np.conj(ph) * m.conj().T
    elif seg.driven:
        c = seg.drive_amp * np.cos(2 * np.pi * seg.drive_freq * times + seg.drive_phase)
        stack += c[:, None, None] * _X_BOTH
    return stack


def _step_unitaries(params: DqdParams, seg: PulseSegment, t_start: float, n: int, h: float, rwa: bool, chunk: int = _CHUNK):
    """Yield stacks of per-step propagators for one segment, ``chunk`` steps at a time.

    Each step uses the fourth-order Magnus generator built from the two Gauss
    nodes of the step, ``(H₁+H₂)/2 − i(√3/6)πh[H₂, H₁]``, so a fast drive is
    integrated accurately rather than sampled once per step.
    """
    for lo in range(0, n, chunk):
        k = np.arange(lo, min(n, lo + chunk))
        t_mid = t_start + (k + 0.5) * h
        h1 = _segment_hamiltonians(params, seg, rwa, t_mid - _GAUSS_OFFSET * h)
        h2 = _segment_hamiltonians(params, seg, rwa, t_mid + _GAUSS_OFFSET * h)
        comm = h2 @ h1 - h1 @ h2
        h_eff = 0.5 * (h1 + h2) - 1j * (math.sqrt(3) / 6) * math.pi * h * comm
        yield propagators(h_eff, h)


def _up_populations(psi: np.ndarray) -> tuple[float, float]:
    p = np.abs(psi) ** 2 if psi.ndim == 1 else np.real(np.diag(psi))
    return float(p[2] + p[3]), float(p[1] + p[3])


def evolve(
    params: DqdParams,
    schedule: Sequence[PulseSegment | VirtualZ],
    initial=None,
    dt: float | None = None,
    rwa: bool = False,
    t_start: float = 0.0,
    sample_every: int | None = None,
) -> Evolution:
    """Integrate a pulse schedule with fourth-order Magnus steps of size about ``dt``.

    ``initial`` may be a ket or density matrix (default ``|↓↓⟩``); the returned
    state has the same kind. ``sample_every`` records spin-up populations every
    that many steps, which costs a sequential pass over the steps.

    Raises
    ------
    TimeStepError
        If ``dt`` exceeds the per-segment cycle budget.
    """
    dt = dt if dt is not None else (RWA_DT if rwa else LAB_DT)
    if initial is None:
        initial = np.array([1, 0, 0, 0], dtype=complex)
    initial = np.asarray(initial, dtype=complex)

    u_rot = np.eye(4, dtype=complex)
    t = t_start
    times, pops = [], []
    for item in schedule:
        if isinstance(item, VirtualZ):
            u_rot = item.diagonal()[:, None] * u_rot
            continue
        limit = required_dt(params, item, rwa)
        if dt > limit:
            raise TimeStepError(dt, limit)
        n = max(1, math.ceil(item.duration / dt - 1e-9))
        h = item.duration / n
        seg_start = t
        for lo, stack in zip(range(0, n, _CHUNK), _step_unitaries(params, item, seg_start, n, h, rwa)):
            if not rwa:
                # lab steps -> rotating frame: F(t+h) U F(t)^†
                f0 = _frame(params, seg_start + lo * h)
                if sample_every:
                    u_rot = _sampled_lab(params, stack, u_rot, f0, seg_start + lo * h, h, initial, sample_every, times, pops, lo)
                else:
                    f1 = _frame(params, seg_start + (lo + stack.shape[0]) * h)
                    u_rot = f1[:, None] * ordered_product(stack) * f0.conj()[None, :] @ u_rot
            else:
                if sample_every:
                    for i, u_k in enumerate(stack):
                        u_rot = u_k @ u_rot
                        if (lo + i + 1) % sample_every == 0:
                            times.append(seg_start + (lo + i + 1) * h)
                            pops.append(_up_populations(_apply(u_rot, initial)))
                else:
                    u_rot = ordered_product(stack) @ u_rot
        t = seg_start + item.duration

    frame_end = _frame(params, t)
    frame_start = _frame(params, t_start)
    u_lab = frame_end.conj()[:, None] * u_rot * frame_start[None, :]
    return Evolution(
        state=_apply(u_lab, initial),
        unitary=u_lab,
        rotating_unitary=u_rot,
        rotating_state=_apply(u_rot, initial),
        t_end=t,
        times=np.array(times) if sample_every else None,
        populations=np.array(pops) if sample_every else None,
    )


def _sampled_lab(params, stack, u_rot, f0, t0, h, initial, every, times, pops, offset=0):
    # accumulate in the lab frame, converting back to the rotating frame per step
    u = f0.conj()[:, None] * u_rot  # lab-frame accumulated at t0, up to the start-frame factor
    for i, u_k in enumerate(stack):
        u = u_k @ u
        if (offset + i + 1) % every == 0:
            t = t0 + (i + 1) * h
            u_r = _frame(params, t)[:, None] * u
            times.append(t)
            pops.append(_up_populations(_apply(u_r, initial)))
    t_end = t0 + stack.shape[0] * h
    return _frame(params, t_end)[:, None] * u


def _apply(u: np.ndarray, state: np.ndarray) -> np.ndarray:
    if state.ndim == 1:
        return u @ state
    return u @ state @ u.conj().T


# --------------------------------------------------------------------------
# pulse programs
# --------------------------------------------------------------------------


def rx_segment(params: DqdParams, duration: float, noise: NoiseSetting = NoiseSetting()) -> PulseSegment:
    """Resonant drive on the right spin at weak exchange."""
    return PulseSegment(
        duration=duration,
        j=params.j_weak * (1 + noise.delta_j),
        drive_freq=params.drive_freq_rx,
        drive_amp=params.drive_amp_rx,
        drive_phase=0.0,
    )


def cnot_segment(
    params: DqdParams,
    t_start: float,
    duration: float | None = None,
    noise: NoiseSetting = NoiseSetting(),
    drive_freq: float | None = None,
    drive_amp: float | None = None,
) -> PulseSegment:
    """Conditional drive on the left spin at strong exchange.

    The drive phase tracks the left-spin frame so the pulse looks the same in
    the rotating frame whatever its start time.
    """
    freq = drive_freq if drive_freq is not None else params.drive_freq_cnot
    amp = drive_amp if drive_amp is not None else params.drive_amp_cnot
    duration = duration if duration is not None else params.cnot_time
    phase = (2 * math.pi * (params.e_zl - freq) * t_start) % (2 * math.pi)
    return PulseSegment(duration=duration, j=params.j_strong * (1 + noise.delta_j), drive_freq=freq, drive_amp=amp, drive_phase=phase)


def conditional_frequencies(params: DqdParams, j: float | None = None) -> dict[str, float]:
    """Left-spin transition frequencies conditioned on the right spin, from exact eigenvalues.

    ``"up"``: ``|↓↑⟩ ↔ |↑↑⟩``; ``"down"``: ``|↓↓⟩ ↔ |↑↓⟩``.
    """
    j = params.j_strong if j is None else j
    w, v = np.linalg.eigh(_static_lab(params, j))
    # label eigenstates by their dominant computational component
    labels = np.argmax(np.abs(v) ** 2, axis=0)
    e = dict(zip(labels.tolist(), w.tolist()))
    return {"up": e[3] - e[1], "down": e[2] - e[0]}


def rx_angle(params: DqdParams, tau: float) -> float:
    """Nominal rotation angle ``2π Ω_rx τ`` of a calibrated Rx pulse."""
    return 2 * math.pi * params.drive_amp_rx * tau


# --------------------------------------------------------------------------
# calibration
# --------------------------------------------------------------------------


def right_up_probability(params: DqdParams, tau: float, rwa: bool = False, dt: float | None = None) -> float:
    ev = evolve(params, [rx_segment(params, tau)], dt=dt, rwa=rwa)
    return _up_populations(ev.rotating_state)[1]


def calibrate_rx(params: DqdParams, rwa: bool = False, dt: float | None = None) -> DqdParams:
    """Resonant right-spin drive whose rotation reaches π/2 at ``params.rx_time``.

    The amplitude starts from the quarter-period estimate ``1/(4τ)`` and is
    refined against the simulator by root finding on ``P↑_R(τ) = 1/2``.
    """
    tau = params.rx_time
    guess = 1.0 / (4 * tau)
    trial = replace(params, drive_freq_rx=params.e_zr)

    def excess(amp):
        return right_up_probability(replace(trial, drive_amp_rx=amp), tau, rwa, dt) - 0.5

    lo, hi = 0.8 * guess, 1.2 * guess
    try:
        amp = optimize.brentq(excess, lo, hi, xtol=guess * 1e-9)
    except ValueError as exc:
        raise CalibrationError(f"Rx amplitude not bracketed in [{lo:.4g}, {hi:.4g}] Hz") from exc
    return replace(trial, drive_amp_rx=amp)


def _cnot_time_response(params, freq, amp, t_start, t_max, rwa, dt, sample_spacing=1e-10):
    """Rotating-frame unitaries of a CNOT drive, sampled about every ``sample_spacing``."""
    dt = dt if dt is not None else (RWA_DT if rwa else LAB_DT)
    seg = cnot_segment(params, t_start, duration=t_max, drive_freq=freq, drive_amp=amp)
    limit = required_dt(params, seg, rwa)
    if dt > limit:
        raise TimeStepError(dt, limit)
    stride = max(1, round(sample_spacing / dt))
    n = stride * max(1, math.ceil(t_max / (dt * stride) - 1e-9))
    h = t_max / n
    samples = []
    u = np.eye(4, dtype=complex)
    for stack in _step_unitaries(params, seg, t_start, n, h, rwa, chunk=stride * max(1, _CHUNK // stride)):
        groups = stack.reshape(-1, stride, 4, 4)
        block = groups[:, 0]
        for g in range(1, stride):
            block = groups[:, g] @ block
        for b in block:
            u = b @ u
            samples.append(u)
    out = np.array(samples)
    times = t_start + h * stride * np.arange(1, out.shape[0] + 1)
    if not rwa:
        frames = np.exp(2j * np.pi * np.outer(times, params.zeeman_energies()))
        out = frames[:, :, None] * out * _frame(params, t_start).conj()[None, None, :]
    return times - t_start, out


def _truth_table_fidelity(u_stack: np.ndarray) -> np.ndarray:
    """Mean classical transfer probability onto the CNOT (right-control) permutation."""
    perm = [0, 3, 2, 1]  # column j -> row perm[j]
    return np.mean([np.abs(u_stack[:, perm[j], j]) ** 2 for j in range(4)], axis=0)


def _first_peak(score: np.ndarray, threshold: float = 0.9, hysteresis: float = 0.05) -> int | None:
    """Index of the maximum of the first lobe of ``score`` above ``threshold``.

    The lobe ends once the score falls below ``threshold - hysteresis``, so
    small fast fringes near the threshold do not split it.
    """
    above = np.nonzero(score >= threshold)[0]
    if above.size == 0:
        return None
    lo = int(above[0])
    below = np.nonzero(score[lo:] < threshold - hysteresis)[0]
    hi = lo + int(below[0]) if below.size else score.size
    return lo + int(np.argmax(score[lo:hi]))


def _cnot_peak(params, freq, amp, t_start, rwa, dt):
    """First CNOT-like peak for one drive setting: ``(fidelity, time, phases)`` or ``None``."""
    t_max = 1.5 / (2 * amp)
    times, us = _cnot_time_response(params, freq, amp, t_start, t_max, rwa, dt)
    i = _first_peak(_truth_table_fidelity(us))
    if i is None:
        return None
    best = None
    for k in range(max(0, i - 3), min(len(times), i + 4)):
        overlap, phases = optimize_z_phases(us[k], CNOT_RIGHT_CONTROL)
        f = (overlap**2 + 4) / 20
        if best is None or f > best[0]:
            best = (f, float(times[k]), phases)
    return best


def calibrate_cnot(params: DqdParams, rwa: bool = False, dt: float | None = None, t_start: float | None = None) -> DqdParams:
    """Single-step CNOT (right spin as control) at strong exchange.

    Both conditional left-spin transitions are tried as drive frequency. For
    each, the drive amplitude is tuned within ±15 % of ``1/(2λ_target)`` to
    maximize the Z-corrected fidelity of the first CNOT-like peak in the time
    response; the better candidate wins. The virtual-Z corrections found at
    that peak become part of the calibrated gate.

    Raises
    ------
    CalibrationError
        If no peak reaches fidelity 0.9.
    """
    t_start = params.rx_time if t_start is None else t_start
    amp0 = 1.0 / (2 * params.cnot_target_time)
    candidates = []
    for label, freq in conditional_frequencies(params).items():

        def loss(amp, freq=freq):
            peak = _cnot_peak(params, freq, amp, t_start, rwa, dt)
            return 1.0 - (peak[0] if peak else 0.0)

        res = optimize.minimize_scalar(loss, bounds=(0.85 * amp0, 1.15 * amp0), method="bounded", options={"xatol": amp0 * 1e-5})
        peak = _cnot_peak(params, freq, res.x, t_start, rwa, dt)
        if peak is not None:
            candidates.append((peak[0], label, freq, float(res.x), peak[1], peak[2]))
    if not candidates or max(c[0] for c in candidates) < 0.9:
        raise CalibrationError("no CNOT fidelity peak >= 0.9 in the search window")
    fid, _, freq, amp, t_peak, phases = max(candidates, key=lambda c: c[0])
    return replace(
        params,
        drive_freq_cnot=freq,
        drive_amp_cnot=amp,
        cnot_time=t_peak,
        virtual_z=tuple(float(p) for p in phases),
        cnot_fidelity=float(fid),
    )


def calibrate(params: DqdParams, rwa: bool = False, dt: float | None = None) -> DqdParams:
    return calibrate_cnot(calibrate_rx(params, rwa=rwa, dt=dt), rwa=rwa, dt=dt)


# --------------------------------------------------------------------------
# circuits and sweeps
# --------------------------------------------------------------------------


def circuit_schedule(params: DqdParams, tau: float, noise: NoiseSetting = NoiseSetting()) -> list:
    """Rx on the right spin for ``tau``, then the calibrated CNOT with its virtual Zs."""
    if not (params.rx_calibrated and params.cnot_calibrated):
        raise CalibrationError("parameters are not calibrated")
    pre_l, pre_r, post_l, post_r = params.virtual_z
    schedule: list = []
    if tau > 0:
        schedule.append(rx_segment(params, tau, noise))
    schedule.append(VirtualZ(pre_l, pre_r))
    schedule.append(cnot_segment(params, tau, noise=noise))
    schedule.append(VirtualZ(post_l, post_r))
    return schedule


def target_unitary(alpha: float) -> np.ndarray:
    """Ideal ``CNOT · (𝟙 ⊗ R_x(α))`` in (left, right) order, right spin as control."""
    return CNOT_RIGHT_CONTROL @ np.kron(SIGMA_I, rx(alpha).matrix)


def run_circuit(
    params: DqdParams,
    tau: float,
    noise: NoiseSetting = NoiseSetting(),
    rwa: bool = False,
    dt: float | None = None,
) -> tuple[np.ndarray, float, float]:
    """Simulate the rotate-then-CNOT program.

    Returns the rotating-frame output density matrix, the gate fidelity against
    :func:`target_unitary` at the nominal angle, and the state fidelity against
    ``|ψ(α)⟩``.
    """
    ev = evolve(params, circuit_schedule(params, tau, noise), dt=dt, rwa=rwa)
    alpha = min(max(rx_angle(params, tau), 0.0), math.pi)
    psi = ev.rotating_state / np.linalg.norm(ev.rotating_state)  # strip step round-off
    rho = density_matrix(psi)
    gate_f = gate_fidelity(ev.rotating_unitary, target_unitary(alpha))
    state_f = state_fidelity(rho, psi_alpha(alpha))
    return rho, gate_f, state_f


def _run_circuit_job(args):
    params, tau, delta_j, rwa, dt = args
    return run_circuit(params, tau, NoiseSetting(delta_j), rwa=rwa, dt=dt)


def map_runs(jobs: list, workers: int | None = None) -> list:
    """Evaluate ``run_circuit`` jobs in order, optionally across processes."""
    if workers and workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_circuit_job, jobs))
    return [_run_circuit_job(j) for j in jobs]


def fidelity_sweep(
    params: DqdParams,
    tau: float,
    delta_j_grid: Sequence[float],
    rwa: bool = False,
    dt: float | None = None,
    workers: int | None = None,
) -> list[SweepRecord]:
    """Gate and state fidelity at fixed ``tau`` for each exchange error."""
    results = map_runs([(params, tau, float(dj), rwa, dt) for dj in delta_j_grid], workers)
    return [
        SweepRecord(tau_s=tau, delta_j=float(dj), gate_fidelity=g, state_fidelity=s)
        for dj, (_, g, s) in zip(delta_j_grid, results)
    ]


def output_states(
    params: DqdParams,
    taus: Sequence[float],
    delta_j: float = 0.0,
    rwa: bool = False,
    dt: float | None = None,
    workers: int | None = None,
) -> list[tuple[float, np.ndarray]]:
    """``(tau, rho_out)`` pairs over a grid of rotation times."""
    results = map_runs([(params, float(t), delta_j, rwa, dt) for t in taus], workers)
    return [(float(t), rho) for t, (rho, _, _) in zip(taus, results)]


# --------------------------------------------------------------------------
# device configuration files
# --------------------------------------------------------------------------

REQUIRED_KEYS = ("e_zl_hz", "e_zr_hz", "j_weak_hz", "j_strong_hz")
_KEY_TO_FIELD = {
    "e_zl_hz": "e_zl",
    "e_zr_hz": "e_zr",
    "j_weak_hz": "j_weak",
    "j_strong_hz": "j_strong",
    "drive_amp_rx_hz": "drive_amp_rx",
    "drive_freq_rx_hz": "drive_freq_rx",
    "drive_amp_cnot_hz": "drive_amp_cnot",
    "drive_freq_cnot_hz": "drive_freq_cnot",
    "rx_time_s": "rx_time",
    "cnot_target_time_s": "cnot_target_time",
    "cnot_time_s": "cnot_time",
    "cnot_gate_fidelity": "cnot_fidelity",
}
_VZ_KEYS = ("zpre_left_rad", "zpre_right_rad", "zpost_left_rad", "zpost_right_rad")


class ConfigError(ValueError):
    pass


def parse_params(text: str) -> DqdParams:
    """Parse flat ``key = value`` lines; ``#`` starts a comment. Unknown keys are errors."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in _KEY_TO_FIELD and key not in _VZ_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = float(val)
        except ValueError:
            raise ConfigError(f"line {lineno}: {key} is not a number: {val!r}") from None
    missing = [k for k in REQUIRED_KEYS if k not in values]
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")
    kwargs = {_KEY_TO_FIELD[k]: v for k, v in values.items() if k in _KEY_TO_FIELD}
    vz = [k for k in _VZ_KEYS if k in values]
    if vz:
        if len(vz) != 4:
            raise ConfigError("virtual-Z phases must be given all together")
        kwargs["virtual_z"] = tuple(values[k] for k in _VZ_KEYS)
    try:
        return DqdParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_params(path: str | Path) -> DqdParams:
    return parse_params(Path(path).read_text(encoding="utf-8"))


def format_params(params: DqdParams, comments: Sequence[str] = ()) -> str:
    lines = [f"# {c}" for c in comments]
    for key, name in _KEY_TO_FIELD.items():
        v = getattr(params, name)
        if v is not None:
            lines.append(f"{key} = {v!r}")
    if params.virtual_z is not None:
        lines.extend(f"{k} = {v!r}" for k, v in zip(_VZ_KEYS, params.virtual_z))
    return "\n".join(lines) + "\n"


def save_params(params: DqdParams, path: str | Path, comments: Sequence[str] = ()) -> Path:
    path = Path(path)
    path.write_text(format_params(params, comments), encoding="utf-8")
    return path
