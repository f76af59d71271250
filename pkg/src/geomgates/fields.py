"""Time-dependent control-field schedules for the two qubit platforms.

A schedule is a deterministic map t -> B(t) (a 3-vector in energy units)
together with its base loop period and total duration.  Single-qubit
dynamics follow H(t) = -(1/2) B(t) . sigma.  Builders are provided for

* a circularly rotating transverse field with a static z component
  (the NMR-style drive), including the conditional variant whose z
  component is shifted by the coupling to a spectator qubit, and
* a flux-plus-offset-charge driven Josephson charge qubit whose designed
  drive keeps the effective-field cone angle constant over a loop.

Schedules compose: rotation about the y axis, sign flip, time reversal of
one loop, and concatenation.  Composite schedules keep track of their
smooth pieces so integrators can avoid quadrature across field jumps.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .csvio import write_table
from .pauli import PAULI, kron

__all__ = [
    "FieldSchedule",
    "NmrParams",
    "JosephsonParams",
    "TwoQubitModel",
    "nmr_schedule",
    "nmr_conditional_schedule",
    "josephson_schedule",
    "josephson_conditional_schedule",
    "josephson_ej",
    "josephson_flux_phase",
    "josephson_offset_charge",
    "rotate_schedule",
    "negated_schedule",
    "time_reversed_schedule",
    "reversed_schedule",
    "concat",
    "flatten_pieces",
    "closure_gap",
    "hamiltonian",
    "nmr_two_qubit",
    "schedule_to_csv",
    "rotation_about_y",
]


@dataclass(frozen=True)
class FieldSchedule:
    """A deterministic field history B(t).

    Attributes
    ----------
    sample : callable
        Maps a float or 1-d array of times to field vectors of shape
        (..., 3).  Pure function; schedules are safe to share across
        workers.
    period : float
        Base loop period tau of the underlying drive.
    duration : float
        Total time span covered (one period for plain loops, longer for
        concatenations).
    label : str
        Human-readable tag carried into exports.
    pieces : tuple
        Smoothness decomposition ((offset, schedule), ...); empty for
        schedules that are smooth over their whole duration.
    """

    sample: Callable[[np.ndarray], np.ndarray]
    period: float
    duration: float
    label: str
    pieces: tuple = field(default=())

    def __post_init__(self):
        if not self.period > 0.0:
            raise ValueError(f"schedule period must be positive, got {self.period}")
        if not self.duration > 0.0:
            raise ValueError(f"schedule duration must be positive, got {self.duration}")


@dataclass(frozen=True)
class NmrParams:
    """Rotating-frame drive parameters, all in energy units (hbar = 1).

    omega0 : transverse drive amplitude (>= 0)
    omega1 : static z field
    omega  : drive angular frequency (> 0); loop period is 2*pi/omega
    j      : zz coupling strength to the spectator (control) qubit
    delta  : control-qubit basis state in {0, 1} for conditional drives
    """

    omega0: float
    omega1: float
    omega: float
    j: float = 0.0
    delta: int = 0

    def __post_init__(self):
        if self.omega0 < 0.0:
            raise ValueError(f"omega0 must be non-negative, got {self.omega0}")
        if not self.omega > 0.0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.delta not in (0, 1):
            raise ValueError(f"delta must be 0 or 1, got {self.delta}")

    @property
    def tau(self):
        return 2.0 * np.pi / self.omega

    @property
    def z_effective(self):
        """z field seen by the driven qubit: omega1 + (2*delta - 1) * j."""
        return self.omega1 + (2 * self.delta - 1) * self.j


@dataclass(frozen=True)
class JosephsonParams:
    """Charge-qubit drive parameters, energies in consistent units.

    e1, e2 : junction energies (> 0, e1 != e2)
    e_ch   : charging energy scale multiplying (1 - 2 n_x)
    e_i    : conditional z shift per unit offset-charge difference
    chi0   : designed cone angle, in (0, pi)
    omega  : drive angular frequency (> 0)
    nxc    : control-qubit offset charge entering the conditional shift
    delta  : control-qubit basis state in {0, 1}
    """

    e1: float
    e2: float
    e_ch: float
    chi0: float
    omega: float
    e_i: float = 0.0
    nxc: float = 0.0
    delta: int = 0

    def __post_init__(self):
        if not (self.e1 > 0.0 and self.e2 > 0.0):
            raise ValueError("junction energies e1, e2 must be positive")
        if self.e1 == self.e2:
            raise ValueError("junction asymmetry required: e1 must differ from e2")
        if not 0.0 < self.chi0 < np.pi:
            raise ValueError(f"chi0 must lie strictly inside (0, pi), got {self.chi0}")
        if not self.omega > 0.0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if self.delta not in (0, 1):
            raise ValueError(f"delta must be 0 or 1, got {self.delta}")

    @property
    def e_plus(self):
        return self.e1 + self.e2

    @property
    def e_minus(self):
        return self.e1 - self.e2

    @property
    def tau(self):
        return 2.0 * np.pi / self.omega


def nmr_schedule(p: NmrParams) -> FieldSchedule:
    """Rotating transverse field with a static z component.

    B(t) = (omega0 cos wt, omega0 sin wt, z) with z = p.z_effective, so the
    same builder covers the bare drive (j = 0) and the conditional drive.
    """
    z = p.z_effective
    omega0, omega = p.omega0, p.omega

    def sample(t):
        t = np.asarray(t, dtype=float)
        wt = omega * t
        out = np.empty(t.shape + (3,))
        out[..., 0] = omega0 * np.cos(wt)
        out[..., 1] = omega0 * np.sin(wt)
        out[..., 2] = z
        return out

    tau = p.tau
    label = f"nmr(omega0={p.omega0:g}, z={z:g}, omega={p.omega:g})"
    return FieldSchedule(sample=sample, period=tau, duration=tau, label=label)


def nmr_conditional_schedule(p: NmrParams, delta=None) -> FieldSchedule:
    """Drive seen by the target qubit when the control sits in |delta>.

    This is the exact eigenblock restriction of the coupled two-qubit
    Hamiltonian: the zz coupling turns into the z-field shift
    (2*delta - 1) * j, nothing else changes.
    """
    if delta is not None:
        p = replace(p, delta=int(delta))
    return nmr_schedule(p)


def josephson_ej(p: JosephsonParams, t):
    """Effective junction energy E_J(t) along the designed flux drive."""
    t = np.asarray(t, dtype=float)
    wt = p.omega * t
    c, s = np.cos(wt), np.sin(wt)
    em2, ep2 = p.e_minus**2, p.e_plus**2
    denom2 = em2 * c * c + ep2 * s * s
    cos2beta = em2 * c * c / denom2
    return np.sqrt(em2 + 4.0 * p.e1 * p.e2 * cos2beta)


def josephson_flux_phase(p: JosephsonParams, t):
    """Continuous flux phase beta(t) = pi * Phi(t) / Phi_0 with beta(0) = 0.

    Evaluated with a two-argument arctangent plus a branch correction so the
    result is continuous in t (no jumps at odd quarter periods).  For
    e1 < e2 the phase runs opposite to the drive angle wt.
    """
    t = np.asarray(t, dtype=float)
    wt = p.omega * t
    em = p.e_minus
    # principal value stays within pi/2 of wt because the dot product of
    # (|em| cos, ep sin) with (cos, sin) is positive for all t
    principal = np.arctan2(p.e_plus * np.sin(wt), abs(em) * np.cos(wt))
    corr = np.remainder(principal - wt + np.pi, 2.0 * np.pi) - np.pi
    beta = wt + corr
    out = np.sign(em) * beta
    if out.ndim == 0:
        return float(out)
    return out


def josephson_offset_charge(p: JosephsonParams, t):
    """Designed offset charge n_x(t) keeping the cone angle at chi0."""
    ej = josephson_ej(p, t)
    cot0 = np.cos(p.chi0) / np.sin(p.chi0)
    return 0.5 * (1.0 - (ej * cot0 + p.omega) / p.e_ch)


def josephson_schedule(p: JosephsonParams) -> FieldSchedule:
    """Designed constant-cone drive of the charge qubit.

    B(t) = (E_J(t) cos wt, -E_J(t) sin wt, E_J(t) cot chi0 + omega), which
    satisfies (B_z - omega) = E_J cot chi0 exactly, so the cone angle
    arctan(E_J / (B_z - omega)) equals chi0 for all t.
    """
    if not 0.0 < p.chi0 < np.pi:
        raise ValueError(f"chi0 must lie strictly inside (0, pi), got {p.chi0}")
    if p.e_minus == 0.0:
        raise ValueError(
            "e1 == e2 makes the designed flux drive degenerate (E_J pinned to 0)"
        )
    max_ej = p.e_plus
    if max_ej >= 0.5 * p.e_ch:
        warnings.warn(
            f"charging-regime assumption violated: max E_J = {max_ej:g} is not "
            f"small against e_ch/2 = {0.5 * p.e_ch:g}",
            stacklevel=2,
        )
    cot0 = np.cos(p.chi0) / np.sin(p.chi0)
    omega = p.omega

    def sample(t):
        t = np.asarray(t, dtype=float)
        wt = omega * t
        ej = josephson_ej(p, t)
        out = np.empty(t.shape + (3,))
        out[..., 0] = ej * np.cos(wt)
        out[..., 1] = -ej * np.sin(wt)
        out[..., 2] = ej * cot0 + omega
        return out

    tau = p.tau
    label = f"josephson(e1={p.e1:g}, e2={p.e2:g}, chi0={p.chi0:g}, omega={p.omega:g})"
    return FieldSchedule(sample=sample, period=tau, duration=tau, label=label)


def josephson_conditional_schedule(p: JosephsonParams, delta=None) -> FieldSchedule:
    """Charge-qubit drive with the control-conditioned z shift e_i*(nxc - delta)."""
    if delta is not None:
        p = replace(p, delta=int(delta))
    base = josephson_schedule(p)
    shift = p.e_i * (p.nxc - p.delta)
    if shift == 0.0:
        return base
    offset = np.array([0.0, 0.0, shift])

    def sample(t):
        return base.sample(t) + offset

    label = base.label + f" + z_shift({shift:g})"
    return FieldSchedule(sample=sample, period=base.period, duration=base.duration, label=label)


def rotation_about_y(angle):
    """3x3 rotation matrix about the y axis; maps z-hat to (sin a, 0, cos a)."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def _map_field(s: FieldSchedule, f, label) -> FieldSchedule:
    """Apply a pointwise linear map to the field, preserving piece structure."""
    def sample(t):
        return f(s.sample(t))

    pieces = tuple((off, _map_field(sub, f, sub.label)) for off, sub in s.pieces)
    return FieldSchedule(
        sample=sample, period=s.period, duration=s.duration, label=label, pieces=pieces
    )


def rotate_schedule(s: FieldSchedule, dchi) -> FieldSchedule:
    """Rigidly rotate the whole field history about the y axis by dchi."""
    r = rotation_about_y(dchi)
    return _map_field(s, lambda b: b @ r.T, f"rot_y({dchi:g})[{s.label}]")


def negated_schedule(s: FieldSchedule) -> FieldSchedule:
    """Sign-flipped field, same traversal order."""
    return _map_field(s, lambda b: -b, f"negated[{s.label}]")


def time_reversed_schedule(s: FieldSchedule) -> FieldSchedule:
    """Retrace one loop backwards without flipping the field sign."""
    tau = s.period

    def sample(t):
        return s.sample(tau - np.asarray(t, dtype=float))

    return FieldSchedule(
        sample=sample, period=tau, duration=tau, label=f"time_reversed[{s.label}]"
    )


def reversed_schedule(s: FieldSchedule) -> FieldSchedule:
    """Sign-flipped retraced loop: sample(t) = -s.sample(tau - t).

    Appending this to the original loop realizes the second period of the
    echo-style protocol B(2 tau - t) = -B(t).  Applying it twice returns the
    original loop.
    """
    tau = s.period

    def sample(t):
        return -s.sample(tau - np.asarray(t, dtype=float))

    return FieldSchedule(
        sample=sample, period=tau, duration=tau, label=f"reversed[{s.label}]"
    )


def concat(s1: FieldSchedule, s2: FieldSchedule) -> FieldSchedule:
    """Run s1 for its full duration, then s2.

    The sample map is right-continuous at the joint.  The base period of the
    left operand is kept as the sampling-density hint.
    """
    d1, d2 = s1.duration, s2.duration

    def sample(t):
        t = np.asarray(t, dtype=float)
        left = s1.sample(np.minimum(t, d1))
        right = s2.sample(np.maximum(t - d1, 0.0))
        mask = (t < d1)[..., None]
        return np.where(mask, left, right)

    p1 = s1.pieces if s1.pieces else ((0.0, s1),)
    p2 = s2.pieces if s2.pieces else ((0.0, s2),)
    pieces = tuple(p1) + tuple((d1 + off, sub) for off, sub in p2)
    return FieldSchedule(
        sample=sample,
        period=s1.period,
        duration=d1 + d2,
        label=f"concat[{s1.label} | {s2.label}]",
        pieces=pieces,
    )


def flatten_pieces(s: FieldSchedule):
    """Smooth segments of a schedule as (t_start, t_end, local_sample) triples.

    ``local_sample`` expects times relative to t_start.  Plain schedules
    yield a single segment covering [0, duration].
    """
    if not s.pieces:
        return [(0.0, s.duration, s.sample)]
    out = []
    for off, sub in s.pieces:
        for a, b, fn in flatten_pieces(sub):
            out.append((off + a, off + b, fn))
    return out


def closure_gap(s: FieldSchedule):
    """max |B(period) - B(0)| component-wise; 0 for a closed loop."""
    b0 = s.sample(0.0)
    b1 = s.sample(s.period)
    return float(np.max(np.abs(b1 - b0)))


def hamiltonian(s: FieldSchedule, t):
    """Single-qubit Hamiltonian -(1/2) B(t) . sigma, shape (..., 2, 2)."""
    b = np.asarray(s.sample(t), dtype=float)
    return -0.5 * np.einsum("...k,kij->...ij", b, PAULI)


@dataclass(frozen=True)
class TwoQubitModel:
    """Control/target pair with zz coupling, control as left tensor factor.

    H(t) = h_c(t) (x) I + I (x) h_t(t) + (coupling_j / 2) sz (x) sz

    where h_t(t) = -(1/2) B_target(t) . sigma, and the control term is a
    static z field (``control_z``) or, with ``drive_on_control`` set, the
    target's transverse drive re-applied to the control on top of its own
    static z field (the leakage model used by the detuning sweep).
    """

    target: FieldSchedule
    coupling_j: float
    control_z: float
    drive_on_control: bool = False
    label: str = "two_qubit"

    @property
    def period(self):
        return self.target.period

    @property
    def duration(self):
        return self.target.duration

    def control_field(self, t):
        """Field seen by the control qubit, shape (..., 3)."""
        t = np.asarray(t, dtype=float)
        if self.drive_on_control:
            b = np.array(self.target.sample(t), copy=True)
            b[..., 2] = self.control_z
            return b
        out = np.zeros(t.shape + (3,))
        out[..., 2] = self.control_z
        return out

    def h4(self, t):
        """Full Hamiltonian matrix, shape (..., 4, 4), Hermitian."""
        t = np.asarray(t, dtype=float)
        bt = np.asarray(self.target.sample(t), dtype=float)
        ht = -0.5 * np.einsum("...k,kij->...ij", bt, PAULI)
        bc = self.control_field(t)
        hc = -0.5 * np.einsum("...k,kij->...ij", bc, PAULI)
        eye = np.eye(2, dtype=complex)
        hh = np.einsum("...ab,cd->...acbd", hc, eye) + np.einsum(
            "ab,...cd->...acbd", eye, ht
        )
        hh = hh.reshape(t.shape + (4, 4))
        return hh + 0.5 * self.coupling_j * kron(PAULI[2], PAULI[2])

    def block_schedule(self, delta) -> FieldSchedule:
        """Target drive inside the control eigenblock |delta> (requires an
        undriven control)."""
        if self.drive_on_control:
            raise ValueError("driven control does not commute with sz(x)I; no exact blocks")
        shift = (2 * int(delta) - 1) * self.coupling_j
        if shift == 0.0:
            return self.target
        offset = np.array([0.0, 0.0, shift])

        def sample(t):
            return self.target.sample(t) + offset

        return FieldSchedule(
            sample=sample,
            period=self.target.period,
            duration=self.target.duration,
            label=self.target.label + f" + block_z({shift:g})",
        )

    def block_energy(self, delta):
        """Constant energy of the control factor inside block |delta>."""
        sz = 1.0 - 2.0 * int(delta)
        return -0.5 * self.control_z * sz


def nmr_two_qubit(p: NmrParams, omega1_control, drive_on_control=False) -> TwoQubitModel:
    """Coupled pair: driven target plus a spectator control at omega1_control."""
    target = nmr_schedule(replace(p, j=0.0, delta=0))
    return TwoQubitModel(
        target=target,
        coupling_j=p.j,
        control_z=float(omega1_control),
        drive_on_control=drive_on_control,
        label=f"nmr_pair(j={p.j:g}, wc={omega1_control:g})",
    )


def schedule_to_csv(s: FieldSchedule, path, samples_per_period=4096, params=None):
    """Export t, Bx, By, Bz on a uniform grid over the schedule duration."""
    n = int(round(samples_per_period * s.duration / s.period))
    ts = np.linspace(0.0, s.duration, max(n, 2) + 1)
    b = s.sample(ts)
    meta = {"schedule": s.label, "period": s.period, "duration": s.duration}
    if params:
        meta.update(params)
    write_table(
        path,
        meta,
        [("t", ts), ("Bx", b[:, 0]), ("By", b[:, 1]), ("Bz", b[:, 2])],
    )
