"""Qubit states, Pauli algebra, and Bloch-sphere primitives.

Conventions used throughout the package: hbar = 1, magnetic moment mu = 1,
basis order {|0>, |1>} with sigma_z |0> = +|0>, and two-qubit basis order
{|00>, |01>, |10>, |11>} with the control qubit as the left tensor factor.
Fields are expressed in energy units, so H = -(1/2) B . sigma for one qubit.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "SIGMA_X",
    "SIGMA_Y",
    "SIGMA_Z",
    "PAULI",
    "ID2",
    "ID4",
    "KET0",
    "KET1",
    "NORM_ATOL",
    "UNITARY_ATOL",
    "normalize",
    "norm_defect",
    "assert_normalized",
    "bloch_of_state",
    "state_of_angles",
    "bloch_angles",
    "expm_pauli",
    "kron",
    "is_unitary",
    "unitarity_defect",
    "state_fidelity",
    "overlap_phase",
    "wrap_pi",
    "angle_dist",
    "reduced_bloch",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI = np.stack([SIGMA_X, SIGMA_Y, SIGMA_Z])
ID2 = np.eye(2, dtype=complex)
ID4 = np.eye(4, dtype=complex)
KET0 = np.array([1.0, 0.0], dtype=complex)
KET1 = np.array([0.0, 1.0], dtype=complex)

# Norm deviation tolerated on incoming states, and the unitarity gate used
# for matrices fed to fidelity/comparison helpers.
NORM_ATOL = 1e-8
UNITARY_ATOL = 1e-10


def normalize(psi):
    """Return psi scaled to unit norm."""
    psi = np.asarray(psi, dtype=complex)
    n = np.linalg.norm(psi)
    if n == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return psi / n


def norm_defect(psi):
    """Absolute deviation of ||psi|| from 1."""
    return abs(np.linalg.norm(np.asarray(psi, dtype=complex)) - 1.0)


def assert_normalized(psi, atol=NORM_ATOL):
    d = norm_defect(psi)
    if d > atol:
        raise ValueError(f"state norm deviates from 1 by {d:.3e} (atol={atol:.1e})")


def bloch_of_state(psi, atol=NORM_ATOL):
    """Bloch vector (<sx>, <sy>, <sz>) of a normalized single-qubit state.

    Raises ValueError if the norm of ``psi`` deviates from 1 by more than
    ``atol``.
    """
    psi = np.asarray(psi, dtype=complex)
    if psi.shape != (2,):
        raise ValueError(f"expected a length-2 state vector, got shape {psi.shape}")
    assert_normalized(psi, atol)
    z = np.conj(psi[0]) * psi[1]
    return np.array([2.0 * z.real, 2.0 * z.imag, abs(psi[0]) ** 2 - abs(psi[1]) ** 2])


def state_of_angles(theta, phi):
    """State with Bloch vector (sin t cos p, sin t sin p, cos t).

    Uses the symmetric phase split (e^{-i phi/2}, e^{+i phi/2}); theta must
    lie in [0, pi].
    """
    if not 0.0 <= theta <= np.pi:
        raise ValueError(f"polar angle must lie in [0, pi], got {theta}")
    return np.array(
        [
            np.exp(-0.5j * phi) * np.cos(0.5 * theta),
            np.exp(+0.5j * phi) * np.sin(0.5 * theta),
        ]
    )


def bloch_angles(n):
    """Polar and azimuthal angles of a Bloch vector."""
    n = np.asarray(n, dtype=float)
    theta = np.arctan2(np.hypot(n[0], n[1]), n[2])
    phi = np.arctan2(n[1], n[0])
    return theta, phi


def expm_pauli(b, s):
    """Closed-form exponential exp(i s (b . sigma)).

    Parameters
    ----------
    b : array_like, shape (..., 3)
        Real coefficient vector; need not be normalized.
    s : array_like, shape (...)
        Real scale factor.

    Returns
    -------
    ndarray, shape (..., 2, 2)
        cos(s|b|) I + i sin(s|b|) (bhat . sigma), exactly unitary up to
        rounding. b = 0 yields the identity for any s.
    """
    b = np.asarray(b, dtype=float)
    s = np.asarray(s, dtype=float)
    nb = np.linalg.norm(b, axis=-1)
    ang = s * nb
    safe = np.where(nb > 0.0, nb, 1.0)
    unit = b / safe[..., None]
    c = np.cos(ang)
    si = np.sin(ang)
    u = c[..., None, None] * ID2 + 1j * si[..., None, None] * np.einsum(
        "...k,kij->...ij", unit, PAULI
    )
    return u


def kron(a, b):
    """Tensor product with the left factor acting on the control qubit."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def unitarity_defect(u):
    """max |U^dag U - I| entry-wise."""
    u = np.asarray(u, dtype=complex)
    d = u.conj().T @ u - np.eye(u.shape[0])
    return float(np.max(np.abs(d)))


def is_unitary(u, atol=UNITARY_ATOL):
    return unitarity_defect(u) <= atol


def state_fidelity(a, b):
    """|<a|b>| for pure states (global-phase free)."""
    return float(abs(np.vdot(np.asarray(a, complex), np.asarray(b, complex))))


def overlap_phase(a, b):
    """arg <a|b> in (-pi, pi]."""
    return float(np.angle(np.vdot(np.asarray(a, complex), np.asarray(b, complex))))


def wrap_pi(x):
    """Reduce an angle (or array of angles) to the branch (-pi, pi]."""
    x = np.asarray(x, dtype=float)
    y = np.remainder(x + np.pi, 2.0 * np.pi) - np.pi
    y = np.where(y == -np.pi, np.pi, y)
    if y.ndim == 0:
        return float(y)
    return y


def angle_dist(a, b):
    """Distance between two angles modulo 2*pi."""
    return float(np.abs(wrap_pi(np.asarray(a, float) - np.asarray(b, float))))


def reduced_bloch(psi4):
    """Per-qubit Bloch vectors of a two-qubit pure state.

    Returns (n_control, n_target); entangled states give |n| < 1.
    """
    psi4 = np.asarray(psi4, dtype=complex)
    if psi4.shape != (4,):
        raise ValueError(f"expected a length-4 state vector, got shape {psi4.shape}")
    m = psi4.reshape(2, 2)
    rho_c = m @ m.conj().T
    rho_t = m.T @ m.conj()
    nc = np.array([np.trace(rho_c @ p).real for p in PAULI])
    nt = np.array([np.trace(rho_t @ p).real for p in PAULI])
    return nc, nt
