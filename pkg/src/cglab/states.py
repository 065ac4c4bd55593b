"""Pure states, density matrices and the two-qubit Schmidt parametrization.

Conventions used throughout the package:

* states are plain complex numpy arrays; an N-qubit ket has length ``2**N``
  and a density matrix on m qubits has shape ``(2**m, 2**m)``;
* qubit 0 is the most significant bit of a basis label, so ``|l_0 l_1 ...>``
  reads left to right exactly like the tensor product;
* Pauli coefficient tensors are indexed by ``nu in {0,1,2,3}**m`` with
  ``sigma_0 = I``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce
from itertools import product

import numpy as np

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
MAX_QUBITS = 12

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.stack([I2, SX, SY, SZ])


class StateError(ValueError):
    """Raised when an array is not a valid state of the requested kind."""


def num_qubits(dim: int) -> int:
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 1 or 2**n != dim:
        raise StateError(f"dimension {dim} is not a power of two >= 2")
    return n


def kron(*ops):
    return reduce(np.kron, ops)


def as_ket(psi, tol: float = NORM_TOL) -> np.ndarray:
    """Validate a pure state vector and return it as a complex array."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    n = num_qubits(psi.size)
    if n > MAX_QUBITS:
        raise StateError(f"{n} qubits exceeds the supported maximum of {MAX_QUBITS}")
    norm2 = float(np.vdot(psi, psi).real)
    if abs(norm2 - 1.0) > tol:
        raise StateError(f"state is not normalized: <psi|psi> = {norm2!r}")
    return psi


def as_density(rho, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate a density matrix, symmetrizing away round-off.

    Deviations from Hermiticity up to ``tol`` are repaired with
    ``(rho + rho^dagger)/2``; anything larger raises :class:`StateError`, as do
    a trace different from one or eigenvalues below ``-PSD_TOL``.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise StateError(f"density matrix must be square, got shape {rho.shape}")
    num_qubits(rho.shape[0])
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise StateError("matrix is not Hermitian")
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise StateError(f"trace is {tr!r}, expected 1")
    if np.linalg.eigvalsh(rho)[0] < -PSD_TOL:
        raise StateError("matrix is not positive semidefinite")
    return rho


def ket_to_dm(psi) -> np.ndarray:
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    return np.outer(psi, psi.conj())


def purity(rho) -> float:
    rho = np.asarray(rho)
    return float(np.real(np.einsum("ij,ji->", rho, rho)))


def partial_trace(rho, keep) -> np.ndarray:
    """Reduce ``rho`` to the qubits listed in ``keep`` (0-based, any order).

    The kept qubits appear in the output in increasing index order.
    """
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho.shape[0])
    keep = sorted(set(int(k) for k in keep))
    if not keep:
        raise ValueError("keep must name at least one qubit")
    if keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"qubit index out of range for {n} qubits: {keep}")
    traced = [q for q in range(n) if q not in keep]
    t = rho.reshape([2] * (2 * n))
    # bring kept row axes, kept column axes, then pair traced row/column axes
    perm = keep + [n + q for q in keep] + traced + [n + q for q in traced]
    t = t.transpose(perm)
    dk, dt = 2 ** len(keep), 2 ** len(traced)
    t = t.reshape(dk, dk, dt, dt)
    return np.einsum("abjj->ab", t)


def reduced_state(psi, keep) -> np.ndarray:
    """Marginal of a pure state on ``keep`` without forming the full matrix."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    n = num_qubits(psi.size)
    keep = sorted(set(int(k) for k in keep))
    if not keep or keep[0] < 0 or keep[-1] >= n:
        raise ValueError(f"invalid qubit selection {keep} for {n} qubits")
    traced = [q for q in range(n) if q not in keep]
    m = psi.reshape([2] * n).transpose(keep + traced).reshape(2 ** len(keep), -1)
    return m @ m.conj().T


def pauli_coefficients(rho) -> np.ndarray:
    """Real tensor ``c[nu] = tr(rho sigma_nu)`` of shape ``(4,) * m``."""
    rho = np.asarray(rho, dtype=complex)
    m = num_qubits(rho.shape[0])
    coeffs = np.empty((4,) * m)
    for nu in product(range(4), repeat=m):
        sigma = kron(*(PAULI[k] for k in nu))
        coeffs[nu] = np.real(np.einsum("ij,ji->", rho, sigma))
    return coeffs


def from_pauli_coefficients(coeffs) -> np.ndarray:
    """Inverse of :func:`pauli_coefficients`: ``2**-m sum_nu c[nu] sigma_nu``."""
    coeffs = np.asarray(coeffs, dtype=float)
    m = coeffs.ndim
    rho = np.zeros((2**m, 2**m), dtype=complex)
    for nu in product(range(4), repeat=m):
        if coeffs[nu] != 0.0:
            rho += coeffs[nu] * kron(*(PAULI[k] for k in nu))
    return rho / 2**m


def bloch_vector(rho) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise StateError(f"Bloch vector needs a single-qubit state, got shape {rho.shape}")
    return np.real(np.einsum("kij,ji->k", PAULI[1:], rho))


def bloch_to_dm(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    return 0.5 * (I2 + np.einsum("k,kij->ij", r, PAULI[1:]))


def spinor(theta, phi) -> np.ndarray:
    """``|n> = cos(theta/2) e^{-i phi/2}|0> + sin(theta/2) e^{i phi/2}|1>``.

    Broadcasts over array arguments; the last axis of the result has size 2.
    """
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    return np.stack(
        [np.cos(theta / 2) * np.exp(-0.5j * phi), np.sin(theta / 2) * np.exp(0.5j * phi)],
        axis=-1,
    )


def antispinor(theta, phi) -> np.ndarray:
    """The orthogonal partner ``|-n>`` with the phase used in the Schmidt form."""
    theta, phi = np.broadcast_arrays(np.asarray(theta, float), np.asarray(phi, float))
    return np.stack(
        [np.sin(theta / 2) * np.exp(-0.5j * phi), -np.cos(theta / 2) * np.exp(0.5j * phi)],
        axis=-1,
    )


def direction_angles(n) -> tuple[np.ndarray, np.ndarray]:
    """Polar and azimuthal angle of (arrays of) unit vectors, phi in [0, 2pi)."""
    n = np.asarray(n, dtype=float)
    theta = np.arccos(np.clip(n[..., 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(n[..., 1], n[..., 0]), 2 * np.pi)
    return theta, phi


@dataclass(frozen=True)
class SchmidtParams:
    """Angles of ``cos(eta/2)|n1,n2> + sin(eta/2) e^{i gamma}|-n1,-n2>``."""

    eta: float
    gamma: float
    theta1: float
    phi1: float
    theta2: float
    phi2: float

    def __post_init__(self):
        tol = 1e-12
        for name, hi in (("eta", np.pi), ("theta1", np.pi), ("theta2", np.pi)):
            v = getattr(self, name)
            if not -tol <= v <= hi + tol:
                raise ValueError(f"{name}={v!r} outside [0, pi]")
        for name in ("gamma", "phi1", "phi2"):
            v = getattr(self, name)
            if not -tol <= v < 2 * np.pi + tol:
                raise ValueError(f"{name}={v!r} outside [0, 2pi)")


def build_schmidt_state(params: SchmidtParams) -> np.ndarray:
    n1 = spinor(params.theta1, params.phi1)
    n2 = spinor(params.theta2, params.phi2)
    m1 = antispinor(params.theta1, params.phi1)
    m2 = antispinor(params.theta2, params.phi2)
    return (np.cos(params.eta / 2) * np.kron(n1, n2)
            + np.sin(params.eta / 2) * np.exp(1j * params.gamma) * np.kron(m1, m2))


def schmidt_params(psi, degeneracy_tol: float = 1e-9) -> SchmidtParams:
    """Recover Schmidt angles from a two-qubit pure state.

    When the reduced states are maximally mixed (``eta = pi/2``) the local
    bases are not unique; the canonical representative then takes ``n1 = z``
    and reads ``n2`` and ``gamma`` off the state.
    """
    psi = as_ket(psi, tol=1e-9)
    if psi.size != 4:
        raise StateError("Schmidt parameters are defined for two qubits only")
    r1 = bloch_vector(reduced_state(psi, [0]))
    r2 = bloch_vector(reduced_state(psi, [1]))
    r = min(1.0, 0.5 * (np.linalg.norm(r1) + np.linalg.norm(r2)))
    eta = float(np.arccos(r))
    if r > degeneracy_tol:
        t1, f1 = direction_angles(r1 / np.linalg.norm(r1))
        t2, f2 = direction_angles(r2 / np.linalg.norm(r2))
    else:
        t1, f1 = 0.0, 0.0
        # with n1 = z, <0|_1 psi is proportional to cos(eta/2)|n2>
        v = psi.reshape(2, 2)[0]
        v = v / np.linalg.norm(v)
        t2, f2 = direction_angles(bloch_vector(np.outer(v, v.conj())))
    n12 = np.kron(spinor(t1, f1), spinor(t2, f2))
    m12 = np.kron(antispinor(t1, f1), antispinor(t2, f2))
    a = np.vdot(n12, psi)
    b = np.vdot(m12, psi)
    gamma = float(np.mod(np.angle(b) - np.angle(a), 2 * np.pi)) if abs(b) > 1e-12 else 0.0
    if gamma >= 2 * np.pi:
        gamma = 0.0
    return SchmidtParams(eta, gamma, float(t1), float(f1), float(t2), float(f2))


def concurrence(psi) -> float:
    """``|<psi| sigma_y (x) sigma_y |psi*>|`` for a two-qubit pure state."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != 4:
        raise StateError("concurrence is implemented for two-qubit pure states")
    return float(abs(psi @ np.kron(SY, SY) @ psi))


def same_ray(a, b, tol: float = 1e-10) -> bool:
    """True when two kets agree up to a global phase."""
    return abs(abs(np.vdot(a, b)) - 1.0) <= tol


def rotation_matrix(theta: float, phi: float) -> np.ndarray:
    """Rotation by ``theta`` about ``(-sin phi, cos phi, 0)``; maps z to (theta, phi)."""
    ax = np.array([-np.sin(phi), np.cos(phi), 0.0])
    k = np.array([[0, -ax[2], ax[1]], [ax[2], 0, -ax[0]], [-ax[1], ax[0], 0]])
    return np.eye(3) + np.sin(theta) * k + (1 - np.cos(theta)) * (k @ k)


def spin_rotation(theta: float, phi: float) -> np.ndarray:
    """SU(2) element implementing :func:`rotation_matrix` on Bloch vectors."""
    ax = np.array([-np.sin(phi), np.cos(phi), 0.0])
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * np.einsum("k,kij->ij", ax, PAULI[1:])


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))
