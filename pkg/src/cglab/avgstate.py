"""Average preimage states of a two-qubit CG map.

For a target polarized along z the average state is

    rho = I/4 + c1 Z(x)I + c2 I(x)Z + c3 Z(x)Z + c4 (X(x)X + Y(x)Y + Z(x)Z)

with coefficients depending only on ``h`` and the target radius.  Other
orientations follow by covariance, ``(U(x)U) rho (U(x)U)^dagger``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sampling import (
    EmptyPreimageError,
    make_rng,
    sample_preimage,
    sample_preimage_separable,
)
from .states import PAULI, direction_angles, kron, purity, spin_rotation

ENSEMBLES = ("full", "separable")


@dataclass(frozen=True)
class AvgStateCoeffs:
    c1: float
    c2: float
    c3: float
    c4: float
    branch: str
    ensemble: str

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.c1, self.c2, self.c3, self.c4)

    def pauli_components(self) -> dict[tuple[int, int], float]:
        """The six nonzero ``tr(rho sigma_mu (x) sigma_nu)`` for a z-aligned target."""
        return {
            (0, 0): 1.0,
            (3, 0): 4 * self.c1,
            (0, 3): 4 * self.c2,
            (3, 3): 4 * (self.c3 + self.c4),
            (1, 1): 4 * self.c4,
            (2, 2): 4 * self.c4,
        }

    def matrix(self) -> np.ndarray:
        i, z = PAULI[0], PAULI[3]
        corr = sum(kron(PAULI[k], PAULI[k]) for k in (1, 2, 3))
        return (0.25 * kron(i, i) + self.c1 * kron(z, i) + self.c2 * kron(i, z)
                + self.c3 * kron(z, z) + self.c4 * corr)


def _check(h: float, r_ts: float) -> None:
    if not 0 < h <= 1:
        raise ValueError(f"h must lie in (0, 1], got {h!r}")
    if not 0 <= r_ts <= 1:
        raise ValueError(f"r_ts must lie in [0, 1], got {r_ts!r}")


def coeffs_full(h: float, r_ts: float) -> AvgStateCoeffs:
    """Coefficients for the Fubini-Study ensemble of all two-qubit pure states."""
    _check(h, r_ts)
    r = r_ts
    if r < h:
        f = 1.0 / (12 * h * (1 + h))
        return AvgStateCoeffs(-(1 - h**2) * r * f, (1 + 4 * h + h**2) * r * f, 0.0,
                              -h * (1 - h) * f, "inside", "full")
    if h == 1.0:
        # r_ts = h = 1: the only preimage is the coherent state |00>
        return AvgStateCoeffs(0.25, 0.25, 0.25, 0.0, "outside", "full")
    f = 1.0 / (24 * (1 - h**2) * r**2)
    s = r**2 + r + 1
    return AvgStateCoeffs(
        2 * r * (1 + h) * (3 * r**2 - h * s) * f,
        2 * r * (1 - h) * (3 * r**2 + h * s) * f,
        3 * (1 + r) * (r**2 - h**2) * f,
        -(1 - r) * (3 * r**2 - h**2 * (2 * r + 1)) * f,
        "outside",
        "full",
    )


def coeffs_separable(h: float, r_ts: float) -> AvgStateCoeffs:
    """Coefficients for the uniform ensemble of product states (``r_ts >= h``)."""
    _check(h, r_ts)
    if h >= 1:
        raise ValueError("the separable ensemble needs h < 1")
    if r_ts < h:
        raise EmptyPreimageError(f"no product state maps to radius {r_ts!r} < h = {h!r}")
    r = r_ts
    return AvgStateCoeffs(
        (r**2 - h) / (4 * (1 - h) * r),
        (r**2 + h) / (4 * (1 + h) * r),
        (r**4 + r**2 + h**2 * (r**2 - 3)) / (8 * (1 - h**2) * r**2),
        -(1 - r**2) * (r**2 - h**2) / (8 * (1 - h**2) * r**2),
        "outside",
        "separable",
    )


def avg_state_coeffs(h: float, r_ts: float, ensemble: str = "full") -> AvgStateCoeffs:
    if ensemble == "full":
        return coeffs_full(h, r_ts)
    if ensemble == "separable":
        return coeffs_separable(h, r_ts)
    raise ValueError(f"unknown ensemble {ensemble!r}; expected one of {ENSEMBLES}")


def avg_state_full(h: float, r_ts: float) -> np.ndarray:
    return coeffs_full(h, r_ts).matrix()


def avg_state_separable(h: float, r_ts: float) -> np.ndarray:
    return coeffs_separable(h, r_ts).matrix()


def rotate_pair(rho, target) -> np.ndarray:
    """Carry a z-aligned two-qubit state to the axis of ``target`` with ``U(x)U``."""
    t = np.asarray(target, dtype=float)
    radius = float(np.linalg.norm(t))
    if radius == 0:
        return np.asarray(rho, dtype=complex)
    theta, phi = direction_angles(t / radius)
    u = spin_rotation(float(theta), float(phi))
    uu = np.kron(u, u)
    return uu @ rho @ uu.conj().T


def avg_state_general_axis(target, h: float, ensemble: str = "full") -> np.ndarray:
    t = np.asarray(target, dtype=float)
    radius = float(np.linalg.norm(t))
    if radius > 1 + 1e-12:
        raise ValueError("target lies outside the Bloch ball")
    base = avg_state_coeffs(h, min(radius, 1.0), ensemble).matrix()
    return rotate_pair(base, t)


def avg_state_diagnostics(rho, r_ts: float) -> dict:
    """Purity, the (01,10) coherence and residuals of the claimed symmetries.

    The Pauli-component residuals assume a z-aligned target.
    """
    rho = np.asarray(rho, dtype=complex)
    comp = lambda a, b: float(np.real(np.trace(rho @ kron(PAULI[a], PAULI[b]))))
    return {
        "purity": purity(rho),
        "coherence_23": float(np.real(rho[1, 2])),
        "coherence_23_abs": float(abs(rho[1, 2])),
        "symmetry_residuals": {
            "xx_minus_yy": comp(1, 1) - comp(2, 2),
            "coh_23_minus_32": float(abs(rho[1, 2] - rho[2, 1])),
        },
        "coherence_bound_full": 0.25 * (1 - r_ts),
        "coherence_bound_separable": 0.5 * (1 - r_ts),
    }


def partial_transpose(rho) -> np.ndarray:
    """Transpose of the second qubit of a two-qubit matrix."""
    t = np.asarray(rho, dtype=complex).reshape(2, 2, 2, 2)
    return t.transpose(0, 3, 2, 1).reshape(4, 4)


def is_ppt(rho, tol: float = 1e-10) -> bool:
    return bool(np.linalg.eigvalsh(partial_transpose(rho))[0] >= -tol)


@dataclass
class MCAverage:
    """Monte-Carlo average state with a jackknife error per matrix entry."""

    mean: np.ndarray
    stderr: np.ndarray
    n: int

    @property
    def frobenius_stderr(self) -> float:
        return float(np.sqrt(np.sum(self.stderr**2)))


def _block_means(draw, n: int, blocks: int) -> np.ndarray:
    sizes = np.full(blocks, n // blocks)
    sizes[: n % blocks] += 1
    out = np.empty((blocks, 4, 4), dtype=complex)
    for b, m in enumerate(sizes):
        kets = draw(b, int(m))
        out[b] = np.einsum("sa,sb->ab", kets, kets.conj()) / m
    return out, sizes


def avg_state_mc(target, h: float, ensemble: str = "full", n: int = 100_000,
                 seed: int = 0, blocks: int = 20, chunk: int = 200_000) -> MCAverage:
    """Average of ``n`` preimage states of ``target``.

    Sample block ``b`` uses substream ``b`` of ``seed``; the jackknife runs
    over these blocks, so results do not depend on how work is scheduled.
    """
    if ensemble not in ENSEMBLES:
        raise ValueError(f"unknown ensemble {ensemble!r}")
    if n < blocks:
        raise ValueError("need at least one sample per jackknife block")
    sampler = sample_preimage if ensemble == "full" else sample_preimage_separable

    def draw(b, m):
        rng = make_rng(seed, b)
        parts = []
        while m > 0:
            k = min(m, chunk)
            parts.append(sampler(target, h, rng, size=k))
            m -= k
        return np.concatenate(parts)

    means, sizes = _block_means(draw, n, blocks)
    total = np.einsum("b,bij->ij", sizes, means) / n
    loo = (total[None] * n - sizes[:, None, None] * means) / (n - sizes)[:, None, None]
    var = (blocks - 1) / blocks * np.sum(np.abs(loo - loo.mean(axis=0)) ** 2, axis=0)
    return MCAverage(total, np.sqrt(var), n)
