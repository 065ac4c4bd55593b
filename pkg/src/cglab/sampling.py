"""Seeded samplers: Haar pure states, product states and CG preimages.

Every sampler takes a ``numpy.random.Generator``; :func:`make_rng` derives
independent, reproducible substreams from ``(seed, stream_id)``.

The two-qubit preimage of a target Bloch vector ``R`` under the CG map with
asymmetry ``h`` is parametrized by ``(kappa, v, gamma)``: ``kappa = r/R`` is
the ratio of the (common) reduced Bloch radius to the target radius, ``v``
an azimuth on the locus sphere of the reduced Bloch vectors and ``gamma``
the Schmidt phase.  The Fubini-Study measure is flat in all three.
"""
from __future__ import annotations

import numpy as np

from .states import antispinor, direction_angles, rotation_matrix, spinor

MAX_QUBITS = 12


class EmptyPreimageError(ValueError):
    """The requested target has no preimage in the chosen ensemble."""


def make_rng(seed: int, stream_id: int = 0) -> np.random.Generator:
    """Generator for substream ``stream_id`` of ``seed`` (both 64-bit unsigned)."""
    seed, stream_id = int(seed), int(stream_id)
    for name, v in (("seed", seed), ("stream_id", stream_id)):
        if not 0 <= v < 2**64:
            raise ValueError(f"{name} must be a 64-bit unsigned integer, got {v}")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(stream_id,))))


def sample_haar_states(n_qubits: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` Haar-random kets on ``n_qubits`` qubits, shape ``(size, 2**n)``."""
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    d = 2**n_qubits
    z = rng.standard_normal((size, d)) + 1j * rng.standard_normal((size, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_haar_state(n_qubits: int, rng: np.random.Generator) -> np.ndarray:
    return sample_haar_states(n_qubits, 1, rng)[0]


def uniform_unit_vectors(size: int, rng: np.random.Generator) -> np.ndarray:
    cos_t = rng.uniform(-1.0, 1.0, size)
    phi = rng.uniform(0.0, 2 * np.pi, size)
    sin_t = np.sqrt(1.0 - cos_t**2)
    return np.stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t], axis=-1)


def product_kets(n1, n2) -> np.ndarray:
    """``|n1> (x) |n2>`` for stacks of unit Bloch vectors, shape ``(..., 4)``."""
    s1 = spinor(*direction_angles(n1))
    s2 = spinor(*direction_angles(n2))
    return np.einsum("...a,...b->...ab", s1, s2).reshape(s1.shape[:-1] + (4,))


def sample_product_states(size: int, rng: np.random.Generator) -> np.ndarray:
    """Product kets with both Bloch directions uniform on the sphere."""
    n1 = uniform_unit_vectors(size, rng)
    n2 = uniform_unit_vectors(size, rng)
    return product_kets(n1, n2)


def sample_product_state(rng: np.random.Generator) -> np.ndarray:
    return sample_product_states(1, rng)[0]


def sample_flat_simplex(dim: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Flat Dirichlet draws on the ``(dim-1)``-simplex."""
    if dim < 2:
        raise ValueError(f"simplex dimension must be >= 2, got {dim}")
    e = rng.standard_exponential((1 if size is None else size, dim))
    x = e / e.sum(axis=1, keepdims=True)
    return x[0] if size is None else x


def two_sphere_geometry(target, h: float):
    """Centers and radii of the loci of the two reduced Bloch vectors.

    Returns ``(c1, c2, R1, R2)``; the spheres touch at the target.
    """
    t = np.asarray(target, dtype=float)
    if not 0 < h <= 1:
        raise ValueError(f"h must lie in (0, 1], got {h!r}")
    r = float(np.linalg.norm(t))
    c1 = -t * (1 - h) / (2 * h)
    c2 = t * (1 + h) / (2 * h)
    return c1, c2, r * (1 + h) / (2 * h), r * (1 - h) / (2 * h)


def kappa_max(radius: float, h: float) -> float:
    """Upper end of ``kappa``: ``1/h`` inside the radius-h ball, ``1/R`` outside."""
    return 1.0 / h if radius <= h else 1.0 / radius


def _check_target(target, h: float) -> tuple[np.ndarray, float]:
    t = np.asarray(target, dtype=float).reshape(3)
    radius = float(np.linalg.norm(t))
    if radius > 1 + 1e-12:
        raise ValueError(f"target lies outside the Bloch ball (|r| = {radius!r})")
    if not 0 < h <= 1:
        raise ValueError(f"h must lie in (0, 1]; got {h!r} (h = 0 has no preimage chart)")
    return t, min(radius, 1.0)


def _locus_vectors(cos_u, v, h):
    """Unit-target loci ``a1, a2`` (before scaling by R and rotating)."""
    sin_u = np.sqrt(np.clip(1.0 - cos_u**2, 0.0, None))
    m = np.stack([sin_u * np.cos(v), sin_u * np.sin(v), cos_u], axis=-1)
    k = np.array([0.0, 0.0, 1.0])
    a1 = ((1 + h) * m - (1 - h) * k) / (2 * h)
    a2 = ((1 + h) * k - (1 - h) * m) / (2 * h)
    return a1, a2


def preimage_states(target, h: float, kappa, v, gamma, cos_u=None) -> np.ndarray:
    """Kets at preimage coordinates ``(kappa, v, gamma)`` of ``target``.

    ``cos_u`` may be supplied directly; it is otherwise solved from
    ``2 h^2 kappa^2 = 1 + h^2 - (1 - h^2) cos u``.
    """
    t, radius = _check_target(target, h)
    kappa = np.atleast_1d(np.asarray(kappa, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    if cos_u is None:
        cos_u = (1 + h**2 - 2 * h**2 * kappa**2) / (1 - h**2)
    cos_u = np.clip(np.atleast_1d(cos_u), -1.0, 1.0)
    a1, a2 = _locus_vectors(cos_u, v, h)
    theta, phi = direction_angles(t / radius) if radius > 0 else (0.0, 0.0)
    rot = rotation_matrix(float(theta), float(phi))
    norm = np.linalg.norm(a1, axis=-1, keepdims=True)
    n1 = (a1 / norm) @ rot.T
    n2 = (a2 / norm) @ rot.T
    r = np.clip(kappa * radius, 0.0, 1.0)
    eta = np.arccos(r)
    t1, f1 = direction_angles(n1)
    t2, f2 = direction_angles(n2)
    up = np.einsum("sa,sb->sab", spinor(t1, f1), spinor(t2, f2)).reshape(-1, 4)
    down = np.einsum("sa,sb->sab", antispinor(t1, f1), antispinor(t2, f2)).reshape(-1, 4)
    return (np.cos(eta / 2)[:, None] * up
            + (np.sin(eta / 2) * np.exp(1j * gamma))[:, None] * down)


def sample_preimage(target, h: float, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """FS-uniform draws from the preimage of ``target`` for weights ``((1-h)/2, (1+h)/2)``."""
    t, radius = _check_target(target, h)
    n = 1 if size is None else size
    kf = kappa_max(radius, h)
    q = rng.uniform(0.0, 1.0, n)
    v = rng.uniform(0.0, 2 * np.pi, n)
    gamma = rng.uniform(0.0, 2 * np.pi, n)
    kappa = 1.0 + q * (kf - 1.0)
    # at h = 1 the kappa interval collapses and cos u becomes uniform
    cos_u = 1.0 - 2.0 * q if h == 1.0 else None
    out = preimage_states(t, h, kappa, v, gamma, cos_u=cos_u)
    return out[0] if size is None else out


def sample_preimage_separable(target, h: float, rng: np.random.Generator,
                              size: int | None = None) -> np.ndarray:
    """Uniform draws from the product-state preimage (exists only for ``|target| >= h``)."""
    t, radius = _check_target(target, h)
    if h >= 1:
        raise ValueError("separable preimages need h < 1")
    if radius < h:
        raise EmptyPreimageError(f"no product state maps to radius {radius!r} < h = {h!r}")
    n = 1 if size is None else size
    v = rng.uniform(0.0, 2 * np.pi, n)
    cos_u = np.full(n, (1 + h**2 - 2 * h**2 / radius**2) / (1 - h**2))
    out = preimage_states(t, h, np.full(n, 1.0 / radius), v, np.zeros(n), cos_u=cos_u)
    return out[0] if size is None else out
