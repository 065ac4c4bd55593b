"""Closed-form laws of the coarse-grained radius and their geometric oracles.

Radial densities are densities of the Bloch radius ``r`` of the
coarse-grained state on ``[0, 1]``, already integrated over directions.
Step functions follow ``Theta(0) = 1``.
"""
from __future__ import annotations

import math
from itertools import product
from typing import Callable

import numpy as np
from scipy import integrate

from .channel import prob_vector


class DegenerateProbabilities(ValueError):
    """Two CG weights coincide; the general-N closed form has a pole there.

    Use a Monte-Carlo estimate (``cglab.mc.pushforward_radii``) instead.
    """


def _check_h(h: float, allow_one: bool = True) -> float:
    h = float(h)
    if not (0.0 < h < 1.0 or (allow_one and h == 1.0)):
        raise ValueError(f"h must lie in (0, 1{']' if allow_one else ')'}, got {h!r}")
    return h


def pdf_p2(h: float, r):
    """Density of the CG radius for Haar two-qubit states.

    ``6 r^2 / (h (1+h))`` below ``h`` and ``6 r (1-r) / (1-h^2)`` above.
    """
    h = _check_h(h)
    r = np.asarray(r, dtype=float)
    inside = 6.0 * r**2 / (h * (1 + h))
    if h == 1.0:
        out = np.where(r < 1.0, inside, 0.0)
    else:
        out = np.where(r < h, inside, 6.0 * r * (1 - r) / (1 - h**2))
    out = np.where((r < 0) | (r > 1), 0.0, out)
    return float(out) if out.ndim == 0 else out


def cdf_p2(h: float, r):
    h = _check_h(h)
    r = np.clip(np.asarray(r, dtype=float), 0.0, 1.0)
    inside = 2.0 * r**3 / (h * (1 + h))
    if h == 1.0:
        out = inside
    else:
        g = lambda x: x**2 / 2 - x**3 / 3
        out = np.where(r < h, inside, 2 * h**2 / (1 + h) + 6.0 * (g(r) - g(h)) / (1 - h**2))
    return float(out) if out.ndim == 0 else out


def pdf_p2_separable(h: float, r):
    """Radius density when both qubits are independent uniform pure states."""
    h = _check_h(h, allow_one=False)
    r = np.asarray(r, dtype=float)
    out = np.where((r >= h) & (r <= 1), 2.0 * r / (1 - h**2), 0.0)
    return float(out) if out.ndim == 0 else out


def cdf_p2_separable(h: float, r):
    h = _check_h(h, allow_one=False)
    r = np.clip(np.asarray(r, dtype=float), 0.0, 1.0)
    out = np.where(r < h, 0.0, (r**2 - h**2) / (1 - h**2))
    return float(out) if out.ndim == 0 else out


def preimage_volume(h: float, r_ts: float, v_eps: float, separable: bool = False) -> float:
    """FS volume of the preimage of a small neighborhood of Euclidean volume ``v_eps``.

    First order in ``v_eps``; the expansion fails near the origin as ``h -> 0``,
    where :func:`origin_volume` gives the finite answer.
    """
    if not 0 < h <= 1:
        raise ValueError(f"h must lie in (0, 1]; use origin_volume near h = 0 (got {h!r})")
    if not 0 <= r_ts <= 1:
        raise ValueError(f"r_ts must lie in [0, 1], got {r_ts!r}")
    if v_eps <= 0:
        raise ValueError("v_eps must be positive")
    if separable:
        if h >= 1:
            raise ValueError("separable preimage volume needs h < 1")
        if r_ts < h:
            return 0.0
        return v_eps / (2 * math.pi * (1 - h**2) * r_ts)
    if r_ts < h:
        return 3 * v_eps / (2 * math.pi * (1 + h) * h)
    if r_ts == 1.0:
        return 0.0
    return 3 * v_eps * (1 - r_ts) / (2 * math.pi * (1 + h) * (1 - h) * r_ts)


def origin_volume(h: float, eps: float) -> float:
    """Exact preimage volume of the ball of radius ``eps`` about the origin, ``h < eps``."""
    if not 0 <= h < eps:
        raise ValueError(f"origin_volume needs 0 <= h < eps, got h={h!r}, eps={eps!r}")
    if eps > 1:
        raise ValueError("eps must not exceed 1")
    return (eps**2 * (3 - 2 * eps) - h**2) / (1 - h**2)


def _pos_sq(x):
    return np.where(x >= 0, x * x, 0.0)


def psi_diagonal(rho00, p1: float):
    """Density of the diagonal entry ``rho_00`` of the CG state for Haar two-qubit states.

    Piecewise quadratic.  The divided difference of the two clipped squares
    is evaluated branch by branch, so ``p1 -> 1/2`` needs no special casing.
    """
    p1 = float(p1)
    if not 0.0 < p1 < 1.0:
        raise ValueError(f"p1 must lie in (0, 1), got {p1!r}")
    p2 = 1.0 - p1
    a = np.asarray(rho00, dtype=float)
    lo, hi = min(p1, p2), max(p1, p2)
    # ((p1 - a)_+^2 - (p2 - a)_+^2) / (p2 - p1), symmetric in p1 <-> p2
    if hi - lo > 0:
        mid = -_pos_sq(hi - a) / (hi - lo)
    else:
        mid = np.zeros_like(a)
    diff = np.where(a <= lo, -(lo + hi - 2 * a), np.where(a < hi, mid, 0.0))
    out = 3.0 / (p1 * p2) * ((1 - a) ** 2 + diff)
    out = np.where((a < 0) | (a > 1), 0.0, out)
    return float(out) if out.ndim == 0 else out


def psi_diagonal_derivative(rho00, p1: float):
    """Analytic ``d psi_diagonal / d rho00``."""
    p1 = float(p1)
    p2 = 1.0 - p1
    a = np.asarray(rho00, dtype=float)
    lo, hi = min(p1, p2), max(p1, p2)
    mid = 2 * (hi - a) / (hi - lo) if hi > lo else np.zeros_like(a)
    ddiff = np.where(a <= lo, 2.0, np.where(a < hi, mid, 0.0))
    out = 3.0 / (p1 * p2) * (-2 * (1 - a) + ddiff)
    return float(out) if out.ndim == 0 else out


def derivative_principle_pdf(psi_fn: Callable, r, step: float | None = None):
    """Radius density ``-r d/dr [psi((1 + r)/2)]`` from a diagonal-entry density.

    ``psi_fn`` maps ``rho00`` to a density.  The derivative is a central
    difference of width ``step`` (default ``1e-6``); at a kink the result is
    the average of the one-sided slopes.  Near ``r = 0`` and ``r = 1`` a
    second-order one-sided stencil keeps the evaluation inside the support.
    """
    r = np.asarray(r, dtype=float)
    s = 1e-6 if step is None else step
    f = lambda x: np.asarray(psi_fn(0.5 * (1 + x)), dtype=float)
    central = (f(r + s) - f(r - s)) / (2 * s)
    backward = (3 * f(r) - 4 * f(r - s) + f(r - 2 * s)) / (2 * s)
    forward = (-3 * f(r) + 4 * f(r + s) - f(r + 2 * s)) / (2 * s)
    d = np.where(r + s > 1, backward, np.where(r - s < 0, forward, central))
    out = -r * d
    return float(out) if out.ndim == 0 else out


def derivative_principle_exact(p1: float, r):
    """:func:`derivative_principle_pdf` of :func:`psi_diagonal` with the analytic slope."""
    r = np.asarray(r, dtype=float)
    out = -0.5 * r * psi_diagonal_derivative(0.5 * (1 + r), p1)
    return float(out) if out.ndim == 0 else out


def _pn_terms(p):
    """Breakpoints ``s_l`` and weights ``w_l`` of the general-N density.

    ``P_N(r) = c_N r sum_l w_l (s_l - r)^(2^N - 3) Theta(s_l - r)``.
    """
    p = prob_vector(p, canonical=False)
    n = p.size
    if n < 2:
        raise ValueError("the general-N law needs N >= 2")
    sp = np.sort(p)
    if np.min(np.diff(sp)) < 1e-9:
        raise DegenerateProbabilities(
            f"probabilities {p.tolist()} contain (near-)equal entries; the closed form has a pole"
        )
    ls = [np.array(l) for l in product((0, 1), repeat=n) if any(l)]
    s, w = [], []
    for l in ls:
        pt = (2 * l - 1) * p
        denom = 1.0
        for lp in ls:
            denom *= float(lp @ pt)
        s.append(float(pt.sum()))
        w.append(1.0 / denom)
    k = 2**n - 3
    c = (2**n - 1) * (2**n - 2) / 2.0 ** (2**n - 2)
    return np.array(s), np.array(w), k, c


def pdf_pn(p, r):
    """Radius density of the CG state of a Haar N-qubit state (pairwise distinct weights)."""
    s, w, k, c = _pn_terms(p)
    r = np.asarray(r, dtype=float)
    x = s[:, None] - r.reshape(-1)[None, :]
    terms = np.where(x >= 0, x**k, 0.0) * w[:, None]
    out = c * r.reshape(-1) * terms.sum(axis=0)
    out = np.where((r.reshape(-1) < 0) | (r.reshape(-1) > 1), 0.0, out)
    out = np.maximum(out, 0.0).reshape(r.shape)
    return float(out) if out.ndim == 0 else out


def cdf_pn(p, r):
    """Closed-form integral of :func:`pdf_pn` from 0 to ``r``."""
    s, w, k, c = _pn_terms(p)
    r = np.clip(np.asarray(r, dtype=float), 0.0, 1.0)
    x = np.minimum(r.reshape(-1)[None, :], np.maximum(s, 0.0)[:, None])
    sc = s[:, None]

    def anti(y):
        # antiderivative of y (s - y)^k in y
        return -y * (sc - y) ** (k + 1) / (k + 1) - (sc - y) ** (k + 2) / ((k + 1) * (k + 2))

    vals = np.where(sc > 0, anti(x) - anti(np.zeros_like(x)), 0.0)
    out = (c * (w[:, None] * vals).sum(axis=0)).reshape(r.shape)
    return float(out) if out.ndim == 0 else out


def pn_breakpoints(p) -> list[float]:
    s = _pn_terms(p)[0]
    return sorted(float(x) for x in s if 0 < x < 1)


def integrate_law(fn: Callable, breakpoints=(), lo: float = 0.0, hi: float = 1.0,
                  moment: int = 0) -> float:
    """Adaptive Gauss-Kronrod integral of ``r**moment * fn(r)`` split at kinks."""
    pts = sorted({lo, hi, *[b for b in breakpoints if lo < b < hi]})
    total = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        val, _ = integrate.quad(lambda x: x**moment * float(fn(x)), a, b,
                                epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val
    return total


# --- simplex-slice geometry -------------------------------------------------

SIMPLEX_VERTICES = 0.5 * np.array(
    [[1.0, 1.0, 1.0], [-1.0, -1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0]]
)


def plane_polytope_section(vertices, normal, offset, tol: float = 1e-14) -> np.ndarray:
    """Ordered vertices of ``{y : normal . y = offset}`` cut through a convex hull.

    Works edge by edge over all vertex pairs, which is exact for a simplex
    (every pair is an edge).  Returns an ``(k, 3)`` array, empty if no cut.
    """
    vertices = np.asarray(vertices, dtype=float)
    normal = np.asarray(normal, dtype=float)
    d = vertices @ normal - offset
    pts = []
    nv = len(vertices)
    for i in range(nv):
        if abs(d[i]) <= tol:
            pts.append(vertices[i])
        for j in range(i + 1, nv):
            if (d[i] < -tol and d[j] > tol) or (d[i] > tol and d[j] < -tol):
                t = d[i] / (d[i] - d[j])
                pts.append(vertices[i] + t * (vertices[j] - vertices[i]))
    if len(pts) < 3:
        return np.empty((0, 3))
    pts = np.unique(np.round(np.array(pts), 15), axis=0)
    if len(pts) < 3:
        return np.empty((0, 3))
    center = pts.mean(axis=0)
    nhat = normal / np.linalg.norm(normal)
    e1 = pts[0] - center
    e1 -= (e1 @ nhat) * nhat
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(nhat, e1)
    ang = np.arctan2((pts - center) @ e2, (pts - center) @ e1)
    return pts[np.argsort(ang)]


def polygon_area(poly) -> float:
    """Area of a planar polygon in 3-space with ordered vertices."""
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 3:
        return 0.0
    acc = np.zeros(3)
    for i in range(len(poly)):
        acc += np.cross(poly[i], poly[(i + 1) % len(poly)])
    return 0.5 * float(np.linalg.norm(acc))


def simplex_slice_area(p1: float, a: float) -> float:
    """Area of the slice of the tetrahedron of diagonal weights at ``rho00 = a``.

    In rotated coordinates the squared moduli of a two-qubit state fill a
    regular tetrahedron and ``rho00`` is the linear functional
    ``(p2, 0, p1) . y + 1/2``, so the density of ``rho00`` is proportional to
    this area.
    """
    if not 0 <= a <= 1:
        return 0.0
    p2 = 1.0 - p1
    poly = plane_polytope_section(SIMPLEX_VERTICES, np.array([p2, 0.0, p1]), a - 0.5)
    return polygon_area(poly)
