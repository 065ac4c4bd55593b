"""Monte-Carlo statistics of coarse-grained radii and inference of the CG weight.

Pipeline: Haar states -> CG map -> Bloch radii -> shell histogram
(``EmpiricalPDF``) -> least-squares fit of ``p`` against the two-qubit law.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import optimize, stats

from .channel import cg_bloch_batch, prob_vector, probs_from_h
from .laws import pdf_p2
from .sampling import make_rng, sample_haar_states, sample_product_states

P_MIN = 1e-3
P_MAX = 0.5


def _split(n: int, parts: int) -> list[int]:
    sizes = [n // parts] * parts
    for i in range(n % parts):
        sizes[i] += 1
    return sizes


def pushforward_radii(n_qubits: int, p, n: int, seed: int = 0, streams: int = 1,
                      workers: int = 1, chunk: int = 50_000, product: bool = False) -> np.ndarray:
    """Bloch radii of ``C[psi]`` for ``n`` random kets.

    Kets are Haar-random, or uniform product states when ``product`` is set
    (two qubits only).  Stream ``s`` draws its share from substream ``s`` of
    ``seed``; output order is fixed by stream index, independent of
    ``workers``.
    """
    p = prob_vector(p, canonical=False)
    if p.size != n_qubits:
        raise ValueError(f"{p.size} weights for {n_qubits} qubits")
    if product and n_qubits != 2:
        raise ValueError("product-state pushforward is implemented for two qubits")
    if n < 1 or streams < 1:
        raise ValueError("n and streams must be positive")

    def run(stream: int, size: int) -> np.ndarray:
        rng = make_rng(seed, stream)
        out = []
        while size > 0:
            k = min(size, chunk)
            kets = sample_product_states(k, rng) if product else sample_haar_states(n_qubits, k, rng)
            out.append(np.linalg.norm(cg_bloch_batch(kets, p), axis=1))
            size -= k
        return np.concatenate(out) if out else np.empty(0)

    sizes = _split(n, streams)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(streams), sizes))
    else:
        parts = [run(s, m) for s, m in enumerate(sizes)]
    return np.clip(np.concatenate(parts), 0.0, 1.0)


def estimate_shell_volume(samples, r_ts: float, eps: float) -> float:
    """Fraction of radii in the shell ``|r - r_ts| <= eps/2``."""
    r = np.asarray(samples, dtype=float)
    if r.size == 0:
        raise ValueError("no samples")
    if eps <= 0:
        raise ValueError("eps must be positive")
    return float(np.mean(np.abs(r - r_ts) <= eps / 2))


def shell_volume(lo: float, hi: float) -> float:
    """Euclidean volume between spheres of radius ``lo`` and ``hi`` (clipped to the ball)."""
    lo, hi = max(lo, 0.0), min(hi, 1.0)
    return 4 * math.pi / 3 * (hi**3 - lo**3) if hi > lo else 0.0


def shell_volume_linear(r: float, eps: float) -> float:
    """Leading-order shell volume ``4 pi r^2 eps``."""
    return 4 * math.pi * r**2 * eps


@dataclass
class EmpiricalPDF:
    bin_edges: np.ndarray
    counts: np.ndarray
    n_total: int
    density: np.ndarray
    centers: np.ndarray = field(repr=False)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.bin_edges)

    def mass(self) -> float:
        return float(np.sum(self.density * self.widths))

    def records(self) -> list[dict]:
        return [
            {"r_lo": float(a), "r_hi": float(b), "r_center": float(c), "count": int(k), "density": float(d)}
            for a, b, c, k, d in zip(self.bin_edges[:-1], self.bin_edges[1:], self.centers,
                                     self.counts, self.density)
        ]


def shell_edges(eps: float) -> np.ndarray:
    """Edges ``0, eps, 2 eps, ...`` covering ``[0, 1]``, the last one clipped to 1."""
    if not 0 < eps <= 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps!r}")
    nbins = max(1, math.ceil(1.0 / eps - 1e-9))
    return np.minimum(np.arange(nbins + 1) * eps, 1.0)


def empirical_radial_pdf(samples, eps: float, shell: str = "exact") -> EmpiricalPDF:
    """Shell histogram of radii normalized as a radial density.

    Each bin gives ``(fraction / V_shell) * 4 pi r_c^2``.  ``shell="exact"``
    uses the true spherical-shell volume; ``shell="linear"`` uses
    ``4 pi r_c^2 eps``, which reduces to ``fraction / eps``.
    """
    r = np.asarray(samples, dtype=float)
    if r.size == 0:
        raise ValueError("no samples")
    edges = shell_edges(eps)
    if np.any(np.diff(edges) <= 0):
        raise ValueError("degenerate bins")
    counts, _ = np.histogram(np.clip(r, 0.0, 1.0), bins=edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    frac = counts / r.size
    if shell == "exact":
        vols = np.array([shell_volume(a, b) for a, b in zip(edges[:-1], edges[1:])])
    elif shell == "linear":
        vols = np.array([shell_volume_linear(c, b - a) for a, b, c in zip(edges[:-1], edges[1:], centers)])
    else:
        raise ValueError(f"unknown shell convention {shell!r}")
    density = frac / vols * 4 * math.pi * centers**2
    return EmpiricalPDF(edges, counts, int(r.size), density, centers)


def radial_model(p: float, r, model: str = "P2"):
    """Two-qubit radius density as a function of the smaller weight ``p``.

    At ``p = 1/2`` (``h = 0``) the limiting law ``6 r (1 - r)`` is used.
    """
    h = 1.0 - 2.0 * p
    if model not in ("P2", "PN"):
        raise ValueError(f"unknown model {model!r}")
    if h <= 0:
        r = np.asarray(r, dtype=float)
        return np.where((r >= 0) & (r <= 1), 6 * r * (1 - r), 0.0)
    if model == "PN":
        from .laws import pdf_pn
        return pdf_pn((p, 1 - p), r)
    return pdf_p2(h, r)


@dataclass
class FitResult:
    p_fit: float
    residual_sum: float
    eps_used: float
    n_used: int
    seed: int | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _objective(emp: EmpiricalPDF, model: str):
    return lambda p: float(np.sum((emp.density - radial_model(p, emp.centers, model)) ** 2))


def fit_p(samples, eps: float, model: str = "P2", seed: int | None = None,
          scan_points: int = 200, shell: str = "exact") -> FitResult:
    """Least-squares estimate of the smaller CG weight from CG radii.

    A uniform scan over ``[P_MIN, 1/2]`` picks the best grid point; bounded
    Brent minimization inside the neighbouring grid cells refines it and is
    kept only if it improves on the scan.
    """
    emp = empirical_radial_pdf(samples, eps, shell=shell)
    obj = _objective(emp, model)
    hi = P_MAX if model == "P2" else P_MAX - 1e-6
    grid = np.linspace(P_MIN, hi, scan_points)
    vals = np.array([obj(p) for p in grid])
    k = int(np.argmin(vals))
    best_p, best_v = float(grid[k]), float(vals[k])
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    try:
        res = optimize.minimize_scalar(obj, bounds=(a, b), method="bounded",
                                       options={"xatol": 1e-10})
        if res.success and res.fun <= best_v:
            best_p, best_v = float(res.x), float(res.fun)
    except (ValueError, FloatingPointError):
        pass
    return FitResult(best_p, best_v, float(eps), int(emp.n_total), seed)


def fit_stderr(samples, eps: float, p_fit: float, model: str = "P2", shell: str = "exact") -> float:
    """Asymptotic least-squares standard error of ``p_fit``."""
    emp = empirical_radial_pdf(samples, eps, shell=shell)
    d = 1e-6
    lo, hi = max(p_fit - d, P_MIN), min(p_fit + d, P_MAX)
    jac = (radial_model(hi, emp.centers, model) - radial_model(lo, emp.centers, model)) / (hi - lo)
    resid = emp.density - radial_model(p_fit, emp.centers, model)
    dof = max(len(resid) - 1, 1)
    return float(math.sqrt(np.sum(resid**2) / dof / np.sum(jac**2)))


def sweep_eps(p_test: float, n: int, eps_grid, seed: int = 0, streams: int = 1,
              model: str = "P2", samples=None) -> tuple[list[dict], float]:
    """Fit ``p`` for every ``eps`` on one shared sample set.

    Returns the table rows and the ``eps`` minimizing ``|p_fit - p_test|``.
    """
    eps_grid = [float(e) for e in eps_grid]
    if not eps_grid:
        raise ValueError("empty eps grid")
    if any(not 0 < e < 1 for e in eps_grid):
        raise ValueError("every eps must lie in (0, 1)")
    if samples is None:
        samples = pushforward_radii(2, (p_test, 1 - p_test), n, seed=seed, streams=streams)
    rows = []
    for e in eps_grid:
        fr = fit_p(samples, e, model=model, seed=seed)
        rows.append({"eps": e, "p_fit": fr.p_fit, "abs_error": abs(fr.p_fit - p_test),
                     "residual_sum": fr.residual_sum})
    best = min(rows, key=lambda row: row["abs_error"])["eps"]
    for row in rows:
        row["best"] = row["eps"] == best
    return rows, best


def sample_p2_radii(h: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Inverse-CDF draws from the two-qubit radius law (no quantum states involved)."""
    if not 0 < h < 1:
        raise ValueError("h must lie in (0, 1)")
    u = rng.uniform(0.0, 1.0, n)
    f_h = 2 * h**2 / (1 + h)
    out = np.empty(n)
    low = u < f_h
    out[low] = np.cbrt(u[low] * h * (1 + h) / 2)
    g = lambda x: x**2 / 2 - x**3 / 3
    target = g(h) + (u[~low] - f_h) * (1 - h**2) / 6
    a = np.full(target.shape, h)
    b = np.ones(target.shape)
    for _ in range(60):
        mid = 0.5 * (a + b)
        below = g(mid) < target
        a = np.where(below, mid, a)
        b = np.where(below, b, mid)
    out[~low] = 0.5 * (a + b)
    return out


def ks_check(samples, cdf, alpha: float = 0.01) -> dict:
    """Kolmogorov-Smirnov distance against ``cdf`` and the critical value at ``alpha``."""
    samples = np.asarray(samples, dtype=float)
    res = stats.kstest(samples, cdf)
    crit = float(stats.kstwo.ppf(1 - alpha, samples.size))
    return {"statistic": float(res.statistic), "critical": crit, "pvalue": float(res.pvalue),
            "passed": bool(res.statistic < crit), "n": int(samples.size)}


def two_qubit_probs(p_small: float) -> np.ndarray:
    return probs_from_h(1.0 - 2.0 * p_small)
