"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the criterion lines are
printed even without ``-s``.
"""
import time

import numpy as np
import pytest

from cglab.avgstate import avg_state_coeffs, avg_state_diagnostics, avg_state_mc
from cglab.channel import apply_cg, check_covariance, probs_from_h
from cglab.laws import (
    cdf_p2,
    cdf_pn,
    derivative_principle_pdf,
    integrate_law,
    pdf_p2,
    pdf_p2_separable,
    pdf_pn,
    pn_breakpoints,
    psi_diagonal,
    simplex_slice_area,
)
from cglab.mc import empirical_radial_pdf, fit_p, ks_check, pushforward_radii, sweep_eps
from cglab.sampling import make_rng, sample_haar_states, sample_preimage
from cglab.states import bloch_vector, haar_unitary, purity, reduced_state

PROB_VECTORS = {
    2: (0.4, 0.6),
    3: (0.4, 0.35, 0.25),
    4: (0.4, 0.35, 0.15, 0.1),
    5: (0.4, 0.35, 0.15, 0.08, 0.02),
}


@pytest.fixture
def report(capsys):
    def _report(number, title, passed, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if passed else 'FAIL'}] criterion {number}: {title} -- {detail}")
        return passed
    return _report


def test_criterion_01_normalization(report):
    t0 = time.perf_counter()
    errs = {}
    for h in (0.1, 0.2, 0.5, 0.9, 1.0):
        errs[f"P2(h={h})"] = abs(integrate_law(lambda r: pdf_p2(h, r), [h]) - 1)
    for h in (0.1, 0.2, 0.5, 0.9):
        errs[f"P2sep(h={h})"] = abs(integrate_law(lambda r: pdf_p2_separable(h, r), [h]) - 1)
    for n, p in PROB_VECTORS.items():
        errs[f"PN(N={n})"] = abs(integrate_law(lambda r: pdf_pn(p, r), pn_breakpoints(p)) - 1)
    elapsed = time.perf_counter() - t0
    worst = max(errs.values())
    ok = worst <= 1e-8 and elapsed < 10
    report(1, "normalization", ok, f"max |mass-1| = {worst:.2e} (tol 1e-8), {elapsed:.2f} s (< 10 s)")
    assert ok


def test_criterion_02_general_law_reduces_to_two_qubit_law(report):
    r = np.linspace(0, 1, 1000)
    err = float(np.max(np.abs(pdf_pn((0.4, 0.6), r) - pdf_p2(0.2, r))))
    ok = err <= 1e-9
    report(2, "P_N(N=2) = P_2", ok, f"max diff {err:.2e} on 1000 points (tol 1e-9)")
    assert ok


def test_criterion_03_derivative_principle(report):
    r = np.linspace(0, 1, 1001)
    worst = 0.0
    for p1 in (0.05, 0.2, 0.3, 0.4, 0.45):
        h = 1 - 2 * p1
        far = np.abs(r - h) > 1e-4
        d = derivative_principle_pdf(lambda a: psi_diagonal(a, p1), r[far])
        worst = max(worst, float(np.max(np.abs(d - pdf_p2(h, r[far])))))
    ok = worst <= 1e-9
    report(3, "derivative principle", ok, f"max diff {worst:.2e} away from the kink (tol 1e-9)")
    assert ok


def test_criterion_04_simplex_slice_oracle(report):
    p1 = 0.3
    a = np.linspace(0.01, 0.99, 50)
    area = np.array([simplex_slice_area(p1, x) for x in a])
    psi = psi_diagonal(a, p1)
    scale = float(area @ psi / (psi @ psi))
    err = float(np.max(np.abs(area - scale * psi)))
    ok = err <= 1e-8
    report(4, "slice area proportional to Psi", ok, f"max residual {err:.2e} after scale {scale:.6f} (tol 1e-8)")
    assert ok


def test_criterion_05_two_qubit_pushforward(report):
    t0 = time.perf_counter()
    details, ok = [], True
    for h in (0.2, 0.4, 0.6):
        radii = pushforward_radii(2, probs_from_h(h), 10_000, seed=2024)
        ks = ks_check(radii, lambda x: cdf_p2(h, x), alpha=0.01)
        emp = empirical_radial_pdf(radii, 0.04)
        dev = float(np.max(np.abs(emp.density - pdf_p2(h, emp.centers))))
        ok &= ks["passed"]
        details.append(f"h={h}: D={ks['statistic']:.4f}<{ks['critical']:.4f} "
                       f"(eps=0.04 max density dev {dev:.3f})")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    report(5, "two-qubit pushforward KS", ok, "; ".join(details) + f"; {elapsed:.2f} s (< 30 s)")
    assert ok


def test_criterion_06_general_n_pushforward(report):
    t0 = time.perf_counter()
    details, ok = [], True
    for n in (3, 4, 5):
        p = PROB_VECTORS[n]
        radii = pushforward_radii(n, p, 10_000, seed=2024)
        ks = ks_check(radii, lambda x: cdf_pn(p, x), alpha=0.01)
        ok &= ks["passed"]
        details.append(f"N={n}: D={ks['statistic']:.4f}<{ks['critical']:.4f}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120
    report(6, "general-N pushforward KS", ok, "; ".join(details) + f"; {elapsed:.2f} s (< 120 s)")
    assert ok


def test_criterion_07_preimage_exactness(report):
    rng = make_rng(77)
    worst, count = 0.0, 0
    for _ in range(1000):
        v = rng.standard_normal(3)
        target = v / np.linalg.norm(v) * rng.uniform() ** (1 / 3)
        h = rng.uniform(0.01, 1.0)
        p = probs_from_h(h)
        for psi in sample_preimage(target, h, rng, size=10):
            worst = max(worst, float(np.max(np.abs(bloch_vector(apply_cg(psi, p)) - target))))
            count += 1
    ok = count == 10_000 and worst <= 1e-10
    report(7, "preimage sampler exactness", ok, f"{count} samples, max |C[psi] - target| = {worst:.2e} (tol 1e-10)")
    assert ok


FULL_POINTS = [(0.2, 0.1), (0.5, 0.3), (0.8, 0.5), (0.2, 0.6), (0.5, 0.8), (0.8, 0.95)]
SEP_POINTS = [(0.2, 0.3), (0.2, 0.9), (0.5, 0.6), (0.5, 0.9), (0.8, 0.85), (0.8, 0.95)]


def test_criterion_08_average_state(report):
    details, ok = [], True
    worst_ratio = 0.0
    for ensemble, points in (("full", FULL_POINTS), ("separable", SEP_POINTS)):
        for k, (h, r) in enumerate(points):
            mc = avg_state_mc([0, 0, r], h, ensemble, n=1_000_000, seed=800 + k)
            dist = float(np.linalg.norm(mc.mean - avg_state_coeffs(h, r, ensemble).matrix()))
            ratio = dist / mc.frobenius_stderr
            worst_ratio = max(worst_ratio, ratio)
            ok &= ratio <= 3
    details.append(f"12 points, max distance/SE = {worst_ratio:.2f} (tol 3)")

    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    werner_err, werner_ratio = 0.0, 0.0
    for h in (0.2, 0.5, 0.8):
        alpha = (1 - h) / (3 * (1 + h))
        w = alpha * np.outer(singlet, singlet) + (1 - alpha) * np.eye(4) / 4
        werner_err = max(werner_err, float(np.max(np.abs(avg_state_coeffs(h, 0.0).matrix() - w))))
        mc = avg_state_mc([0, 0, 0], h, n=1_000_000, seed=900)
        werner_ratio = max(werner_ratio, float(np.linalg.norm(mc.mean - w)) / mc.frobenius_stderr)
    ok &= werner_err <= 1e-12 and werner_ratio <= 3
    details.append(f"Werner: closed form err {werner_err:.1e}, MC distance/SE {werner_ratio:.2f}")

    ket10 = np.zeros((4, 4)); ket10[2, 2] = 1
    ket00 = np.zeros((4, 4)); ket00[0, 0] = 1
    special = 0.0
    for h in (0.2, 0.5, 0.8):
        special = max(special,
                      float(np.max(np.abs(avg_state_coeffs(h, h, "separable").matrix() - ket10))),
                      float(np.max(np.abs(avg_state_coeffs(h, 1.0, "full").matrix() - ket00))),
                      float(np.max(np.abs(avg_state_coeffs(h, 1.0, "separable").matrix() - ket00))))
    ok &= special <= 1e-10
    details.append(f"|1,0>/|0,0> special points err {special:.1e} (tol 1e-10)")
    report(8, "average state", ok, "; ".join(details))
    assert ok


def test_criterion_09_fit_reproduction(report):
    t0 = time.perf_counter()
    seeds = range(10)
    fits_04, fits_3, bests = [], [], []
    for s in seeds:
        radii = pushforward_radii(2, (0.26, 0.74), 10_000, seed=s)
        rows, best = sweep_eps(0.26, 10_000, [0.001, 0.04, 0.3], seed=s, samples=radii)
        by_eps = {row["eps"]: row["p_fit"] for row in rows}
        fits_04.append(by_eps[0.04])
        fits_3.append(by_eps[0.3])
        bests.append(best)
    elapsed = time.perf_counter() - t0
    a = all(abs(p - 0.26) <= 0.01 for p in fits_04)
    b = all(p > 0.45 for p in fits_3)
    c = all(e == 0.04 for e in bests)
    ok = a and b and c and elapsed < 60
    detail = (f"(a) eps=0.04 p_fit in [{min(fits_04):.4f}, {max(fits_04):.4f}] -> {'ok' if a else 'FAIL'}; "
              f"(b) eps=0.3 p_fit in [{min(fits_3):.4f}, {max(fits_3):.4f}], need > 0.45 -> {'ok' if b else 'FAIL'}; "
              f"(c) sweep picks 0.04 on {sum(e == 0.04 for e in bests)}/10 seeds -> {'ok' if c else 'FAIL'}; "
              f"{elapsed:.2f} s (< 60 s)")
    report(9, "fit reproduction", ok, detail)
    assert ok


def test_criterion_10_property_suites(report):
    rng = make_rng(1010)
    cov = 0.0
    for k in range(100):
        n = 2 + k % 3
        p = rng.dirichlet(np.ones(n))
        psi = sample_haar_states(n, 1, rng)[0]
        cov = max(cov, check_covariance(psi, p, haar_unitary(2, rng)))
    purity_gap = 0.0
    for psi in sample_haar_states(2, 1000, rng):
        purity_gap = max(purity_gap, abs(purity(reduced_state(psi, [0])) - purity(reduced_state(psi, [1]))))
    slack_full, slack_sep = np.inf, np.inf
    for h in np.linspace(0.01, 0.99, 99):
        for r in np.linspace(0, 1, 201):
            d = avg_state_diagnostics(avg_state_coeffs(h, r).matrix(), r)
            slack_full = min(slack_full, d["coherence_bound_full"] - d["coherence_23_abs"])
            if r >= h:
                d = avg_state_diagnostics(avg_state_coeffs(h, r, "separable").matrix(), r)
                slack_sep = min(slack_sep, d["coherence_bound_separable"] - d["coherence_23_abs"])
    ok = cov <= 1e-10 and purity_gap <= 1e-12 and slack_full >= -1e-14 and slack_sep >= -1e-14
    report(10, "property suites", ok,
           f"covariance {cov:.1e} (tol 1e-10); purity gap {purity_gap:.1e}; "
           f"coherence slack full {slack_full:.1e}, separable {slack_sep:.1e} (>= 0)")
    assert ok
