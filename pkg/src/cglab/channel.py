"""Fuzzy measurement and coarse-graining maps.

A coarse-graining (CG) map mixes single-particle marginals,
``C[|psi><psi|] = sum_i p_i rho_i``; the general version keeps m qubits and
mixes all m-qubit marginals.  Weights are plain numpy vectors.
"""
from __future__ import annotations

from itertools import combinations, permutations
from typing import Iterable, Sequence

import numpy as np

from .states import (
    PAULI,
    as_ket,
    kron,
    num_qubits,
    partial_trace,
    reduced_state,
)

PROB_TOL = 1e-12
UNITARY_TOL = 1e-12


def prob_vector(p, canonical: bool = True) -> np.ndarray:
    """Validate CG weights.

    For two particles the weights are returned sorted so that ``p1 <= p2``;
    every two-qubit law depends on ``h = p2 - p1`` only.
    """
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size < 1:
        raise ValueError("probability vector is empty")
    if np.any(p < 0):
        raise ValueError(f"probabilities must be non-negative, got {p.tolist()}")
    if abs(p.sum() - 1.0) > PROB_TOL * max(1, p.size):
        raise ValueError(f"probabilities must sum to 1, got {p.sum()!r}")
    if canonical and p.size == 2 and p[0] > p[1]:
        p = p[::-1].copy()
    return p


def asymmetry(p) -> float:
    """``h = |p2 - p1|`` for a two-particle detector."""
    p = prob_vector(p)
    if p.size != 2:
        raise ValueError("h is only defined for N = 2")
    return float(p[1] - p[0])


def probs_from_h(h: float) -> np.ndarray:
    if not 0.0 <= h <= 1.0:
        raise ValueError(f"h must lie in [0, 1], got {h!r}")
    return np.array([(1 - h) / 2, (1 + h) / 2])


def permutation_mixture(terms) -> list[tuple[tuple[int, ...], float]]:
    """Validate ``[(permutation, weight), ...]`` with weights summing to one."""
    out = []
    n = None
    for perm, w in terms:
        perm = tuple(int(k) for k in perm)
        if sorted(perm) != list(range(len(perm))):
            raise ValueError(f"{perm} is not a permutation of 0..{len(perm) - 1}")
        if n is None:
            n = len(perm)
        elif len(perm) != n:
            raise ValueError("all permutations must act on the same number of qubits")
        if w < 0:
            raise ValueError("mixture weights must be non-negative")
        out.append((perm, float(w)))
    if not out:
        raise ValueError("empty permutation mixture")
    total = sum(w for _, w in out)
    if abs(total - 1.0) > PROB_TOL * len(out):
        raise ValueError(f"mixture weights sum to {total!r}, expected 1")
    return out


def permute_qubits(rho, perm: Sequence[int]) -> np.ndarray:
    """``P rho P^dagger`` where output qubit k carries input qubit ``perm[k]``."""
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho.shape[0])
    perm = list(perm)
    if len(perm) != n:
        raise ValueError(f"permutation of length {len(perm)} for {n} qubits")
    t = rho.reshape([2] * (2 * n)).transpose(perm + [n + k for k in perm])
    return t.reshape(2**n, 2**n)


def fuzzy_measure(rho, mix) -> np.ndarray:
    """Convex mixture of qubit-permuted copies of ``rho``."""
    mix = permutation_mixture(mix)
    rho = np.asarray(rho, dtype=complex)
    out = np.zeros_like(rho)
    for perm, w in mix:
        if w:
            out += w * permute_qubits(rho, perm)
    return out


def swap_mixture(p) -> list[tuple[tuple[int, ...], float]]:
    """Mixture of transpositions ``S_{0,i}`` with weights ``p_i`` (``S_{0,0}`` = id)."""
    p = prob_vector(p, canonical=False)
    n = p.size
    terms = []
    for i, w in enumerate(p):
        perm = list(range(n))
        perm[0], perm[i] = perm[i], perm[0]
        terms.append((tuple(perm), float(w)))
    return terms


def apply_cg(psi, p) -> np.ndarray:
    """``sum_i p_i rho_i`` for a pure state ``psi``.

    No canonical reordering is applied here: ``p[i]`` weighs qubit ``i``.
    """
    psi = as_ket(psi, tol=1e-10)
    n = num_qubits(psi.size)
    p = prob_vector(p, canonical=False)
    if p.size != n:
        raise ValueError(f"{p.size} weights for a {n}-qubit state")
    out = np.zeros((2, 2), dtype=complex)
    for i, w in enumerate(p):
        if w:
            out += w * reduced_state(psi, [i])
    return out


def cg_via_swaps(rho, p) -> np.ndarray:
    """The swap-then-trace construction ``tr_{rest} sum_i p_i S_{0,i}[rho]``."""
    return partial_trace(fuzzy_measure(rho, swap_mixture(p)), [0])


def marginals_batch(psis) -> np.ndarray:
    """Single-qubit marginals of many kets: ``(S, 2**N) -> (S, N, 2, 2)``."""
    psis = np.asarray(psis, dtype=complex)
    s, d = psis.shape
    n = num_qubits(d)
    t = psis.reshape((s,) + (2,) * n)
    out = np.empty((s, n, 2, 2), dtype=complex)
    for i in range(n):
        m = np.moveaxis(t, i + 1, 1).reshape(s, 2, -1)
        out[:, i] = np.einsum("sak,sbk->sab", m, m.conj())
    return out


def apply_cg_batch(psis, p) -> np.ndarray:
    """Vectorized :func:`apply_cg` over a stack of kets."""
    p = prob_vector(p, canonical=False)
    marg = marginals_batch(psis)
    if marg.shape[1] != p.size:
        raise ValueError(f"{p.size} weights for {marg.shape[1]}-qubit states")
    return np.einsum("i,siab->sab", p, marg)


def cg_bloch_batch(psis, p) -> np.ndarray:
    """Bloch vectors of the coarse-grained states of many kets, ``(S, 3)``."""
    rho = apply_cg_batch(psis, p)
    return np.stack(
        [2 * rho[:, 0, 1].real, -2 * rho[:, 0, 1].imag, (rho[:, 0, 0] - rho[:, 1, 1]).real],
        axis=-1,
    )


def kept_subsets(n: int, m: int) -> list[tuple[int, ...]]:
    """Kept-qubit subsets of size m, lexicographic; index i pairs with weight i."""
    return list(combinations(range(n), m))


def apply_cg_general(rho, weights, m: int) -> np.ndarray:
    """``C_m[rho] = sum_i w_i tr_{c(i)} rho`` keeping m of N qubits.

    ``weights[i]`` multiplies the marginal on ``kept_subsets(N, m)[i]``; for
    ``m = 1`` this is the ordering of :func:`apply_cg`.
    """
    rho = np.asarray(rho, dtype=complex)
    n = num_qubits(rho.shape[0])
    if not 1 <= m <= n:
        raise ValueError(f"cannot keep {m} of {n} qubits")
    subsets = kept_subsets(n, m)
    w = prob_vector(weights, canonical=False)
    if w.size != len(subsets):
        raise ValueError(f"expected {len(subsets)} weights (one per {m}-subset), got {w.size}")
    out = np.zeros((2**m, 2**m), dtype=complex)
    for wi, keep in zip(w, subsets):
        if wi:
            out += wi * partial_trace(rho, keep)
    return out


def spin_operators(m: int) -> np.ndarray:
    """Collective spin components ``S_a = sum_i sigma_a^{(i)}``, shape ``(3, 2**m, 2**m)``."""
    ops = np.zeros((3, 2**m, 2**m), dtype=complex)
    for a in range(3):
        for i in range(m):
            factors = [PAULI[0]] * m
            factors[i] = PAULI[a + 1]
            ops[a] += kron(*factors)
    return ops


def spin_expectation(rho) -> np.ndarray:
    """Normalized spin expectation ``tr(rho S)/m``; a point of the unit ball."""
    rho = np.asarray(rho, dtype=complex)
    m = num_qubits(rho.shape[0])
    return np.real(np.einsum("aij,ji->a", spin_operators(m), rho)) / m


def check_covariance(psi, p, u) -> float:
    """Frobenius residual of ``C[U^{(x)N} psi] = U C[psi] U^dagger``."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2) or np.max(np.abs(u @ u.conj().T - np.eye(2))) > UNITARY_TOL:
        raise ValueError("U must be a 2x2 unitary")
    psi = as_ket(psi, tol=1e-10)
    n = num_qubits(psi.size)
    big = kron(*([u] * n))
    lhs = apply_cg(big @ psi, p)
    rhs = u @ apply_cg(psi, p) @ u.conj().T
    return float(np.linalg.norm(lhs - rhs))


def marginal_weights_of_mixture(mix, n: int) -> np.ndarray:
    """Weight each qubit receives at position 0 under a permutation mixture.

    A permutation that carries qubit ``perm[0]`` to the detector contributes
    that qubit's marginal after tracing the rest, so any mixture collapses to
    ``apply_cg`` with these aggregated weights.
    """
    w = np.zeros(n)
    for perm, wt in permutation_mixture(mix):
        if len(perm) != n:
            raise ValueError("permutation length does not match n")
        w[perm[0]] += wt
    return w


def all_permutations(n: int) -> Iterable[tuple[int, ...]]:
    return permutations(range(n))
