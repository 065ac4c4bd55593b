import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cglab.states import (
    PAULI,
    SchmidtParams,
    StateError,
    antispinor,
    as_density,
    as_ket,
    bloch_to_dm,
    bloch_vector,
    build_schmidt_state,
    concurrence,
    from_pauli_coefficients,
    haar_unitary,
    kron,
    partial_trace,
    pauli_coefficients,
    purity,
    reduced_state,
    rotation_matrix,
    same_ray,
    schmidt_params,
    spin_rotation,
    spinor,
)
from conftest import random_dm, random_ket

angle = st.floats(0.0, np.pi)
azimuth = st.floats(0.0, 2 * np.pi, exclude_max=True)


def brute_partial_trace(rho, n, keep):
    """Element-by-element partial trace, the textbook definition."""
    keep = sorted(keep)
    rest = [q for q in range(n) if q not in keep]
    m = len(keep)
    out = np.zeros((2**m, 2**m), dtype=complex)
    for i in range(2**n):
        for j in range(2**n):
            bi = [(i >> (n - 1 - q)) & 1 for q in range(n)]
            bj = [(j >> (n - 1 - q)) & 1 for q in range(n)]
            if any(bi[q] != bj[q] for q in rest):
                continue
            a = int("".join(str(bi[q]) for q in keep), 2)
            b = int("".join(str(bj[q]) for q in keep), 2)
            out[a, b] += rho[i, j]
    return out


@pytest.mark.parametrize("keep", [[0], [1], [2], [0, 2], [1, 2], [0, 1, 2]])
def test_partial_trace_matches_brute_force(rng, keep):
    rho = random_dm(3, rng)
    assert np.allclose(partial_trace(rho, keep), brute_partial_trace(rho, 3, keep), atol=1e-13)


def test_qubit_zero_is_most_significant():
    psi = np.zeros(4, dtype=complex)
    psi[1] = 1.0  # |0>|1>
    assert np.allclose(reduced_state(psi, [0]), [[1, 0], [0, 0]])
    assert np.allclose(reduced_state(psi, [1]), [[0, 0], [0, 1]])


def test_partial_trace_of_product():
    a = bloch_to_dm([0.3, -0.2, 0.5])
    b = bloch_to_dm([0.0, 0.6, -0.1])
    assert np.allclose(partial_trace(np.kron(a, b), [0]), a)
    assert np.allclose(partial_trace(np.kron(a, b), [1]), b)


def test_pauli_round_trip(rng):
    rho = random_dm(2, rng)
    c = pauli_coefficients(rho)
    assert c.shape == (4, 4)
    assert np.isclose(c[0, 0], 1.0)
    assert np.allclose(c[3, 1], np.trace(rho @ kron(PAULI[3], PAULI[1])).real)
    assert np.allclose(from_pauli_coefficients(c), rho, atol=1e-14)


def test_validation_errors():
    with pytest.raises(StateError):
        as_ket([1.0, 1.0])
    with pytest.raises(StateError):
        as_ket([1.0, 0.0, 0.0])
    with pytest.raises(StateError):
        as_density(np.array([[1, 1], [0, 0]]))
    with pytest.raises(StateError):
        as_density(np.diag([1.5, -0.5]))
    rho = as_density(np.array([[0.5, 1e-12j], [0, 0.5]]))
    assert np.allclose(rho, rho.conj().T, atol=0)


@given(angle, azimuth)
def test_spinor_points_along_direction(theta, phi):
    n = np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])
    up, down = spinor(theta, phi), antispinor(theta, phi)
    assert np.allclose(bloch_vector(np.outer(up, up.conj())), n, atol=1e-12)
    assert np.allclose(bloch_vector(np.outer(down, down.conj())), -n, atol=1e-12)
    assert abs(np.vdot(up, down)) < 1e-12
    assert np.allclose(rotation_matrix(theta, phi) @ [0, 0, 1], n, atol=1e-12)
    u = spin_rotation(theta, phi)
    assert np.allclose(u @ PAULI[3] @ u.conj().T, np.einsum("k,kij->ij", n, PAULI[1:]), atol=1e-12)


@settings(max_examples=200)
@given(angle, azimuth, angle, azimuth, angle, azimuth)
def test_schmidt_form_properties(eta, gamma, t1, f1, t2, f2):
    psi = build_schmidt_state(SchmidtParams(eta, gamma, t1, f1, t2, f2))
    assert np.isclose(np.linalg.norm(psi), 1.0)
    # concurrence sin(eta); both reduced Bloch radii cos(eta)
    assert np.isclose(concurrence(psi), np.sin(eta), atol=1e-12)
    r1 = np.linalg.norm(bloch_vector(reduced_state(psi, [0])))
    r2 = np.linalg.norm(bloch_vector(reduced_state(psi, [1])))
    assert np.isclose(r1, abs(np.cos(eta)), atol=1e-12)
    assert np.isclose(r2, abs(np.cos(eta)), atol=1e-12)


def test_schmidt_params_inverse(rng):
    for _ in range(200):
        psi = random_ket(2, rng)
        assert same_ray(build_schmidt_state(schmidt_params(psi)), psi, tol=1e-9)


def test_schmidt_params_degenerate_case():
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    par = schmidt_params(bell)
    assert np.isclose(par.eta, np.pi / 2)
    assert par.theta1 == 0.0
    assert same_ray(build_schmidt_state(par), bell)


def test_schmidt_params_validates_ranges():
    with pytest.raises(ValueError):
        SchmidtParams(4.0, 0, 0, 0, 0, 0)
    with pytest.raises(ValueError):
        SchmidtParams(0, -1.0, 0, 0, 0, 0)


def test_concurrence_reference_values():
    assert np.isclose(concurrence(np.array([1, 0, 0, 1]) / np.sqrt(2)), 1.0)
    assert np.isclose(concurrence(np.kron([1, 0], [0.6, 0.8])), 0.0)


def test_equal_marginal_purity_haar(rng):
    for _ in range(1000):
        psi = random_ket(2, rng)
        assert abs(purity(reduced_state(psi, [0])) - purity(reduced_state(psi, [1]))) < 1e-12


def test_haar_unitary_is_unitary(rng):
    u = haar_unitary(4, rng)
    assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-13)
