import numpy as np
import pytest

from cglab.avgstate import (
    AvgStateCoeffs,
    avg_state_coeffs,
    avg_state_diagnostics,
    avg_state_general_axis,
    avg_state_mc,
    coeffs_full,
    coeffs_separable,
    is_ppt,
    partial_transpose,
)
from cglab.sampling import EmptyPreimageError
from cglab.states import PAULI, bloch_vector, kron, partial_trace

SINGLET = np.array([0, 1, -1, 0]) / np.sqrt(2)


def cg_bloch(rho, h):
    return bloch_vector(0.5 * ((1 - h) * partial_trace(rho, [0]) + (1 + h) * partial_trace(rho, [1])))


def werner(alpha):
    return alpha * np.outer(SINGLET, SINGLET) + (1 - alpha) * np.eye(4) / 4


@pytest.mark.parametrize("h", [0.2, 0.5, 0.8])
def test_origin_gives_werner_state(h):
    alpha = (1 - h) / (3 * (1 + h))
    assert np.allclose(avg_state_coeffs(h, 0.0).matrix(), werner(alpha), atol=1e-14)


def test_special_points_exact():
    ket10 = np.zeros((4, 4)); ket10[2, 2] = 1
    ket00 = np.zeros((4, 4)); ket00[0, 0] = 1
    for h in (0.1, 0.4, 0.7):
        assert np.max(np.abs(coeffs_separable(h, h).matrix() - ket10)) < 1e-10
        assert np.max(np.abs(coeffs_full(h, 1.0).matrix() - ket00)) < 1e-10
        assert np.max(np.abs(coeffs_separable(h, 1.0).matrix() - ket00)) < 1e-10
    assert np.max(np.abs(coeffs_full(1.0, 1.0).matrix() - ket00)) < 1e-10


def test_branches_and_errors():
    assert coeffs_full(0.5, 0.3).branch == "inside"
    assert coeffs_full(0.5, 0.5).branch == "outside"
    with pytest.raises(EmptyPreimageError):
        coeffs_separable(0.5, 0.3)
    with pytest.raises(ValueError):
        avg_state_coeffs(0.5, 0.3, "mixed")
    with pytest.raises(ValueError):
        coeffs_full(0.0, 0.3)


def test_full_coefficients_continuous_at_kink():
    for h in (0.2, 0.6):
        a = np.array(coeffs_full(h, h - 1e-10).as_tuple())
        b = np.array(coeffs_full(h, h).as_tuple())
        assert np.allclose(a, b, atol=1e-8)


def test_pauli_components_match_matrix():
    c = coeffs_full(0.3, 0.7)
    rho = c.matrix()
    for (a, b), v in c.pauli_components().items():
        assert np.isclose(np.trace(rho @ kron(PAULI[a], PAULI[b])).real, v)


@pytest.mark.parametrize("ensemble", ["full", "separable"])
def test_states_are_physical_and_map_back(ensemble):
    for h in np.linspace(0.05, 0.95, 10):
        for r in np.linspace(0, 1, 21):
            if ensemble == "separable" and r < h:
                continue
            rho = avg_state_coeffs(h, r, ensemble).matrix()
            assert np.isclose(np.trace(rho).real, 1.0)
            assert np.linalg.eigvalsh(rho)[0] > -1e-12
            # C of the average state reproduces the target on this grid
            assert np.allclose(cg_bloch(rho, h), [0, 0, r], atol=1e-12)


def test_coherence_bounds_dense_grid():
    for h in np.linspace(0.01, 0.99, 50):
        for r in np.linspace(0, 1, 101):
            d = avg_state_diagnostics(avg_state_coeffs(h, r).matrix(), r)
            assert d["coherence_23_abs"] <= d["coherence_bound_full"] + 1e-14
            if r >= h:
                d = avg_state_diagnostics(avg_state_coeffs(h, r, "separable").matrix(), r)
                assert d["coherence_23_abs"] <= d["coherence_bound_separable"] + 1e-14


def test_diagnostic_symmetries():
    d = avg_state_diagnostics(coeffs_full(0.4, 0.6).matrix(), 0.6)
    assert abs(d["symmetry_residuals"]["xx_minus_yy"]) < 1e-14
    assert d["symmetry_residuals"]["coh_23_minus_32"] < 1e-14
    assert 0.25 <= d["purity"] <= 1.0


def test_general_axis_by_covariance():
    t = np.array([0.2, -0.3, 0.4])
    h = 0.35
    rho = avg_state_general_axis(t, h)
    assert np.allclose(cg_bloch(rho, h), t, atol=1e-12)
    mc = avg_state_mc(t, h, n=100_000, seed=3)
    assert np.linalg.norm(mc.mean - rho) <= 4 * mc.frobenius_stderr


def test_partial_transpose():
    bell = np.outer([1, 0, 0, 1], [1, 0, 0, 1]) / 2
    assert not is_ppt(bell)
    assert is_ppt(np.eye(4) / 4)
    assert np.allclose(partial_transpose(partial_transpose(bell)), bell)


@pytest.mark.parametrize("ensemble,h,r", [("full", 0.3, 0.1), ("full", 0.3, 0.7), ("separable", 0.4, 0.8)])
def test_closed_forms_against_monte_carlo(ensemble, h, r):
    mc = avg_state_mc([0, 0, r], h, ensemble, n=100_000, seed=17)
    exact = avg_state_coeffs(h, r, ensemble).matrix()
    assert mc.stderr.shape == (4, 4)
    assert np.linalg.norm(mc.mean - exact) <= 4 * mc.frobenius_stderr


def test_mc_is_deterministic():
    a = avg_state_mc([0, 0, 0.5], 0.3, n=2_000, seed=5)
    b = avg_state_mc([0, 0, 0.5], 0.3, n=2_000, seed=5, chunk=300)
    assert np.array_equal(a.mean, b.mean)
    with pytest.raises(ValueError):
        avg_state_mc([0, 0, 0.5], 0.3, n=5, blocks=20)


def test_coeff_container():
    c = AvgStateCoeffs(0.1, 0.2, 0.3, 0.0, "outside", "full")
    assert c.as_tuple() == (0.1, 0.2, 0.3, 0.0)
