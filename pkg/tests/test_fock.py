import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from cpuc.core import NumericalError, ValidationError, von_neumann_entropy
from cpuc.fock import (
    TruncationConfig,
    annihilation,
    channel_output_fock,
    displacement_op,
    gaussian_state_fock,
    oracle_relative_entropy,
    quadrature_moments,
    squeeze_op,
    thermal_state,
)
from cpuc.gaussian import (
    FiducialChannel,
    GaussianParams,
    apply_fiducial,
    from_params,
    gaussian_relative_entropy,
    mean_photon_number,
)

CFG = TruncationConfig(60)
LN2 = math.log(2)


def ket(n, dim):
    v = np.zeros(dim, dtype=complex)
    v[n] = 1.0
    return v


def number_op(dim):
    return np.diag(np.arange(dim, dtype=float))


# -- operators -------------------------------------------------------------------

def test_annihilation_matrix_elements():
    a = annihilation(TruncationConfig(10))
    assert np.allclose(a @ ket(1, 10), ket(0, 10))
    assert np.allclose(a @ ket(0, 10), 0)
    assert a[2, 3] == pytest.approx(math.sqrt(3))


def test_truncation_config_validation():
    with pytest.raises(ValidationError):
        TruncationConfig(2)
    with pytest.raises(ValidationError):
        TruncationConfig(40, 0.0)


def test_displacement_identity_and_inverse():
    assert np.allclose(displacement_op(0, CFG), np.eye(60), atol=1e-14)
    alpha = 0.8 - 0.6j
    prod = displacement_op(alpha, CFG) @ displacement_op(-alpha, CFG)
    assert np.max(np.abs(prod - np.eye(60))) <= CFG.tail_tol


@pytest.mark.parametrize("alpha", [0.3, 1.0 + 0.5j, -1.5j])
def test_coherent_state_photon_number(alpha):
    psi = displacement_op(alpha, CFG)[:, 0]
    n = float(np.real(psi.conj() @ number_op(60) @ psi))
    assert abs(n - abs(alpha) ** 2) <= CFG.tail_tol


def test_displacement_leakage_detected():
    with pytest.raises(NumericalError, match="leaks"):
        displacement_op(5.0, TruncationConfig(20))


def test_squeeze_identity_and_inverse():
    assert np.allclose(squeeze_op(0.0, CFG), np.eye(60), atol=1e-14)
    prod = squeeze_op(0.4, CFG) @ squeeze_op(-0.4, CFG)
    assert np.max(np.abs(prod - np.eye(60))) <= CFG.tail_tol


@pytest.mark.parametrize("r", [0.2, -0.3])
def test_squeezed_vacuum_covariance(r):
    psi = squeeze_op(r, CFG)[:, 0]
    rho = np.outer(psi, psi.conj())
    mean, cov = quadrature_moments(rho)
    # omega = e^{-2r}: covariance diag(1/omega, omega)/2
    assert np.allclose(mean, 0, atol=1e-12)
    assert np.allclose(cov, np.diag([math.exp(2 * r), math.exp(-2 * r)]) / 2, atol=CFG.tail_tol)


def test_unitarity_defects():
    for u in (displacement_op(1.2 + 0.3j, CFG), squeeze_op(0.5, CFG)):
        assert np.max(np.abs(u.conj().T @ u - np.eye(60))) <= CFG.tail_tol


# -- states ----------------------------------------------------------------------

def test_thermal_state_examples():
    vac = thermal_state(0.0, CFG)
    assert np.allclose(vac.matrix, np.diag(ket(0, 60).real))
    rho = thermal_state(1.0, CFG)
    assert von_neumann_entropy(rho) == pytest.approx(2 * LN2, abs=1e-6)


@pytest.mark.parametrize("n", [0.1, 0.5, 1.0, 2.0])
def test_thermal_photon_number(n):
    rho = thermal_state(n, CFG)
    assert float(np.real(np.trace(rho.matrix @ number_op(60)))) == pytest.approx(n, abs=1e-6)


def test_thermal_tail_detected():
    with pytest.raises(NumericalError, match="tail"):
        thermal_state(5.0, TruncationConfig(20))


def test_gaussian_state_vacuum():
    rho = gaussian_state_fock(GaussianParams.vacuum(), CFG)
    assert np.allclose(rho.matrix, np.diag(ket(0, 60).real), atol=1e-15)


def test_gaussian_state_coherent_mean():
    mean, _ = quadrature_moments(gaussian_state_fock(GaussianParams.coherent(0.5), CFG).matrix)
    assert np.allclose(mean, [math.sqrt(2) * 0.5, 0.0], atol=CFG.tail_tol)


def test_gaussian_state_mixed_squeezed_moments():
    p = GaussianParams(0.1, 1.2, 0.5)
    mean, cov = quadrature_moments(gaussian_state_fock(p, TruncationConfig(40)).matrix)
    s = from_params(p)
    assert np.allclose(mean, s.xbar, atol=1e-6)
    assert np.allclose(cov, s.sigma, atol=1e-6)


@given(st.floats(0, 1), st.floats(0.6, 1.6), st.floats(-1, 1), st.floats(-1, 1))
def test_moment_fidelity(n, w, re, im):
    p = GaussianParams(n, w, complex(re, im))
    try:
        rho = gaussian_state_fock(p, CFG)
    except NumericalError:
        assume(False)
    mean, cov = quadrature_moments(rho.matrix)
    s = from_params(p)
    # moments of x^2 involve levels up to the cutoff, so allow a few tail weights
    assert np.allclose(mean, s.xbar, atol=10 * CFG.tail_tol)
    assert np.allclose(cov, s.sigma, atol=1e3 * CFG.tail_tol)
    n_fock = float(np.real(np.trace(rho.matrix @ number_op(60))))
    assert n_fock == pytest.approx(mean_photon_number(p), abs=1e3 * CFG.tail_tol)


def test_adaptive_cutoff_grows():
    p = GaussianParams(1.0, 1.0, 2.5)
    with pytest.raises(NumericalError):
        gaussian_state_fock(p, TruncationConfig(20))
    rho = gaussian_state_fock(p, TruncationConfig(20), adaptive=True)
    assert rho.dim > 20


def test_channel_output_matches_phase_space():
    ch = FiducialChannel(0.9, 1.0, 2.0)
    p = GaussianParams(0.2, 1.1, 0.4 - 0.2j)
    mean, cov = quadrature_moments(channel_output_fock(ch, p, CFG).matrix)
    out = apply_fiducial(ch, from_params(p))
    assert np.allclose(mean, out.xbar, atol=1e-6)
    assert np.allclose(cov, out.sigma, atol=1e-6)


# -- oracle relative entropy -------------------------------------------------------

def test_oracle_identical_states():
    p = GaussianParams(0.3, 1.2, 0.4j)
    assert oracle_relative_entropy(p, p, CFG) == 0.0


def test_oracle_vacuum_vs_thermal():
    d = oracle_relative_entropy(GaussianParams.vacuum(), GaussianParams.thermal(1.0), CFG)
    assert d == pytest.approx(LN2, abs=1e-5)


def test_oracle_pure_reference_is_infinite():
    assert oracle_relative_entropy(GaussianParams.thermal(0.5), GaussianParams.vacuum(), CFG) == math.inf


@given(
    st.floats(0, 1), st.floats(0.6, 1.6), st.floats(-1, 1), st.floats(-1, 1),
    st.floats(0.02, 1), st.floats(0.6, 1.6), st.floats(-1, 1), st.floats(-1, 1),
)
def test_oracle_matches_phase_space(n1, w1, re1, im1, n2, w2, re2, im2):
    p1, p2 = GaussianParams(n1, w1, complex(re1, im1)), GaussianParams(n2, w2, complex(re2, im2))
    try:
        ref = oracle_relative_entropy(p1, p2, CFG)
    except NumericalError:
        assume(False)
    assert abs(gaussian_relative_entropy(from_params(p1), from_params(p2)) - ref) <= 1e-5
