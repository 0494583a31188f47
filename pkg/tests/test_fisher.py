import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpuc.capacity import capacity_per_unit_cost
from cpuc.channels import (
    CostFunction,
    ParamStateFamily,
    bloch_family,
    depolarizing_channel,
    generalized_amplitude_damping,
    identity_channel,
    mixture_family,
    random_qubit_family,
    rotation_family,
)
from cpuc.core import DensityMatrix, PreconditionError
from cpuc.fisher import (
    estimation_bounds_report,
    first_order_consistent,
    qfi,
    reqfi,
    second_order_errors,
)
from cpuc.fock import TruncationConfig, displacement_family, displacement_op
from cpuc.gaussian import FiducialChannel, cpuc_gaussian


def constant_family():
    rho = np.array([[0.6, 0.1], [0.1, 0.4]], dtype=complex)
    return ParamStateFamily(lambda x: rho, 2, [(-1.0, 1.0)], (0.0,), "constant")


def coherent_family(cutoff=30):
    cfg = TruncationConfig(cutoff)

    def fn(x):
        psi = displacement_op(x[0], cfg)[:, 0]
        return np.outer(psi, psi.conj())

    return ParamStateFamily(fn, cutoff, [(-1.0, 1.0)], (0.0,), "coherent")


def test_constant_family_has_zero_information():
    fam = constant_family()
    assert reqfi(fam, 0.0) == pytest.approx(0.0, abs=1e-12)
    assert qfi(fam, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_diagonal_mixture_is_classical_fisher():
    fam = mixture_family(DensityMatrix.maximally_mixed(2), DensityMatrix.basis(2, 0))
    # sum (p1 - p0)^2 / p0 = 2 * (1/2)^2 / (1/2)
    assert reqfi(fam, 0.0) == pytest.approx(1.0, abs=1e-8)
    assert qfi(fam, 0.0) == pytest.approx(1.0, abs=1e-8)


def test_coherent_family_qfi():
    fam = coherent_family()
    assert qfi(fam, 0.0) == pytest.approx(4.0, abs=1e-4)
    # the family leaves the support of the pure state at x = 0
    assert reqfi(fam, 0.0) == math.inf


def test_qubit_rotation_fisher():
    # pure state: F = 1 for the rotation angle, J is infinite
    assert qfi(rotation_family(), 0.3) == pytest.approx(1.0, abs=1e-8)
    assert reqfi(rotation_family(), 0.3) == math.inf


def test_multiparameter_family_rejected():
    with pytest.raises(PreconditionError):
        reqfi(bloch_family(), [0.0, 0.0])


def test_reqfi_matches_relative_entropy_expansion(rng):
    for _ in range(5):
        fam = random_qubit_family(rng)
        j, errs = second_order_errors(fam, 0.0, (1e-2, 1e-3, 1e-4))
        assert abs(errs[2]) <= 1e-3 * max(1.0, j)
        assert first_order_consistent(j, (1e-2, 1e-3), errs[:2])


def test_reqfi_through_channel_matches_composed_family():
    ch = generalized_amplitude_damping(0.25, 0.4)
    fam = mixture_family(DensityMatrix.basis(2, 0), DensityMatrix.pure([1, 1j]))
    assert reqfi(fam, 0.0, ch) == pytest.approx(reqfi(fam.through(ch), 0.0), rel=1e-12)


@given(st.integers(0, 2**32 - 1), st.floats(-0.15, 0.15))
def test_qfi_never_exceeds_reqfi(seed, phi):
    fam = random_qubit_family(np.random.default_rng(seed))
    f, j = qfi(fam, phi), reqfi(fam, phi)
    assert f <= j + 1e-8 * max(1.0, j)
    assert f >= 0.0


@given(st.integers(0, 2**32 - 1))
def test_first_order_consistency_property(seed):
    fam = random_qubit_family(np.random.default_rng(seed))
    j, errs = second_order_errors(fam, 0.0, (1e-2, 1e-3))
    assert first_order_consistent(j, (1e-2, 1e-3), errs)


def test_support_mismatch_is_infinite_for_both():
    fam = rotation_family()
    assert reqfi(fam, 0.0, identity_channel(2)) == math.inf
    res = capacity_per_unit_cost(identity_channel(2), fam, CostFunction.quadratic())
    assert res.value == math.inf


# -- bounds report -----------------------------------------------------------------

def test_bounds_depolarizing_vacuous():
    rep = estimation_bounds_report(depolarizing_channel(2), rotation_family())
    assert rep.J_half == pytest.approx(0.0, abs=1e-12)
    assert rep.F_half == pytest.approx(0.0, abs=1e-12)
    assert rep.vacuous
    assert rep.emin_bound_J == math.inf
    assert rep.cpuc == 0.0


def test_bounds_random_family_chain(rng):
    ch = generalized_amplitude_damping(0.3, 0.5)
    rep = estimation_bounds_report(ch, random_qubit_family(rng))
    assert rep.J_half >= rep.F_half
    assert rep.cpuc >= rep.J_half - 1e-8
    assert rep.chain_holds
    assert rep.emin_bound_J <= rep.emin_bound_F


def test_bounds_gaussian_displacement_saturates():
    ch = FiducialChannel(0.9, 1.0, 1.0)
    rep = estimation_bounds_report(None, displacement_family(ch), compute_cpuc=False)
    assert rep.J_half == pytest.approx(cpuc_gaussian(ch), abs=1e-3)
    # displaced thermal state: F = 4 eta / (2 N0 + 1)
    assert rep.F_half == pytest.approx(2 * 0.9 / 1.2, abs=1e-6)


def test_bounds_needs_quadratic_cost():
    with pytest.raises(PreconditionError):
        estimation_bounds_report(None, rotation_family(), CostFunction.photon_number(2))
