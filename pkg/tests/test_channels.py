import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cpuc.channels import (
    CostFunction,
    KrausChannel,
    amplitude_damping,
    apply,
    bloch_family,
    cost_of,
    depolarizing_channel,
    generalized_amplitude_damping,
    identity_channel,
    mixture_family,
    random_channel,
    random_qubit_family,
    random_state,
    rotation_family,
    validate_kraus,
)
from cpuc.core import DensityMatrix, DomainError, ValidationError


def test_identity_channel_is_identity(rng):
    rho = random_state(3, rng)
    assert np.allclose(apply(identity_channel(3), rho).matrix, rho.matrix, atol=1e-14)


def test_depolarizing_qubit_outputs_maximally_mixed(rng):
    ch = depolarizing_channel(2)
    for _ in range(5):
        assert np.allclose(apply(ch, random_state(2, rng)).matrix, np.eye(2) / 2, atol=1e-14)


def test_amplitude_damping_on_excited_state():
    out = apply(amplitude_damping(0.3), DensityMatrix.basis(2, 1))
    assert np.allclose(out.matrix, np.diag([0.3, 0.7]), atol=1e-15)


def test_generalized_amplitude_damping_fixed_point():
    # thermal qubit with p1/p0 = N/(N+1) is stationary
    n = 0.5
    ch = generalized_amplitude_damping(0.3, n)
    q = (1 + n) / (1 + 2 * n)
    fixed = DensityMatrix(np.diag([q, 1 - q]))
    assert np.allclose(apply(ch, fixed).matrix, fixed.matrix, atol=1e-14)


def test_validate_kraus_examples():
    assert validate_kraus(KrausChannel([np.eye(2)]))
    assert not validate_kraus(KrausChannel([np.eye(2) / 2]))
    assert validate_kraus(amplitude_damping(0.3))


def test_kraus_shape_mismatch():
    with pytest.raises(ValidationError):
        KrausChannel([np.eye(2), np.eye(3)])


def test_random_channel_needs_enough_operators(rng):
    with pytest.raises(ValidationError, match="isometry"):
        random_channel(4, 2, 1, rng)


def test_apply_dimension_mismatch(rng):
    with pytest.raises(ValidationError):
        apply(identity_channel(2), random_state(3, rng))


@given(st.integers(1, 4), st.integers(1, 4), st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_apply_preserves_trace_and_positivity(d_in, d_out, k, seed):
    rng = np.random.default_rng(seed)
    k = max(k, -(-d_in // d_out))
    ch = random_channel(d_in, d_out, k, rng)
    assert validate_kraus(ch)
    out = apply(ch, random_state(d_in, rng))
    assert abs(np.trace(out.matrix).real - 1) <= 1e-9
    assert np.linalg.eigvalsh(out.matrix)[0] >= -1e-9


@given(st.floats(0, 1), st.integers(0, 2**32 - 1))
def test_apply_is_linear(a, seed):
    rng = np.random.default_rng(seed)
    ch = random_channel(3, 2, 3, rng)
    r1, r2 = random_state(3, rng), random_state(3, rng)
    mix = DensityMatrix(a * r1.matrix + (1 - a) * r2.matrix)
    lhs = apply(ch, mix).matrix
    rhs = a * apply(ch, r1).matrix + (1 - a) * apply(ch, r2).matrix
    assert np.max(np.abs(lhs - rhs)) <= 1e-10


# -- costs -----------------------------------------------------------------------

def test_quadratic_cost_examples():
    q = CostFunction.quadratic()
    assert cost_of(q, [0.0]) == 0.0
    assert cost_of(q, [0.3]) == pytest.approx(0.09, abs=1e-15)


def test_photon_number_on_one_photon():
    assert cost_of(CostFunction.photon_number(4), DensityMatrix.basis(4, 1)) == pytest.approx(1.0)


def test_lookup_cost():
    assert cost_of(CostFunction.lookup([0, 1, 2]), 2) == 2.0


def test_observable_cost_clips_roundoff_and_rejects_negative():
    b = np.diag([-1e-12, 1.0])
    assert cost_of(CostFunction.observable(b), DensityMatrix.basis(2, 0)) == 0.0
    with pytest.raises(DomainError):
        cost_of(CostFunction.observable(np.diag([-1.0, 1.0])), DensityMatrix.basis(2, 0))


def test_lookup_rejects_negative_costs():
    with pytest.raises(ValidationError):
        CostFunction.lookup([0, -1])


def test_unknown_cost_kind():
    with pytest.raises(ValidationError):
        CostFunction("quartic")


# -- families --------------------------------------------------------------------

@pytest.mark.parametrize(
    "family, cost",
    [
        (bloch_family(), CostFunction.photon_number(2)),
        (bloch_family(mixed=True), CostFunction.photon_number(2)),
        (rotation_family(), CostFunction.quadratic()),
        (mixture_family(DensityMatrix.basis(2, 0), DensityMatrix.maximally_mixed(2)), CostFunction.quadratic()),
    ],
)
def test_free_point_costs_zero(family, cost):
    arg = family.free_point if cost.kind == "quadratic" else family.free_state()
    assert cost_of(cost, arg) == 0.0


@given(st.integers(0, 2**32 - 1))
def test_random_family_free_point_cost_exactly_zero(seed):
    fam = random_qubit_family(np.random.default_rng(seed))
    assert cost_of(CostFunction.quadratic(), fam.free_point) == 0.0


def test_family_derivative_matches_analytic():
    # d/dx of the rotation family at x is (cos x, 0, -sin x) . sigma / 2
    fam = rotation_family()
    x = 0.4
    expect = 0.5 * np.array([[-math.sin(x), math.cos(x)], [math.cos(x), math.sin(x)]])
    assert np.allclose(fam.derivative([x]), expect, atol=1e-9)


def test_family_through_channel():
    fam = rotation_family().through(depolarizing_channel(2))
    assert np.allclose(fam.state([1.0]).matrix, np.eye(2) / 2)
    assert np.allclose(fam.input_state([0.0]).matrix, np.diag([1, 0]))
