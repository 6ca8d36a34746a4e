import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dense_pauli, expm_series, loglog_slope
from srmbqc.curves import (
    ControlCurve,
    RotationSequence,
    RotationStep,
    TrotterPlan,
    arclength,
    compile_curve,
    correct_endpoint,
    endpoint,
    energy,
    fuse_adjacent,
    rebalance,
    sequence_to_curve,
    split_rotation,
    time_ordered_exponential,
    trotter_discretize,
)
from srmbqc.exceptions import ValidationError
from srmbqc.geodesics import su2_frame, su2_geodesic_controls, su2_geodesic_solve
from srmbqc.pauli import GeneratorSet, PauliTerm, pauli_rotation

XZ = su2_frame()


@pytest.fixture(scope="module")
def y1():
    """Minimizing geodesic towards ``exp(i Y / 2)``."""
    return su2_geodesic_solve(pauli_rotation(PauliTerm("Y"), 1.0))[0]


def const(c, T=1.0):
    return ControlCurve(XZ, T, lambda t: c)


# -- arclength and energy ---------------------------------------------------------------

def test_arclength_constant():
    assert arclength(const((1.0, 0.0), 0.7)) == pytest.approx(0.7, abs=1e-9)


def test_arclength_circle():
    curve = ControlCurve(XZ, 2.0, lambda t: (math.cos(t), math.sin(t)))
    assert arclength(curve) == pytest.approx(2.0, abs=1e-9)


def test_arclength_of_geodesic_is_duration(y1):
    assert arclength(su2_geodesic_controls(y1)) == pytest.approx(y1.duration, abs=1e-8)


def test_energy_unit_speed():
    c = const((0.6, 0.8))
    assert energy(c) == pytest.approx(1.0, abs=1e-9)
    assert energy(c) == pytest.approx(arclength(c) ** 2, abs=1e-9)


def test_energy_zero():
    assert energy(const((0.0, 0.0))) == 0.0


def test_energy_strict_cauchy_schwarz():
    curve = ControlCurve(XZ, 1.0, lambda t: (2.0 if t <= 0.5 else 0.0, 0.0), (0.5,))
    assert energy(curve) == pytest.approx(2.0, abs=1e-9)
    assert arclength(curve) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(
    st.floats(0.1, 3.0), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.0, 1.5), st.floats(0.2, 3)
)
def test_cauchy_schwarz(T, a, b, wobble, speed):
    varying = ControlCurve(XZ, T, lambda t: (a + wobble * math.sin(3 * t), b))
    assert energy(varying) * T >= arclength(varying) ** 2 - 1e-9
    steady = ControlCurve(XZ, T, lambda t: (speed * math.cos(a * t), speed * math.sin(a * t)))
    assert energy(steady) * T == pytest.approx(arclength(steady) ** 2, abs=1e-9)


def test_non_finite_controls_rejected():
    with pytest.raises(ValidationError):
        arclength(ControlCurve(XZ, 1.0, lambda t: (math.nan, 0.0)))


def test_wrong_control_length_rejected():
    with pytest.raises(ValidationError):
        const((1.0,)).controls(0.0)


def test_zero_duration_rejected():
    with pytest.raises(ValidationError):
        ControlCurve(XZ, 0.0, lambda t: (1.0, 0.0))


# -- rotation sequences -------------------------------------------------------------------

def test_sequence_curve_single_step():
    curve = sequence_to_curve(RotationSequence(XZ, (RotationStep(0, 0.5),)))
    assert curve.duration == 1.0
    np.testing.assert_array_equal(curve.controls(0.3), [0.5, 0.0])
    assert arclength(curve) == pytest.approx(0.5)
    assert energy(curve) == pytest.approx(0.25)


def test_sequence_curve_two_steps():
    seq = RotationSequence(XZ, ((0, 0.4), (1, -0.9)))
    assert arclength(sequence_to_curve(seq)) == pytest.approx(1.3, abs=1e-9)


def test_sequence_curve_random(rng):
    steps = [(int(rng.integers(2)), float(rng.normal())) for _ in range(10)]
    seq = RotationSequence(XZ, tuple(steps))
    curve = sequence_to_curve(seq)
    assert energy(curve) == pytest.approx(sum(a * a for _, a in steps), abs=1e-12)
    assert arclength(curve) == pytest.approx(sum(abs(a) for _, a in steps), abs=1e-9)
    np.testing.assert_allclose(time_ordered_exponential(curve), endpoint(seq), atol=1e-12)


def test_empty_sequence_has_no_curve():
    with pytest.raises(ValidationError):
        sequence_to_curve(RotationSequence(XZ))


def test_endpoint_empty():
    np.testing.assert_array_equal(endpoint(RotationSequence(XZ)), np.eye(2))


def test_endpoint_y_pi():
    frame = GeneratorSet.parse("Y")
    np.testing.assert_allclose(
        endpoint(RotationSequence(frame, ((0, math.pi),))), 1j * dense_pauli("Y"), atol=1e-15
    )


def test_endpoint_against_series():
    seq = RotationSequence(XZ, ((0, 0.3), (1, 0.4)))
    expected = expm_series(0.15j * dense_pauli("X")) @ expm_series(0.2j * dense_pauli("Z"))
    np.testing.assert_allclose(endpoint(seq), expected, atol=1e-13)


def test_endpoint_unitary(rng):
    frame = GeneratorSet.parse("XI,ZX,IY")
    seq = RotationSequence(frame, tuple((int(rng.integers(3)), float(rng.normal())) for _ in range(40)))
    U = endpoint(seq)
    assert np.max(np.abs(U.conj().T @ U - np.eye(4))) < 1e-10


def test_reversal_gives_adjoint(rng):
    seq = RotationSequence(XZ, tuple((int(rng.integers(2)), float(rng.normal())) for _ in range(12)))
    inv = seq.inverse()
    np.testing.assert_allclose(endpoint(inv), endpoint(seq).conj().T, atol=1e-12)
    assert inv.local_sum() == pytest.approx(seq.local_sum(), abs=1e-14)


def test_step_validation():
    with pytest.raises(ValidationError):
        RotationSequence(XZ, ((2, 0.1),))
    with pytest.raises(ValidationError):
        RotationSequence(XZ, ((0, math.inf),))


def test_csv_round_trip(rng):
    seq = RotationSequence(XZ, tuple((int(rng.integers(2)), float(rng.normal())) for _ in range(5)))
    text = seq.to_csv()
    assert text.splitlines()[0] == "index,generator,angle_radians"
    assert text.splitlines()[1].split(",")[1] in ("+X", "+Z")
    assert RotationSequence.from_csv(text, XZ) == seq


# -- time-ordered exponential ------------------------------------------------------------------

def test_toe_constant_controls():
    U = time_ordered_exponential(const((0.3, -0.5), 1.7), resolution=1000)
    np.testing.assert_allclose(
        U, expm_series(0.5j * 1.7 * (0.3 * dense_pauli("X") - 0.5 * dense_pauli("Z"))), atol=1e-9
    )


def test_toe_matches_closed_form_geodesic(y1):
    U = time_ordered_exponential(su2_geodesic_controls(y1), resolution=4000)
    np.testing.assert_allclose(U, y1.endpoint(), atol=1e-7)
    assert np.max(np.abs(U.conj().T @ U - np.eye(2))) < 1e-10


def test_toe_is_second_order(y1):
    curve = su2_geodesic_controls(y1)
    errs = [np.linalg.norm(time_ordered_exponential(curve, r) - y1.endpoint()) for r in (100, 200, 400)]
    assert 3.5 < errs[0] / errs[1] < 4.5 and 3.5 < errs[1] / errs[2] < 4.5


# -- Trotter discretisation ----------------------------------------------------------------------

def test_single_generator_trotter_is_split_rotation():
    frame = GeneratorSet.parse("X")
    curve = ControlCurve(frame, 2.0, lambda t: (0.75,))
    seq = trotter_discretize(curve, TrotterPlan(8, 2.0, 1))
    assert seq == split_rotation(frame, 0, 1.5, 8)


def test_two_generator_segments_have_three_rotations():
    seq = trotter_discretize(const((0.3, 0.4), 1.0), TrotterPlan(5, 1.0, 2))
    assert len(seq) == 15
    assert [s.generator_index for s in seq.steps[:3]] == [0, 1, 0]
    assert seq.steps[0].angle == pytest.approx(0.3 * 0.2 / 2)
    assert seq.steps[1].angle == pytest.approx(0.4 * 0.2)


def test_zero_controls_skipped():
    seq = trotter_discretize(const((0.0, 0.4), 1.0), TrotterPlan(4, 1.0, 2))
    assert len(seq) == 4 and all(s.generator_index == 1 for s in seq.steps)


def test_plan_from_budget():
    plan = TrotterPlan.from_budget(500, const((1.0, 0.0), 2.0))
    assert plan.segment_count == 166 and plan.rotations_per_segment == 3
    assert plan.max_rotations <= 500
    assert plan.step_width == pytest.approx(2.0 / 166)
    with pytest.raises(ValidationError):
        TrotterPlan.from_budget(2, const((1.0, 0.0)))


def test_plan_must_match_curve():
    with pytest.raises(ValidationError):
        trotter_discretize(const((1.0, 0.0), 1.0), TrotterPlan(4, 2.0, 2))


def test_trotter_endpoint_m500(y1):
    curve = su2_geodesic_controls(y1)
    seq = trotter_discretize(curve, TrotterPlan(500, curve.duration, 2))
    ref = time_ordered_exponential(curve, resolution=20000)
    assert np.linalg.norm(endpoint(seq) - ref) < 1e-5
    assert np.max(np.abs(seq.angles)) < 2 * curve.duration / 500


def test_trotter_local_order(y1):
    t = 0.9
    deltas = [0.1, 0.05, 0.025, 0.0125]
    errs = []
    for d in deltas:
        piece = ControlCurve(XZ, d, lambda s: y1.controls(t + s))
        exact = y1.point(t).conj().T @ y1.point(t + d)
        errs.append(np.linalg.norm(endpoint(trotter_discretize(piece, TrotterPlan(1, d, 2))) - exact, 2))
    assert loglog_slope(deltas, errs) == pytest.approx(3.0, abs=0.2)


def test_trotter_global_order(y1):
    curve = su2_geodesic_controls(y1)
    Ms = [25, 50, 100, 200]
    errs = [np.linalg.norm(endpoint(trotter_discretize(curve, TrotterPlan(M, curve.duration, 2))) - y1.endpoint(), 2) for M in Ms]
    assert loglog_slope(Ms, errs) == pytest.approx(-2.0, abs=0.2)


def test_trotter_energy_richardson(y1):
    """``sum alpha^2 = E / M + O(M^-2)`` for the merged palindrome's energy density."""
    curve = su2_geodesic_controls(y1)
    E = energy(curve)

    def scaled(M):
        seq = trotter_discretize(curve, TrotterPlan(M, curve.duration, 2))
        # each segment spends c_x^2 D^2 / 2 + c_z^2 D^2 on the palindrome
        return seq.local_sum() * M / curve.duration

    # the palindrome halves the outer generator, so weight x-controls accordingly
    def weighted(t):
        cx, cz = curve.controls(t)
        return cx * cx / 2 + cz * cz

    from scipy.integrate import quad

    target = quad(weighted, 0, curve.duration, epsabs=1e-12)[0]
    a, b = scaled(100), scaled(200)
    richardson = (4 * b - a) / 3
    assert abs(richardson - target) < 1e-6
    assert abs(b - target) < abs(a - target)
    assert target <= E


# -- compilation strategies ----------------------------------------------------------------------

def test_fuse_merges_neighbours():
    seq = RotationSequence(XZ, ((0, 0.1), (0, 0.2), (1, 0.3), (0, 0.1), (0, -0.1)))
    fused = fuse_adjacent(seq)
    assert [(s.generator_index, round(s.angle, 12)) for s in fused.steps] == [(0, 0.3), (1, 0.3)]
    np.testing.assert_allclose(endpoint(fused), endpoint(seq), atol=1e-14)


def test_rebalance_fills_budget_and_lowers_sum(rng):
    seq = RotationSequence(XZ, tuple((i % 2, float(rng.normal())) for i in range(7)))
    out = rebalance(seq, 40)
    assert len(out) == 40
    assert out.local_sum() < seq.local_sum()
    np.testing.assert_allclose(endpoint(out), endpoint(seq), atol=1e-12)
    with pytest.raises(ValidationError):
        rebalance(seq, 3)


@pytest.mark.parametrize("strategy", ["trotter", "fused", "balanced"])
def test_compile_strategies_share_endpoint(y1, strategy):
    curve = su2_geodesic_controls(y1)
    base = compile_curve(curve, 300, "trotter")
    seq = compile_curve(curve, 300, strategy)
    assert len(seq) <= 300
    np.testing.assert_allclose(endpoint(seq), endpoint(base), atol=1e-11)


def test_balanced_lowers_local_sum(y1):
    curve = su2_geodesic_controls(y1)
    sums = [compile_curve(curve, 500, s).local_sum() for s in ("trotter", "fused", "balanced")]
    # fusing trades steps for larger angles; rebalancing spends the freed budget
    assert sums[2] < sums[0] < sums[1]


def test_unknown_strategy():
    with pytest.raises(ValidationError):
        compile_curve(const((1.0, 0.0)), 10, "magic")


@pytest.mark.parametrize("strategy", ["trotter", "balanced"])
def test_targeted_compile_is_exact(y1, strategy):
    curve = su2_geodesic_controls(y1)
    target = pauli_rotation(PauliTerm("Y"), 1.0)
    plain = compile_curve(curve, 500, strategy)
    exact = compile_curve(curve, 500, strategy, target=target)
    assert np.linalg.norm(endpoint(plain) - target) > 1e-6
    assert np.linalg.norm(endpoint(exact) - target) <= 1e-12
    assert [s.generator_index for s in exact.steps] == [s.generator_index for s in plain.steps]
    # the fix-up is a perturbation of the order of the product-formula error
    assert np.max(np.abs(exact.angles - plain.angles)) < 1e-5
    assert exact.local_sum() == pytest.approx(plain.local_sum(), rel=1e-3)


def test_correct_endpoint_random_target(rng):
    frame = GeneratorSet.parse("X,Z")
    seq = RotationSequence(frame, tuple((i % 2, float(rng.normal())) for i in range(12)))
    nudge = pauli_rotation(PauliTerm("Y"), 0.01) @ pauli_rotation(PauliTerm("X"), -0.02)
    target = endpoint(seq) @ nudge
    fixed = correct_endpoint(seq, target)
    np.testing.assert_allclose(endpoint(fixed), target, atol=1e-12)


def test_correct_endpoint_unreachable():
    # a pure-X program cannot reach a Z rotation
    seq = RotationSequence(GeneratorSet.parse("X"), ((0, 0.3), (0, 0.2)))
    with pytest.raises(ValidationError):
        correct_endpoint(seq, pauli_rotation(PauliTerm("Z"), 0.5))
