import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from swabsim.avf import SamplingPhase, run_sampling
from swabsim.dynamics import AdmittanceParams
from swabsim.errors import InputError, ParameterError, ScenarioFault
from swabsim.plant import (
    CavityModel,
    Disturbance,
    Plant,
    SwabState,
    Wall,
    axis_feature_mapping,
    step_plant,
    wall_contact,
)
from swabsim.tactile import CalibrationModel, TactileSensor, force_to_offset

unit = arrays(float, 3, elements=st.floats(-1, 1)).filter(lambda v: np.linalg.norm(v) > 0.1)


def test_free_space_never_deflects(rng):
    swab = SwabState(np.zeros(3))
    for v in rng.normal(size=(50, 3)):
        swab = step_plant(swab, v, CavityModel.free_space())
        assert not swab.tip_deflection.any()


def test_two_mm_past_left_wall():
    cav = CavityModel.default()
    left = cav.wall("Left")
    inside = left.point - 0.002 * left.normal
    swab = step_plant(SwabState(inside), np.zeros(3), cav)
    assert np.allclose(swab.tip_deflection, 2.0 * left.normal)
    assert np.allclose(swab.contact_point, left.point)


@given(arrays(float, 3, elements=st.floats(-0.02, 0.02)), unit, arrays(float, 3, elements=st.floats(-0.2, 0.2)))
def test_penetration_matches_halfspace_oracle(point, normal, velocity):
    wall = Wall("W", point, normal)
    cav = CavityModel((wall,))
    swab = step_plant(SwabState(np.zeros(3)), velocity, cav, dt=0.008)
    tip = velocity * 0.008
    n = normal / np.linalg.norm(normal)
    depth = max(0.0, -float(np.dot(tip - point, n)))
    assert np.linalg.norm(swab.tip_deflection) == pytest.approx(1000 * depth, abs=1e-9)
    # the projected contact point never sits strictly behind the wall
    assert wall.signed_distance(swab.contact_point) >= -1e-12


def test_patch_extent_limits_contact():
    cav = CavityModel.default()
    left = cav.wall("Left")
    far = left.point - 0.002 * left.normal + np.array([0.0, 0.0, 0.05])
    assert not wall_contact(far, cav)[1].any()


def test_excess_penetration_faults():
    cav = CavityModel.default()
    deep = cav.wall("Middle").point - 0.046 * cav.wall("Middle").normal
    with pytest.raises(ScenarioFault):
        step_plant(SwabState(deep), np.zeros(3), cav)


def test_overlapping_patches_rejected():
    with pytest.raises(ParameterError):
        CavityModel((Wall("A", [0, 0, 0], [0, 0, 1], 0.01), Wall("B", [0.001, 0, 0], [0, 0, 1], 0.01)))


def test_step_input_validation():
    with pytest.raises(InputError):
        step_plant(SwabState(np.zeros(3)), [np.inf, 0, 0], CavityModel.free_space())
    with pytest.raises(InputError):
        step_plant(SwabState(np.zeros(3)), np.zeros(3), CavityModel.free_space(), dt=0)


def test_axis_feature_mapping_examples():
    cal = CalibrationModel(pixel_per_mm=1.5)
    assert np.allclose(axis_feature_mapping([10, 0, 0], cal), [15, 0, 0])
    d = axis_feature_mapping([0, 0, 5], cal)
    assert d[0] == d[1] == 0 and d[2] > 0
    assert not axis_feature_mapping(np.zeros(3), cal).any()


def test_disturbance_window_and_deflection():
    d = Disturbance(0.1, 0.3, [0.05, 0, 0])
    assert not d.active(0.09) and d.active(0.1) and d.active(0.39) and not d.active(0.4)
    assert np.allclose(d.deflection_mm(), [force_to_offset(0.05), 0, 0])
    swab = step_plant(SwabState(np.zeros(3)), np.zeros(3), CavityModel.free_space(), [d], time=0.2)
    assert np.allclose(swab.tip_deflection, d.deflection_mm())


def test_plant_starts_with_tip_offset_along_approach():
    plant = Plant(CavityModel.default(), np.zeros(3))
    assert np.allclose(plant.swab.tip_position, [0, 0, -0.12])
    assert not plant.swab.in_contact


def _steady_offset(force):
    plant = Plant(CavityModel.free_space(), np.zeros(3), [Disturbance(0.1, 5.0, [force, 0, 0])])
    sensor = TactileSensor(noise_sigma=0.0)
    trace = run_sampling([SamplingPhase("Initial", duration_cap=1.0, dwell=10.0)], plant, sensor, AdmittanceParams())
    return np.mean([r.feature_delta[0] for r in trace.records[-25:]])


def test_small_disturbances_scale_linearly():
    a, b = _steady_offset(0.002), _steady_offset(0.004)
    assert a > 0
    assert b / a == pytest.approx(2.0, rel=0.05)
