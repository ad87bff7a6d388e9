import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from swabsim.errors import FitError, InputError, ParameterError
from swabsim.tactile import (
    CalibrationModel,
    ContactFeature,
    SensorGeometry,
    TactileFrame,
    TactileSensor,
    expected_feature,
    extract_contact,
    feature_to_force,
    fit_offset_calibration,
    force_to_offset,
    load_frame,
    offset_to_force,
    pressure_to_force,
    render_disk,
    render_frame,
    save_frame,
)

GEOM = SensorGeometry()


def feature(d, geometry=GEOM):
    return extract_contact(render_frame(d, geometry, noise_sigma=0.0))


def test_rest_frame_centered_with_rest_radius():
    f = feature(np.zeros(3))
    assert f.present
    assert np.allclose(f.as_array(), [32, 32, 8], atol=[0.5, 0.5, 0.25])


def test_lateral_shift_at_one_and_a_half_px_per_mm():
    g = SensorGeometry(width=96, height=64, pixel_per_mm=1.5)
    f0, f1 = feature([0, 0, 0], g), feature([10, 0, 0], g)
    assert f1.center_u - f0.center_u == pytest.approx(15, abs=0.5)
    assert f1.center_v == pytest.approx(f0.center_v, abs=0.5)


def test_axial_push_grows_radius_only():
    f0, f1 = feature([0, 0, 0]), feature([0, 0, 6])
    assert f1.radius > f0.radius
    assert np.allclose([f1.center_u, f1.center_v], [f0.center_u, f0.center_v], atol=1e-6)


def test_blank_frame_has_no_contact():
    assert not extract_contact(TactileFrame(np.zeros((64, 64)))).present


def test_rendered_disk_round_trip():
    f = extract_contact(TactileFrame(render_disk(64, 64, (32, 32), 5)))
    assert f.center_u == pytest.approx(32, abs=0.5)
    assert f.center_v == pytest.approx(32, abs=0.5)
    assert f.radius == pytest.approx(5, abs=0.25)


def test_larger_component_wins():
    big_r, small_r = np.sqrt(200 / np.pi), np.sqrt(50 / np.pi)
    img = np.maximum(render_disk(64, 64, (44, 44), big_r), render_disk(64, 64, (14, 14), small_r))
    f = extract_contact(TactileFrame(img))
    assert (f.center_u, f.center_v) == pytest.approx((44, 44), abs=0.5)
    assert f.radius == pytest.approx(big_r, abs=0.25)


def test_equal_components_tie_to_smaller_uv():
    img = np.maximum(render_disk(64, 64, (46, 20), 6), render_disk(64, 64, (16, 40), 6))
    f = extract_contact(TactileFrame(img))
    assert f.center_u == pytest.approx(16, abs=0.5)


def test_tiny_specks_ignored():
    img = np.zeros((64, 64))
    img[10, 10] = img[40, 50] = 1.0
    assert not extract_contact(TactileFrame(img)).present


@given(
    st.floats(-40, 40), st.floats(-40, 40), st.floats(-15, 30),
)
def test_noise_free_round_trip_over_working_range(dx, dy, dz):
    d = np.array([dx, dy, dz])
    frame = render_frame(d, GEOM, noise_sigma=0.0)
    assume(not frame.saturated)
    f = extract_contact(frame)
    u, v, r = expected_feature(d, GEOM)
    assert abs(f.center_u - u) <= 0.5 and abs(f.center_v - v) <= 0.5
    assert abs(f.radius - r) <= 0.25


@given(st.integers(-8, 8), st.integers(-8, 8), st.floats(20, 44), st.floats(20, 44), st.floats(4, 10))
def test_translation_equivariance(ku, kv, u, v, r):
    img = render_disk(64, 64, (u, v), r)
    base = extract_contact(TactileFrame(img))
    moved = extract_contact(TactileFrame(np.roll(img, (kv, ku), axis=(0, 1))))
    assert moved.center_u - base.center_u == pytest.approx(ku, abs=1e-9)
    assert moved.center_v - base.center_v == pytest.approx(kv, abs=1e-9)
    assert moved.radius == pytest.approx(base.radius, abs=1e-9)


def test_saturation_flags():
    assert render_frame([46, 0, 0], noise_sigma=0).saturated
    assert render_frame([0, 0, -20], noise_sigma=0).saturated  # radius below 2 px
    assert not render_frame([20, -20, 10], noise_sigma=0).saturated


def test_noise_is_seeded():
    a = render_frame([1, 2, 3], noise_seed=5).intensities
    b = render_frame([1, 2, 3], noise_seed=5).intensities
    c = render_frame([1, 2, 3], noise_seed=6).intensities
    assert np.array_equal(a, b) and not np.array_equal(a, c)


def test_frame_validation():
    with pytest.raises(InputError):
        TactileFrame(np.full((4, 4), 1.5))
    with pytest.raises(InputError):
        render_frame([0, 0, np.nan])
    frame = render_frame([0, 0, 0])
    with pytest.raises(ValueError):
        frame.intensities[0, 0] = 0.3


@pytest.mark.parametrize("binary", [True, False])
def test_frame_pgm_round_trip(tmp_path, binary):
    frame = render_frame([5, -3, 2], noise_seed=1)
    path = tmp_path / "f.pgm"
    save_frame(frame, path, binary=binary)
    back = load_frame(path)
    assert np.abs(back.intensities - frame.intensities).max() <= 0.5 / 255 + 1e-12
    assert extract_contact(back).as_array() == pytest.approx(extract_contact(frame).as_array(), abs=0.05)


def test_offset_to_force_examples():
    assert offset_to_force(0.0) == 0.0
    assert offset_to_force(40, CalibrationModel(offset_quadratic=(1e-4, 5e-3, 0))) == pytest.approx(0.36)
    f = offset_to_force(np.array([10.0, 45.0]))
    assert f[0] <= 0.05 and f[1] >= 0.35


def test_offset_to_force_domain():
    with pytest.raises(InputError):
        offset_to_force(-1.0)
    with pytest.warns(UserWarning):
        offset_to_force(50.0)


@given(st.floats(0, 0.38))
def test_force_to_offset_inverts(force):
    assert offset_to_force(force_to_offset(force)) == pytest.approx(force, abs=1e-12)


def test_force_monotone_in_lateral_deflection():
    cal = CalibrationModel()
    rest = TactileSensor(noise_sigma=0).rest_feature
    forces = [feature_to_force(feature([d, 0, 0]), rest, cal) for d in np.linspace(0, 45, 46)]
    assert np.all(np.diff(forces) > 0)


def test_pressure_anchor_points():
    assert pressure_to_force(0, "x") == 0.0
    assert 0.15 <= pressure_to_force(19, "x") <= 0.3
    assert 0.15 <= pressure_to_force(19, "y") <= 0.3
    assert pressure_to_force(16, "z") >= 2.0
    with pytest.raises(InputError):
        pressure_to_force(31, "x")
    with pytest.raises(InputError):
        pressure_to_force(10, "w")


def test_calibration_model_invariants():
    with pytest.raises(ParameterError):
        CalibrationModel(offset_quadratic=(1e-4, 1e-3, 0.01))
    with pytest.raises(ParameterError):
        CalibrationModel(offset_quadratic=(-1e-3, 1e-3, 0))


def test_fit_recovers_noiseless_quadratic():
    x = np.linspace(0, 45, 30)
    coef = (1.2e-4, 3.1e-3, 0.02)
    fit = fit_offset_calibration(np.column_stack([x, np.polyval(coef, x)]))
    assert np.allclose(fit, coef, atol=1e-6)
    resid = np.polyval(fit, x) - np.polyval(coef, x)
    assert np.abs(resid).max() < 1e-9


def test_fit_of_line_has_no_curvature():
    x = np.linspace(0, 45, 20)
    c2, c1, c0 = fit_offset_calibration(np.column_stack([x, 0.004 * x + 0.01]))
    assert abs(c2) < 1e-6 and c1 == pytest.approx(0.004, abs=1e-6)


def test_fit_through_origin_pins_constant():
    x = np.linspace(1, 45, 20)
    assert fit_offset_calibration(np.column_stack([x, 1e-4 * x**2 + 2e-3 * x]), through_origin=True)[2] == 0.0


def test_noisy_fit_mae(rng):
    x = rng.uniform(10, 45, 160)
    f = offset_to_force(x)
    fit = fit_offset_calibration(np.column_stack([x, f + rng.normal(0, 0.02, x.size)]))
    assert np.mean(np.abs(np.polyval(fit, x) - f)) <= 0.052


@pytest.mark.parametrize("samples", [[(1, 1), (1, 2), (1, 3)], [(1, 1), (2, 2)], [[1, 2, 3]]])
def test_fit_rejects_degenerate_data(samples):
    with pytest.raises(FitError):
        fit_offset_calibration(samples)


def test_sensor_desired_feature_matches_rendering():
    s = TactileSensor(noise_sigma=0.0)
    d = [-10, 12, 5]
    _, f = s.read(d)
    assert f.as_array() == pytest.approx(s.desired_feature(d).as_array(), abs=0.25)


def test_absent_feature_reads_zero_force():
    assert feature_to_force(ContactFeature.absent(), ContactFeature(32, 32, 8)) == 0.0
