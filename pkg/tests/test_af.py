import json

import numpy as np
import pytest

from focusplan import (
    ActuatorCalibration,
    ParameterDomainError,
    PlanValidationError,
    SimulatedScene,
    autofocus,
    blur_diameter,
    coarse_search,
    fine_search,
    hyperfocal,
    near_limit,
    object_to_image,
    sharpness,
)
from focusplan.af import coarse_evaluate


def slice_at(plan, index):
    return next(s for s in plan.slices if s.index == index)


class TestSharpness:
    def test_peak_is_one(self, experiment):
        scene = SimulatedScene(400.0)
        assert sharpness(scene, object_to_image(400.0, 25), experiment) == pytest.approx(1.0)

    def test_half_at_dof_boundary(self, experiment):
        edge = near_limit(421.1, experiment)
        scene = SimulatedScene(edge)
        assert sharpness(scene, object_to_image(421.1, 25), experiment) == pytest.approx(0.5, rel=1e-9)

    def test_frozen_value(self, experiment):
        # b = 0.0180942 from the blur oracle; 1 / (1 + (b / c)^2)
        score = sharpness(SimulatedScene(400.0), object_to_image(421.1, 25), experiment)
        assert score == pytest.approx(0.549903, abs=1e-6)
        b = blur_diameter(400.0, 421.1, experiment)
        assert score == pytest.approx(1 / (1 + (b / 0.02) ** 2), rel=1e-9)

    def test_unimodal(self, experiment):
        scene = SimulatedScene(600.0)
        d_i = np.linspace(25.05, 27.9, 2001)
        s = np.array([sharpness(scene, x, experiment) for x in d_i])
        peak = int(np.argmax(s))
        assert np.all(np.diff(s[: peak + 1]) >= 0)
        assert np.all(np.diff(s[peak:]) <= 0)
        assert d_i[peak] == pytest.approx(object_to_image(600.0, 25), abs=0.002)

    def test_noise_is_bounded_and_repeatable(self, experiment):
        scene = SimulatedScene(600.0, noise_sigma=0.5, seed=3)
        values = [sharpness(scene, 25.0 + k * 0.01, experiment) for k in range(1, 200)]
        assert all(0 < v <= 1 for v in values)
        again = [sharpness(scene, 25.0 + k * 0.01, experiment) for k in range(1, 200)]
        assert values == again
        other = SimulatedScene(600.0, noise_sigma=0.5, seed=4)
        assert values != [sharpness(other, 25.0 + k * 0.01, experiment) for k in range(1, 200)]

    def test_scene_validation(self):
        with pytest.raises(ParameterDomainError):
            SimulatedScene(100.0, noise_sigma=-1)


class TestCoarse:
    @pytest.mark.parametrize(
        "distance, step",
        [(400.0, 5), (260.0, 0), (250.0, -1)],
    )
    def test_winner(self, table_plan, cal10, distance, step):
        assert coarse_search(table_plan, SimulatedScene(distance), cal10) == step

    def test_hyperfocal_scene(self, table_plan, cal10):
        H = hyperfocal(table_plan.spec)
        assert coarse_search(table_plan, SimulatedScene(H), cal10) == 13

    def test_argmax_matches_blur_oracle(self, table_plan, cal10):
        for d in (300.0, 1000.0, 3000.0):
            blurs = [blur_diameter(d, s.focus_distance, table_plan.spec) for s in table_plan.slices]
            expected = table_plan.slices[int(np.argmin(blurs))].index
            assert coarse_search(table_plan, SimulatedScene(d), cal10) == expected

    def test_ties_go_to_nearer_slice(self, table_plan):
        # 3-bit actuator maps neighbouring slices onto one code, so their scores tie
        cal = ActuatorCalibration(27.78, 25.09, 7)
        evals = coarse_evaluate(table_plan, SimulatedScene(4000.0), cal)
        winner = coarse_search(table_plan, SimulatedScene(4000.0), cal, evals)
        best = max(score for _, score in evals)
        tied = [s.index for s, (_, sc) in zip(table_plan.slices, evals) if sc == best]
        assert len(tied) > 1
        assert winner == min(tied)

    def test_empty_plan(self, table_plan, cal10):
        import dataclasses

        with pytest.raises(PlanValidationError):
            coarse_search(dataclasses.replace(table_plan, slices=()), SimulatedScene(400.0), cal10)

    def test_containment_misses_are_quantization_only(self, table_plan, cal10):
        # near a slice boundary a half-code shift can hand the win to the neighbour
        spec = table_plan.spec
        margin = 2 * (spec.focal_length / spec.f_number) * (cal10.code_step / 2) / spec.focal_length
        rng = np.random.default_rng(11)
        misses = 0
        for d in rng.uniform(260, 6000, 2000):
            s = slice_at(table_plan, coarse_search(table_plan, SimulatedScene(float(d)), cal10))
            if not (s.near <= d <= s.far):
                misses += 1
                assert blur_diameter(float(d), s.focus_distance, spec) <= spec.coc + margin
        assert misses <= 10

    def test_fine_calibration_contains_everything(self, table_plan):
        fine = ActuatorCalibration(27.78, 25.09, 2**24)
        rng = np.random.default_rng(12)
        for d in rng.uniform(260, 6000, 2000):
            s = slice_at(table_plan, coarse_search(table_plan, SimulatedScene(float(d)), fine))
            assert s.near <= d <= s.far


class TestFine:
    def test_converges_near_truth(self, table_plan, cal10):
        scene = SimulatedScene(400.0)
        trace = fine_search(table_plan, 5, scene, cal10, 30)
        assert abs(trace.fine_result - object_to_image(400.0, 25)) <= cal10.code_step
        assert trace.final_blur <= (25 / 4.6) * cal10.code_step / 26.6
        assert 3 <= len(trace.evaluations) <= 30
        assert trace.coarse_winner == 5

    def test_plan_position_gives_code_limited_blur(self, table_plan, cal10):
        s = slice_at(table_plan, 7)
        trace = fine_search(table_plan, 7, SimulatedScene(s.focus_distance), cal10, 30)
        assert trace.final_blur <= (25 / 4.6) * (cal10.code_step / 2) / s.lens_distance * (1 + 1e-9)

    def test_random_distances_within_coc(self, table_plan, cal10):
        rng = np.random.default_rng(5)
        for d in rng.uniform(260, 6000, 100):
            trace = autofocus(table_plan, SimulatedScene(float(d)), cal10)
            assert trace.final_blur <= table_plan.spec.coc
            assert len(trace.evaluations) <= 30

    def test_budget_respected(self, table_plan, cal10):
        trace = fine_search(table_plan, 0, SimulatedScene(270.0), cal10, max_evals=4)
        assert len(trace.evaluations) <= 4

    def test_argument_errors(self, table_plan, cal10):
        with pytest.raises(ParameterDomainError):
            fine_search(table_plan, 99, SimulatedScene(400.0), cal10)
        with pytest.raises(ParameterDomainError):
            fine_search(table_plan, 5, SimulatedScene(400.0), cal10, max_evals=2)

    def test_deterministic_serialization(self, table_plan, cal10):
        scene = SimulatedScene(777.0, noise_sigma=0.05, seed=42)
        a = autofocus(table_plan, scene, cal10).to_json()
        b = autofocus(table_plan, scene, cal10).to_json()
        assert a == b
        doc = json.loads(a)
        assert set(doc) >= {"evaluations", "coarse_winner", "final_lens_distance_mm", "final_blur_mm"}

    def test_noise_robustness(self, table_plan, cal10):
        rng = np.random.default_rng(2024)
        ok = 0
        for k, d in enumerate(rng.uniform(260, 6000, 100)):
            trace = autofocus(table_plan, SimulatedScene(float(d), 0.02, seed=k), cal10)
            ok += trace.final_blur <= table_plan.spec.coc
        assert ok >= 95
