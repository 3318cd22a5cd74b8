from __future__ import annotations

import xml.etree.ElementTree as ET

import numpy as np
import pytest

from socnav import data
from socnav.errors import LengthMismatchError, ScenarioSetMismatchError
from socnav.evaluation import (
    Metrics,
    compare,
    displacement_errors,
    evaluate_global,
    evaluate_local,
    passing_side,
    plan_min_clearance,
    scenario_set_digest,
)
from socnav.planners import GlobalPlan
from socnav.sim import (
    Obstacle,
    SamplingConfig,
    Scenario,
    SfmParams,
    Vec2,
    rollout,
    sample_scenario,
)
from socnav.svg import export_svg, render_svg

PARAMS = SfmParams()


def demo_plan(demo) -> GlobalPlan:
    """Treat an oracle demonstration as if it were a plan."""
    return GlobalPlan(phases=demo.phases.copy(), points=demo.positions.copy(),
                      stds=np.zeros_like(demo.positions), gamma=demo.gamma,
                      context=[])


def straight_plan(scenario, n=50) -> GlobalPlan:
    pts = np.linspace([scenario.start.x, scenario.start.y],
                      [scenario.goal.x, scenario.goal.y], n)
    return GlobalPlan(phases=np.linspace(0, 1, n), points=pts,
                      stds=np.zeros_like(pts), gamma=np.zeros(6), context=[])


@pytest.fixture(scope="module")
def oracle_setup():
    cfg = SamplingConfig(obstacle_count=(1, 1), p_dynamic=0.0)
    scenarios, demos = [], []
    i = 0
    while len(scenarios) < 8:
        sc = sample_scenario(np.random.default_rng([50, i]), cfg)
        i += 1
        d = rollout(sc, PARAMS)
        if d.reached_goal and not d.collided:
            scenarios.append(sc)
            demos.append(data.resample_demo(d))
    return scenarios, demos


class TestEvaluateGlobal:
    def test_oracle_self_consistency(self, oracle_setup):
        scenarios, demos = oracle_setup
        plans = [demo_plan(d) for d in demos]
        m = evaluate_global(plans, scenarios, demos)
        assert m.ade == 0.0 and m.fde == 0.0
        assert m.collision_free_rate == 1.0
        assert m.goal_reach_rate == 1.0
        assert m.n_scenarios == len(scenarios)

    def test_straight_line_through_obstacle_counts_collision(self):
        sc = Scenario(Vec2(1.0, 5.0), Vec2(9.0, 5.0),
                      (Obstacle(Vec2(5.0, 5.0), Vec2(0.0, 0.0), 0.4),))
        demo = rollout(sc, PARAMS)
        m = evaluate_global([straight_plan(sc)], [sc], [data.resample_demo(demo)])
        assert m.collision_free_rate == 0.0
        assert m.mean_min_clearance < 0.0

    def test_permutation_invariant_over_scenarios(self, oracle_setup):
        scenarios, demos = oracle_setup
        plans = [demo_plan(d) for d in demos]
        m1 = evaluate_global(plans, scenarios, demos)
        order = np.random.default_rng(0).permutation(len(plans))
        m2 = evaluate_global([plans[i] for i in order],
                             [scenarios[i] for i in order],
                             [demos[i] for i in order])
        for name in ("goal_reach_rate", "collision_free_rate", "ade", "fde",
                     "mean_min_clearance", "mean_path_length_ratio"):
            assert getattr(m1, name) == pytest.approx(getattr(m2, name), abs=1e-12)

    def test_length_mismatch(self, oracle_setup):
        scenarios, demos = oracle_setup
        plans = [demo_plan(d) for d in demos]
        with pytest.raises(LengthMismatchError):
            evaluate_global(plans[:-1], scenarios, demos)


class TestEvaluateLocal:
    def test_oracle_traces_clean(self, oracle_setup):
        scenarios, demos = oracle_setup
        m = evaluate_local(demos, scenarios, oracle_demos=demos)
        assert m.goal_reach_rate == 1.0
        assert m.collision_free_rate == 1.0
        assert m.ade == 0.0

    def test_optional_oracle_defaults_zero(self, oracle_setup):
        scenarios, demos = oracle_setup
        m = evaluate_local(demos, scenarios)
        assert m.ade == 0.0 and m.fde == 0.0

    def test_length_mismatch(self, oracle_setup):
        scenarios, demos = oracle_setup
        with pytest.raises(LengthMismatchError):
            evaluate_local(demos[:-1], scenarios)


class TestDisplacement:
    def test_identical_zero(self):
        ph = np.linspace(0, 1, 30)
        pts = np.stack([ph * 3, ph * 4], axis=1)
        ade, fde = displacement_errors(ph, pts, ph, pts)
        assert ade == 0.0 and fde == 0.0

    def test_constant_offset(self):
        ph = np.linspace(0, 1, 30)
        pts = np.stack([ph, ph], axis=1)
        ade, fde = displacement_errors(ph, pts, ph, pts + [0.3, 0.4])
        assert ade == pytest.approx(0.5, abs=1e-9)
        assert fde == pytest.approx(0.5, abs=1e-9)


class TestCompare:
    def make_metrics(self, cfree=0.9, digest="abc") -> Metrics:
        return Metrics(goal_reach_rate=1.0, collision_free_rate=cfree,
                       mean_min_clearance=0.3, mean_path_length_ratio=1.05,
                       ade=0.1, fde=0.05, n_scenarios=10, scenario_digest=digest)

    def test_identical_zero_deltas(self):
        m = self.make_metrics()
        report = compare(m, m)
        assert all(v == 0.0 for v in report["deltas"].values())
        assert not report["flags"]["cnp_collision_free_rate_higher"]

    def test_margin_flag(self):
        report = compare(self.make_metrics(0.90), self.make_metrics(0.70))
        assert report["flags"]["cnp_collision_free_rate_higher"]
        assert report["flags"]["cnp_beats_baseline_margin"]
        report = compare(self.make_metrics(0.80), self.make_metrics(0.70))
        assert not report["flags"]["cnp_beats_baseline_margin"]

    def test_scenario_set_guard(self):
        with pytest.raises(ScenarioSetMismatchError):
            compare(self.make_metrics(digest="abc"), self.make_metrics(digest="xyz"))
        bad_n = self.make_metrics()
        bad_n.n_scenarios = 11
        with pytest.raises(ScenarioSetMismatchError):
            compare(self.make_metrics(), bad_n)

    def test_digest_depends_on_scenarios(self, oracle_setup):
        scenarios, _ = oracle_setup
        assert scenario_set_digest(scenarios) != scenario_set_digest(scenarios[::-1])


class TestPassingSide:
    def test_left_and_right(self):
        sc = Scenario(Vec2(0.0, 5.0), Vec2(10.0, 5.0),
                      (Obstacle(Vec2(5.0, 5.0), Vec2(0.0, 0.0), 0.3),))
        ph = np.linspace(0, 1, 50)
        above = np.stack([ph * 10, 5.0 + np.sin(ph * np.pi)], axis=1)
        below = np.stack([ph * 10, 5.0 - np.sin(ph * np.pi)], axis=1)
        assert passing_side(above, sc) == 1
        assert passing_side(below, sc) == -1


class TestPlanClearance:
    def test_hand_case(self):
        sc = Scenario(Vec2(0.0, 0.0), Vec2(10.0, 0.0),
                      (Obstacle(Vec2(5.0, 1.0), Vec2(0.0, 0.0), 0.3),))
        pts = np.array([[0.0, 0.0], [5.0, 0.0], [10.0, 0.0]])
        c = plan_min_clearance(pts, sc, robot_radius=0.2)
        assert c == pytest.approx(0.5, abs=1e-12)


class TestSvg:
    def test_empty_paths_valid_xml(self, oracle_setup, tmp_path):
        scenarios, _ = oracle_setup
        out = tmp_path / "scene.svg"
        export_svg(scenarios[0], {}, out)
        root = ET.parse(out).getroot()
        assert root.tag.endswith("svg")

    def test_byte_identical(self, oracle_setup, tmp_path):
        scenarios, demos = oracle_setup
        paths = {"oracle": demos[0].positions}
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        export_svg(scenarios[0], paths, a)
        export_svg(scenarios[0], paths, b)
        assert a.read_bytes() == b.read_bytes()

    def test_named_paths_distinct_styles(self, oracle_setup):
        scenarios, demos = oracle_setup
        svg = render_svg(scenarios[0], {"CNP": demos[0].positions,
                                        "NN": demos[0].positions + 0.1})
        assert "CNP" in svg and "NN" in svg
        root = ET.fromstring(svg)
        ns = "{http://www.w3.org/2000/svg}"
        polylines = root.findall(f"{ns}polyline")
        styles = {(p.get("stroke"), p.get("stroke-dasharray")) for p in polylines}
        assert len(styles) >= 2

    def test_dynamic_obstacle_gets_dashed_track(self):
        from socnav.sim import crossing_scenario

        svg = render_svg(crossing_scenario(), {})
        assert 'stroke-dasharray="5,5"' in svg
