import json
import os
import subprocess

import pytest

import gridcep

CASE_DIR = os.environ.get("GRIDCEP_CASE_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "cases"))
ISLAND3 = os.path.join(CASE_DIR, "island3")


def test_version():
    assert gridcep.__version__


def test_scale_and_prices():
    scaled = gridcep.scale_load([1000.0] * 24, 1.07)
    assert all(abs(v - 1070.0) < 1e-9 for v in scaled)

    price = gridcep.fuel_price("affine_on_index", intercept=6.5, slope=1.15, index_price=2.24)
    assert abs(price - 9.076) < 1e-12

    with pytest.raises(gridcep.EngineError):
        gridcep.fuel_price("affine_on_index", intercept=-5.0, slope=0.1, index_price=1.0)


def test_outage_series_statistics():
    series = gridcep.generate_outage_series(rate=0.2, duration=40, horizon=2208, seed=7)
    zeros = series.count(0)
    assert abs(zeros / 2208 - 0.2) < 0.02
    again = gridcep.generate_outage_series(rate=0.2, duration=40, horizon=2208, seed=7)
    assert series == again


def test_load_validate_and_simulate():
    bundle = gridcep.load_case(ISLAND3, expand_candidates=False)
    assert bundle.system.num_buses == 3
    assert len(bundle.scenarios) == 2
    assert gridcep.validate_system(bundle.system) == []

    sol = gridcep.solve_operational(bundle.system, bundle.scenarios[0])
    assert sol["status"] in ("optimal", "gap_limit")
    assert sol["production_cost"] > 0


def test_ef_and_evaluate_round_trip():
    bundle = gridcep.load_case(ISLAND3)
    result = gridcep.solve_ef(bundle.system, bundle.scenarios, mip_gap=1e-6)
    plan = result["plan"]
    report = gridcep.evaluate_plan(bundle.system, plan, bundle.scenarios, mip_gap=1e-6)
    assert report["overall_cost"] == pytest.approx(result["objective"], rel=1e-3)

    as_json = json.loads(plan.to_json())
    assert set(as_json) == {"thermal_builds", "renewable_builds", "storage_builds", "retirements"}


def test_ph_produces_a_certificate():
    bundle = gridcep.load_case(ISLAND3)
    state = gridcep.run_ph(bundle.system, bundle.scenarios, max_iterations=50, workers=1)
    assert state["iterations"] <= 50
    assert state["incumbent_objective"] >= state["lower_bound"] - 1e-6
    assert state["gap"] < 0.05


def test_cli_is_wired():
    cli = os.environ.get("GRIDCEP_CLI_PATH")
    if not cli:
        pytest.skip("CLI path not provided")
    proc = subprocess.run([cli, "validate", ISLAND3], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "case ok" in proc.stdout
