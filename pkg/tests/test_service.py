"""Tests for the HTTP service endpoints."""
import dataclasses

import pytest
from fastapi.testclient import TestClient

from secnet.analytic import (
    combine_throughput,
    coverage_probability,
    secrecy_probability,
)
from secnet.config import load_config
from secnet.service import create_app
from secnet.service.schemas import SystemModel
from secnet.simulator import SimConfig, compare, estimate_all
from secnet.sweep import SweepSpec, csv_text, run_sweep

client = TestClient(create_app())

BASE = load_config(None, env={}).params
SYSTEM = SystemModel.from_params(BASE).model_dump()
SIM = {"trials": 30, "master_seed": 4, "window_radius": 1200.0, "confidence_level": 0.99}
SIM_CFG = SimConfig(trials=30, master_seed=4, window_radius=1200.0)


def test_health():
    response = client.get("/v1/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["service"] == "secnet"
    assert body["version"]


def test_wire_model_round_trips_params():
    assert SystemModel.from_params(BASE).to_params() == BASE


def test_analytic_matches_library():
    response = client.post("/v1/analytic", json={"system": SYSTEM})
    assert response.status_code == 200
    body = response.json()
    cp = coverage_probability(BASE)
    sp = secrecy_probability(BASE)
    assert body["cp"] == cp
    assert body["sp"] == sp
    assert body["st"] == combine_throughput(BASE, cp, sp)


def test_simulate_matches_library():
    response = client.post("/v1/simulate", json={"system": SYSTEM, "sim": SIM})
    assert response.status_code == 200
    body = response.json()
    cp, sp, st_product, st_joint = estimate_all(BASE, SIM_CFG)
    assert body["trials"] == 30 and body["seed"] == 4
    assert body["cp"] == {"value": cp.value, "ci_low": cp.ci_low, "ci_high": cp.ci_high}
    assert body["sp"] == {"value": sp.value, "ci_low": sp.ci_low, "ci_high": sp.ci_high}
    assert body["st_product"] == st_product
    assert body["st_joint"] == st_joint


def test_compare_matches_library_report():
    payload = {"system": SYSTEM, "sim": SIM, "tolerance": 0.5}
    response = client.post("/v1/compare", json=payload)
    assert response.status_code == 200
    body = response.json()
    report = compare(BASE, SIM_CFG, tolerance=0.5)
    assert body == report
    assert list(body) == list(report)


def test_sweep_explicit_spec_matches_library():
    payload = {
        "swept_parameter": "phi",
        "grid": [0.25, 0.5],
        "base": SYSTEM,
        "backends": "analytic",
        "sim": SIM,
    }
    response = client.post("/v1/sweep", json=payload)
    assert response.status_code == 200
    body = response.json()

    spec = SweepSpec(
        swept_parameter="phi", grid=(0.25, 0.5), base=BASE, cfg=SIM_CFG,
        backends="analytic",
    )
    result = run_sweep(spec)
    assert body["summary"] == result.summary
    assert body["errors"] == []
    assert len(body["rows"]) == 2
    for got, row in zip(body["rows"], result.rows):
        expected = dataclasses.asdict(row)
        expected.pop("wall_ms"), got.pop("wall_ms")
        assert got == expected
    # the csv field is the library serialization, wall_ms column aside
    mask = lambda text: [line.rsplit(",", 1)[0] for line in text.splitlines()]
    assert mask(body["csv"]) == mask(csv_text(result.rows))


def test_sweep_preset_runs_all_branches():
    payload = {
        "preset": "fig4",
        "backends": "simulate",
        "sim": {"trials": 2, "master_seed": 1, "window_radius": 500.0,
                "confidence_level": 0.99},
    }
    response = client.post("/v1/sweep", json=payload)
    assert response.status_code == 200
    body = response.json()
    assert len(body["rows"]) == 14
    assert {row["swept_name"] for row in body["rows"]} == {"N[d=30,M=8]", "N[d=50,M=8]"}
    assert all(row["cp_analytic"] is None for row in body["rows"])
    assert all(row["cp_sim"] is not None for row in body["rows"])


@pytest.mark.parametrize(
    "payload",
    [
        {"system": {**SYSTEM, "phi": 1.5}},  # library-level rejection
        {"system": {**SYSTEM, "surprise": 1}},  # unknown field
        {},  # missing body fields
    ],
)
def test_analytic_invalid_requests_get_422(payload):
    assert client.post("/v1/analytic", json=payload).status_code == 422


def test_sweep_rejects_mixed_request_shape():
    payload = {"preset": "fig2", "swept_parameter": "phi", "grid": [0.5], "base": SYSTEM}
    assert client.post("/v1/sweep", json=payload).status_code == 422


def test_quadrature_domain_error_maps_to_422():
    payload = {"system": SYSTEM, "quad": {"r_max": 60.0}}
    response = client.post("/v1/analytic", json=payload)
    assert response.status_code == 422
    assert "r_max" in response.json()["detail"]


def test_non_convergence_maps_to_500():
    quad = {"rel_tol": 1e-15, "abs_tol": 1e-300, "r_max": 4000.0,
            "max_subdivisions": 1}
    response = client.post("/v1/analytic", json={"system": SYSTEM, "quad": quad})
    assert response.status_code == 500
    assert "detail" in response.json()
