import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from ssalab import GenSpec, ando_report, generate
from ssalab.service.app import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def ando_entries():
    a = ando_report().matrix_a.to_float()
    return {"dim": a.dim, "entries": a.entries.tolist()}


def spd_payload(seed, dims):
    a = generate(GenSpec("generic_spd", dims, seed))
    return {"dim": a.dim, "entries": a.entries.tolist()}


class TestHealthAndCatalog:
    def test_healthz(self, client):
        assert client.get("/healthz").json() == {"status": "ok"}

    def test_functions_listing(self, client):
        names = {f["name"] for f in client.get("/functions").json()["functions"]}
        assert {"log", "kappa", "f_p", "power"} <= names


class TestCheckEndpoint:
    def test_violated_fixture(self, client):
        r = client.post("/check", json={
            "matrix": ando_entries(), "partition": [1, 1, 1],
            "function": "neg_inverse", "ci": True,
        })
        assert r.status_code == 200
        data = r.json()
        assert data["holds"] is False
        assert data["gap"] == pytest.approx(-5 / 9, abs=1e-10)
        assert data["traces"]["B"] == pytest.approx(-212 / 9, abs=1e-9)
        assert data["diagnostics"]["decomposable"] is False

    def test_identity_holds(self, client):
        r = client.post("/check", json={
            "matrix": {"dim": 3, "entries": np.eye(3).tolist()},
            "partition": [1, 1, 1], "function": "log", "ci": True,
        })
        data = r.json()
        assert data["holds"] is True and data["equality"] is True

    def test_expression_function(self, client):
        r = client.post("/check", json={
            "matrix": spd_payload(5, (1, 2, 1)), "partition": [1, 2, 1],
            "expr": "-(x+1)*log(x+1)", "domain": "[0,inf)", "ci": True,
        })
        assert r.status_code == 200
        assert r.json()["holds"] is True

    def test_projected_form(self, client):
        r = client.post("/check", json={
            "matrix": spd_payload(6, (2, 1, 1)), "partition": [2, 1, 1],
            "function": "kappa", "form": "projected", "ci": True,
        })
        assert r.status_code == 200

    def test_asymmetric_matrix_rejected(self, client):
        r = client.post("/check", json={
            "matrix": {"dim": 2, "entries": [[1.0, 3.0], [0.0, 1.0]]},
            "partition": [1, 1, 0], "function": "log", "ci": True,
        })
        assert r.status_code == 400
        assert r.json()["error"] == "ShapeError"

    def test_indefinite_matrix_rejected(self, client):
        r = client.post("/check", json={
            "matrix": {"dim": 2, "entries": [[1.0, 2.0], [2.0, 1.0]]},
            "partition": [1, 1, 0], "function": "neg_square", "ci": True,
        })
        assert r.status_code == 400
        assert r.json()["error"] == "DomainError"

    def test_partition_mismatch(self, client):
        r = client.post("/check", json={
            "matrix": spd_payload(1, (1, 1, 1)), "partition": [1, 1, 2],
            "function": "log", "ci": True,
        })
        assert r.status_code == 400

    def test_both_function_and_expr_rejected(self, client):
        r = client.post("/check", json={
            "matrix": spd_payload(1, (1, 1, 1)), "partition": [1, 1, 1],
            "function": "log", "expr": "x", "domain": "[0,inf)", "ci": True,
        })
        assert r.status_code == 422  # pydantic validation

    def test_unknown_catalog_name(self, client):
        r = client.post("/check", json={
            "matrix": spd_payload(1, (1, 1, 1)), "partition": [1, 1, 1],
            "function": "tan", "ci": True,
        })
        assert r.status_code == 400
        assert r.json()["error"] == "UnknownFunction"


class TestAndoEndpoint:
    def test_exact_fields(self, client):
        r = client.get("/ando", params={"ci": True})
        data = json.loads(r.text)
        assert data["tr_A_inv"] == "33/1"
        assert data["tr_B_inv"] == "212/9"
        assert data["tr_C_inv"] == "12/1"
        assert data["tr_A22_inv"] == "2/1"
        assert data["gap"] == "-5/9"
        assert abs(data["float_abs_diff"]) <= 1e-12

    def test_byte_identical_replay(self, client):
        a = client.get("/ando", params={"ci": True}).content
        b = client.get("/ando", params={"ci": True}).content
        assert a == b

    def test_timestamp_without_ci(self, client):
        data = client.get("/ando").json()
        assert "timestamp" in data


class TestScanEndpoint:
    def test_scan_deterministic_bytes(self, client):
        payload = {"function": "kappa", "kind": "generic_spd", "dims": [2, 2, 2],
                   "trials": 50, "seed": 5, "ci": True}
        a = client.post("/scan", json=payload).content
        b = client.post("/scan", json=payload).content
        assert a == b
        data = json.loads(a)
        assert data["violated"] is False
        assert sum(data["histogram"]["counts"]) == 50

    def test_scan_violation_fields(self, client):
        payload = {"function": "neg_inverse", "kind": "generic_spd",
                   "dims": [1, 1, 1], "trials": 500, "seed": 1, "ci": True}
        data = client.post("/scan", json=payload).json()
        assert data["violated"] is True
        assert data["min_gap"] < 0
        assert data["argmin_seed"] >= 1


class TestSearchEndpoint:
    def test_search_finds_violation(self, client):
        payload = {"function": "neg_inverse", "dims": [1, 1, 1], "iters": 1500,
                   "seed": 7, "ci": True}
        data = client.post("/search", json=payload).json()
        assert data["violated"] is True
        assert data["best_gap"] <= -1e-4
        assert data["best_matrix"]["dim"] == 3

    def test_start_matrix(self, client):
        payload = {"function": "neg_inverse", "dims": [1, 1, 1], "iters": 20,
                   "seed": 7, "start_matrix": ando_entries(), "ci": True,
                   "include_matrix": False}
        data = client.post("/search", json=payload).json()
        assert data["best_gap"] <= -5 / 9 + 1e-10
        assert "best_matrix" not in data


class TestMonotoneEndpoint:
    def test_kappa_passes(self, client):
        payload = {"function": "kappa", "trials": 100, "seed": 42, "ci": True}
        data = client.post("/monotone", json=payload).json()
        assert data["verdict"] == "PASSED"
        assert data["message"] == "no violation found in 100 trials"

    def test_self_mode_square_fails(self, client):
        payload = {"expr": "x^2", "domain": "[0,inf)", "neg_derivative": False,
                   "interval": [0.1, 10.0], "order": 2, "trials": 50,
                   "seed": 2, "ci": True}
        data = client.post("/monotone", json=payload).json()
        assert data["verdict"] == "FAILED"


class TestEqualityEndpoint:
    def test_log_equality_instance(self, client):
        a = generate(GenSpec("log_equality", (2, 2, 2), 3))
        payload = {"matrix": {"dim": 6, "entries": a.entries.tolist()},
                   "partition": [2, 2, 2], "ci": True}
        data = client.post("/equality", json=payload).json()
        assert data["log_residual"] <= 1e-8
        assert data["decomposable"] is False

    def test_trivi_instance_decomposes(self, client):
        a = generate(GenSpec("trivi_block", (2, 2, 2), 3))
        payload = {"matrix": {"dim": 6, "entries": a.entries.tolist()},
                   "partition": [2, 2, 2], "ci": True}
        data = client.post("/equality", json=payload).json()
        assert data["decomposable"] is True
        assert data["kernel_residual"] <= 1e-8


class TestRepresentEndpoint:
    def test_power_log_variant(self, client):
        payload = {"check": "power", "x": 4.0, "t": 0.5, "variant": "log", "ci": True}
        data = client.post("/represent", json=payload).json()
        assert data["value"] == pytest.approx(2.0, abs=1e-6)
        assert data["abs_err"] < 1e-6

    def test_kappa(self, client):
        data = client.post("/represent", json={"check": "kappa", "x": 1.0, "ci": True}).json()
        assert data["abs_err"] < 1e-6

    def test_power_requires_t(self, client):
        r = client.post("/represent", json={"check": "power", "x": 4.0, "ci": True})
        assert r.status_code == 422
