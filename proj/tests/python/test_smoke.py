"""Smoke tests for the python bindings."""

import json
import math

import pytest

import peerfair


@pytest.fixture(scope="module")
def dataset():
    spec = peerfair.sme_preset_json(n=1200, seed=5)
    ds, truth = peerfair.generate(spec)
    return ds, truth


def test_generate_and_counts(dataset):
    ds, truth = dataset
    assert len(ds) == 1200
    assert ds.n_protected + ds.n_unprotected == 1200
    assert 0.30 < peerfair.compute_marginal(ds) < 0.52
    assert len(truth["ids"]) == 1200


def test_csv_round_trip(dataset):
    ds, _ = dataset
    again = peerfair.load_dataset_text(ds.to_csv(), ds.schema_json())
    assert len(again) == len(ds)
    assert again.n_protected == ds.n_protected


def test_split_partitions(dataset):
    ds, _ = dataset
    train, test = peerfair.split(ds, 0.8, seed=1)
    assert len(train) + len(test) == len(ds)
    assert abs(len(train) - 0.8 * len(ds)) <= 4


def test_unit_operations():
    assert peerfair.auc([0.9, 0.8, 0.3], [1, 1, 0]) == 1.0
    t_bars = [0.8, 0.9, 1.0]
    z, p = peerfair.z_test(t_bars, 0.8, "dispersion")
    assert z == pytest.approx(1.0)
    assert p == pytest.approx(0.3173105078629141)
    assert peerfair.categorize(0.8, 0.9, 0.01, 0.05, 0.1) == "extremely_discriminated"
    means = peerfair.sample_peer_means([0.8] * 50, subset_size=30, n_subsets=10, seed=3)
    assert means == [0.8] * 10


def test_full_audit_report(dataset):
    ds, _ = dataset
    report = json.loads(peerfair.run_audit(ds, threads=2))
    assert report["manifest"]["config"]["n_subsets"] == 100
    cats = report["summary"]["categories"]
    assert sum(cats.values()) == ds.n_protected
    assert report["summary"]["subset_bound_violations"] == 0
    scatter = peerfair.report_to_scatter_csv(json.dumps(report))
    assert scatter.startswith("id,p_a,peer_mean,category")


def test_audit_determinism(dataset):
    ds, _ = dataset
    config = json.loads(peerfair.default_config_json())
    config["seed"] = 99
    a = peerfair.run_audit(ds, json.dumps(config), threads=1)
    b = peerfair.run_audit(ds, json.dumps(config), threads=4)
    # Strip the timestamp, the only wall-clock field.
    ja, jb = json.loads(a), json.loads(b)
    ja["manifest"].pop("created_at")
    jb["manifest"].pop("created_at")
    assert ja == jb


def test_errors_surface_as_python_exceptions():
    with pytest.raises(ValueError):
        peerfair.load_dataset_text("a,b\n1,2\n", "{not json")
    with pytest.raises(ValueError):
        peerfair.z_test([], 0.5, "no_such_variant")
