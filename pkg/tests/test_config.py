import json

import numpy as np
import pytest

from fate.config import (
    RunConfig,
    config_digest,
    dataset_from_config,
    load_run_config,
    parse_run_config,
    run_config_to_dict,
)
from fate.data import SyntheticSpec, generate_synthetic
from fate.exceptions import BadConfig, BadSpec, IoError

MINIMAL = {"data": {"synthetic": {"n": 50, "d": 4}}}


def test_minimal_config_fills_defaults():
    cfg = parse_run_config(MINIMAL)
    assert cfg.notion == "dp"
    assert cfg.mode == "dst"
    assert len(cfg.lambda_grid) == 12
    assert cfg.seeds == (0, 1, 2, 3, 4)
    assert cfg.estimator.kernel.kind == "gaussian-rff"
    assert cfg.data["synthetic"]["n"] == 50
    assert cfg.data["synthetic"]["rho"] == 0.0  # defaults made explicit


def test_csv_data_form():
    cfg = parse_run_config({"data": {"csv": "some.csv", "target": "label"}})
    assert cfg.data == {"csv": "some.csv", "target": "label", "sensitive": "s",
                        "features": None}


def test_estimator_knobs_flow_through():
    cfg = parse_run_config({
        "data": {"synthetic": {}},
        "notion": "eo",
        "mode": "lst",
        "lambda_grid": [0.0, 0.5],
        "seeds": [7],
        "estimator": {
            "rounds": 3,
            "hidden": [8],
            "kernel": {"rff_dim": 64, "bandwidth": 2.5},
            "sgd": {"lr": 0.05, "epochs": 1},
            "classifier": "logistic",
        },
    })
    assert cfg.notion == "eo" and cfg.mode == "lst"
    assert cfg.lambda_grid == (0.0, 0.5)
    assert cfg.seeds == (7,)
    assert cfg.estimator.rounds == 3
    assert cfg.estimator.hidden == (8,)
    assert cfg.estimator.kernel.rff_dim == 64
    assert cfg.estimator.kernel.bandwidth == 2.5
    assert cfg.estimator.sgd.lr == 0.05
    assert cfg.estimator.classifier == "logistic"


@pytest.mark.parametrize("obj", [
    {"data": {"synthetic": {}}, "lamda_grid": [0.1]},
    {"data": {"synthetic": {}, "extra": 1}},
    {"data": {"synthetic": {"rows": 10}}},
    {"data": {"synthetic": {}}, "estimator": {"round": 3}},
    {"data": {"synthetic": {}}, "estimator": {"kernel": {"dim": 9}}},
    {"data": {"synthetic": {}}, "estimator": {"sgd": {"momentum": 0.9}}},
])
def test_unknown_keys_rejected_everywhere(obj):
    with pytest.raises(BadConfig, match="unknown"):
        parse_run_config(obj)


def test_data_source_must_be_exactly_one():
    with pytest.raises(BadConfig):
        parse_run_config({"data": {}})
    with pytest.raises(BadConfig):
        parse_run_config({"data": {"csv": "a.csv", "synthetic": {}}})
    with pytest.raises(BadConfig):
        parse_run_config({"data": "a.csv"})
    with pytest.raises(BadConfig):
        parse_run_config([])


def test_bad_values_rejected():
    with pytest.raises(BadSpec):
        parse_run_config({"data": {"synthetic": {"n": 1}}})
    with pytest.raises(BadConfig):
        parse_run_config({"data": {"synthetic": {}}, "notion": "parity"})
    with pytest.raises(BadConfig):
        parse_run_config({"data": {"synthetic": {}}, "mode": "both"})
    with pytest.raises(BadConfig):
        parse_run_config({"data": {"csv": 42}})


def test_canonical_form_is_a_fixed_point():
    cfg = parse_run_config(MINIMAL)
    canon = run_config_to_dict(cfg)
    assert parse_run_config(canon) == cfg
    # and the canonical form is pure JSON
    assert json.loads(json.dumps(canon)) == canon


def test_digest_ignores_key_order_and_sees_values():
    a = parse_run_config({"data": {"synthetic": {"n": 50, "d": 4}}, "notion": "dp"})
    b = parse_run_config({"notion": "dp", "data": {"synthetic": {"d": 4, "n": 50}}})
    assert config_digest(a) == config_digest(b)
    c = parse_run_config({"data": {"synthetic": {"n": 51, "d": 4}}})
    assert config_digest(a) != config_digest(c)
    assert config_digest(a) == config_digest(run_config_to_dict(a))
    assert len(config_digest(a)) == 64


def test_load_run_config(tmp_path):
    p = tmp_path / "run.json"
    p.write_text(json.dumps(MINIMAL))
    assert load_run_config(p) == parse_run_config(MINIMAL)
    with pytest.raises(IoError):
        load_run_config(tmp_path / "absent.json")
    p.write_text("{not json")
    with pytest.raises(BadConfig):
        load_run_config(p)


def test_dataset_from_config_synthetic_route():
    cfg = parse_run_config({"data": {"synthetic": {"n": 40, "d": 5, "seed": 3}}})
    ds = dataset_from_config(cfg)
    want = generate_synthetic(SyntheticSpec(n=40, d=5, seed=3))
    assert np.array_equal(ds.x, want.x)
    assert np.array_equal(ds.y, want.y)


def test_dataset_from_config_csv_route(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,y,s\n1.0,0,1\n2.0,1,0\n")
    cfg = parse_run_config({"data": {"csv": str(p)}})
    ds = dataset_from_config(cfg)
    assert ds.n == 2
    assert ds.x.tolist() == [[1.0], [2.0]]


def test_run_config_is_frozen():
    cfg = parse_run_config(MINIMAL)
    with pytest.raises(AttributeError):
        cfg.notion = "eo"
