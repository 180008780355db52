"""Command-line interface: subcommands and exit codes."""

import json

import pytest

import vnom
from vnom.cli import EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO, EXIT_OK, main

SMALL_LAMBDA = {
    "K": 3,
    "lambda": [[0.5, 0.3, 0.4], [0.3, 0.8, 0.6], [0.4, 0.6, 0.3]],
}


@pytest.fixture
def lambda_file(tmp_path):
    path = tmp_path / "lambda.json"
    path.write_text(json.dumps(SMALL_LAMBDA), encoding="utf-8")
    return str(path)


@pytest.fixture
def sampled_files(tmp_path, lambda_file):
    edges = tmp_path / "edges.txt"
    labels = tmp_path / "labels.txt"
    truth = tmp_path / "truth.txt"
    code = main([
        "sample", "--lambda", lambda_file,
        "--m-sizes", "4,0,0", "--n-sizes", "4,3,3",
        "--seed", "11",
        "--edges-out", str(edges), "--labels-out", str(labels),
        "--truth-out", str(truth),
    ])
    assert code == EXIT_OK
    return str(edges), str(labels)


def test_version(capsys):
    assert main(["version"]) == EXIT_OK
    assert capsys.readouterr().out.strip() == vnom.__version__


def test_sample_writes_files(sampled_files):
    edges, labels = sampled_files
    header = open(edges, encoding="utf-8").readline()
    assert header.strip() == "#vertices 14"
    label_lines = open(labels, encoding="utf-8").read().strip().split("\n")
    assert label_lines == ["1 1", "2 1", "3 1", "4 1"]


@pytest.mark.parametrize("scheme", ["canonical", "likelihood", "spectral"])
def test_nominate_prints_one_based_ids(scheme, sampled_files, lambda_file, capsys):
    edges, labels = sampled_files
    argv = [
        "nominate", "--scheme", scheme, "--graph", edges, "--labels", labels,
        "--lambda", lambda_file,
    ]
    if scheme != "spectral":
        argv += ["--sizes", "4,3,3"]
    assert main(argv) == EXIT_OK
    out = capsys.readouterr().out.strip().split("\n")
    ids = sorted(int(x) for x in out)
    assert ids == list(range(5, 15))


def test_nominate_requires_sizes(sampled_files, lambda_file, capsys):
    edges, labels = sampled_files
    code = main([
        "nominate", "--scheme", "canonical", "--graph", edges,
        "--labels", labels, "--lambda", lambda_file,
    ])
    assert code == EXIT_CONFIG


def test_experiment_runs_config(tmp_path, capsys):
    config = {
        "name": "cli-tiny",
        "mode": "simulation",
        "schemes": ["spectral"],
        "replicates": 2,
        "master_seed": 5,
        "model": {
            "K": 3,
            "base_lambda": SMALL_LAMBDA["lambda"],
            "theta": 1.0,
            "m_sizes": [4, 0, 0],
            "n_sizes": [4, 3, 3],
        },
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    csv_out = tmp_path / "curve.csv"
    json_out = tmp_path / "summary.json"
    code = main([
        "experiment", "--config", str(path),
        "--csv-out", str(csv_out), "--json-out", str(json_out),
    ])
    assert code == EXIT_OK
    assert csv_out.exists() and json_out.exists()
    out = capsys.readouterr().out
    assert "spectral: MAP=" in out
    assert "chance: 0.4000" in out


def test_experiment_bad_config_exit(tmp_path, capsys):
    path = tmp_path / "config.json"
    path.write_text('{"mode": "simulation"}', encoding="utf-8")
    assert main(["experiment", "--config", str(path)]) == EXIT_CONFIG


def test_experiment_missing_config_is_io_error(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["experiment", "--config", str(missing)]) == EXIT_IO


def test_experiment_infeasible_canonical_exit(tmp_path, capsys):
    config = {
        "name": "too-big",
        "mode": "simulation",
        "schemes": ["canonical"],
        "replicates": 1,
        "master_seed": 5,
        "model": {
            "K": 3,
            "base_lambda": SMALL_LAMBDA["lambda"],
            "theta": 1.0,
            "m_sizes": [4, 0, 0],
            "n_sizes": [20, 20, 20],
        },
        "hyperparameters": {"enumeration_guard": 1000},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    assert main(["experiment", "--config", str(path)]) == EXIT_INFEASIBLE


def test_subsample_command(tmp_path, capsys):
    # two-class dataset synthesized through the sample command is not
    # possible (it has three blocks), so write a small one directly
    import numpy as np

    from vnom.core import BlockModel, contiguous_assignment, sample_sbm

    lam = np.array([[0.8, 0.1], [0.1, 0.8]])
    model = BlockModel(m_sizes=(0, 0), n_sizes=(20, 20), lam=lam)
    graph = sample_sbm(model, contiguous_assignment(model), 2)
    edges = tmp_path / "edges.txt"
    labels = tmp_path / "labels.txt"
    with open(edges, "w", encoding="utf-8") as fh:
        fh.write(f"#vertices {graph.num_vertices}\n")
        for a, b in np.argwhere(np.triu(graph.adjacency, k=1)):
            fh.write(f"{a + 1} {b + 1}\n")
    with open(labels, "w", encoding="utf-8") as fh:
        for v, blk in enumerate(graph.true_labels, start=1):
            fh.write(f"{v} {blk}\n")
    config = {
        "name": "cli-subsample",
        "mode": "subsample",
        "schemes": [],
        "replicates": 3,
        "master_seed": 7,
        "data": {
            "edges": str(edges), "labels": str(labels), "K": 2,
            "subsample_sizes": [10, 10], "seeds_per_class": [4, 4],
        },
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    csv_out = tmp_path / "table.csv"
    assert main(["subsample", "--config", str(path), "--csv-out", str(csv_out)]) == EXIT_OK
    lines = csv_out.read_text(encoding="utf-8").strip().split("\n")
    assert lines[0] == "vertex,class,times_selected,mean_position"
    assert len(lines) == 41


def test_subsample_rejects_simulation_config(tmp_path, capsys):
    config = {
        "name": "sim",
        "mode": "simulation",
        "schemes": ["spectral"],
        "replicates": 1,
        "master_seed": 5,
        "model": {
            "K": 3,
            "base_lambda": SMALL_LAMBDA["lambda"],
            "theta": 1.0,
            "m_sizes": [4, 0, 0],
            "n_sizes": [4, 3, 3],
        },
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config), encoding="utf-8")
    assert main(["subsample", "--config", str(path)]) == EXIT_CONFIG
