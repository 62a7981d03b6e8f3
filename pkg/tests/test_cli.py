"""End-to-end tests for the command-line stages."""

import json

import pandas as pd
import pytest

from recon.cli import EXIT_INPUT, EXIT_NUMERIC, EXIT_OK, RunConfig, main
from recon.loaders.artifact_loader import ArtifactLoader

CIRCLE = ["--manifold", "circle", "--d", "2"]


@pytest.fixture(scope="module")
def circle_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("circle")
    cloud, manifold = root / "cloud.json", root / "manifold.json"
    code = main(["sample", *CIRCLE, "--eps", "0.02", "--seed", "7",
                 "--out", str(cloud), "--manifold-out", str(manifold)])
    assert code == EXIT_OK
    return cloud, manifold


@pytest.fixture
def one_sample_file(tmp_path, one_sample_cloud):
    return ArtifactLoader().save_cloud(one_sample_cloud, tmp_path / "one.json")


def write_seeds(path, rows):
    path.write_text("".join(",".join(repr(v) for v in row) + "\n" for row in rows))
    return path


# ----------------------------------------------------------------------
# sample / frames
# ----------------------------------------------------------------------

def test_sample_is_reproducible(tmp_path, capsys):
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["sample", *CIRCLE, "--eps", "0.01", "--seed", "3", "--out", str(first)]) == EXIT_OK
    summary = capsys.readouterr().out
    assert main(["sample", *CIRCLE, "--eps", "0.01", "--seed", "3", "--out", str(second)]) == EXIT_OK

    assert first.read_bytes() == second.read_bytes()
    assert summary.startswith("samples=")
    assert "gamma=0.04" in summary
    assert json.loads(first.read_text())["gamma"] == 0.04


def test_sample_rejects_zero_eps(tmp_path):
    assert main(["sample", *CIRCLE, "--eps", "0", "--out", str(tmp_path / "c.json")]) == EXIT_INPUT


def test_sample_needs_dimension(tmp_path):
    assert main(["sample", "--manifold", "circle", "--eps", "0.01", "--out", str(tmp_path / "c.json")]) == EXIT_INPUT


def test_frames_perturbed(tmp_path, circle_files):
    cloud, _ = circle_files
    out = tmp_path / "noisy.json"
    assert main(["frames", "--cloud", str(cloud), "--mode", "perturbed", "--seed", "2", "--out", str(out)]) == EXIT_OK
    record = json.loads(out.read_text())
    assert record["frame_mode"] == "perturbed"
    assert record["frame_param"] == pytest.approx(0.08)


def test_frames_exact_needs_manifold(tmp_path, circle_files):
    cloud, _ = circle_files
    assert main(["frames", "--cloud", str(cloud), "--mode", "exact", "--out", str(tmp_path / "x.json")]) == EXIT_INPUT


# ----------------------------------------------------------------------
# eval
# ----------------------------------------------------------------------

def test_eval_one_sample(one_sample_file, capsys):
    assert main(["eval", "--cloud", str(one_sample_file), "--point", "0,0.01"]) == EXIT_OK
    record = json.loads(capsys.readouterr().out)
    assert record["status"] == "InSupport"
    assert record["phi_norm"] == pytest.approx(0.01, abs=1e-12)


def test_eval_far_point(one_sample_file, capsys):
    assert main(["eval", "--cloud", str(one_sample_file), "--point", "1,1"]) == EXIT_OK
    record = json.loads(capsys.readouterr().out)
    assert record["status"] == "OutOfSupport"
    assert record["phi"] == [0.0]


@pytest.mark.parametrize("point", ["1.0", "1.0,abc", "1,2,3"])
def test_eval_malformed_point(one_sample_file, point):
    assert main(["eval", "--cloud", str(one_sample_file), "--point", point]) == EXIT_INPUT


def test_eval_missing_cloud(tmp_path):
    assert main(["eval", "--cloud", str(tmp_path / "missing.json"), "--point", "0,0"]) == EXIT_INPUT


# ----------------------------------------------------------------------
# project
# ----------------------------------------------------------------------

def test_project_converges(tmp_path, circle_files):
    cloud, _ = circle_files
    seeds = write_seeds(tmp_path / "seeds.csv", [[1.01, 0.0], [0.0, 0.99], [-0.7071, 0.7071]])
    out, traces = tmp_path / "limits.csv", tmp_path / "traces.json"
    assert main(["project", "--cloud", str(cloud), "--seeds", str(seeds), "--out", str(out),
                 "--trace-out", str(traces)]) == EXIT_OK

    frame = pd.read_csv(out)
    assert list(frame.columns) == ["x0", "x1", "residual", "iterations", "status"]
    assert (frame["status"] == "Converged").all()
    assert (frame["residual"] <= 1e-11).all()
    assert len(json.loads(traces.read_text())["traces"]) == 3


def test_project_is_reproducible(tmp_path, circle_files):
    cloud, _ = circle_files
    seeds = write_seeds(tmp_path / "seeds.csv", [[1.01, 0.0], [0.0, 0.99], [-0.7071, 0.7071], [0.6, -0.81]])
    outputs = []
    for run in ("a", "b"):
        out, traces = tmp_path / f"limits_{run}.csv", tmp_path / f"traces_{run}.json"
        assert main(["project", "--cloud", str(cloud), "--seeds", str(seeds), "--out", str(out),
                     "--trace-out", str(traces), "--threads", "3"]) == EXIT_OK
        outputs.append((out.read_bytes(), traces.read_bytes()))
    assert outputs[0] == outputs[1]


def test_project_creates_output_directory(tmp_path, circle_files):
    cloud, _ = circle_files
    seeds = write_seeds(tmp_path / "seeds.csv", [[1.01, 0.0]])
    out = tmp_path / "results" / "limits.csv"
    assert main(["project", "--cloud", str(cloud), "--seeds", str(seeds), "--out", str(out)]) == EXIT_OK
    assert out.exists()


def test_project_empty_seeds(tmp_path, circle_files):
    cloud, _ = circle_files
    seeds = tmp_path / "seeds.csv"
    seeds.write_text("")
    out = tmp_path / "limits.csv"
    assert main(["project", "--cloud", str(cloud), "--seeds", str(seeds), "--out", str(out)]) == EXIT_OK
    assert out.read_text() == ""


def test_project_seed_outside_support(tmp_path, circle_files):
    cloud, _ = circle_files
    seeds = write_seeds(tmp_path / "seeds.csv", [[1.0, 0.0], [0.0, 0.0]])
    out = tmp_path / "limits.csv"
    assert main(["project", "--cloud", str(cloud), "--seeds", str(seeds), "--out", str(out)]) == EXIT_NUMERIC
    assert pd.read_csv(out)["status"].tolist() == ["Converged", "LeftSupport"]

    assert main(["project", "--cloud", str(cloud), "--seeds", str(seeds), "--out", str(out),
                 "--allow-partial"]) == EXIT_OK


def test_project_rejects_bad_seeds(tmp_path, circle_files):
    cloud, _ = circle_files
    seeds = tmp_path / "seeds.csv"
    seeds.write_text("1.0,zero\n")
    assert main(["project", "--cloud", str(cloud), "--seeds", str(seeds),
                 "--out", str(tmp_path / "limits.csv")]) == EXIT_INPUT


# ----------------------------------------------------------------------
# evaluate
# ----------------------------------------------------------------------

def test_evaluate_circle(tmp_path, circle_files, capsys):
    cloud, manifold = circle_files
    out = tmp_path / "report.json"
    args = ["evaluate", "--cloud", str(cloud), "--manifold-file", str(manifold),
            "--n-points", "30", "--n-seeds", "20", "--out", str(out)]
    assert main(args) == EXIT_OK
    assert "Fidelity report" in capsys.readouterr().out

    report = json.loads(out.read_text())
    for key in ("max_normal_angle", "hausdorff_Z_to_M", "zero_offset_max", "contraction_median"):
        assert report[key] is not None
    first = out.read_bytes()
    assert main(args) == EXIT_OK
    assert out.read_bytes() == first


def test_evaluate_rejects_zero_seeds(tmp_path, circle_files):
    cloud, manifold = circle_files
    assert main(["evaluate", "--cloud", str(cloud), "--manifold-file", str(manifold),
                 "--n-seeds", "0", "--out", str(tmp_path / "r.json")]) == EXIT_INPUT


def test_evaluate_manifold_mismatch(tmp_path, circle_files):
    cloud, _ = circle_files
    assert main(["evaluate", "--cloud", str(cloud), "--manifold", "circle", "--d", "3",
                 "--out", str(tmp_path / "r.json")]) == EXIT_INPUT


# ----------------------------------------------------------------------
# run record
# ----------------------------------------------------------------------

def test_run_record(tmp_path):
    record = tmp_path / "run.json"
    out = tmp_path / "cloud.json"
    assert main(["sample", *CIRCLE, "--eps", "0.05", "--seed", "9", "--region", "0:1",
                 "--out", str(out), "--record", str(record)]) == EXIT_OK

    config = RunConfig.from_json(record.read_text())
    assert config.command == "sample"
    assert config.seed == 9
    assert config.options["eps"] == 0.05
    assert config.options["region"] == [[0.0, 1.0]]
    assert RunConfig.from_json(config.to_json()) == config
