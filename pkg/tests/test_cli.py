import numpy as np
import pytest

from loftune import load_model, lof_train_scores, lof_novelty_scores, build_index
from loftune.cli import _parse_c_spec, _parse_k_spec, main
from loftune.dataio import read_points_csv, write_points_csv
from loftune.errors import CsvParseError
from loftune import validate_dataset


def test_grid_flag_parsing():
    assert _parse_k_spec("10:25") == tuple(range(10, 26))  # metal-style grid
    assert _parse_k_spec("10:50") == tuple(range(10, 51))
    assert _parse_k_spec("2:10:4") == (2, 6, 10)
    assert _parse_k_spec("3,7,9") == (3, 7, 9)
    assert _parse_c_spec("0.08,0.1,0.12") == (0.08, 0.1, 0.12)
    with pytest.raises(ValueError):
        _parse_k_spec("9:3")
    with pytest.raises(ValueError):
        _parse_k_spec("1:2:3:4")


def test_generate_polygons(tmp_path, capsys):
    out = tmp_path / "poly"
    code = main(["generate", "--set", "polygons", "--seed", "1",
                 "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "10000 rows" in printed
    train = read_points_csv(out / "train.csv")
    assert (train.n, train.p) == (1600, 2)
    valid = read_points_csv(out / "validation.csv", want_labels=True)
    assert valid.data.n == 10000
    assert set(np.unique(valid.labels)) <= {0, 1}


def test_generate_unknown_set(tmp_path, capsys):
    with pytest.raises(SystemExit) as err:
        main(["generate", "--set", "mystery", "--out", str(tmp_path)])
    assert err.value.code == 2
    assert "polygons" in capsys.readouterr().err  # usage lists valid names


def test_generate_unwritable_path(tmp_path):
    target = tmp_path / "file.txt"
    target.write_text("x")
    code = main(["generate", "--set", "balls", "--seed", "0",
                 "--out", str(target / "sub")])
    assert code == 1


def _make_training_csv(tmp_path, n=240, seed=0):
    rng = np.random.default_rng(seed)
    data = validate_dataset(rng.normal(size=(n, 2)))
    path = tmp_path / "train.csv"
    write_points_csv(path, data)
    return path, data


def test_tune_score_evaluate_pipeline(tmp_path, capsys):
    train_path, data = _make_training_csv(tmp_path)
    model_path = tmp_path / "model.json"
    diag_path = tmp_path / "diag.tsv"
    code = main(["tune", "--train", str(train_path), "--c", "0.05,0.1",
                 "--k", "4:8", "--out", str(model_path),
                 "--diagnostics", str(diag_path)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "selected c_opt=" in printed and "in " in printed
    assert len(diag_path.read_text().strip().split("\n")) == 1 + 2 * 5

    model = load_model(model_path)
    rng = np.random.default_rng(9)
    queries = np.vstack([rng.normal(size=(40, 2)), [[60.0, 60.0]]])
    input_path = tmp_path / "queries.csv"
    write_points_csv(input_path, validate_dataset(queries))
    scores_path = tmp_path / "scores.csv"
    code = main(["score", "--model", str(model_path), "--input", str(input_path),
                 "--out", str(scores_path)])
    assert code == 0
    lines = scores_path.read_text().strip().split("\n")
    assert lines[0] == "score,prediction"
    assert len(lines) == 1 + 41  # row count preserved

    # scores match in-process novelty calls exactly
    trained = lof_train_scores(model.training_points, model.k_opt)
    expected = lof_novelty_scores(build_index(model.training_points), trained, queries)
    got = np.array([float(line.split(",")[0]) for line in lines[1:]])
    assert np.array_equal(got, expected)
    assert lines[-1].endswith(",1")  # the far point

    # rerun is byte-identical
    rerun = tmp_path / "scores2.csv"
    main(["score", "--model", str(model_path), "--input", str(input_path),
          "--out", str(rerun)])
    assert rerun.read_bytes() == scores_path.read_bytes()

    # evaluate on a labeled file
    labels = (np.linalg.norm(queries, axis=1) > 30).astype(int)
    valid_path = tmp_path / "valid.csv"
    write_points_csv(valid_path, validate_dataset(queries), labels)
    report_path = tmp_path / "report.tsv"
    code = main(["evaluate", "--model", str(model_path),
                 "--validation", str(valid_path), "--out", str(report_path)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "f1=" in printed and "auc=" in printed
    header, row = report_path.read_text().strip().split("\n")
    fields = dict(zip(header.split("\t"), row.split("\t")))
    counts = sum(int(fields[k]) for k in ("tp", "fp", "tn", "fn"))
    assert counts == 41


def test_tune_infeasible_grid(tmp_path, capsys):
    train_path, _ = _make_training_csv(tmp_path, n=100)
    code = main(["tune", "--train", str(train_path), "--c", "0.01",
                 "--k", "3:5", "--out", str(tmp_path / "m.json")])
    assert code == 1
    assert "0.01" in capsys.readouterr().err


def test_tune_bad_grid_syntax(tmp_path):
    train_path, _ = _make_training_csv(tmp_path)
    code = main(["tune", "--train", str(train_path), "--c", "0.05",
                 "--k", "9:3", "--out", str(tmp_path / "m.json")])
    assert code == 2


def test_missing_file_is_runtime_error(tmp_path):
    code = main(["tune", "--train", str(tmp_path / "absent.csv"), "--c", "0.05",
                 "--k", "3:4", "--out", str(tmp_path / "m.json")])
    assert code == 1


def test_csv_parse_error_has_line_number(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("f0,f1\n1.0,2.0\n3.0,oops\n")
    with pytest.raises(CsvParseError) as err:
        read_points_csv(bad)
    assert err.value.line == 3


def test_csv_ragged_row_reported(tmp_path):
    bad = tmp_path / "ragged.csv"
    bad.write_text("1.0,2.0\n3.0\n")
    with pytest.raises(CsvParseError) as err:
        read_points_csv(bad)
    assert err.value.line == 2


def test_csv_headerless_labels(tmp_path):
    raw = tmp_path / "nolabel.csv"
    raw.write_text("1.0,2.0,0\n3.0,4.0,1\n")
    labeled = read_points_csv(raw, want_labels=True)
    assert labeled.labels.tolist() == [0, 1]
    assert labeled.data.p == 2


def test_bench_small_and_deterministic(tmp_path, capsys):
    args = ["bench", "--suite", "spheres", "--reps", "2", "--seed", "3",
            "--dim", "12", "--n-train", "300", "--n-valid", "200",
            "--project-dim", "3", "--c", "0.05,0.1", "--k", "4:6"]
    assert main(args) == 0
    first = capsys.readouterr().out
    assert "F1 tuned" in first and "spheres" in first
    assert main(args) == 0
    assert capsys.readouterr().out == first  # fixed master seed -> same table


def test_bench_single_rep_has_no_se(capsys):
    args = ["bench", "--suite", "cubes", "--reps", "1", "--seed", "0",
            "--dim", "10", "--n-train", "250", "--n-valid", "150",
            "--project-dim", "2", "--c", "0.08", "--k", "3:5"]
    assert main(args) == 0
    out = capsys.readouterr().out
    assert "(-)" in out  # standard error reported as absent
