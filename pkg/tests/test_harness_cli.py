import json
import math

import pytest

from avm.cli import main
from avm.metrics import CHECKPOINT_KEYS, MetricsTrace, online_metrics_update
from avm.model import read_snapshot

from conftest import blob_stream, regression_stream


def write_libsvm(path, data):
    with open(path, "w") as fh:
        for x, y in data:
            label = f"{y:+d}" if isinstance(y, int) else repr(y)
            fh.write(label + " " + " ".join(f"{i}:{v!r}" for i, v in x.items()) + "\n")
    return str(path)


@pytest.fixture
def train_file(tmp_path):
    return write_libsvm(tmp_path / "train.txt", blob_stream(300, 0, label_flip=0.05))


def base_args(train, *extra):
    return ["run", "--task", "binary", "--mode", "online", "--loss", "hinge", "--gamma", "0.5",
            "--lambda", "0.01", "--delta", "1.0", "--coverage", "sphere", "--train", train,
            "--seed", "1", *extra]


def read_trace(path):
    return [json.loads(line) for line in open(path)]


def test_online_metrics_examples():
    tr = MetricsTrace("binary")
    for pred, y in [(0.0, 1), (-0.2, 1), (2.0, 1)]:
        online_metrics_update(tr, pred, y)
    assert tr.metric == pytest.approx(1 / 3)
    tr = MetricsTrace("regression")
    online_metrics_update(tr, 0.0, 0.3)
    online_metrics_update(tr, 0.0, -0.4)
    assert tr.metric == pytest.approx(math.sqrt(0.125))
    assert MetricsTrace("multiclass").metric == 0.0


def test_cli_smoke(train_file, tmp_path, capsys):
    out = tmp_path / "trace.jsonl"
    assert main(base_args(train_file, "--metrics-out", str(out))) == 0
    recs = read_trace(out)
    assert recs[0]["header"] is True and recs[0]["instances"] == 300
    assert recs[-1]["final"] is True and recs[-1]["t"] == 300
    summary = json.loads(capsys.readouterr().out)
    assert summary["model_size"] == recs[-1]["model_size"]


def test_trace_schema(train_file, tmp_path):
    out = tmp_path / "trace.jsonl"
    main(base_args(train_file, "--metrics-out", str(out)))
    recs = read_trace(out)
    checkpoints = recs[1:-1]
    assert [r["t"] for r in checkpoints] == list(range(3, 301, 3))
    for r in checkpoints:
        assert sorted(r) == sorted(CHECKPOINT_KEYS)
        assert isinstance(r["t"], int) and isinstance(r["model_size"], int)
        assert isinstance(r["cells"], int) and isinstance(r["kevals"], int)
        assert 0.0 <= r["metric"] <= 1.0
    assert sorted(recs[-1]) == ["cells", "final", "kevals", "metric", "model_size", "t", "wall_s"]


def test_timing_monotonic(train_file, tmp_path):
    out = tmp_path / "trace.jsonl"
    main(base_args(train_file, "--metrics-out", str(out), "--checkpoint-every", "7"))
    recs = read_trace(out)[1:-1]
    elapsed = [r["elapsed_s"] for r in recs]
    assert elapsed == sorted(elapsed)
    assert [r["t"] for r in recs][-1] == 300 and recs[0]["t"] == 7


def test_reproducible(train_file, tmp_path):
    paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl"]
    for p in paths:
        main(base_args(train_file, "--beta", "10", "--metrics-out", str(p)))

    def strip(recs):
        return [{k: v for k, v in r.items() if k not in ("elapsed_s", "wall_s")} for r in recs]

    assert strip(read_trace(paths[0])) == strip(read_trace(paths[1]))


def test_missing_train_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--task", "binary", "--mode", "online", "--loss", "hinge", "--gamma", "1",
              "--lambda", "1", "--delta", "1", "--coverage", "sphere", "--seed", "0"])
    assert exc.value.code == 2
    assert "usage" in capsys.readouterr().err


def test_loss_task_mismatch(train_file, capsys):
    args = base_args(train_file)
    args[args.index("binary")] = "regression"
    with pytest.raises(SystemExit) as exc:
        main(args)
    assert exc.value.code == 2
    assert "not valid for --task regression" in capsys.readouterr().err


def test_batch_without_test_is_usage_error(train_file):
    args = base_args(train_file)
    args[args.index("online")] = "batch"
    with pytest.raises(SystemExit) as exc:
        main(args)
    assert exc.value.code == 2


def test_missing_file_is_data_error(tmp_path):
    assert main(base_args(str(tmp_path / "nope.txt"))) == 1


def test_malformed_file_is_data_error(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("+1 1:1\n+1 5:1 2:1\n")
    assert main(base_args(str(p))) == 1


def test_batch_mode_and_snapshot(train_file, tmp_path, capsys):
    test = write_libsvm(tmp_path / "test.txt", blob_stream(200, 1))
    snap = tmp_path / "model.txt"
    args = base_args(train_file, "--test", test, "--iters", "900", "--model-out", str(snap),
                     "--output", "suffix=0.5")
    args[args.index("online")] = "batch"
    assert main(args) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["t"] == 900 and summary["test_metric"] >= 0.85
    with open(snap) as fh:
        model, meta = read_snapshot(fh)
    assert model.model_size == summary["model_size"]


def test_regression_rect(tmp_path, capsys):
    train = write_libsvm(tmp_path / "r.txt", regression_stream(300, 0))
    args = ["run", "--task", "regression", "--mode", "online", "--loss", "eps-insensitive",
            "--gamma", "1", "--lambda", "0.5", "--delta", "0.5", "--coverage", "rect",
            "--train", train, "--seed", "0", "--normalize"]
    assert main(args) == 0
    summary = json.loads(capsys.readouterr().out)
    assert 0 < summary["metric"] < 1 and summary["cells"] >= 1


def test_multiclass_header_has_label_map(tmp_path):
    p = tmp_path / "mc.txt"
    p.write_text("cat 1:1\ndog 1:-1\ncat 1:1.1\nbird 2:1\n")
    out = tmp_path / "t.jsonl"
    args = ["run", "--task", "multiclass", "--mode", "online", "--loss", "logit", "--gamma", "1",
            "--lambda", "0.1", "--delta", "0.5", "--coverage", "sphere", "--train", str(p),
            "--seed", "0", "--metrics-out", str(out), "--no-shuffle"]
    assert main(args) == 0
    assert read_trace(out)[0]["label_map"] == {"cat": 1, "dog": 2, "bird": 3}
