import csv
import io
import os
import shutil
import socket
import subprocess
import time

import pytest

CLI = os.environ.get("LIGHTWAVES_CLI") or shutil.which("lightwaves")
pytestmark = pytest.mark.skipif(CLI is None, reason="lightwaves executable not found")


def run(*args, check=True, timeout=300):
    proc = subprocess.run([CLI, *map(str, args)], capture_output=True, text=True, timeout=timeout)
    if check and proc.returncode != 0:
        raise AssertionError(f"{args} exited {proc.returncode}: {proc.stderr}")
    return proc


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    return tmp_path_factory.mktemp("cli")


@pytest.fixture(scope="module")
def data6(work):
    path = work / "six.lwds"
    run("synth", "--out", path, "--n", 40, "--channels", 6, "--length", 48, "--informative", 2, "--seed", 4)
    return path


@pytest.fixture(scope="module")
def model6(work, data6):
    path = work / "six.json"
    run("train", "--data", data6, "--out", path, "--features", 60, "--pool", 600, "--seed", 1)
    return path


def test_train_report_and_determinism(work, data6, model6):
    again = work / "again.json"
    out = run("train", "--data", data6, "--out", again, "--features", 60, "--pool", 600, "--seed", 1).stdout
    (row,) = rows(out)
    assert list(row) == ["dataset", "n", "C", "L", "variant", "features_selected", "channels_used", "train_seconds"]
    assert row["n"] == "40" and row["C"] == "6" and row["L"] == "48"
    assert row["variant"] == "L1L2"
    assert int(row["features_selected"]) == 60
    assert 1 <= int(row["channels_used"]) <= 6
    assert again.read_bytes() == model6.read_bytes()


def test_variant_l1_uses_level_one_only(work, data6):
    path = work / "l1.json"
    run("train", "--data", data6, "--out", path, "--variant", "l1", "--features", 20, "--pool", 200)
    inspect = run("inspect", "--model", path).stdout
    assert "level2 0" in inspect


def test_predict_and_score(model6, data6):
    out = run("predict", "--model", model6, "--data", data6, "--score").stdout.strip().splitlines()
    assert len(out) == 41
    assert set(out[:40]) <= {"class0", "class1"}
    name, value = out[-1].split(",")
    assert name == "accuracy" and float(value) >= 0.95

    (row,) = rows(run("evaluate", "--model", model6, "--data", data6).stdout)
    assert float(row["accuracy"]) == float(value)


def test_score_needs_labels(work, model6):
    ts = work / "unlabeled.ts"
    series = ",".join(str(i % 5) for i in range(48))
    lines = ["@problemName u", "@univariate false", "@dimensions 6", "@equalLength true", "@seriesLength 48",
             "@classLabel false", "@data"]
    lines += [":".join([series] * 6)] * 2
    ts.write_text("\n".join(lines) + "\n")
    assert len(run("predict", "--model", model6, "--data", ts).stdout.split()) == 2
    proc = run("predict", "--model", model6, "--data", ts, "--score", check=False)
    assert proc.returncode == 2
    assert "labels required" in proc.stderr


def test_channel_mismatch_is_a_data_error(work, model6):
    four = work / "four.lwds"
    run("synth", "--out", four, "--n", 4, "--channels", 4, "--length", 48, "--informative", 1)
    proc = run("predict", "--model", model6, "--data", four, check=False)
    assert proc.returncode == 2
    assert "channel" in proc.stderr


def test_exit_codes(work, data6):
    assert run("train", "--data", data6, check=False).returncode == 1
    assert run("train", "--data", data6, "--out", work / "x.json", "--features", 10, "--pool", 5,
               check=False).returncode == 1
    assert run("predict", "--model", work / "missing.json", "--data", data6, check=False).returncode == 2
    bad = work / "bad.ts"
    bad.write_text("@problemName b\n@equalLength false\n@data\n")
    proc = run("train", "--data", bad, "--out", work / "b.json", check=False)
    assert proc.returncode == 2
    assert "variable-length unsupported" in proc.stderr


def test_inspect(model6):
    out = run("inspect", "--model", model6).stdout
    first = out.splitlines()[0]
    assert first.endswith("of 6 channels used")
    used = int(first.split()[0])
    table = rows(out[out.index("channel,features"):])
    assert len(table) == used
    assert sum(int(r["features"]) for r in table) == 60


def test_macs(model6):
    (row,) = rows(run("macs", "--model", model6, "--baseline-channels", 1).stdout)
    assert int(row["series_length"]) == 48
    assert int(row["baseline_macs"]) == 10000 * 9 * 48
    assert float(row["ratio"]) == pytest.approx(int(row["baseline_macs"]) / int(row["lightwaves_macs"]), rel=1e-5)
    assert run("macs", "--model", model6, check=False).returncode == 1


def test_bench_rows(work, model6, data6):
    out = run("bench", "--model", model6, "--data", data6, "--repeats", 10, "--baseline-channels", 1).stdout
    table = rows(out)
    assert [r["kind"] for r in table].count("repeat") == 10
    assert [r["kind"] for r in table].count("summary") == 1
    for r in table:
        assert float(r["min_us"]) <= float(r["mean_us"])
        assert float(r["min_us"]) <= float(r["p95_us"])

    one = work / "one.lwds"
    run("synth", "--out", one, "--n", 1, "--channels", 6, "--length", 48, "--informative", 1)
    table = rows(run("bench", "--model", model6, "--data", one, "--repeats", 3).stdout)
    assert len(table) == 4


def test_bench_selective_beats_full(model6, data6):
    table = rows(run("bench", "--model", model6, "--data", data6, "--repeats", 3, "--compare-full").stdout)
    summary = next(r for r in table if r["kind"] == "summary")
    full = next(r for r in table if r["kind"] == "full_transform")
    assert float(summary["mean_us"]) < float(full["mean_us"])


def test_worker_timeout():
    start = time.monotonic()
    proc = run("worker", "--listen", f"127.0.0.1:{free_port()}", "--timeout", 1, check=False)
    assert proc.returncode == 3
    assert "timed out" in proc.stderr
    assert time.monotonic() - start < 20


def test_remote_workers_match_in_process(work, data6):
    local = work / "local.json"
    run("train", "--data", data6, "--out", local, "--workers", 2, "--features", 30, "--pool", 300)

    # Workers dial a listening coordinator.
    port = free_port()
    coord = subprocess.Popen([CLI, "train", "--data", data6, "--out", work / "dial.json", "--workers", "2",
                              "--features", "30", "--pool", "300", "--listen", f"127.0.0.1:{port}"],
                             stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
    workers = [subprocess.Popen([CLI, "worker", "--connect", f"127.0.0.1:{port}", "--id", str(i)],
                                stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True) for i in range(2)]
    assert coord.wait(timeout=120) == 0, coord.stderr.read()
    for w in workers:
        assert w.wait(timeout=30) == 0, w.stderr.read()
    assert (work / "dial.json").read_bytes() == local.read_bytes()

    # Coordinator dials listening workers.
    ports = [free_port(), free_port()]
    workers = [subprocess.Popen([CLI, "worker", "--listen", f"127.0.0.1:{p}", "--id", str(i)],
                                stdout=subprocess.PIPE, stderr=subprocess.PIPE, text=True)
               for i, p in enumerate(ports)]
    out = work / "listen.json"
    run("train", "--data", data6, "--out", out, "--workers", 2, "--features", 30, "--pool", 300,
        "--connect-workers", *[f"127.0.0.1:{p}" for p in ports])
    for w in workers:
        assert w.wait(timeout=30) == 0
    assert out.read_bytes() == local.read_bytes()


def test_convert_round_trip(work):
    ts = work / "tiny.ts"
    ts.write_text("@problemName tiny\n@univariate true\n@equalLength true\n@classLabel true a b\n@data\n"
                  "1,2,3,4:a\n4,3,2,1:b\n")
    out = work / "tiny.lwds"
    run("convert", "--in", ts, "--out", out)
    assert out.read_bytes()[:4] == b"LWDS"
    assert out.stat().st_size == 4 + 1 + 32 + 2 * (4 + 1) + 2 * 4 + 8 * 8


def test_feature_budget_is_an_upper_bound(work, data6):
    path = work / "wide.json"
    (row,) = rows(run("train", "--data", data6, "--out", path, "--features", 1500).stdout)
    assert int(row["features_selected"]) <= 1500
    (row,) = rows(run("train", "--data", data6, "--out", path).stdout)
    assert int(row["features_selected"]) <= 500
