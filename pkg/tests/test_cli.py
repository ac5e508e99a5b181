import json
import subprocess
import sys

import pytest

from everlasting_sim.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_RUNTIME, main


def write_config(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return p


def test_success_writes_outputs(tmp_path):
    cfg = write_config(tmp_path, {"seeds": 3, "horizon_days": 20})
    out = tmp_path / "out"
    assert main(["pnl-histogram", "--config", str(cfg), "--seed", "7", "--out", str(out), "-q"]) == EXIT_OK
    stats = json.loads((out / "pnl_statistics.json").read_text())
    assert stats["master_seed"] == 7
    assert stats["config"]["seeds"] == 3


def test_no_config_uses_defaults(tmp_path):
    assert main(["slippage", "--out", str(tmp_path), "-q"]) == EXIT_OK
    assert (tmp_path / "slippage.csv").exists()


@pytest.mark.parametrize("data", [{"bogus": 1}, {"seeds": 0}, {"flow": {"noise_scale": -1}}, [1, 2]])
def test_config_errors(tmp_path, data):
    cfg = write_config(tmp_path, data)
    assert main(["slippage", "--config", str(cfg), "--out", str(tmp_path), "-q"]) == EXIT_CONFIG


def test_invalid_json_is_config_error(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text("{")
    assert main(["slippage", "--config", str(p), "--out", str(tmp_path), "-q"]) == EXIT_CONFIG


def test_unknown_experiment_is_config_error(tmp_path):
    assert main(["nonsense", "--out", str(tmp_path), "-q"]) == EXIT_CONFIG


def test_missing_out_is_config_error():
    assert main(["slippage", "-q"]) == EXIT_CONFIG


def test_missing_config_file_is_io_error(tmp_path):
    assert main(["slippage", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path), "-q"]) == EXIT_IO


def test_unwritable_output_is_io_error(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["slippage", "--out", str(blocker / "sub"), "-q"]) == EXIT_IO


def test_bad_replay_csv_is_io_error(tmp_path):
    bad = tmp_path / "prices.csv"
    bad.write_text("date,close\n2024-01-02,1\n2024-01-01,2\n")
    assert main(["real-data-replay", "--csv", str(bad), "--out", str(tmp_path), "-q"]) == EXIT_IO
    assert main(["real-data-replay", "--csv", str(tmp_path / "missing.csv"), "--out", str(tmp_path), "-q"]) == EXIT_IO


def test_numeric_failure_is_runtime_error(tmp_path):
    # an option this far out of the money has no representable value to size flow with
    cfg = write_config(tmp_path, {"seeds": 1, "horizon_days": 5, "strike": 1e300})
    assert main(["pnl_histogram", "--config", str(cfg), "--out", str(tmp_path), "-q"]) == EXIT_RUNTIME


def test_replay_via_cli(tmp_path):
    prices = tmp_path / "prices.csv"
    prices.write_text("date,close\n2024-01-01,3000\n2024-01-02,3050\n2024-01-03,3020\n")
    cfg = write_config(tmp_path, {"replay_mode": "single_contract"})
    out = tmp_path / "out"
    code = main(["real_data_replay", "--config", str(cfg), "--csv", str(prices), "--out", str(out), "-q"])
    assert code == EXIT_OK
    lines = (out / "replay_ledger.csv").read_text().splitlines()
    assert lines[0].startswith("# everlasting_sim")
    assert sum(not ln.startswith("#") for ln in lines) == 1 + 2


def test_seed_must_be_u64(tmp_path):
    with pytest.raises(SystemExit):
        main(["slippage", "--seed", str(2**64), "--out", str(tmp_path)])


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "everlasting_sim.cli", "slippage", "--out", str(tmp_path), "-q"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
