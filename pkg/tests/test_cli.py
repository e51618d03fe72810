import csv
from pathlib import Path

import pytest

from eon_fdsp.cli import RESULT_HEADER, main, summarize, write_results
from eon_fdsp.config import ConfigError, RunConfig, load_config, parse_config, parse_loads
from eon_fdsp.metrics import PolicyRow

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def tiny_cfg(tmp_path, **extra):
    lines = [
        "[run]",
        "topology = germany50",
        "requests_per_run = 300",
        "failure_at = 200",
        "replications = 1",
        f"output = {tmp_path / 'out'}",
        "threads = 1",
    ]
    lines += [f"{k} = {v}" for k, v in extra.items()]
    lines += ["[traffic]", "loads = 100, 300"]
    path = tmp_path / "demo.cfg"
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_run_writes_one_file_per_policy(tmp_path):
    cfg = tiny_cfg(tmp_path)
    assert main(["run", "--config", str(cfg), "--loads", "100", "--reps", "2"]) == 0
    files = sorted(p.name for p in (tmp_path / "out").iterdir())
    assert files == ["fdfs_4_blocking.csv", "fdsp_4_blocking.csv"]
    for name in files:
        rows = read_csv(tmp_path / "out" / name)
        assert rows[0] == RESULT_HEADER
        assert len(rows) == 2
        assert rows[1][0] == "100" and rows[1][-1] == "2"
        assert (tmp_path / "out" / name).read_bytes().count(b"\r") == 0


def test_rows_per_load_and_ranges(tmp_path):
    cfg = tiny_cfg(tmp_path)
    assert main(["run", "--config", str(cfg), "--failures", "3", "--policy", "fdsp", "--out", str(tmp_path / "o2")]) == 0
    rows = read_csv(tmp_path / "o2" / "fdsp_3_blocking.csv")
    assert [r[0] for r in rows[1:]] == ["100", "300"]
    header = rows[0]
    for row in rows[1:]:
        rec = dict(zip(header, map(float, row)))
        for p in (1, 2, 3):
            assert 0 <= rec[f"bb_p{p}"] <= 1
            assert rec[f"rr_p{p}"] + rec[f"bb_p{p}"] == pytest.approx(1, abs=2e-6)


def test_validate_only(tmp_path, capsys):
    cfg = tiny_cfg(tmp_path)
    assert main(["run", "--config", str(cfg), "--validate-only", "--seed", "9"]) == 0
    text = capsys.readouterr().out
    assert "seed = 9" in text and "loads = 100, 300" in text
    assert not (tmp_path / "out").exists()
    assert parse_config(text) == load_config(cfg).with_overrides(seed=9)


def test_missing_topology(tmp_path, capsys):
    cfg = tiny_cfg(tmp_path)
    cfg.write_text(cfg.read_text().replace("germany50", str(tmp_path / "nowhere.txt")))
    assert main(["run", "--config", str(cfg)]) != 0
    assert "nowhere.txt" in capsys.readouterr().err


def test_missing_config(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "absent.cfg")]) == 1
    assert "absent.cfg" in capsys.readouterr().err


def test_bad_config_values(tmp_path, capsys):
    cfg = tiny_cfg(tmp_path, failure_at=400)
    assert main(["run", "--config", str(cfg)]) == 1
    assert "failure_at" in capsys.readouterr().err


def row(load, bb, ht):
    return PolicyRow(load, "x", 3, {p: bb for p in (1, 2, 3)}, {p: 1 - bb for p in (1, 2, 3)},
                     {p: ht for p in (1, 2, 3)}, 0.1)


def test_summarize_identical(tmp_path):
    a = tmp_path / "fdsp.csv"
    write_results(a, [row(100, 0.3, 0.7), row(200, 0.5, 0.5)])
    out = summarize(a, a, tmp_path / "s.csv")
    rows = read_csv(out)
    assert [r[0] for r in rows[1:]] == ["100", "200"]
    for r in rows[1:]:
        assert [float(x) for x in r[1:7]] == [0.0] * 6


def test_summarize_twenty_percent(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_results(a, [row(1000, 0.4, 0.6)])
    write_results(b, [row(1000, 0.5, 0.5)])
    assert main(["summarize", str(a), str(b), "-o", str(tmp_path / "s.csv")]) == 0
    rec = dict(zip(*read_csv(tmp_path / "s.csv")))
    assert float(rec["d_bb_p3"]) == pytest.approx(20.0)
    assert float(rec["d_ht_p1"]) == pytest.approx(20.0)


def test_summarize_errors(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    write_results(a, [row(100, 0.4, 0.6)])
    with pytest.raises(FileNotFoundError):
        summarize(a, b, tmp_path / "s.csv")
    write_results(b, [row(200, 0.4, 0.6)])
    with pytest.raises(ValueError, match="loads differ"):
        summarize(a, b, tmp_path / "s.csv")


def test_shipped_configs_validate():
    full = load_config(CONFIGS / "germany50_4failures.cfg")
    assert full.loads == tuple(range(50, 1001, 50))
    assert full == RunConfig(loads=full.loads, replications=50, seed=1, output="results/germany50").validate()
    demo = load_config(CONFIGS / "demo.cfg")
    assert demo.requests_per_run == 1500


def test_parse_loads():
    assert parse_loads("50:200:50") == (50, 100, 150, 200)
    assert parse_loads("100, 250.5") == (100, 250.5)
    with pytest.raises(ConfigError):
        parse_loads("1:2")


@pytest.mark.parametrize(
    "text",
    [
        "[run]\nk = 0\n",
        "[run]\nbogus = 1\n",
        "[extra]\n",
        "[run]\npolicies = fifo\n",
        "[traffic]\nbit_rates = 100, 300\n",
        "[modulation]\nPM-QPSK = 2\n",
        "[reach]\n100 = 1, 2\n",
        "[run]\nslot_count = many\n",
    ],
)
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_config_round_trip():
    cfg = load_config(CONFIGS / "germany50_4failures.cfg")
    assert parse_config(cfg.to_text()) == cfg
