import json
import os
from pathlib import Path

import pytest

from ternroute.cli import main

DATA = Path(__file__).parent / "data"


@pytest.fixture(autouse=True)
def _fixed_terminal(monkeypatch):
    monkeypatch.setenv("COLUMNS", "80")
    # Tests control the environment overrides explicitly.
    for name in list(os.environ):
        if name.startswith("TERNROUTE_"):
            monkeypatch.delenv(name)


@pytest.fixture()
def small_files(tmp_path):
    rrg = tmp_path / "g.rrg"
    net = tmp_path / "b.net"
    rc = main([
        "generate", "--width", "8", "--height", "8", "--wires", "1:4,4:2",
        "--seed", "5", "--nets", "40", "--fanout-mean", "2", "--locality", "2",
        "--out-rrg", str(rrg), "--out-netlist", str(net),
    ])
    assert rc == 0
    return rrg, net


def run_route(rrg, net, tmp_path, *extra):
    sol = tmp_path / "sol.txt"
    rep = tmp_path / "report.json"
    rc = main([
        "route", "--rrg", str(rrg), "--netlist", str(net),
        "--out-solution", str(sol), "--out-report", str(rep),
        "--threads", "2", *extra,
    ])
    return rc, sol, rep


def test_generate_deterministic(tmp_path):
    outs = []
    for tag in ("a", "b"):
        rrg = tmp_path / f"{tag}.rrg"
        net = tmp_path / f"{tag}.net"
        rc = main(["generate", "--width", "6", "--height", "6",
                   "--seed", "9", "--nets", "20",
                   "--out-rrg", str(rrg), "--out-netlist", str(net)])
        assert rc == 0
        outs.append((rrg.read_bytes(), net.read_bytes()))
    assert outs[0] == outs[1]


def test_generate_impossible_placement_is_usage_error(tmp_path, capsys):
    rc = main(["generate", "--width", "2", "--height", "1",
               "--wires", "1:1", "--nets", "500",
               "--out-rrg", str(tmp_path / "g"), "--out-netlist",
               str(tmp_path / "n")])
    assert rc == 2
    assert "pins" in capsys.readouterr().err


def test_unroutable_design_exits_illegal(tmp_path, capsys):
    # Two pins with no connectivity at all: the sink is unreachable even
    # with the search box grown to the whole device.
    rrg = tmp_path / "g.rrg"
    net = tmp_path / "b.net"
    rrg.write_text(
        "RRG v1 2 1 3 1\n"
        "N 0 0 0 0 0.5\n"
        "N 1 1 0 0 0.5\n"
        "N 2 0 0 1 1.0\n"
        "E 0 2\n"
    )
    net.write_text("NET 0 0 1\n")
    rc = main(["route", "--rrg", str(rrg), "--netlist", str(net),
               "--out-solution", str(tmp_path / "s.txt"), "--threads", "1"])
    assert rc == 1
    assert "unreachable" in capsys.readouterr().err


def test_generate_rejects_invalid_wire_length(tmp_path, capsys):
    rc = main(["generate", "--width", "4", "--height", "4",
               "--wires", "3:4",
               "--out-rrg", str(tmp_path / "g"), "--out-netlist",
               str(tmp_path / "n")])
    assert rc == 2
    assert "length 3" in capsys.readouterr().err


def test_pipeline_route_then_validate(small_files, tmp_path):
    rrg, net = small_files
    rc, sol, rep = run_route(rrg, net, tmp_path)
    assert rc == 0
    report = json.loads(rep.read_text())
    assert report["legal"] is True
    assert report["overflow_nodes"] == 0

    rc = main(["validate", "--rrg", str(rrg), "--netlist", str(net),
               "--solution", str(sol)])
    assert rc == 0


def test_validate_flags_corrupted_solution(small_files, tmp_path, capsys):
    rrg, net = small_files
    rc, sol, _ = run_route(rrg, net, tmp_path)
    assert rc == 0
    lines = sol.read_text().splitlines()
    parts = lines[0].split()
    del parts[4]  # drop a path node: the edge chain breaks
    lines[0] = " ".join(parts)
    sol.write_text("\n".join(lines) + "\n")

    rc = main(["validate", "--rrg", str(rrg), "--netlist", str(net),
               "--solution", str(sol)])
    assert rc == 1
    assert "disconnected" in capsys.readouterr().out


def test_validate_wrong_graph_is_parse_error(small_files, tmp_path, capsys):
    rrg, net = small_files
    sol = tmp_path / "sol.txt"
    sol.write_text("PATH 0 0 999999 1000000\n")
    rc = main(["validate", "--rrg", str(rrg), "--netlist", str(net),
               "--solution", str(sol)])
    assert rc == 2
    assert "unknown node" in capsys.readouterr().err


def test_route_missing_netlist(small_files, tmp_path, capsys):
    rrg, _ = small_files
    rc = main(["route", "--rrg", str(rrg), "--netlist",
               str(tmp_path / "nope.net"),
               "--out-solution", str(tmp_path / "s.txt")])
    assert rc == 2
    assert "error" in capsys.readouterr().err


def test_route_legacy_cost_mode(small_files, tmp_path):
    rrg, net = small_files
    rc, _, rep = run_route(rrg, net, tmp_path, "--legacy-cost")
    assert rc == 0
    assert json.loads(rep.read_text())["legal"] is True


def test_route_thread_counts_both_legal(small_files, tmp_path):
    rrg, net = small_files
    for threads in ("1", "8"):
        sol = tmp_path / f"sol{threads}.txt"
        rc = main(["route", "--rrg", str(rrg), "--netlist", str(net),
                   "--out-solution", str(sol), "--threads", threads])
        assert rc == 0
        rc = main(["validate", "--rrg", str(rrg), "--netlist", str(net),
                   "--solution", str(sol)])
        assert rc == 0


def test_score_from_values(capsys):
    rc = main(["score", "--runtime", "35.26", "--critical-wl", "234"])
    assert rc == 0
    assert capsys.readouterr().out.strip() == "55.1340"


def test_score_needs_inputs(capsys):
    rc = main(["score"])
    assert rc == 2


def test_score_from_report(small_files, tmp_path, capsys):
    rrg, net = small_files
    rc, _, rep = run_route(rrg, net, tmp_path)
    assert rc == 0
    capsys.readouterr()  # drain the route output
    rc = main(["score", "--report", str(rep)])
    assert rc == 0
    reported = json.loads(rep.read_text())["score"]
    assert float(capsys.readouterr().out) == pytest.approx(reported, abs=1e-3)


def test_bench_rows_and_ratio_columns(small_files, tmp_path):
    rrg, net = small_files
    out = tmp_path / "bench.csv"
    rc = main(["bench", "--rrg", str(rrg), "--netlist", str(net),
               "--threads-list", "1,2", "--hus", "on,off",
               "--repeats", "1", "--out", str(out)])
    assert rc == 0
    import csv
    with open(out) as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 4  # 2 thread counts x 2 variants
    assert {r["hus"] for r in rows} == {"on", "off"}
    for r in rows:
        assert r["legal"] == "True"
        if r["hus"] == "on":
            assert float(r["runtime_ratio_vs_hus"]) == 1.0
        else:
            assert float(r["runtime_ratio_vs_hus"]) > 0


def test_bench_thread_sweep_row_count(small_files, tmp_path):
    rrg, net = small_files
    out = tmp_path / "bench.csv"
    rc = main(["bench", "--rrg", str(rrg), "--netlist", str(net),
               "--threads-list", "1,2,4,8", "--repeats", "1",
               "--out", str(out)])
    assert rc == 0
    rows = out.read_text().strip().splitlines()
    assert len(rows) == 1 + 4


def gen_tight(tmp_path):
    """A benchmark that converges, but only after a dozen iterations."""
    rrg = tmp_path / "tight.rrg"
    net = tmp_path / "tight.net"
    assert main(["generate", "--width", "8", "--height", "8",
                 "--wires", "1:2", "--seed", "4", "--nets", "60",
                 "--fanout-mean", "2", "--locality", "2",
                 "--out-rrg", str(rrg), "--out-netlist", str(net)]) == 0
    return rrg, net


def test_env_override_applies(tmp_path, monkeypatch):
    rrg, net = gen_tight(tmp_path)
    monkeypatch.setenv("TERNROUTE_MAX_ITERATIONS", "1")
    rc = main(["route", "--rrg", str(rrg), "--netlist", str(net),
               "--out-solution", str(tmp_path / "s.txt"), "--threads", "2"])
    assert rc == 1  # env capped the run at one iteration, still overflowed


def test_cli_flag_beats_env_and_config(tmp_path, monkeypatch):
    rrg, net = gen_tight(tmp_path)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"max_iterations": 1, "threads": 2}))
    monkeypatch.setenv("TERNROUTE_MAX_ITERATIONS", "1")
    # CLI flag wins over both env and config: enough iterations to converge.
    rc = main(["route", "--rrg", str(rrg), "--netlist", str(net),
               "--out-solution", str(tmp_path / "s.txt"),
               "--config", str(cfg), "--max-iterations", "200"])
    assert rc == 0


def test_config_file_beats_default(tmp_path):
    rrg, net = gen_tight(tmp_path)
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"max_iterations": 1}))
    rc = main(["route", "--rrg", str(rrg), "--netlist", str(net),
               "--out-solution", str(tmp_path / "s.txt"),
               "--config", str(cfg), "--threads", "2"])
    assert rc == 1


@pytest.mark.parametrize("argv,golden", [
    (["--help"], "help_main.txt"),
    (["generate", "--help"], "help_generate.txt"),
    (["route", "--help"], "help_route.txt"),
    (["validate", "--help"], "help_validate.txt"),
    (["score", "--help"], "help_score.txt"),
    (["bench", "--help"], "help_bench.txt"),
])
def test_help_golden(argv, golden, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 0
    assert capsys.readouterr().out == (DATA / golden).read_text()
