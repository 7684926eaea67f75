"""命令行接口"""

import json
from itertools import combinations

import pytest

from hcsketch.cli import RunConfig, build_bank, cmd_bench, cmd_estimate, cmd_exact, cmd_info, main
from hcsketch.estimator.bank import bank_estimate
from hcsketch.estimator.config import Limits
from hcsketch.estimator.errors import ConfigMismatch
from hcsketch.estimator.pattern import build_pattern_profile
from hcsketch.estimator.streamio import read_pattern_file, read_stream_file


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path

    k4 = "".join(f"+ {a} {b}\n" for a, b in combinations(range(1, 5), 2))
    return {
        "dir": tmp_path,
        "triangle": write("triangle.txt", "1 2\n2 3\n1 3\n"),
        "path": write("path.txt", "1 2\n2 3\n"),
        "edge": write("edge.txt", "1 2\n"),
        "big": write("big.txt", "1 2 3 4\n"),
        "k4": write("k4.txt", k4),
        "k4_a": write("k4_a.txt", "".join(k4.splitlines(keepends=True)[::2])),
        "k4_b": write("k4_b.txt", "".join(k4.splitlines(keepends=True)[1::2])),
        "churn": write("churn.txt", k4 + k4.replace("+", "-")),
        "empty": write("empty.txt", "# nothing\n"),
        "k13": write("k13.txt", "".join(f"+ {a} {b}\n" for a, b in combinations(range(13), 2))),
        "bad": write("bad.txt", "+ 1 2\n+ 3 3\n"),
        "edges4": write("edges4.txt", "+ 1 2 3 4\n+ 2 3 4 5\n"),
        "edges2": write("edges2.txt", "+ 1 2\n+ 2 3\n"),
    }


def run_json(capsys, argv):
    code = main(["--json"] + argv)
    out = capsys.readouterr().out.strip()
    return code, (json.loads(out.splitlines()[-1]) if out else None)


def test_info_triangle(capsys, files):
    code, report = run_json(capsys, ["info", "--pattern", str(files["triangle"])])
    assert code == 0
    assert report["tau"] == 7 and report["auto"] == 6
    assert report["scale"] == pytest.approx(0.75)
    assert report["warning"] is None


def test_info_path_warns(files):
    report = cmd_info(RunConfig(mode="info", pattern_path=files["path"]))
    assert report["warning"] is not None


def test_info_single_edge(files):
    report = cmd_info(RunConfig(mode="info", pattern_path=files["edge"], epsilon=0.5, m_bound=1))
    assert report["auto"] == 2 and report["scale"] == 1.0
    assert report["recommended_copies"] == 12


def test_info_human_output(capsys, files):
    assert main(["info", "--pattern", str(files["path"])]) == 0
    out = capsys.readouterr().out
    assert "auto(H): 2" in out
    assert "警告" in out


def test_estimate_empty_stream(files):
    report = cmd_estimate(
        RunConfig(mode="estimate", pattern_path=files["triangle"], stream_paths=[files["empty"]], copies=10)
    )
    assert report["estimate"] == 0.0
    assert report["edges"] == 0


def test_estimate_cancelled_stream(capsys, files):
    code, report = run_json(
        capsys,
        ["estimate", "-p", str(files["triangle"]), "-s", str(files["churn"]), "--copies", "50", "--seed", "3"],
    )
    assert code == 0
    assert abs(report["estimate"]) < 1e-9
    assert set(report) >= {"mode", "estimate", "s", "seed", "wall_ms", "edges"}


def test_estimate_matches_programmatic_bank(files):
    report = cmd_estimate(
        RunConfig(mode="estimate", pattern_path=files["triangle"], stream_paths=[files["k4"]], copies=64, seed_base=9)
    )
    profile = build_pattern_profile(read_pattern_file(files["triangle"]))
    bank = build_bank(profile, read_stream_file(files["k4"]), 64, 9, Limits())
    assert report["estimate"] == bank_estimate(bank)
    assert report["s"] == 64 and report["seed"] == 9 and report["edges"] == 6


def test_estimate_shards_match_single_thread(files):
    base = RunConfig(mode="estimate", pattern_path=files["triangle"], stream_paths=[files["k4"]], copies=32)
    sharded = RunConfig(
        mode="estimate", pattern_path=files["triangle"], stream_paths=[files["k4"]], copies=32, shards=3
    )
    assert cmd_estimate(base)["estimate"] == cmd_estimate(sharded)["estimate"]


def test_estimate_epsilon_drives_copies(files):
    report = cmd_estimate(
        RunConfig(
            mode="estimate",
            pattern_path=files["triangle"],
            stream_paths=[files["k4"]],
            epsilon=0.5,
            m_bound=2,
            count_lower_bound=4,
        )
    )
    assert report["s"] == 6


@pytest.mark.slow
def test_estimate_triangles_in_k4(capsys, files):
    code, report = run_json(
        capsys,
        ["estimate", "-p", str(files["triangle"]), "-s", str(files["k4"]), "--copies", "100000", "--seed", "1"],
    )
    assert code == 0
    assert 3.6 <= report["estimate"] <= 4.4


def test_exact(files):
    report = cmd_exact(RunConfig(mode="exact", pattern_path=files["triangle"], stream_paths=[files["k4"]]))
    assert report["estimate"] == 4
    assert report["s"] is None
    report = cmd_exact(RunConfig(mode="exact", pattern_path=files["triangle"], stream_paths=[files["edges2"]]))
    assert report["estimate"] == 0


def test_exact_refuses_large_graph(capsys, files):
    code = main(["exact", "-p", str(files["triangle"]), "-s", str(files["k13"])])
    assert code == 5
    assert "SizeLimit" in capsys.readouterr().err


def test_merge_two_shards(capsys, files):
    d = files["dir"]
    p = str(files["triangle"])
    for name in ("k4", "k4_a", "k4_b"):
        assert main(["estimate", "-p", p, "-s", str(files[name]), "--copies", "40", "--seed", "5",
                     "--save", str(d / f"{name}.bank")]) == 0
    capsys.readouterr()
    code, merged = run_json(capsys, ["merge", "-p", p, str(d / "k4_a.bank"), str(d / "k4_b.bank"),
                                     "--out", str(d / "all.bank")])
    assert code == 0
    code, single = run_json(capsys, ["merge", "-p", p, str(d / "k4.bank")])
    assert abs(merged["estimate"] - single["estimate"]) < 1e-9
    assert (d / "all.bank").read_bytes() == (d / "k4.bank").read_bytes()


def test_merge_single_input_passthrough(capsys, files):
    d = files["dir"]
    p = str(files["triangle"])
    assert main(["estimate", "-p", p, "-s", str(files["k4"]), "--copies", "5", "--save", str(d / "a.bank")]) == 0
    assert main(["merge", "-p", p, str(d / "a.bank"), "--out", str(d / "b.bank")]) == 0
    assert (d / "a.bank").read_bytes() == (d / "b.bank").read_bytes()


def test_merge_mismatched_seeds(capsys, files):
    d = files["dir"]
    p = str(files["triangle"])
    main(["estimate", "-p", p, "-s", str(files["k4_a"]), "--copies", "5", "--seed", "1", "--save", str(d / "a.bank")])
    main(["estimate", "-p", p, "-s", str(files["k4_b"]), "--copies", "5", "--seed", "2", "--save", str(d / "b.bank")])
    capsys.readouterr()
    assert main(["--json", "merge", "-p", p, str(d / "a.bank"), str(d / "b.bank")]) == 4
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["error"] == "BasisMismatch"
    assert err["exit_code"] == 4


def test_bench_term_accounting(files):
    two = cmd_bench(RunConfig(mode="bench", pattern_path=files["edge"], copies=100, bench_edges=2000))
    assert two["edges_per_sec"] > 0
    assert two["terms_per_edge"] == 2 * 1 * 100
    four = cmd_bench(RunConfig(mode="bench", pattern_path=files["big"], copies=10, stream_paths=[files["edges4"]]))
    assert four["terms_per_edge"] == 24 * 10


def test_bench_deterministic(files):
    config = RunConfig(mode="bench", pattern_path=files["triangle"], copies=20, bench_edges=500, seed_base=4)
    assert cmd_bench(config)["estimate"] == cmd_bench(config)["estimate"]


def test_parse_error_exit_code(capsys, files):
    assert main(["estimate", "-p", str(files["triangle"]), "-s", str(files["bad"])]) == 3
    assert "bad.txt:2:" in capsys.readouterr().err


def test_missing_file_exit_code(files):
    assert main(["estimate", "-p", str(files["dir"] / "none.txt")]) == 3


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as info:
        main(["estimate"])
    assert info.value.code == 2


def test_run_config_validation():
    with pytest.raises(ConfigMismatch):
        RunConfig(mode="estimate", copies=0)
    with pytest.raises(ConfigMismatch):
        RunConfig(mode="nope")


@pytest.mark.parametrize("seed", ["-1", str(2 ** 64)])
def test_seed_out_of_range_is_config_error(capsys, files, seed):
    out = files["dir"] / "bad_seed.bank"
    code = main(["estimate", "-p", str(files["triangle"]), "-s", str(files["k4"]), "--copies", "4",
                 "--seed", seed, "--save", str(out)])
    assert code == 4
    assert "ConfigMismatch" in capsys.readouterr().err
    assert not out.exists()
