import pytest

from thickwalk import __version__
from thickwalk.campaign import KNOTS_FILE, OBSERVABLES_FILE, STATS_FILE, TABLE1_FILE, load_manifest
from thickwalk.cli import main
from thickwalk.storage import read_csv


def generate(out, *extra):
    return main([
        "generate",
        "--lengths", "10,12",
        "--radii", "0,0.1",
        "--samples", "2",
        "--burn-in", "5",
        "--stride", "2",
        "--seed", "3",
        "--closures", "3",
        "--knot-lengths", "12",
        "--threads", "1",
        "--out", str(out),
        *extra,
    ])


def test_version(capsys):
    with pytest.raises(SystemExit) as exit_info:
        main(["--version"])
    assert exit_info.value.code == 0
    assert __version__ in capsys.readouterr().out


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["generate", "--samples", "many"]])
def test_usage_errors_exit_with_one(argv):
    with pytest.raises(SystemExit) as exit_info:
        main(argv)
    assert exit_info.value.code == 1


def test_generate_then_analyze_knots_and_export(tmp_path, capsys):
    out = tmp_path / "run"
    assert generate(out) == 0
    assert "generated 4 cells" in capsys.readouterr().out
    assert len(read_csv(out / STATS_FILE)) == 4

    assert main(["analyze", str(out)]) == 0
    assert len(read_csv(out / OBSERVABLES_FILE)) == 4

    # closures and lengths come from the campaign recorded at generate time
    assert main(["knots", str(out), "--threads", "1"]) == 0
    rows = read_csv(out / KNOTS_FILE)
    assert {row["n"] for row in rows} == {"12"}
    assert len(rows) == 4

    assert main(["export", str(out)]) == 0
    assert sorted(p.name for p in (out / "export").iterdir()) == [
        "n10_r0.1.txt", "n10_r0.txt", "n12_r0.1.txt", "n12_r0.txt",
    ]
    assert load_manifest(out).commands == ["generate", "analyze", "knots"]


def test_campaign_file_with_flag_override(tmp_path):
    config_file = tmp_path / "grid.cfg"
    config_file.write_text("lengths = 10\nradii = 0.2\nsamples = 2\nseed = 5\nburn_in = 4\nstride = 2\n")
    out = tmp_path / "run"
    assert main(["generate", "--config", str(config_file), "--seed", "6", "--threads", "1", "--out", str(out)]) == 0
    manifest = load_manifest(out)
    assert manifest.config.seed == 6
    assert manifest.config.lengths == [10]


@pytest.mark.parametrize("extra", [["--radii=-0.5"], ["--chains", "3"], ["--knot-lengths", "40"]])
def test_invalid_campaign_exits_with_one(tmp_path, extra, capsys):
    assert generate(tmp_path / "run", *extra) == 1
    assert "error:" in capsys.readouterr().err


def test_missing_samples_exit_with_two(tmp_path):
    assert main(["analyze", str(tmp_path / "missing")]) == 2
    assert main(["export", str(tmp_path / "missing")]) == 2


def test_unreadable_chain_file_exits_with_two(tmp_path, capsys):
    out = tmp_path / "run"
    assert generate(out) == 0
    chain = out / "samples" / "n10_r0" / "chain0.bin"
    chain.unlink()
    chain.mkdir()
    assert main(["analyze", str(out)]) == 2
    assert "error:" in capsys.readouterr().err


def test_knots_bad_lengths(tmp_path):
    out = tmp_path / "run"
    assert generate(out) == 0
    assert main(["knots", str(out), "--lengths", "ten"]) == 1


def test_table1(tmp_path, capsys):
    out = tmp_path / "t1"
    code = main(["table1", "--lengths", "20", "--radii", "0,0.2", "--proposals", "100", "--burn-in", "10",
                 "--threads", "1", "--out", str(out)])
    assert code == 0
    rows = read_csv(out / TABLE1_FILE)
    assert [row["r"] for row in rows] == ["0", "0.2"]
    assert all(row["status"] == "unpublished" for row in rows)
    assert main(["table1", "--proposals", "0", "--out", str(out)]) == 1
