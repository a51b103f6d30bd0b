import math

import pytest

from thickwalk.campaign import (
    DEVIATION,
    EXPONENTS_FILE,
    KNOT_PROBABILITY_FILE,
    KNOT_SIZE_FILE,
    KNOTS_FILE,
    MATCH,
    OBSERVABLES_FILE,
    STATS_FILE,
    TABLE1_ALPHA_FILE,
    TABLE1_FILE,
    UNPUBLISHED,
    cmd_analyze,
    cmd_export,
    cmd_generate,
    cmd_knots,
    cmd_table1,
    load_manifest,
    published_alpha,
    resolve_threads,
    table1_status,
)
from thickwalk.exceptions import InvalidConfigError, SampleDataError
from thickwalk.geom import parse_walks
from thickwalk.models.campaign import CampaignConfig
from thickwalk.storage import MANIFEST_FILE, read_csv, sha256_file, write_csv
from thickwalk.thickness import ThicknessParams, accommodates_tube

LENGTHS = [10, 12, 14]
RADII = [0.0, 0.2]


def tiny_campaign(output_dir, **overrides) -> CampaignConfig:
    values = dict(
        lengths=LENGTHS,
        radii=RADII,
        samples_per_cell=4,
        chains_per_cell=2,
        seed=17,
        burn_in=20,
        stride=5,
        knot_closures=5,
        output_dir=output_dir,
    )
    values.update(overrides)
    return CampaignConfig(**values)


@pytest.fixture
def sample_dir(tmp_path):
    campaign = tiny_campaign(tmp_path / "run")
    cmd_generate(campaign, threads=1)
    return campaign.output_dir


def test_generate_writes_samples_stats_and_manifest(sample_dir):
    files = sorted(p.relative_to(sample_dir).as_posix() for p in (sample_dir / "samples").rglob("*.bin"))
    assert len(files) == len(LENGTHS) * len(RADII) * 2
    assert "samples/n10_r0.2/chain1.bin" in files

    stats = read_csv(sample_dir / STATS_FILE)
    assert [(int(row["n"]), float(row["r"])) for row in stats] == [(n, r) for n in LENGTHS for r in RADII]
    for row in stats:
        assert int(row["accepted"]) == 2 * (20 + 2 * 5)
        if float(row["r"]) == 0.0:
            assert row["acceptance_rate"] == "1"

    manifest = load_manifest(sample_dir)
    assert manifest.config.seed == 17
    assert manifest.commands == ["generate"]
    assert len(manifest.cells) == 6
    for relative, digest in manifest.files.items():
        assert sha256_file(sample_dir / relative) == digest


def test_generated_walks_are_thick(sample_dir):
    text_dir = sample_dir / "text"
    written = cmd_export(sample_dir, out=text_dir)
    assert len(written) == 6
    for path in written:
        blocks = list(parse_walks(path.read_text()))
        assert len(blocks) == 4
        for walk, r in blocks:
            assert accommodates_tube(walk, ThicknessParams(r))


def test_generate_is_independent_of_thread_count(tmp_path):
    one = tiny_campaign(tmp_path / "one")
    two = tiny_campaign(tmp_path / "two")
    cmd_generate(one, threads=1)
    cmd_generate(two, threads=2)
    for path in sorted((one.output_dir / "samples").rglob("*.bin")):
        twin = two.output_dir / path.relative_to(one.output_dir)
        assert twin.read_bytes() == path.read_bytes()
    assert (one.output_dir / STATS_FILE).read_text() == (two.output_dir / STATS_FILE).read_text()


def test_seed_changes_the_samples(tmp_path):
    first = tiny_campaign(tmp_path / "a", lengths=[10], radii=[0.1])
    second = tiny_campaign(tmp_path / "b", lengths=[10], radii=[0.1], seed=18)
    cmd_generate(first, threads=1)
    cmd_generate(second, threads=1)
    chain = "samples/n10_r0.1/chain0.bin"
    assert (first.output_dir / chain).read_bytes() != (second.output_dir / chain).read_bytes()


def test_analyze(sample_dir):
    written = cmd_analyze(sample_dir)
    assert [p.name for p in written] == [OBSERVABLES_FILE, EXPONENTS_FILE]

    observables = read_csv(sample_dir / OBSERVABLES_FILE)
    assert len(observables) == 6
    for row in observables:
        assert int(row["samples"]) == 4
        assert int(row["corrupt_frames"]) == 0
        assert float(row["mean_rg2"]) > 0
        assert float(row["mean_r2"]) > 0

    exponents = read_csv(sample_dir / EXPONENTS_FILE)
    assert [float(row["r"]) for row in exponents] == RADII
    for row in exponents:
        assert int(row["lengths"]) == 3
        assert math.isfinite(float(row["nu"]))
        assert math.isfinite(float(row["alpha"]))
    assert float(exponents[0]["alpha"]) == pytest.approx(0.0, abs=1e-12)

    manifest = load_manifest(sample_dir)
    assert manifest.commands == ["generate", "analyze"]
    assert OBSERVABLES_FILE in manifest.files


def test_analyze_fits_alpha_per_radius(sample_dir):
    stats = read_csv(sample_dir / STATS_FILE)
    kept = [row for row in stats if not (row["n"] == "14" and float(row["r"]) == 0.2)]
    write_csv(sample_dir / STATS_FILE, list(stats[0]), [list(row.values()) for row in kept])

    exponents = {float(row["r"]): row for row in read_csv(cmd_analyze(sample_dir)[1])}
    assert float(exponents[0.0]["alpha"]) == pytest.approx(0.0, abs=1e-12)
    assert exponents[0.2]["alpha"] == ""
    assert math.isfinite(float(exponents[0.2]["nu"]))


def test_analyze_counts_corrupt_frames(sample_dir):
    chain = sample_dir / "samples" / "n10_r0" / "chain0.bin"
    chain.write_bytes(chain.read_bytes() + b"\x01\x02\x03")
    rows = {(row["n"], row["r"]): row for row in read_csv(cmd_analyze(sample_dir)[0])}
    assert rows[("10", "0")]["corrupt_frames"] == "1"
    assert rows[("10", "0")]["samples"] == "4"


def test_analyze_without_samples(tmp_path):
    with pytest.raises(SampleDataError):
        cmd_analyze(tmp_path / "nothing")
    assert not (tmp_path / "nothing").exists()


def test_knots(sample_dir):
    written = cmd_knots(sample_dir, closures=5, seed=3, threads=1, lengths=[10, 14])
    assert [p.name for p in written] == [KNOTS_FILE, KNOT_PROBABILITY_FILE, KNOT_SIZE_FILE]

    walks = read_csv(sample_dir / KNOTS_FILE)
    assert len(walks) == 2 * len(RADII) * 4
    assert {row["n"] for row in walks} == {"10", "14"}
    assert all(row["walk"].startswith(f"n{row['n']}_r") for row in walks)

    probabilities = read_csv(sample_dir / KNOT_PROBABILITY_FILE)
    assert len(probabilities) == 4
    for row in probabilities:
        assert int(row["walks"]) == 4
        assert float(row["ci_low"]) <= float(row["probability"]) <= float(row["ci_high"])

    sizes = read_csv(sample_dir / KNOT_SIZE_FILE)
    assert all(int(row["unknotted"]) + int(row["knotted"]) == 4 for row in sizes)


def test_knots_is_reproducible_across_threads(sample_dir, tmp_path):
    first = cmd_knots(sample_dir, closures=4, seed=1, out=tmp_path / "k1", threads=1, lengths=[12])
    second = cmd_knots(sample_dir, closures=4, seed=1, out=tmp_path / "k2", threads=2, lengths=[12])
    for a, b in zip(first, second):
        assert a.read_text() == b.read_text()


def test_knots_argument_checks(sample_dir):
    with pytest.raises(InvalidConfigError):
        cmd_knots(sample_dir, closures=0)
    with pytest.raises(SampleDataError):
        cmd_knots(sample_dir, closures=2, threads=1, lengths=[999])


def test_export_defaults_under_the_sample_dir(sample_dir):
    written = cmd_export(sample_dir)
    assert {p.parent.name for p in written} == {"export"}
    assert (sample_dir / "export" / "n12_r0.2.txt").is_file()


def test_table1_status():
    assert table1_status(78.0, 78.56) == MATCH
    assert table1_status(70.0, 78.56) == DEVIATION
    assert table1_status(50.0, None) == UNPUBLISHED
    assert table1_status(76.0, 78.56, tolerance=1.0) == DEVIATION


def test_published_alpha():
    assert -0.11 < published_alpha(0.5).exponent < -0.08
    assert published_alpha(0.0).exponent == pytest.approx(0.0, abs=1e-12)
    assert published_alpha(0.55) is None


def test_table1_small_grid(tmp_path):
    written = cmd_table1([100], [0.0, 0.3], proposals=300, seed=2, out=tmp_path / "t1", threads=1, burn_in=50)
    assert [p.name for p in written] == [TABLE1_FILE, TABLE1_ALPHA_FILE]
    rows = read_csv(written[0])
    assert rows[0]["measured"] == "100.00"
    assert rows[0]["status"] == MATCH
    assert rows[0]["published"] == "100.00"
    assert int(rows[1]["proposals"]) == 300
    assert rows[1]["status"] in (MATCH, DEVIATION)
    alpha = read_csv(written[1])
    # a single length cannot be fitted
    assert all(row["alpha"] == "" for row in alpha)
    assert load_manifest(tmp_path / "t1").commands == ["table1"]
    assert (tmp_path / "t1" / MANIFEST_FILE).is_file()


def test_table1_rejects_empty_budget(tmp_path):
    with pytest.raises(InvalidConfigError):
        cmd_table1([100], [0.1], proposals=0, seed=0, out=tmp_path)


def test_resolve_threads():
    assert resolve_threads(3) == 3
    with pytest.raises(InvalidConfigError):
        resolve_threads(0)
