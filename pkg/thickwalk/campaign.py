"""
Campaign commands: sample generation, observable and exponent analysis, knotting analysis,
text export and the acceptance table.

Work is split into (cell, chain) or per-walk tasks run on a process pool. Results are always
merged in task order, never completion order, so outputs do not depend on the thread count.
"""
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from sentry_sdk import logger as sentry_logger

from thickwalk import __version__
from thickwalk.config import config
from thickwalk.exceptions import FitDomainError, InvalidConfigError, SampleDataError
from thickwalk.geom import format_walk
from thickwalk.knots.spectrum import WEAK, dominance, knot_spectrum
from thickwalk.models.campaign import CampaignConfig, CellRecord, Manifest
from thickwalk.models.chain import ChainConfig, ChainStats
from thickwalk.sampler import (
    PUBLISHED_ACCEPTANCE,
    RNG_IDENTITY,
    ReflectionChain,
    make_rng,
    measure_acceptance,
    published_acceptance,
    radius_key,
)
from thickwalk.stats import (
    ObservableSeries,
    PowerLawFit,
    acceptance_scaling,
    autocorrelation,
    binomial_ci,
    fit_power_law,
    knot_size_split,
    squared_end_to_end,
    squared_radius_of_gyration,
)
from thickwalk.storage import (
    MANIFEST_FILE,
    ChainFileWriter,
    atomic_write_text,
    cell_dir_name,
    chain_file,
    ensure_dir,
    list_sample_cells,
    read_cell,
    read_csv,
    sha256_file,
    write_csv,
)

logger = logging.getLogger(__name__)

STATS_FILE = "stats.csv"
OBSERVABLES_FILE = "observables.csv"
EXPONENTS_FILE = "exponents.csv"
KNOTS_FILE = "knots.csv"
KNOT_PROBABILITY_FILE = "knot_probability.csv"
KNOT_SIZE_FILE = "knot_size.csv"
TABLE1_FILE = "table1.csv"
TABLE1_ALPHA_FILE = "table1_alpha.csv"
EXPORT_DIR = "export"

# Percentage points a measured acceptance may differ from the published one
TABLE1_TOLERANCE = 3.0

MATCH = "match"
DEVIATION = "deviation-documented"
UNPUBLISHED = "unpublished"

# Last spawn-key component of knot-analysis streams, keeps them apart from chain streams
KNOT_STREAM = 1


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return format(value, ".10g")


def resolve_threads(threads: Optional[int]) -> int:
    threads = config.THREADS if threads is None else threads
    if threads < 1:
        raise InvalidConfigError("threads", "must be at least 1")
    return threads


def _ordered_map(function: Callable, tasks: Sequence, threads: int, chunksize: int = 1) -> List:
    """Map ``function`` over ``tasks`` keeping task order, in-process when one thread is asked for"""
    if threads == 1 or len(tasks) <= 1:
        return [function(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=min(threads, len(tasks))) as executor:
        return list(executor.map(function, tasks, chunksize=chunksize))


# Manifest handling

def load_manifest(directory: Path) -> Optional[Manifest]:
    path = Path(directory) / MANIFEST_FILE
    if not path.is_file():
        return None
    return Manifest.model_validate_json(path.read_text())


def write_manifest(directory: Path, manifest: Manifest) -> Path:
    return atomic_write_text(Path(directory) / MANIFEST_FILE, manifest.model_dump_json(indent=2) + "\n")


def register_outputs(directory: Path, paths: Iterable[Path], command: str) -> Manifest:
    """Add ``paths`` with their checksums to the manifest of ``directory``, creating it if needed"""
    directory = Path(directory)
    manifest = load_manifest(directory) or Manifest(version=__version__, rng=RNG_IDENTITY)
    for path in paths:
        manifest.files[Path(path).relative_to(directory).as_posix()] = sha256_file(path)
    manifest.files = dict(sorted(manifest.files.items()))
    manifest.commands.append(command)
    write_manifest(directory, manifest)
    return manifest


# generate

def _run_chain_task(task: Tuple[ChainConfig, str]) -> Tuple[ChainStats, float]:
    """Run one chain and stream its samples into its chain file"""
    chain_config, output_dir = task
    started = time.perf_counter()
    chain = ReflectionChain(chain_config)
    path = chain_file(Path(output_dir), chain_config.n, chain_config.r, chain_config.chain_index)
    first_index = chain_config.chain_index * chain_config.samples
    with ChainFileWriter(path) as writer:
        for k, walk in enumerate(chain.samples()):
            writer.write(walk, chain_config.r, first_index + k)
    return chain.stats, time.perf_counter() - started


def cmd_generate(campaign: CampaignConfig, threads: Optional[int] = None) -> Manifest:
    """Sample every (n, r) cell of the campaign, write the chain files, stats.csv and the manifest"""
    threads = resolve_threads(threads)
    output_dir = ensure_dir(campaign.output_dir)
    tasks = [
        (campaign.chain_config(n, r, k), str(output_dir))
        for n, r in campaign.cells()
        for k in range(campaign.chains_per_cell)
    ]
    sentry_logger.info(
        'Campaign started',
        attributes={
            'campaign.cells': len(campaign.cells()),
            'campaign.chains': len(tasks),
            'campaign.samples_per_cell': campaign.samples_per_cell,
            'campaign.seed': campaign.seed,
            'campaign.threads': threads,
        }
    )
    started = time.perf_counter()
    results = _ordered_map(_run_chain_task, tasks, threads)

    cells: List[CellRecord] = []
    for index, (n, r) in enumerate(campaign.cells()):
        chunk = results[index * campaign.chains_per_cell:(index + 1) * campaign.chains_per_cell]
        stats = ChainStats()
        for chain_stats, _ in chunk:
            stats = stats.merge(chain_stats)
        cells.append(CellRecord(
            n=n,
            r=r,
            chains=campaign.chains_per_cell,
            samples=campaign.samples_per_cell,
            stats=stats,
            wall_clock_seconds=sum(seconds for _, seconds in chunk),
        ))

    stats_path = write_csv(
        output_dir / STATS_FILE,
        ["n", "r", "chains", "samples", "proposed", "accepted", "exhausted", "renormalizations", "acceptance_rate"],
        [
            [c.n, _fmt(c.r), c.chains, c.samples, c.stats.proposed, c.stats.accepted, c.stats.exhausted,
             c.stats.renormalizations, _fmt(c.stats.acceptance_rate)]
            for c in cells
        ],
    )
    sample_files = [chain_file(output_dir, t[0].n, t[0].r, t[0].chain_index) for t in tasks]
    manifest = Manifest(
        version=__version__,
        rng=RNG_IDENTITY,
        config=campaign,
        commands=["generate"],
        wall_clock_seconds=time.perf_counter() - started,
        cells=cells,
        files={
            path.relative_to(output_dir).as_posix(): sha256_file(path)
            for path in sorted([stats_path, *sample_files])
        },
    )
    write_manifest(output_dir, manifest)
    sentry_logger.info(
        'Campaign finished',
        attributes={
            'campaign.cells': len(cells),
            'campaign.wall_clock_seconds': manifest.wall_clock_seconds,
            'campaign.output_dir': str(output_dir),
        }
    )
    return manifest


# analyze

def _read_acceptance(sample_dir: Path) -> Dict[Tuple[int, int], float]:
    path = Path(sample_dir) / STATS_FILE
    if not path.is_file():
        return {}
    return {
        (int(row["n"]), radius_key(float(row["r"]))): float(row["acceptance_rate"])
        for row in read_csv(path)
    }


def _safe_fit(points, sigmas=None):
    try:
        return fit_power_law(points, sigmas)
    except FitDomainError as e:
        logger.info("power-law fit skipped: %s", e.details.get("error"))
        return None


def cmd_analyze(sample_dir: Path, out: Optional[Path] = None) -> List[Path]:
    """
    Per-cell RG^2 and R^2 means and per-radius exponents.

    observables.csv gets one row per (n, r); exponents.csv one row per r with the growth exponent nu
    (unweighted and error-weighted) and the acceptance exponent alpha when stats.csv is present.
    """
    sample_dir = Path(sample_dir)
    cells = list_sample_cells(sample_dir)
    out = ensure_dir(out or sample_dir)
    acceptance = _read_acceptance(sample_dir)
    rows = []
    rg2_by_radius: Dict[float, List[Tuple[int, ObservableSeries]]] = {}
    for cell in cells:
        walks, corrupt = read_cell(cell)
        rg2 = ObservableSeries((cell.n, cell.r), [squared_radius_of_gyration(w) for w in walks])
        r2 = ObservableSeries((cell.n, cell.r), [squared_end_to_end(w) for w in walks])
        lag1 = autocorrelation(rg2, 1) if rg2.count >= 2 else math.nan
        rows.append([
            cell.n, _fmt(cell.r), rg2.count, corrupt,
            _fmt(rg2.mean), _fmt(rg2.stderr), _fmt(r2.mean), _fmt(r2.stderr),
            _fmt(acceptance.get((cell.n, radius_key(cell.r)))), _fmt(lag1),
        ])
        if rg2.count:
            rg2_by_radius.setdefault(cell.r, []).append((cell.n, rg2))

    exponent_rows = []
    alphas = _acceptance_alphas(acceptance)
    for r, series in sorted(rg2_by_radius.items()):
        points = [(n, s.mean) for n, s in series]
        nu = _safe_fit(points)
        nu_weighted = _safe_fit(points, [s.stderr for _, s in series])
        alpha = alphas.get(radius_key(r))
        exponent_rows.append([
            _fmt(r), len(points),
            _fmt(nu and nu.exponent), _fmt(nu and nu.exponent_stderr), _fmt(nu and nu.r_squared),
            _fmt(nu_weighted and nu_weighted.exponent), _fmt(nu_weighted and nu_weighted.exponent_stderr),
            _fmt(alpha and alpha.exponent), _fmt(alpha and alpha.exponent_stderr),
        ])

    written = [
        write_csv(
            out / OBSERVABLES_FILE,
            ["n", "r", "samples", "corrupt_frames", "mean_rg2", "stderr_rg2", "mean_r2", "stderr_r2",
             "acceptance_rate", "rg2_autocorr_lag1"],
            rows,
        ),
        write_csv(
            out / EXPONENTS_FILE,
            ["r", "lengths", "nu", "nu_stderr", "nu_r_squared", "nu_weighted", "nu_weighted_stderr",
             "alpha", "alpha_stderr"],
            exponent_rows,
        ),
    ]
    register_outputs(out, written, "analyze")
    logger.info("analyzed %d cells from %s", len(rows), sample_dir)
    return written


def _acceptance_alphas(acceptance: Dict[Tuple[int, int], float]) -> Dict[int, PowerLawFit]:
    """Alpha per radius key; a radius with fewer than three positive rates gets no fit"""
    by_radius: Dict[int, Dict[Tuple[int, float], float]] = {}
    for (n, key), rate in acceptance.items():
        if rate > 0:
            by_radius.setdefault(key, {})[(n, key / 1e6)] = rate
    alphas = {}
    for key, table in sorted(by_radius.items()):
        try:
            alphas[key] = acceptance_scaling(table)[key / 1e6]
        except FitDomainError as e:
            logger.info("alpha fit skipped for r=%s: %s", key / 1e6, e.details.get("error"))
    return alphas


# knots

def _classify_walk_task(task: Tuple[np.ndarray, int, float, int, int, int]) -> Tuple:
    """Dominant class of one sampled walk over ``closures`` sphere closures"""
    vertices, n, r, index, closures, seed = task
    rng = make_rng(seed, n, radius_key(r), index, KNOT_STREAM)
    spectrum = knot_spectrum(vertices, closures, rng)
    verdict = dominance(spectrum)
    return (
        verdict.winner.name,
        verdict.winner.determinant,
        verdict.winner.secondary,
        verdict.level,
        verdict.fraction,
        verdict.is_knotted(WEAK),
        squared_radius_of_gyration(vertices),
    )


def cmd_knots(sample_dir: Path, closures: Optional[int] = None, seed: int = 0, out: Optional[Path] = None,
              threads: Optional[int] = None, lengths: Optional[Sequence[int]] = None) -> List[Path]:
    """
    Per-walk dominant knot class under weak dominance, per-cell knot probability with
    Clopper-Pearson intervals, and mean RG^2 of unknotted against knotted walks.
    """
    closures = config.KNOT_CLOSURES if closures is None else closures
    if closures < 1:
        raise InvalidConfigError("closures", "must be at least 1")
    threads = resolve_threads(threads)
    sample_dir = Path(sample_dir)
    wanted = None if lengths is None else set(lengths)
    cells = [c for c in list_sample_cells(sample_dir) if wanted is None or c.n in wanted]
    if not cells:
        raise SampleDataError(str(sample_dir), f"no sample cells with lengths {list(lengths or [])}")
    out = ensure_dir(out or sample_dir)

    tasks, keys = [], []
    for cell in cells:
        walks, _ = read_cell(cell)
        for index, walk in enumerate(walks):
            tasks.append((walk.vertices, cell.n, cell.r, index, closures, seed))
            keys.append((cell.n, cell.r, index))
    sentry_logger.info(
        'Knot analysis started',
        attributes={'knots.walks': len(tasks), 'knots.closures': closures, 'knots.threads': threads}
    )
    results = _ordered_map(_classify_walk_task, tasks, threads, chunksize=max(1, len(tasks) // (threads * 4)))

    walk_rows, size_rows = [], []
    per_cell: Dict[Tuple[int, float], List[Tuple]] = {}
    for (n, r, index), result in zip(keys, results):
        name, det, sec, level, fraction, knotted, rg2 = result
        walk_rows.append([n, _fmt(r), f"{cell_dir_name(n, r)}/{index}", name, det, sec, level,
                          _fmt(fraction), int(knotted), _fmt(rg2)])
        size_rows.append({"n": n, "r": r, "rg2": rg2, "knotted": knotted})
        per_cell.setdefault((n, r), []).append(result)

    probability_rows = []
    for (n, r), results_of_cell in per_cell.items():
        total = len(results_of_cell)
        knotted = sum(1 for result in results_of_cell if result[5])
        low, high = binomial_ci(knotted, total)
        mean_fraction = sum(result[4] for result in results_of_cell) / total
        probability_rows.append([n, _fmt(r), total, knotted, _fmt(knotted / total), _fmt(low), _fmt(high),
                                 _fmt(mean_fraction)])

    split_rows = []
    for (n, r), groups in knot_size_split(size_rows).items():
        unknotted, knotted = groups["unknotted"], groups["knotted"]
        split_rows.append([n, _fmt(r), unknotted.count, _fmt(unknotted.mean), _fmt(unknotted.stderr),
                           knotted.count, _fmt(knotted.mean), _fmt(knotted.stderr)])

    written = [
        write_csv(out / KNOTS_FILE,
                  ["n", "r", "walk", "dominant", "determinant", "secondary", "level", "fraction", "knotted", "rg2"],
                  walk_rows),
        write_csv(out / KNOT_PROBABILITY_FILE,
                  ["n", "r", "walks", "knotted", "probability", "ci_low", "ci_high", "mean_dominant_fraction"],
                  probability_rows),
        write_csv(out / KNOT_SIZE_FILE,
                  ["n", "r", "unknotted", "mean_rg2_unknotted", "stderr_rg2_unknotted",
                   "knotted", "mean_rg2_knotted", "stderr_rg2_knotted"],
                  split_rows),
    ]
    register_outputs(out, written, "knots")
    sentry_logger.info(
        'Knot analysis finished',
        attributes={'knots.walks': len(walk_rows), 'knots.cells': len(probability_rows)}
    )
    return written


# export

def cmd_export(sample_dir: Path, out: Optional[Path] = None) -> List[Path]:
    """Rewrite the binary samples of every cell as concatenated Walk text blocks"""
    sample_dir = Path(sample_dir)
    cells = list_sample_cells(sample_dir)
    out = ensure_dir(out or sample_dir / EXPORT_DIR)
    written = []
    for cell in cells:
        walks, _ = read_cell(cell)
        text = "".join(format_walk(walk, cell.r) for walk in walks)
        written.append(atomic_write_text(out / f"{cell_dir_name(cell.n, cell.r)}.txt", text))
    logger.info("exported %d cells to %s", len(written), out)
    return written


# table1

def _acceptance_task(task: Tuple[int, float, int, int, Optional[int], Optional[float]]) -> ChainStats:
    return measure_acceptance(*task)


def table1_status(measured: float, published: Optional[float], tolerance: float = TABLE1_TOLERANCE) -> str:
    if published is None:
        return UNPUBLISHED
    return MATCH if abs(measured - published) <= tolerance else DEVIATION


def published_alpha(r: float):
    """Acceptance exponent fitted to the full published column of radius ``r``"""
    points = [(n, rate) for (n, radius), rate in PUBLISHED_ACCEPTANCE.items() if radius_key(radius) == radius_key(r)]
    return fit_power_law(points) if len(points) >= 3 else None


def cmd_table1(lengths: Sequence[int], radii: Sequence[float], proposals: int, seed: int, out: Path,
               threads: Optional[int] = None, burn_in: Optional[int] = None, move_mix: Optional[float] = None,
               tolerance: float = TABLE1_TOLERANCE) -> List[Path]:
    """Measure acceptance per (n, r) after burn-in and compare with the published table"""
    if proposals < 1:
        raise InvalidConfigError("proposals", "must be at least 1")
    threads = resolve_threads(threads)
    out = ensure_dir(out)
    cells = [(n, r) for n in lengths for r in radii]
    results = _ordered_map(
        _acceptance_task,
        [(n, r, proposals, seed, burn_in, move_mix) for n, r in cells],
        threads,
    )

    rows, measured = [], {}
    for (n, r), stats in zip(cells, results):
        rate = 100.0 * stats.acceptance_rate
        measured[(n, r)] = rate
        published = published_acceptance(n, r)
        status = table1_status(rate, published, tolerance)
        if status == DEVIATION:
            sentry_logger.warning(
                'Acceptance deviates from published value',
                attributes={
                    'table1.n': n,
                    'table1.r': r,
                    'table1.measured': rate,
                    'table1.published': published,
                    'table1.tolerance': tolerance,
                }
            )
        rows.append([n, _fmt(r), stats.proposed, stats.accepted, f"{rate:.2f}",
                     "" if published is None else f"{published:.2f}",
                     "" if published is None else f"{rate - published:.2f}", status])

    alpha_rows = []
    by_radius: Dict[float, List[Tuple[int, float]]] = {}
    for (n, r), rate in measured.items():
        by_radius.setdefault(r, []).append((n, rate))
    for r, points in by_radius.items():
        fit = _safe_fit([(n, rate) for n, rate in points if rate > 0])
        reference = published_alpha(r)
        alpha_rows.append([_fmt(r), len(points), _fmt(fit and fit.exponent), _fmt(fit and fit.exponent_stderr),
                           _fmt(fit and fit.r_squared), _fmt(reference and reference.exponent)])

    written = [
        write_csv(out / TABLE1_FILE,
                  ["n", "r", "proposals", "accepted", "measured", "published", "deviation", "status"], rows),
        write_csv(out / TABLE1_ALPHA_FILE,
                  ["r", "lengths", "alpha", "alpha_stderr", "alpha_r_squared", "published_alpha"], alpha_rows),
    ]
    register_outputs(out, written, "table1")
    return written
