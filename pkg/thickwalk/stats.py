"""
Ensemble observables and power-law fits.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats as scipy_stats
from scipy.optimize import curve_fit

from thickwalk.exceptions import FitDomainError, PreconditionViolation
from thickwalk.geom import Walk

logger = logging.getLogger(__name__)

Cell = Tuple[int, float]


def _vertices(walk: Union[Walk, np.ndarray]) -> np.ndarray:
    return walk.vertices if isinstance(walk, Walk) else np.asarray(walk, dtype=np.float64)


def squared_radius_of_gyration(walk: Union[Walk, np.ndarray]) -> float:
    """Mean squared vertex distance from the vertex centroid"""
    vertices = _vertices(walk)
    centered = vertices - vertices.mean(axis=0)
    return float(np.einsum("ij,ij->", centered, centered) / vertices.shape[0])


def squared_end_to_end(walk: Union[Walk, np.ndarray]) -> float:
    vertices = _vertices(walk)
    span = vertices[-1] - vertices[0]
    return float(span @ span)


@dataclass
class RunningMoments:
    """(count, sum, sum of squares) accumulator; ``merge`` is associative"""

    count: int = 0
    total: float = 0.0
    total_sq: float = 0.0

    def add(self, value: float) -> None:
        self.count += 1
        self.total += value
        self.total_sq += value * value

    def extend(self, values: Iterable[float]) -> "RunningMoments":
        for value in values:
            self.add(value)
        return self

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        return RunningMoments(self.count + other.count, self.total + other.total, self.total_sq + other.total_sq)

    @property
    def mean(self) -> float:
        return self.total / self.count if self.count else math.nan

    @property
    def variance(self) -> float:
        if self.count < 2:
            return math.nan
        return max(0.0, (self.total_sq - self.total * self.total / self.count) / (self.count - 1))

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.count) if self.count >= 2 else math.nan


@dataclass
class ObservableSeries:
    """Per-sample values of one observable for one (n, r) cell"""

    key: Cell
    values: np.ndarray = field(default_factory=lambda: np.empty(0))

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)

    @property
    def count(self) -> int:
        return int(self.values.size)

    @property
    def mean(self) -> float:
        return float(self.values.mean()) if self.count else math.nan

    @property
    def stderr(self) -> float:
        if self.count < 2:
            return math.nan
        return float(self.values.std(ddof=1) / math.sqrt(self.count))


@dataclass(frozen=True)
class PowerLawFit:
    """y = exp(log_prefactor) * N ** exponent"""

    exponent: float
    log_prefactor: float
    exponent_stderr: float
    r_squared: float
    weighted: bool = False

    def predict(self, n: float) -> float:
        return math.exp(self.log_prefactor) * n ** self.exponent


def _line(x, intercept, slope):
    return intercept + slope * x


def fit_power_law(points: Sequence[Tuple[float, float]], sigmas: Optional[Sequence[float]] = None) -> PowerLawFit:
    """
    Least squares of log y on log N with vertical offsets.

    Unweighted OLS by default; with ``sigmas`` (absolute errors on y) the fit is error-weighted.
    """
    if len(points) < 3:
        raise FitDomainError(f"need at least 3 points, got {len(points)}")
    if sigmas is not None and len(sigmas) != len(points):
        raise FitDomainError("sigmas must match points one to one")
    order = sorted(range(len(points)), key=lambda k: (points[k][0], points[k][1]))
    data = np.array([points[k] for k in order], dtype=np.float64)
    if not np.all(np.isfinite(data)) or np.any(data <= 0):
        raise FitDomainError("lengths and values must be finite and positive")
    x = np.log(data[:, 0])
    y = np.log(data[:, 1])
    if np.ptp(x) == 0:
        raise FitDomainError("all points share one length")

    if sigmas is None:
        result = scipy_stats.linregress(x, y)
        slope, intercept, slope_err = float(result.slope), float(result.intercept), float(result.stderr)
    else:
        log_sigma = np.array([sigmas[k] for k in order], dtype=np.float64) / data[:, 1]
        if not np.all(np.isfinite(log_sigma)) or np.any(log_sigma <= 0):
            raise FitDomainError("sigmas must be finite and positive")
        params, covariance = curve_fit(_line, x, y, sigma=log_sigma, absolute_sigma=True)
        intercept, slope = float(params[0]), float(params[1])
        slope_err = float(math.sqrt(covariance[1, 1]))

    residuals = y - (intercept + slope * x)
    ss_res = float(residuals @ residuals)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return PowerLawFit(slope, intercept, slope_err, r_squared, weighted=sigmas is not None)


def acceptance_scaling(table: Mapping[Cell, float]) -> Dict[float, PowerLawFit]:
    """Per radius, the exponent alpha of acceptance ~ N^alpha"""
    by_radius: Dict[float, List[Tuple[float, float]]] = {}
    for (n, r), rate in table.items():
        by_radius.setdefault(r, []).append((n, rate))
    return {r: fit_power_law(points) for r, points in sorted(by_radius.items())}


def autocorrelation(series: Union[ObservableSeries, Sequence[float]], lag: int) -> float:
    """Normalized sample autocorrelation; NaN when the series has zero variance"""
    values = series.values if isinstance(series, ObservableSeries) else np.asarray(series, dtype=np.float64)
    count = values.size
    if not 0 <= lag < count:
        raise PreconditionViolation("autocorrelation", f"lag must be in 0..{count - 1}", lag=lag)
    centered = values - values.mean()
    variance = float(centered @ centered) / count
    if variance == 0:
        return math.nan
    return float(centered[:count - lag] @ centered[lag:]) / count / variance


def binomial_ci(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Clopper-Pearson interval for a proportion"""
    if trials == 0:
        return 0.0, 1.0
    interval = scipy_stats.binomtest(successes, trials).proportion_ci(confidence_level=confidence, method="exact")
    return float(interval.low), float(interval.high)


def knot_size_split(rows: Iterable[Mapping]) -> Dict[Cell, Dict[str, RunningMoments]]:
    """
    Mean RG^2 of unknotted against knotted walks per cell.

    Rows need ``n``, ``r``, ``rg2`` and a boolean ``knotted``.
    """
    split: Dict[Cell, Dict[str, RunningMoments]] = {}
    for row in rows:
        cell = (int(row["n"]), float(row["r"]))
        groups = split.setdefault(cell, {"unknotted": RunningMoments(), "knotted": RunningMoments()})
        groups["knotted" if row["knotted"] else "unknotted"].add(float(row["rg2"]))
    return dict(sorted(split.items()))


def ideal_rg2(n: int) -> float:
    """Mean RG^2 of the freely jointed chain with n unit edges"""
    return n * (n + 2) / (6.0 * (n + 1))
