"""
Monte Carlo estimators and scaling fits.

Replica ``i`` of an experiment is drawn from the Philox stream
``replica_seed(master_seed, i)``: one uniform per site, row-major, and a
site is open iff its draw is below ``p``. Every ``p`` of an experiment
thresholds the same draws (common random numbers), and boxes of different
``n`` are filled from the same per-replica stream, so all cells of one
experiment are coupled. Replica-level statistics are kept so that
confidence intervals of derived quantities (ratios, fitted slopes) come from
one paired bootstrap over replicas.

Intervals: Wilson for proportions, percentile bootstrap with
:data:`N_BOOTSTRAP` resamples for means, ratios and slopes.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import curve_fit
from scipy.special import ndtr
from scipy.stats import binomtest

from . import _kernels
from .errors import DataQualityError, DomainError, EstimationError
from .lattice import CLOSED, OPEN, Region, replica_seed, uniforms

log = logging.getLogger(__name__)

KINDS = ("crossing_prob", "conditional_pivotal", "one_arm", "cluster_tail",
         "rsw_aspect", "pc_locate")

#: Master seed used when none is given.
DEFAULT_SEED = 1729
N_BOOTSTRAP = 2000
CI_LEVEL = 0.95

#: Column order of the CSV output (version 1).
CSV_COLUMNS = ("kind", "n", "p", "aspect", "estimate", "stderr", "ci_lo", "ci_hi",
               "replicas", "accepted", "seed")
CSV_VERSION = 1

# spawn-key slot of the bootstrap stream; replica streams use (i,)
_BOOTSTRAP_KEY = (2 ** 32 - 1, 0)
_CHUNK = 64


@dataclass(frozen=True)
class ExperimentSpec:
    """Declarative description of a Monte Carlo run.

    ``aspect`` is the width-to-height ratio ``k`` of the boxes
    ``[0, k n] x [0, n]``. ``conditioned`` (one-arm only) conditions on the
    origin being open. ``color`` selects open or closed crossings for the
    pivotal estimator; ``swapped`` draws the color-swapped configuration
    (a site is open iff its draw is not below ``1 - p``).
    """

    kind: str
    n_values: tuple[int, ...]
    p_values: tuple[float, ...]
    replicas: int
    master_seed: int = DEFAULT_SEED
    aspect: int = 1
    conditioned: bool = False
    color: int = OPEN
    swapped: bool = False

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "p_values", tuple(float(p) for p in self.p_values))
        if self.kind not in KINDS:
            raise DomainError(f"unknown experiment kind {self.kind!r}; expected one of {KINDS}")
        if self.replicas < 1:
            raise DomainError("replicas must be at least 1")
        if not self.n_values or min(self.n_values) < 0:
            raise DomainError("n values must be non-negative and non-empty")
        if not self.p_values or not all(0.0 <= p <= 1.0 for p in self.p_values):
            raise DomainError("p values must lie in [0, 1] and be non-empty")
        if self.aspect < 1:
            raise DomainError("aspect must be at least 1")
        if self.color not in (OPEN, CLOSED):
            raise DomainError("color must be OPEN (1) or CLOSED (0)")
        if self.master_seed < 0:
            raise DomainError("master seed must be non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["n_values"] = list(self.n_values)
        d["p_values"] = list(self.p_values)
        return d


@dataclass(frozen=True)
class EstimateRecord:
    """One statistically annotated estimate for a cell ``(kind, n, p)``."""

    kind: str
    n: int | str
    p: float | None
    aspect: int
    estimate: float
    stderr: float
    ci_lo: float
    ci_hi: float
    replicas: int
    accepted: int
    seed: int
    ci_method: str
    wall_time: float = field(default=0.0, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.estimate):
            raise EstimationError(f"non-finite estimate for {self.kind} at n={self.n}")
        if not self.stderr >= 0:
            raise EstimationError("standard error must be non-negative")
        # a percentile interval can miss a skewed point estimate; widen to keep it
        object.__setattr__(self, "ci_lo", min(self.ci_lo, self.estimate))
        object.__setattr__(self, "ci_hi", max(self.ci_hi, self.estimate))

    def to_dict(self, timing: bool = False) -> dict:
        d = asdict(self)
        if not timing:
            d.pop("wall_time")
        return d

    def csv_row(self) -> list[str]:
        return [_fmt(getattr(self, c)) for c in CSV_COLUMNS]


@dataclass(frozen=True)
class FitResult:
    """Least-squares line through transformed points with a bootstrap slope interval.

    ``power_law``: ``log y = slope * log n + intercept``; ``exponential``:
    ``log y = slope * n + intercept``; ``trend``: ``y = slope * log n + intercept``.
    """

    model: str
    slope: float
    intercept: float
    slope_ci: tuple[float, float]
    r_squared: float
    n_points: int
    ci_method: str
    resamples: int
    discarded: int = 0

    def predict(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        if self.model == "power_law":
            return np.exp(self.intercept) * n ** self.slope
        if self.model == "exponential":
            return np.exp(self.intercept + self.slope * n)
        return self.intercept + self.slope * np.log(n)

    def slope_excludes_zero(self) -> bool:
        lo, hi = self.slope_ci
        return lo > 0 or hi < 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["slope_ci"] = list(self.slope_ci)
        return d


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    records: list[EstimateRecord]
    fits: dict[str, FitResult] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    #: bootstrap replicates of the estimates: ``(kind, p) -> (N_BOOTSTRAP, len(n_values))``
    replicates: dict = field(default_factory=dict, repr=False)
    wall_time: float = 0.0

    def select(self, kind: str, p: float | None = None) -> list[EstimateRecord]:
        return [r for r in self.records if r.kind == kind and (p is None or r.p == p)]

    def record(self, kind: str, n, p: float | None = None) -> EstimateRecord:
        for r in self.select(kind, p):
            if r.n == n:
                return r
        raise KeyError((kind, n, p))

    def points(self, kind: str, p: float | None = None) -> list[tuple[int, float]]:
        return [(r.n, r.estimate) for r in self.select(kind, p)]

    def to_dict(self) -> dict:
        return {
            "spec": self.spec.to_dict(),
            "records": [r.to_dict() for r in self.records],
            "fits": {k: f.to_dict() for k, f in self.fits.items()},
            "summary": _jsonable(self.summary),
        }


# -- serialization ------------------------------------------------------------------

def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def records_to_csv(records: Sequence[EstimateRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


def result_to_json(result: ExperimentResult) -> str:
    return json.dumps(result.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"


# -- replica driver -----------------------------------------------------------------

def run_replicas(fn: Callable[[int], np.ndarray], replicas: int, master_seed: int,
                 threads: int = 1, chunk: int = _CHUNK) -> np.ndarray:
    """Stack ``fn(replica_seed(master_seed, i))`` for ``i < replicas``.

    Chunks of replicas are spread over `threads` workers; rows are placed by
    replica index, so the result never depends on the number of workers.
    """
    starts = range(0, replicas, chunk)

    def work(lo):
        return np.stack([fn(replica_seed(master_seed, i))
                         for i in range(lo, min(lo + chunk, replicas))])

    if threads <= 1:
        parts = [work(lo) for lo in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(work, starts))
    return np.concatenate(parts, axis=0)


def _open_states(u: np.ndarray, p: float, swapped: bool) -> np.ndarray:
    if swapped:
        return (1 - (u < 1.0 - p)).astype(np.uint8)
    return (u < p).astype(np.uint8)


def _box(n: int, aspect: int) -> Region:
    return Region.rectangle(aspect * n, n)


# -- bootstrap ----------------------------------------------------------------------

def _bootstrap_rng(master_seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(
        np.random.SeedSequence(master_seed, spawn_key=_BOOTSTRAP_KEY)))


def bootstrap_sums(data: np.ndarray, master_seed: int, n_resamples: int = N_BOOTSTRAP,
                   batch: int | None = None) -> np.ndarray:
    """Column sums of `data` under `n_resamples` replica resamples.

    Row ``b`` of the result is ``sum_i w_bi data[i]`` where ``w_b`` counts how
    often each replica was drawn (with replacement) in resample ``b``. The
    same resamples are used for all columns, so derived statistics stay paired.
    """
    data = np.asarray(data, dtype=np.float64)
    R = data.shape[0]
    rng = _bootstrap_rng(master_seed)
    if batch is None:
        batch = max(1, min(n_resamples, 2_000_000 // max(R, 1)))
    out = np.empty((n_resamples, data.shape[1]))
    for lo in range(0, n_resamples, batch):
        b = min(batch, n_resamples - lo)
        idx = rng.integers(0, R, size=(b, R))
        idx += (np.arange(b) * R)[:, None]
        w = np.bincount(idx.ravel(), minlength=b * R).reshape(b, R)
        out[lo:lo + b] = w @ data
    return out


def _percentile_ci(samples: np.ndarray, level: float = CI_LEVEL) -> tuple[float, float]:
    s = samples[np.isfinite(samples)]
    if s.size == 0:
        return (math.nan, math.nan)
    a = 100 * (1 - level) / 2
    lo, hi = np.percentile(s, [a, 100 - a])
    return float(lo), float(hi)


def wilson(k: int, n: int, level: float = CI_LEVEL) -> tuple[float, float]:
    ci = binomtest(int(k), int(n)).proportion_ci(confidence_level=level, method="wilson")
    return float(ci.low), float(ci.high)


def _proportion_record(kind, n, p, spec, k, total, wall) -> EstimateRecord:
    est = k / total
    lo, hi = wilson(k, total)
    return EstimateRecord(kind, n, p, spec.aspect, est, math.sqrt(est * (1 - est) / total),
                          lo, hi, spec.replicas, int(total), spec.master_seed, "wilson", wall)


# -- fits ---------------------------------------------------------------------------

def _ols(x: np.ndarray, y: np.ndarray):
    """Slopes and intercepts of least-squares lines; `y` may carry leading batch axes."""
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = ((y - y.mean(axis=-1, keepdims=True)) * xc).sum(axis=-1) / sxx
    intercept = y.mean(axis=-1) - slope * x.mean()
    return slope, intercept


def _fit(model: str, points, replicates, n_resamples, seed, level) -> FitResult:
    pts = sorted((float(n), float(v)) for n, v in points)
    if len(pts) < 3:
        raise DomainError("a fit needs at least 3 points")
    ns = np.array([n for n, _ in pts])
    vals = np.array([v for _, v in pts])
    if len(set(ns)) < 2:
        raise DomainError("a fit needs at least two distinct n")
    if model == "trend":
        transform = lambda v: v  # noqa: E731
        x = np.log(ns)
    else:
        if np.any(vals <= 0):
            raise DomainError("fit values must be positive")
        transform = np.log
        x = np.log(ns) if model == "power_law" else ns
    if model == "power_law" and np.any(ns <= 0):
        raise DomainError("power-law fits need positive n")
    y = transform(vals)
    slope, intercept = _ols(x, y)
    resid = y - (intercept + slope * x)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot <= 1e-300:
        r2 = 1.0 if ss_res <= 1e-300 else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    discarded = 0
    if replicates is not None:
        reps = np.asarray(replicates, dtype=float)
        order = np.argsort([n for n, _ in points], kind="stable")
        reps = reps[:, order]
        ok = np.all(np.isfinite(reps), axis=1)
        if model != "trend":
            ok &= np.all(reps > 0, axis=1)
        discarded = int((~ok).sum())
        if not ok.any():
            raise EstimationError("no bootstrap replicate admits the fit")
        boot, _ = _ols(x, transform(reps[ok]))
        method = "replica"
    else:
        rng = np.random.default_rng(seed)
        fitted = intercept + slope * x
        idx = rng.integers(0, len(x), size=(n_resamples, len(x)))
        boot, _ = _ols(x, fitted + resid[idx])
        method = "residual"
    lo, hi = _percentile_ci(boot, level)
    return FitResult(model, float(slope), float(intercept), (lo, hi), r2, len(pts),
                     method, int(len(boot)), discarded)


def fit_power_law(points, replicates=None, *, n_resamples: int = N_BOOTSTRAP,
                  seed: int = DEFAULT_SEED, level: float = CI_LEVEL) -> FitResult:
    """Fit ``value ~ C n^slope`` by least squares on ``(log n, log value)``.

    Parameters
    ----------
    points : sequence of (n, value)
        At least three points with positive values.
    replicates : array, optional
        Bootstrap replicates of the values, one row per resample with columns
        in the order of `points` (e.g. ``ExperimentResult.replicates``).
        Rows with a nonpositive entry are discarded and counted. Without
        replicates the slope interval comes from a residual bootstrap.
    """
    return _fit("power_law", points, replicates, n_resamples, seed, level)


def fit_exponential(points, replicates=None, *, n_resamples: int = N_BOOTSTRAP,
                    seed: int = DEFAULT_SEED, level: float = CI_LEVEL) -> FitResult:
    """Fit ``value ~ C exp(slope * n)`` on ``(n, log value)``; ``-slope`` estimates the decay rate.

    Arguments as in :func:`fit_power_law`.
    """
    return _fit("exponential", points, replicates, n_resamples, seed, level)


def fit_trend(points, replicates=None, *, n_resamples: int = N_BOOTSTRAP,
              seed: int = DEFAULT_SEED, level: float = CI_LEVEL) -> FitResult:
    """Fit ``value ~ slope * log n + intercept`` (drift of an estimate with scale)."""
    return _fit("trend", points, replicates, n_resamples, seed, level)


def _auto_fits(result: ExperimentResult, kind: str, models: Sequence[str]) -> None:
    spec = result.spec
    for p in spec.p_values:
        recs = [r for r in result.select(kind, p) if isinstance(r.n, int) and r.n > 0]
        if len(recs) < 3:
            continue
        pts = [(r.n, r.estimate) for r in recs]
        reps = result.replicates.get((kind, p))
        if reps is not None:
            cols = [spec.n_values.index(r.n) for r in recs]
            reps = reps[:, cols]
        for model in models:
            fitter = {"power_law": fit_power_law, "exponential": fit_exponential,
                      "trend": fit_trend}[model]
            key = f"{model}:{kind}@p={p:g}"
            try:
                result.fits[key] = fitter(pts, reps, seed=spec.master_seed)
            except (DomainError, EstimationError) as err:
                result.summary.setdefault("fit_errors", {})[key] = str(err)


# -- estimators ---------------------------------------------------------------------

def _require(spec: ExperimentSpec, *kinds: str) -> None:
    if spec.kind not in kinds:
        raise DomainError(f"spec kind {spec.kind!r} is not one of {kinds}")


def _crossing_data(spec: ExperimentSpec, threads: int) -> np.ndarray:
    """Replica rows of LR indicators, column ``i * len(p) + j`` for ``(n_i, p_j)``."""
    ps = np.array(spec.p_values)
    boxes = [_box(n, spec.aspect) for n in spec.n_values]
    use_threshold = len(ps) > 3 and not spec.swapped

    def one(seed):
        row = []
        for r in boxes:
            u = uniforms(r, seed)
            if use_threshold:
                row.append(_kernels.lr_threshold(u) < ps)
            else:
                row.append([_kernels.has_crossing(_open_states(u, p, spec.swapped), OPEN, False)
                            for p in ps])
        return np.concatenate([np.asarray(x, dtype=np.float64) for x in row])

    return run_replicas(one, spec.replicas, spec.master_seed, threads)


def _crossing_result(spec: ExperimentSpec, data: np.ndarray, kind: str, t0: float,
                     boot: np.ndarray | None = None) -> ExperimentResult:
    R = spec.replicas
    nP = len(spec.p_values)
    wall = time.perf_counter() - t0
    recs = []
    for i, n in enumerate(spec.n_values):
        for j, p in enumerate(spec.p_values):
            k = int(data[:, i * nP + j].sum())
            recs.append(_proportion_record(kind, n, p, spec, k, R, wall))
    res = ExperimentResult(spec, recs, wall_time=wall)
    if boot is None:
        boot = bootstrap_sums(data, spec.master_seed)
    for j, p in enumerate(spec.p_values):
        res.replicates[(kind, p)] = boot[:, [i * nP + j for i in range(len(spec.n_values))]] / R
    return res


def estimate_crossing_probability(spec: ExperimentSpec, *, threads: int = 1) -> ExperimentResult:
    """Proportion of replicas with a left-right open crossing of ``[0, k n] x [0, n]``.

    One record per ``(n, p)`` with a Wilson interval. With more than three
    ``p`` values the whole curve comes from one crossing threshold per
    replica (the crossing occurs at ``p`` iff the threshold is below ``p``).
    """
    _require(spec, "crossing_prob", "rsw_aspect", "pc_locate")
    t0 = time.perf_counter()
    data = _crossing_data(spec, threads)
    return _crossing_result(spec, data, "crossing_prob", t0)


def estimate_conditional_pivotal(spec: ExperimentSpec, *, threads: int = 1) -> ExperimentResult:
    """Mean number of pivotal sites given a left-right crossing, by rejection sampling.

    For every ``(n, p)`` two records are emitted: ``conditional_pivotal``,
    the mean of ``N`` over replicas with a crossing (``accepted`` of them),
    and ``joint_pivotal``, the mean of ``N * 1{LR}`` over all replicas.
    With ``spec.color == CLOSED`` the crossing and the pivotal sites refer
    to closed left-right crossings.

    Raises
    ------
    EstimationError
        If no replica has a crossing for some cell.
    """
    _require(spec, "conditional_pivotal")
    for p in spec.p_values:
        if (spec.color == OPEN and p > 0.5) or (spec.color == CLOSED and p < 0.5):
            warnings.warn(f"p={p} lies outside the regime covered by the lower bound "
                          "on pivotal counts", stacklevel=2)
    t0 = time.perf_counter()
    boxes = [_box(n, spec.aspect) for n in spec.n_values]
    ps = spec.p_values

    def one(seed):
        row = np.empty(2 * len(boxes) * len(ps))
        t = 0
        for r in boxes:
            u = uniforms(r, seed)
            for p in ps:
                s = _open_states(u, p, spec.swapped)
                if spec.color == CLOSED:
                    s = 1 - s
                lr, cnt = _kernels.pivotal_count(s)
                row[t] = lr
                row[t + 1] = cnt if lr else 0
                t += 2
        return row

    data = run_replicas(one, spec.replicas, spec.master_seed, threads)
    boot = bootstrap_sums(data, spec.master_seed)
    wall = time.perf_counter() - t0
    R = spec.replicas
    recs, joint = [], []
    cond_reps = {p: np.empty((boot.shape[0], len(boxes))) for p in ps}
    joint_reps = {p: np.empty((boot.shape[0], len(boxes))) for p in ps}
    t = 0
    accept = {}
    for i, n in enumerate(spec.n_values):
        for p in ps:
            acc = data[:, t].astype(bool)
            counts = data[:, t + 1]
            k = int(acc.sum())
            if k == 0:
                raise EstimationError(f"no replica with a crossing at n={n}, p={p}")
            accept[f"n={n},p={p:g}"] = k / R
            log.info("conditional pivotal n=%d p=%g: acceptance %d/%d", n, p, k, R)
            cond = counts[acc]
            mean = float(cond.mean())
            se = float(cond.std(ddof=1) / math.sqrt(k)) if k > 1 else 0.0
            with np.errstate(invalid="ignore", divide="ignore"):
                reps = boot[:, t + 1] / boot[:, t]
            cond_reps[p][:, i] = reps
            lo, hi = _percentile_ci(reps)
            recs.append(EstimateRecord("conditional_pivotal", n, p, spec.aspect, mean, se,
                                       lo, hi, R, k, spec.master_seed, "bootstrap", wall))
            jm = float(counts.mean())
            jse = float(counts.std(ddof=1) / math.sqrt(R)) if R > 1 else 0.0
            jreps = boot[:, t + 1] / R
            joint_reps[p][:, i] = jreps
            lo, hi = _percentile_ci(jreps)
            joint.append(EstimateRecord("joint_pivotal", n, p, spec.aspect, jm, jse,
                                        lo, hi, R, k, spec.master_seed, "bootstrap", wall))
            t += 2
    res = ExperimentResult(spec, recs + joint, summary={"acceptance": accept}, wall_time=wall)
    for p in ps:
        res.replicates[("conditional_pivotal", p)] = cond_reps[p]
        res.replicates[("joint_pivotal", p)] = joint_reps[p]
    _auto_fits(res, "conditional_pivotal", ("power_law",))
    _auto_fits(res, "joint_pivotal", ("power_law",))
    return res


def _radius_result(spec: ExperimentSpec, kind: str, threads: int) -> ExperimentResult:
    t0 = time.perf_counter()
    N = max(spec.n_values)
    box = Region.centered(N)
    ps = np.array(spec.p_values)
    ns = np.array(spec.n_values)

    def one(seed):
        u = uniforms(box, seed)
        return np.array([_kernels.origin_radius(u, p, N, N) for p in ps], dtype=np.float64)

    radii = run_replicas(one, spec.replicas, spec.master_seed, threads)
    # columns per p: origin open, then radius >= n for each n
    blocks = []
    for j in range(len(ps)):
        blocks.append((radii[:, j] >= 0)[:, None])
        blocks.append(radii[:, j][:, None] >= ns[None, :])
    data = np.concatenate(blocks, axis=1).astype(np.float64)
    boot = bootstrap_sums(data, spec.master_seed)
    wall = time.perf_counter() - t0
    R = spec.replicas
    recs = []
    res = ExperimentResult(spec, recs, wall_time=wall)
    width = 1 + len(ns)
    for j, p in enumerate(ps):
        base = j * width
        n_open = int(data[:, base].sum())
        if spec.conditioned:
            if n_open == 0:
                raise EstimationError(f"origin never open at p={p}")
            total = n_open
            with np.errstate(invalid="ignore", divide="ignore"):
                reps = boot[:, base + 1:base + width] / boot[:, [base]]
        else:
            total = R
            reps = boot[:, base + 1:base + width] / R
        for i, n in enumerate(ns):
            k = int(data[:, base + 1 + i].sum())
            rec = _proportion_record(kind, int(n), float(p), spec, k, total, wall)
            recs.append(EstimateRecord(**{**rec.to_dict(timing=True), "accepted": n_open}))
        res.replicates[(kind, float(p))] = reps
    _auto_fits(res, kind, ("exponential", "power_law"))
    return res


def estimate_one_arm(spec: ExperimentSpec, *, threads: int = 1) -> ExperimentResult:
    """P_p(the open cluster of the origin reaches the boundary of ``[-n, n]^2``).

    All ``n`` share one configuration of ``[-N, N]^2`` per replica
    (``N = max n``): within ``[-n, n]^2`` the origin reaches the boundary iff
    its cluster in the large box reaches sup-distance ``n``. The estimates
    are therefore exactly nonincreasing in ``n``. With
    ``spec.conditioned`` the proportion is taken among replicas whose origin
    is open.
    """
    _require(spec, "one_arm")
    return _radius_result(spec, "one_arm", threads)


def estimate_cluster_tail(spec: ExperimentSpec, *, threads: int = 1) -> ExperimentResult:
    """Radius tail ``P_p(radius of C(0) >= n)``; same coupling as :func:`estimate_one_arm`."""
    _require(spec, "cluster_tail")
    for p in spec.p_values:
        if p >= 0.5:
            warnings.warn(f"p={p} is not subcritical; exponential decay is not expected",
                          stacklevel=2)
    return _radius_result(spec, "cluster_tail", threads)


def rsw_aspect_check(spec: ExperimentSpec, *, threads: int = 1) -> ExperimentResult:
    """P_p(LR([0, k n] x [0, n])) for each ``n`` at fixed aspect ``k``.

    Adds the minimum over ``n`` to ``summary`` and, with at least three
    ``n``, a ``trend`` fit of the estimate against ``log n``.
    """
    _require(spec, "rsw_aspect")
    t0 = time.perf_counter()
    data = _crossing_data(spec, threads)
    res = _crossing_result(spec, data, "rsw_aspect", t0)
    res.summary["min"] = {f"{p:g}": min(r.estimate for r in res.select("rsw_aspect", p))
                          for p in spec.p_values}
    res.summary["min_wilson_lower"] = {
        f"{p:g}": min(r.ci_lo for r in res.select("rsw_aspect", p)) for p in spec.p_values}
    _auto_fits(res, "rsw_aspect", ("trend",))
    return res


def _probit(p, mu, sigma):
    return ndtr((p - mu) / sigma)


def _probit_fit(grid: np.ndarray, phat: np.ndarray, p0=None) -> tuple[float, float]:
    if p0 is None:
        above = np.flatnonzero(phat >= 0.5)
        mu0 = float(grid[above[0]]) if above.size else float(grid[-1])
        p0 = (mu0, 0.25 * float(grid[-1] - grid[0]) + 1e-3)
    try:
        (mu, sigma), _ = curve_fit(_probit, grid, phat, p0=p0, maxfev=2000)
    except (RuntimeError, ValueError) as err:
        raise DataQualityError(f"crossing curve could not be fitted: {err}") from None
    return float(mu), float(sigma)


def _curve_crossing(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Abscissa where two probit curves meet (``nan`` if they are parallel)."""
    (m1, s1), (m2, s2) = a, b
    if s1 == s2:
        return math.nan
    return (m1 * s2 - m2 * s1) / (s2 - s1)


def locate_pc(spec: ExperimentSpec, *, threads: int = 1) -> ExperimentResult:
    """Locate the point where P_p(LR([0, n]^2)) crosses 1/2, for each ``n``.

    A probit curve ``Phi((p - mu) / sigma)`` is fitted by least squares to the
    estimated crossing curve; ``p*(n) = mu``. Records: the grid estimates
    (``crossing_prob``), ``pc_star`` per ``n`` and ``pc_pair`` for the
    crossing point of the fitted curves of successive ``n`` (``n`` written
    ``"n1:n2"``). Intervals are percentile bootstrap over replicas.

    Raises
    ------
    DataQualityError
        If an estimated curve decreases somewhere or a fitted curve is not
        increasing.
    """
    _require(spec, "pc_locate")
    grid = np.array(sorted(spec.p_values))
    if len(spec.n_values) < 2:
        raise DomainError("locating p_c needs at least two n values")
    if len(grid) < 3 or not grid[0] < 0.5 < grid[-1]:
        raise DomainError("the p grid must have at least 3 points and straddle 0.5")
    if tuple(grid) != spec.p_values:
        spec = ExperimentSpec(**{**spec.to_dict(), "p_values": tuple(grid)})
    t0 = time.perf_counter()
    data = _crossing_data(spec, threads)
    boot = bootstrap_sums(data, spec.master_seed)
    res = _crossing_result(spec, data, "crossing_prob", t0, boot)
    R = spec.replicas
    nP = len(grid)
    fits, boot_fits = {}, {}
    for i, n in enumerate(spec.n_values):
        phat = data[:, i * nP:(i + 1) * nP].mean(axis=0)
        if np.any(np.diff(phat) < 0):
            raise DataQualityError(f"estimated crossing curve at n={n} is not monotone")
        mu, sigma = _probit_fit(grid, phat)
        if not sigma > 0:
            raise DataQualityError(f"fitted crossing curve at n={n} is not increasing")
        fits[n] = (mu, sigma)
        reps = boot[:, i * nP:(i + 1) * nP] / R
        bf = np.full((len(reps), 2), np.nan)
        for b, row in enumerate(reps):
            try:
                bf[b] = _probit_fit(grid, row, p0=(mu, sigma))
            except DataQualityError:
                pass
        bf[~(bf[:, 1] > 0)] = np.nan
        boot_fits[n] = bf
    wall = time.perf_counter() - t0
    summary = {"p_star": {}, "sigma": {}, "pairs": {}}
    pstar_reps = np.column_stack([boot_fits[n][:, 0] for n in spec.n_values])
    for n in spec.n_values:
        mu = fits[n][0]
        reps = boot_fits[n][:, 0]
        se = float(np.nanstd(reps, ddof=1))
        lo, hi = _percentile_ci(reps)
        res.records.append(EstimateRecord("pc_star", n, None, spec.aspect, mu, se, lo, hi,
                                          R, R, spec.master_seed, "bootstrap", wall))
        summary["p_star"][str(n)] = mu
        summary["sigma"][str(n)] = fits[n][1]
    for a, b in zip(spec.n_values, spec.n_values[1:]):
        x = _curve_crossing(fits[a], fits[b])
        key = f"{a}:{b}"
        summary["pairs"][key] = x
        if not math.isfinite(x):
            continue
        fa, fb = boot_fits[a], boot_fits[b]
        with np.errstate(invalid="ignore", divide="ignore"):
            reps = (fa[:, 0] * fb[:, 1] - fb[:, 0] * fa[:, 1]) / (fb[:, 1] - fa[:, 1])
        se = float(np.nanstd(reps[np.isfinite(reps)], ddof=1))
        lo, hi = _percentile_ci(reps)
        res.records.append(EstimateRecord("pc_pair", key, None, spec.aspect, x, se, lo, hi,
                                          R, R, spec.master_seed, "bootstrap", wall))
    res.replicates[("pc_star", None)] = pstar_reps
    res.summary.update(summary)
    res.wall_time = wall
    return res


ESTIMATORS = {
    "crossing_prob": estimate_crossing_probability,
    "conditional_pivotal": estimate_conditional_pivotal,
    "one_arm": estimate_one_arm,
    "cluster_tail": estimate_cluster_tail,
    "rsw_aspect": rsw_aspect_check,
    "pc_locate": locate_pc,
}


def run_experiment(spec: ExperimentSpec, *, threads: int = 1) -> ExperimentResult:
    """Dispatch `spec` to the estimator of its kind."""
    return ESTIMATORS[spec.kind](spec, threads=threads)
