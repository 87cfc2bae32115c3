"""Spanning-cluster detection, percolation probability estimation, and the
search for the critical firewall intensity.

A trial percolates when one ISG component touches boundary strips of width
r_r on both axes (left-right and bottom-top). Estimates over multiple trials
use per-trial derived seeds; sweeps over the firewall intensity reuse one
firewall pool per trial and thin it with per-firewall uniform marks, so the
kept set at intensity x is an exact Poisson process of intensity x and is
nested across intensities. Nesting makes every trial's spanning indicator
monotone in the firewall intensity, which sharpens sweep comparisons and
makes the critical-intensity bisection exact for a fixed seed.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .network import (NetworkConfig, Realization, _canonical_labels,
                      _radius_pairs, _STREAM_DEVICES, _STREAM_FIREWALLS,
                      _STREAM_THINNING_MARKS, classify_devices)
from .spatial import sample_ppp, split_seed, trial_seed

__all__ = [
    "PercolationEstimate",
    "CriticalSearchResult",
    "ProtectedFractionEstimate",
    "SearchExhaustedError",
    "NoDevicesError",
    "detect_spanning",
    "estimate_percolation_probability",
    "sweep_lambda_f",
    "find_critical_firewall_intensity",
    "estimate_protected_fraction",
    "write_sweep_csv",
    "write_critical_csv",
]

_DEFAULT_LC1 = 1.44  # unit-range critical intensity used for search defaults


class SearchExhaustedError(RuntimeError):
    """The percolation probability stayed above epsilon up to lambda_f_max."""

    def __init__(self, message, evaluated):
        super().__init__(message)
        self.evaluated = tuple(evaluated)


class NoDevicesError(RuntimeError):
    """Every trial produced an empty device set."""


@dataclass(frozen=True)
class PercolationEstimate:
    """Monte Carlo estimate of the spanning probability."""

    theta_hat: float
    trials: int
    std_err: float
    config: NetworkConfig
    n_spanning: int

    @classmethod
    def from_counts(cls, n_spanning: int, trials: int, config: NetworkConfig):
        theta = n_spanning / trials
        return cls(theta_hat=theta, trials=trials,
                   std_err=math.sqrt(theta * (1.0 - theta) / trials),
                   config=config, n_spanning=int(n_spanning))


@dataclass(frozen=True)
class CriticalSearchResult:
    """Outcome of the critical firewall-intensity search."""

    lambda_f_critical: float
    evaluated: tuple  # (lambda_f, PercolationEstimate) in probe order
    epsilon: float
    trials: int
    step: float
    resolution: float
    lambda_f_max: float


class ProtectedFractionEstimate(NamedTuple):
    mean_fraction: float
    std_err: float
    trials_used: int
    trials_skipped: int


def _spans_from_labels(labels, k, left, right, bottom, top) -> tuple[bool, bool]:
    """Spanning flags given component labels and boundary-strip masks."""
    if k == 0:
        return (False, False)
    hit = np.zeros((4, k), dtype=bool)
    for row, mask in enumerate((left, right, bottom, top)):
        if mask.any():
            hit[row, labels[mask]] = True
    spans_lr = bool((hit[0] & hit[1]).any())
    spans_bt = bool((hit[2] & hit[3]).any())
    return (spans_lr, spans_bt)


def detect_spanning(realization: Realization) -> tuple[bool, bool]:
    """(spans left-right, spans bottom-top) for one realization's ISG.

    A component spans left-right when it holds a susceptible device with
    x <= x_min + r_r and another with x >= x_max - r_r; bottom-top likewise
    on y. Percolation for the trial is declared when both flags hold.
    """
    cfg = realization.config
    w = cfg.window
    xy = realization.devices.points[realization.isg.vertices]
    labels = realization.isg.component_label
    left = xy[:, 0] <= w.x_min + cfg.r_r
    right = xy[:, 0] >= w.x_max - cfg.r_r
    bottom = xy[:, 1] <= w.y_min + cfg.r_r
    top = xy[:, 1] >= w.y_max - cfg.r_r
    return _spans_from_labels(labels, realization.isg.n_components,
                              left, right, bottom, top)


class _TrialState:
    """Per-trial structures reused across firewall intensities.

    A pool firewall is kept at thinning fraction p when its mark is < p;
    marks are uniform on [0, 1), so p = 0 keeps none and p = 1 keeps all.
    `min_mark[i]` is the smallest mark among pool firewalls within r_f of
    device i (inf when none): device i is susceptible at fraction p exactly
    when min_mark[i] >= p.
    """

    __slots__ = ("pairs", "min_mark", "left", "right", "bottom", "top", "n")

    def __init__(self, config: NetworkConfig, lambda_pool: float, tseed: int):
        devices = sample_ppp(config.lambda_r, config.window,
                             split_seed(tseed, _STREAM_DEVICES))
        pool = sample_ppp(lambda_pool, config.firewall_window(),
                          split_seed(tseed, _STREAM_FIREWALLS))
        marks = np.random.default_rng(
            split_seed(tseed, _STREAM_THINNING_MARKS)).random(pool.n)
        xy = devices.points
        self.n = devices.n
        self.min_mark = np.full(self.n, np.inf)
        if self.n and pool.n:
            balls = cKDTree(xy).query_ball_point(pool.points, config.r_f)
            lens = np.fromiter((len(b) for b in balls), dtype=np.int64, count=pool.n)
            total = int(lens.sum())
            if total:
                idx = np.fromiter((i for b in balls for i in b),
                                  dtype=np.int64, count=total)
                np.minimum.at(self.min_mark, idx, np.repeat(marks, lens))
        self.pairs = _radius_pairs(xy, config.r_r)
        w = config.window
        self.left = xy[:, 0] <= w.x_min + config.r_r
        self.right = xy[:, 0] >= w.x_max - config.r_r
        self.bottom = xy[:, 1] <= w.y_min + config.r_r
        self.top = xy[:, 1] >= w.y_max - config.r_r

    def spans_at(self, p: float) -> bool:
        """Does the ISG at thinning fraction p span both axes?"""
        susceptible = self.min_mark >= p
        m = int(susceptible.sum())
        if m == 0:
            return False
        if len(self.pairs):
            keep = susceptible[self.pairs[:, 0]] & susceptible[self.pairs[:, 1]]
            sub = self.pairs[keep]
            local = np.cumsum(susceptible) - 1
            sub = local[sub]
        else:
            sub = self.pairs
        labels, k = _canonical_labels(m, sub)
        lr, bt = _spans_from_labels(labels, k,
                                    self.left[susceptible], self.right[susceptible],
                                    self.bottom[susceptible], self.top[susceptible])
        return lr and bt


def _sweep_worker(args) -> np.ndarray:
    """Spanning booleans, shape (trials in chunk, number of p values)."""
    config, lambda_pool, p_values, t0, t1 = args
    out = np.zeros((t1 - t0, len(p_values)), dtype=bool)
    for row, t in enumerate(range(t0, t1)):
        state = _TrialState(config, lambda_pool, trial_seed(config.master_seed, t))
        for col, p in enumerate(p_values):
            out[row, col] = state.spans_at(p)
    return out


def _critical_worker(args) -> np.ndarray:
    """Per-trial smallest grid index j in [0, K] whose thinned ISG does not
    span, or K + 1 when the trial still spans at the full pool."""
    config, lambda_pool, grid_n, t0, t1 = args
    out = np.zeros(t1 - t0, dtype=np.int64)
    for row, t in enumerate(range(t0, t1)):
        state = _TrialState(config, lambda_pool, trial_seed(config.master_seed, t))
        if not state.spans_at(0.0):
            out[row] = 0
        elif state.spans_at(1.0):
            out[row] = grid_n + 1
        else:
            lo, hi = 0, grid_n  # spans at lo, does not span at hi
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if state.spans_at(mid / grid_n):
                    lo = mid
                else:
                    hi = mid
            out[row] = hi
    return out


def _protected_worker(args) -> np.ndarray:
    """Per-trial protected fraction, NaN when the device set came up empty."""
    config, t0, t1 = args
    out = np.full(t1 - t0, np.nan)
    for row, t in enumerate(range(t0, t1)):
        tseed = trial_seed(config.master_seed, t)
        devices = sample_ppp(config.lambda_r, config.window,
                             split_seed(tseed, _STREAM_DEVICES))
        if devices.n == 0:
            continue
        firewalls = sample_ppp(config.lambda_f, config.firewall_window(),
                               split_seed(tseed, _STREAM_FIREWALLS))
        cls = classify_devices(devices, firewalls, config.r_f)
        out[row] = cls.is_protected.mean()
    return out


def _run_chunked(worker, common, trials: int, workers: int) -> np.ndarray:
    """Run `worker` over trial ranges, deterministically in trial order."""
    if workers <= 1:
        return worker(common + (0, trials))
    workers = min(workers, trials)
    bounds = np.linspace(0, trials, workers + 1, dtype=int)
    chunks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(worker, common + (a, b)) for a, b in chunks]
        parts = [f.result() for f in futures]
    return np.concatenate(parts, axis=0)


def estimate_percolation_probability(config: NetworkConfig, trials: int,
                                     workers: int = 1) -> PercolationEstimate:
    """Fraction of independent realizations whose ISG spans both axes.

    Deterministic given (config, trials, master_seed) for any worker count.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    spans = _run_chunked(_sweep_worker, (config, config.lambda_f, (1.0,)),
                         trials, workers)
    return PercolationEstimate.from_counts(int(spans[:, 0].sum()), trials, config)


def sweep_lambda_f(config: NetworkConfig, lambda_f_values, trials: int,
                   workers: int = 1) -> list[PercolationEstimate]:
    """Percolation estimates over a grid of firewall intensities.

    All grid points of one trial share the same device set and the same
    thinned firewall pool, so each trial's spanning indicator is
    non-increasing along the grid.
    """
    values = [float(v) for v in lambda_f_values]
    if not values:
        return []
    if any(v < 0 for v in values):
        raise ValueError("lambda_f values must be >= 0")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    lambda_pool = max(values)
    p_values = tuple(v / lambda_pool for v in values) if lambda_pool > 0 \
        else tuple(0.0 for _ in values)
    spans = _run_chunked(_sweep_worker, (config, lambda_pool, p_values),
                         trials, workers)
    return [PercolationEstimate.from_counts(int(spans[:, j].sum()), trials,
                                            replace(config, lambda_f=v))
            for j, v in enumerate(values)]


def find_critical_firewall_intensity(config: NetworkConfig, *,
                                     lambda_f_max: float | None = None,
                                     step: float | None = None,
                                     trials: int = 50,
                                     epsilon: float = 0.02,
                                     workers: int = 1) -> CriticalSearchResult:
    """Smallest firewall intensity at which the spanning probability has
    dropped to (at most) epsilon.

    Scans upward from 0 in `step` increments, then refines the bracket by
    bisection to resolution step / 8. Returns 0 when the network does not
    percolate even without firewalls; raises SearchExhaustedError when the
    estimate stays above epsilon all the way to lambda_f_max.
    """
    if lambda_f_max is None:
        denom = 4.0 * config.r_f ** 2 - config.r_r ** 2
        lambda_f_max = 1.5 * _DEFAULT_LC1 / denom
    if step is None:
        step = lambda_f_max / 9.0
    if not (lambda_f_max > 0 and step > 0):
        raise ValueError("lambda_f_max and step must be > 0")
    if not (0 < epsilon < 1):
        raise ValueError("epsilon must be in (0, 1)")
    if trials < 1:
        raise ValueError("trials must be >= 1")

    delta = step / 8.0
    grid_n = int(math.ceil(lambda_f_max / delta - 1e-9))
    lambda_pool = grid_n * delta  # snap the search ceiling onto the grid

    crit_idx = _run_chunked(_critical_worker, (config, lambda_pool, grid_n),
                            trials, workers)

    evaluated: list[tuple[float, PercolationEstimate]] = []

    def probe(j: int) -> float:
        lam = j * delta
        est = PercolationEstimate.from_counts(int((crit_idx > j).sum()), trials,
                                              replace(config, lambda_f=lam))
        evaluated.append((lam, est))
        return est.theta_hat

    coarse = list(range(0, grid_n + 1, 8))
    if coarse[-1] != grid_n:
        coarse.append(grid_n)
    j_hi = None
    j_lo = None
    for j in coarse:
        if probe(j) <= epsilon:
            j_hi = j
            break
        j_lo = j
    if j_hi is None:
        raise SearchExhaustedError(
            f"theta_hat > {epsilon} up to lambda_f_max {lambda_pool:.6g}; "
            "raise lambda_f_max or epsilon", evaluated)
    if j_hi > 0:
        while j_hi - j_lo > 1:
            mid = (j_lo + j_hi) // 2
            if probe(mid) <= epsilon:
                j_hi = mid
            else:
                j_lo = mid
    return CriticalSearchResult(lambda_f_critical=j_hi * delta,
                                evaluated=tuple(evaluated), epsilon=epsilon,
                                trials=trials, step=step, resolution=delta,
                                lambda_f_max=lambda_pool)


def estimate_protected_fraction(config: NetworkConfig, trials: int,
                                workers: int = 1) -> ProtectedFractionEstimate:
    """Mean protected share of devices, averaged over trials.

    Trials with an empty device set carry no fraction; they are skipped and
    counted. Raises NoDevicesError when every trial came up empty.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if config.lambda_r <= 0:
        raise ValueError("lambda_r must be > 0 to estimate a device fraction")
    fractions = _run_chunked(_protected_worker, (config,), trials, workers)
    used = ~np.isnan(fractions)
    m = int(used.sum())
    if m == 0:
        raise NoDevicesError("all trials produced empty device sets")
    kept = fractions[used]
    std_err = float(np.std(kept, ddof=1) / math.sqrt(m)) if m > 1 else 0.0
    return ProtectedFractionEstimate(float(kept.mean()), std_err, m, trials - m)


def _window_size(config: NetworkConfig) -> float:
    w = config.window
    if abs(w.width - w.height) > 1e-12 * max(w.width, w.height):
        raise ValueError("CSV schema expects a square window")
    return w.width


def _open_out(path_or_file):
    if hasattr(path_or_file, "write"):
        return path_or_file, False
    return open(path_or_file, "w"), True


def write_sweep_csv(estimates, path_or_file, header_lines=()) -> None:
    """Sweep rows: lambda_r,r_r,lambda_f,r_f,window_size,trials,theta_hat,std_err,seed."""
    fh, owned = _open_out(path_or_file)
    try:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("lambda_r,r_r,lambda_f,r_f,window_size,trials,theta_hat,std_err,seed\n")
        for est in estimates:
            c = est.config
            fh.write(f"{c.lambda_r!r},{c.r_r!r},{c.lambda_f!r},{c.r_f!r},"
                     f"{_window_size(c)!r},{est.trials},{est.theta_hat!r},"
                     f"{est.std_err!r},{c.master_seed}\n")
    finally:
        if owned:
            fh.close()


def write_critical_csv(rows, path_or_file, header_lines=()) -> None:
    """Critical-search rows: lambda_r,lambda_f_critical,epsilon,step,trials_per_point.

    `rows` is an iterable of (lambda_r, CriticalSearchResult).
    """
    fh, owned = _open_out(path_or_file)
    try:
        for line in header_lines:
            fh.write(f"# {line}\n")
        fh.write("lambda_r,lambda_f_critical,epsilon,step,trials_per_point\n")
        for lambda_r, res in rows:
            fh.write(f"{lambda_r!r},{res.lambda_f_critical!r},{res.epsilon!r},"
                     f"{res.step!r},{res.trials}\n")
    finally:
        if owned:
            fh.close()
