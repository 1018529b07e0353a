"""Monte Carlo experiments for the scaling exponents of the map family.

Targets (as functions of the tail index alpha):

* distance from root to pointed vertex grows like n^((alpha-1)/(2 alpha));
* ball volumes grow like r^(2 alpha/(alpha-1)) (the volume dimension);
* the largest offspring count grows like n^(1/alpha), and map degrees
  dominate tree offspring replica by replica;
* the upper tail of rescaled ball volumes at uniform centers sits between
  exponents -(alpha-1) and -(alpha-1)/(2 alpha), the former expected sharp.

Every replica runs on its own RNG stream derived from the master seed (see
``stablequad.seeds``), so results are bit-reproducible and independent of
the worker-process count.
"""

from __future__ import annotations

import math
import multiprocessing
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .cvs import build_quadrangulation
from .errors import ConfigError, InvariantViolation, ParameterError
from .gwtree import sample_labelled_tree
from .mapmetric import ball_profile, bfs_distances
from .offspring import DEFAULT_K_CUT, build_offspring_law
from .seeds import replica_seed


@dataclass(frozen=True)
class SlopeFit:
    """Ordinary least squares on (log x, log y)."""

    slope: float
    intercept: float
    stderr: float
    n_points: int
    r_squared: float


def fit_loglog_slope(x, y) -> SlopeFit:
    """Fit log y = slope * log x + intercept (natural logs)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y) or len(x) < 3:
        raise ParameterError("need at least 3 points")
    if (x <= 0).any() or (y <= 0).any():
        raise ParameterError("log-log fit needs strictly positive data")
    lx = np.log(x)
    ly = np.log(y)
    mx = lx.mean()
    my = ly.mean()
    sxx = float(((lx - mx) ** 2).sum())
    if sxx == 0.0:
        raise ParameterError("x values are all equal")
    slope = float(((lx - mx) * (ly - my)).sum() / sxx)
    intercept = my - slope * mx
    resid = ly - (slope * lx + intercept)
    ssr = float((resid**2).sum())
    syy = float(((ly - my) ** 2).sum())
    dof = len(x) - 2
    stderr = math.sqrt(ssr / dof / sxx) if dof > 0 else 0.0
    r_squared = 1.0 if syy == 0.0 else 1.0 - ssr / syy
    return SlopeFit(
        slope=slope,
        intercept=float(intercept),
        stderr=stderr,
        n_points=len(x),
        r_squared=r_squared,
    )


@dataclass(frozen=True)
class RescalingConstants:
    """Constants entering the path rescalings."""

    alpha: float
    c: float  # offspring tail constant
    c_alpha: float  # (alpha - 1) / Gamma(2 - alpha)
    c_prime: float  # (c / c_alpha)^(1/alpha)
    sigma_y2: float  # label increment variance, 1 - p0

    @classmethod
    def compute(cls, alpha: float, c: float, p0: float) -> "RescalingConstants":
        c_alpha = (alpha - 1.0) / math.gamma(2.0 - alpha)
        return cls(
            alpha=alpha,
            c=c,
            c_alpha=c_alpha,
            c_prime=(c / c_alpha) ** (1.0 / alpha),
            sigma_y2=1.0 - p0,
        )

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "c": self.c,
            "c_alpha": self.c_alpha,
            "c_prime": self.c_prime,
            "sigma_y2": self.sigma_y2,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    """Shared configuration for the experiment harness."""

    alpha: float = 1.5
    p0: float = 1.0 / 3.0
    c_phi: float | None = None
    k_cut: int = DEFAULT_K_CUT
    sizes: tuple[int, ...] = (2**10, 2**12, 2**14, 2**16)
    replicas: int | tuple[int, ...] = 200
    master_seed: int = 0
    centers: int = 200  # total uniform centers (volume / voltail)
    center_policy: str = "uniform"  # uniform | root | pointed
    r_min: int = 4
    r_window_beta: float = 0.5
    voltail_radius_scale: float = 0.125
    voltail_band: tuple[float, float] = (0.02, 0.25)  # survival band for the tail fit
    grid_points: int = 257
    max_trials: int | None = None
    threads: int = 1

    def __post_init__(self):
        if not self.sizes:
            raise ConfigError("sizes must be nonempty")
        if any(n < 2 for n in self.sizes):
            raise ConfigError("every size must be at least 2")
        if list(self.sizes) != sorted(set(self.sizes)):
            raise ConfigError("sizes must be strictly increasing")
        if isinstance(self.replicas, tuple):
            if len(self.replicas) != len(self.sizes):
                raise ConfigError("per-size replicas must match the number of sizes")
            if any(r < 1 for r in self.replicas):
                raise ConfigError("replicas must be >= 1")
        elif self.replicas < 1:
            raise ConfigError("replicas must be >= 1")
        if self.centers < 1:
            raise ConfigError("centers must be >= 1")
        if self.center_policy not in ("uniform", "root", "pointed"):
            raise ConfigError(f"unknown center policy {self.center_policy!r}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if self.r_min < 1 or self.r_window_beta <= 0:
            raise ConfigError("bad volume window parameters")
        if not (0 < self.voltail_band[0] < self.voltail_band[1] <= 1):
            raise ConfigError("voltail_band must satisfy 0 < lo < hi <= 1")

    def constants(self) -> RescalingConstants:
        law = _cached_law(self.alpha, self.c_phi, self.k_cut)
        return RescalingConstants.compute(self.alpha, law.c, self.p0)

    def replicas_per_size(self) -> tuple[int, ...]:
        if isinstance(self.replicas, tuple):
            return self.replicas
        return tuple(self.replicas for _ in self.sizes)

    def replicas_single(self) -> int:
        return self.replicas_per_size()[0]

    def single_size(self) -> int:
        if len(self.sizes) != 1:
            raise ConfigError("this experiment uses exactly one size")
        return self.sizes[0]

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "p0": self.p0,
            "c_phi": self.c_phi,
            "k_cut": self.k_cut,
            "sizes": list(self.sizes),
            "replicas": list(self.replicas) if isinstance(self.replicas, tuple) else self.replicas,
            "master_seed": self.master_seed,
            "centers": self.centers,
            "center_policy": self.center_policy,
            "r_min": self.r_min,
            "r_window_beta": self.r_window_beta,
            "voltail_radius_scale": self.voltail_radius_scale,
            "voltail_band": list(self.voltail_band),
            "grid_points": self.grid_points,
            "max_trials": self.max_trials,
            "threads": self.threads,
        }


@lru_cache(maxsize=8)
def _cached_law(alpha: float, c_phi: float | None, k_cut: int):
    return build_offspring_law(alpha, c_phi, k_cut)


def _run_tasks(worker, tasks, threads: int):
    if threads <= 1 or len(tasks) <= 1:
        return [worker(t) for t in tasks]
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=min(threads, len(tasks))) as pool:
        return pool.map(worker, tasks, chunksize=1)


def _sized_tasks(cfg: "ExperimentConfig"):
    """(law params, n, replica, seed) tuples with globally unique stream ids."""
    tasks = []
    stream = 0
    for n, reps in zip(cfg.sizes, cfg.replicas_per_size()):
        for r in range(reps):
            tasks.append(
                (cfg.alpha, cfg.c_phi, cfg.k_cut, cfg.p0, cfg.max_trials, n, r,
                 replica_seed(cfg.master_seed, stream))
            )
            stream += 1
    return tasks


# ---------------------------------------------------------------------------
# radius experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class RadiusRecord:
    n: int
    replica: int
    seed: int
    trials: int
    distance: int  # d(root, pointed) = 1 - min label


@dataclass(frozen=True)
class RadiusResult:
    config: ExperimentConfig
    records: list[RadiusRecord]
    sizes: tuple[int, ...]
    medians: tuple[float, ...]
    fit: SlopeFit
    target: float


def _radius_worker(args):
    alpha, c_phi, k_cut, p0, max_trials, n, replica, seed = args
    law = _cached_law(alpha, c_phi, k_cut)
    rng = np.random.Generator(np.random.PCG64(seed))
    lt, trials = sample_labelled_tree(law, n, rng, p0, max_trials)
    return RadiusRecord(
        n=n,
        replica=replica,
        seed=seed,
        trials=trials,
        distance=int(1 - lt.labels.min()),
    )


def run_radius_experiment(cfg: ExperimentConfig) -> RadiusResult:
    """Median root-to-pointed distance per size; slope target (a-1)/(2a).

    The distance is read off the exact label identity d = 1 - min label;
    the audit that this equals BFS lives in the test suite.
    """
    records = _run_tasks(_radius_worker, _sized_tasks(cfg), cfg.threads)
    medians = tuple(
        float(np.median([rec.distance for rec in records if rec.n == n])) for n in cfg.sizes
    )
    fit = fit_loglog_slope(cfg.sizes, medians)
    return RadiusResult(
        config=cfg,
        records=records,
        sizes=cfg.sizes,
        medians=medians,
        fit=fit,
        target=(cfg.alpha - 1.0) / (2.0 * cfg.alpha),
    )


# ---------------------------------------------------------------------------
# max-degree experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaxDegreeRecord:
    n: int
    replica: int
    seed: int
    max_offspring: int
    max_map_degree: int


@dataclass(frozen=True)
class MaxDegreeResult:
    config: ExperimentConfig
    records: list[MaxDegreeRecord]
    sizes: tuple[int, ...]
    medians_offspring: tuple[float, ...]
    medians_map_degree: tuple[float, ...]
    fit: SlopeFit  # tree statistic (the exponent target)
    fit_map: SlopeFit  # map statistic, reported alongside
    target: float


def _maxdeg_worker(args):
    alpha, c_phi, k_cut, p0, max_trials, n, replica, seed = args
    law = _cached_law(alpha, c_phi, k_cut)
    rng = np.random.Generator(np.random.PCG64(seed))
    lt, _ = sample_labelled_tree(law, n, rng, p0, max_trials)
    q = build_quadrangulation(lt, 1)
    max_off = int(lt.tree.offspring_counts().max())
    max_deg = int(q.degrees().max())
    if max_deg < max_off:
        raise InvariantViolation(
            f"map max degree {max_deg} below tree max offspring {max_off}"
        )
    return MaxDegreeRecord(
        n=n, replica=replica, seed=seed, max_offspring=max_off, max_map_degree=max_deg
    )


def run_maxdegree_experiment(cfg: ExperimentConfig) -> MaxDegreeResult:
    """Median of the largest offspring / map degree per size; target 1/alpha."""
    records = _run_tasks(_maxdeg_worker, _sized_tasks(cfg), cfg.threads)
    med_off = tuple(
        float(np.median([rec.max_offspring for rec in records if rec.n == n])) for n in cfg.sizes
    )
    med_deg = tuple(
        float(np.median([rec.max_map_degree for rec in records if rec.n == n])) for n in cfg.sizes
    )
    return MaxDegreeResult(
        config=cfg,
        records=records,
        sizes=cfg.sizes,
        medians_offspring=med_off,
        medians_map_degree=med_deg,
        fit=fit_loglog_slope(cfg.sizes, med_off),
        fit_map=fit_loglog_slope(cfg.sizes, med_deg),
        target=1.0 / cfg.alpha,
    )


# ---------------------------------------------------------------------------
# volume-growth experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VolumeResult:
    config: ExperimentConfig
    n: int
    replica_seeds: tuple[int, ...]
    root_pointed_distances: tuple[int, ...]
    mean_profile: np.ndarray  # mean cumulative count over all centers
    pointed_profile: np.ndarray  # same, centered at the pointed vertex
    center_profiles: list[np.ndarray] = field(repr=False)
    window: tuple[int, int]
    fit: SlopeFit
    window_sensitivity: list[tuple[int, int, float]]
    target: float


def _volume_worker(args):
    alpha, c_phi, k_cut, p0, max_trials, n, seed, n_centers, policy = args
    law = _cached_law(alpha, c_phi, k_cut)
    rng = np.random.Generator(np.random.PCG64(seed))
    lt, _ = sample_labelled_tree(law, n, rng, p0, max_trials)
    q = build_quadrangulation(lt, 1)
    d_rho = int(1 - lt.labels.min())
    if policy == "uniform":
        centers = rng.integers(0, q.n_vertices, size=n_centers)
    elif policy == "root":
        centers = np.zeros(n_centers, dtype=np.int64)
    else:  # pointed
        centers = np.full(n_centers, q.pointed_vertex, dtype=np.int64)
    profiles = []
    for cvx in centers:
        dist = bfs_distances(q, int(cvx))
        profiles.append(np.cumsum(np.bincount(dist)))
    pointed = np.cumsum(np.bincount(bfs_distances(q, q.pointed_vertex)))
    return d_rho, profiles, pointed


def _mean_profile(profiles: list[np.ndarray], v_total: int) -> np.ndarray:
    length = max(len(p) for p in profiles)
    acc = np.zeros(length, dtype=np.float64)
    for p in profiles:
        acc[: len(p)] += p
        acc[len(p):] += v_total  # saturated beyond the center's eccentricity
    return acc / len(profiles)


def run_volume_experiment(cfg: ExperimentConfig) -> VolumeResult:
    """Log-log slope of mean ball volume; target 2 alpha / (alpha - 1).

    Fit window: radii in [r_min, beta * median d(root, pointed)]; below,
    lattice effects dominate, above, boundary effects.  Slopes over nested
    sub-windows are reported as a sensitivity check.
    """
    n = cfg.single_size()
    n_rep = cfg.replicas_single()
    per = int(np.ceil(cfg.centers / n_rep))
    seeds = tuple(replica_seed(cfg.master_seed, r) for r in range(n_rep))
    tasks = [
        (cfg.alpha, cfg.c_phi, cfg.k_cut, cfg.p0, cfg.max_trials, n, seed, per,
         cfg.center_policy)
        for seed in seeds
    ]
    outs = _run_tasks(_volume_worker, tasks, cfg.threads)
    d_values = tuple(o[0] for o in outs)
    center_profiles = [p for o in outs for p in o[1]]
    mean_profile = _mean_profile(center_profiles, n + 2)
    pointed_profile = _mean_profile([o[2] for o in outs], n + 2)

    r_hi = int(np.floor(cfg.r_window_beta * float(np.median(d_values))))
    r_hi = min(r_hi, len(mean_profile) - 1)
    r_lo = cfg.r_min
    if r_hi - r_lo + 1 < 3:
        raise ConfigError(
            f"volume fit window [{r_lo}, {r_hi}] has fewer than 3 radii; "
            "increase n or the window factor"
        )
    radii = np.arange(r_lo, r_hi + 1)
    fit = fit_loglog_slope(radii, mean_profile[radii])

    sensitivity = []
    for lo, hi in ((r_lo, r_hi - 1), (r_lo + 1, r_hi), (r_lo + 1, r_hi + 1)):
        hi = min(hi, len(mean_profile) - 1)
        if hi - lo + 1 >= 3:
            rr = np.arange(lo, hi + 1)
            sensitivity.append((lo, hi, fit_loglog_slope(rr, mean_profile[rr]).slope))

    return VolumeResult(
        config=cfg,
        n=n,
        replica_seeds=seeds,
        root_pointed_distances=d_values,
        mean_profile=mean_profile,
        pointed_profile=pointed_profile,
        center_profiles=center_profiles,
        window=(r_lo, r_hi),
        fit=fit,
        window_sensitivity=sensitivity,
        target=2.0 * cfg.alpha / (cfg.alpha - 1.0),
    )


# ---------------------------------------------------------------------------
# ball-volume tail experiment
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class VolTailResult:
    config: ExperimentConfig
    n: int
    radius: int
    replica_seeds: tuple[int, ...]
    values: np.ndarray  # rescaled ball volumes, one per center
    survival_points: np.ndarray  # (value, survival) pairs used in the fit
    fit: SlopeFit | None
    inconclusive: bool
    bracket: tuple[float, float]
    sharp_candidate: float


def _voltail_worker(args):
    alpha, c_phi, k_cut, p0, max_trials, n, seed, n_centers, radius = args
    law = _cached_law(alpha, c_phi, k_cut)
    rng = np.random.Generator(np.random.PCG64(seed))
    lt, _ = sample_labelled_tree(law, n, rng, p0, max_trials)
    q = build_quadrangulation(lt, 1)
    centers = rng.integers(0, q.n_vertices, size=n_centers)
    counts = np.empty(n_centers, dtype=np.int64)
    for i, cvx in enumerate(centers):
        counts[i] = ball_profile(q, int(cvx), radius).cumulative_counts[-1]
    return counts


def run_voltail_experiment(cfg: ExperimentConfig) -> VolTailResult:
    """Tail exponent of rescaled ball volumes at uniform centers.

    Volumes nu(B(U, r)) = count / V are rescaled by r_cont^(2a/(a-1)) with
    r_cont = r * n^(-(a-1)/(2a)); the survival-function tail is fitted over
    the configured survival band and reported against the exponent bracket
    [-(a-1), -(a-1)/(2a)].
    """
    n = cfg.single_size()
    alpha = cfg.alpha
    radius = max(2, int(round(cfg.voltail_radius_scale * n ** ((alpha - 1) / (2 * alpha)))))
    n_rep = cfg.replicas_single()
    per = int(np.ceil(cfg.centers / n_rep))
    seeds = tuple(replica_seed(cfg.master_seed, r) for r in range(n_rep))
    tasks = [
        (alpha, cfg.c_phi, cfg.k_cut, cfg.p0, cfg.max_trials, n, seed, per, radius)
        for seed in seeds
    ]
    counts = np.concatenate(_run_tasks(_voltail_worker, tasks, cfg.threads))
    r_cont = radius * n ** (-(alpha - 1) / (2 * alpha))
    dim = 2 * alpha / (alpha - 1)
    values = counts / (n + 2) / r_cont**dim

    # Distinct-value survival function, fitted on the configured band.
    distinct = np.unique(values)[::-1]
    survival = np.searchsorted(-values, -distinct, side="right") / len(values)
    lo_band, hi_band = cfg.voltail_band
    mask = (survival >= lo_band) & (survival <= hi_band) & (distinct > 0)
    pts = np.column_stack([distinct[mask], survival[mask]])
    inconclusive = mask.sum() < 30
    fit = None
    if mask.sum() >= 3:
        fit = fit_loglog_slope(distinct[mask], survival[mask])
    return VolTailResult(
        config=cfg,
        n=n,
        radius=radius,
        replica_seeds=seeds,
        values=values,
        survival_points=pts,
        fit=fit,
        inconclusive=bool(inconclusive),
        bracket=(-(alpha - 1.0), -(alpha - 1.0) / (2.0 * alpha)),
        sharp_candidate=-(alpha - 1.0),
    )


# ---------------------------------------------------------------------------
# rescaled coding paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PathsResult:
    config: ExperimentConfig
    n: int
    replica_seeds: tuple[int, ...]
    constants: RescalingConstants
    tables: list[np.ndarray]  # per replica: columns (t, x, h, l)


def _paths_worker(args):
    alpha, c_phi, k_cut, p0, max_trials, n, seed, grid_points = args
    law = _cached_law(alpha, c_phi, k_cut)
    rng = np.random.Generator(np.random.PCG64(seed))
    lt, _ = sample_labelled_tree(law, n, rng, p0, max_trials)
    consts = RescalingConstants.compute(alpha, law.c, p0)
    x_path = np.zeros(n + 2, dtype=np.float64)
    np.cumsum(lt.tree.offspring_counts() - 1, out=x_path[1:])
    heights = lt.tree.height.astype(np.float64)
    labels = lt.labels.astype(np.float64)

    t = np.linspace(0.0, 1.0, grid_points)
    x_interp = np.interp(t * (n + 1), np.arange(n + 2), x_path)
    h_interp = np.interp(t * n, np.arange(n + 1), heights)
    l_interp = np.interp(t * n, np.arange(n + 1), labels)

    cp = consts.c_prime
    x_scale = 1.0 / (cp * n ** (1.0 / alpha))
    h_scale = cp * n ** (-(1.0 - 1.0 / alpha))
    l_scale = math.sqrt(h_scale / consts.sigma_y2)
    return np.column_stack([t, x_interp * x_scale, h_interp * h_scale, l_interp * l_scale])


def emit_rescaled_paths(cfg: ExperimentConfig) -> PathsResult:
    """Rescaled Lukasiewicz / height / label paths on a uniform time grid."""
    n = cfg.single_size()
    seeds = tuple(replica_seed(cfg.master_seed, r) for r in range(cfg.replicas_single()))
    tasks = [
        (cfg.alpha, cfg.c_phi, cfg.k_cut, cfg.p0, cfg.max_trials, n, seed, cfg.grid_points)
        for seed in seeds
    ]
    tables = _run_tasks(_paths_worker, tasks, cfg.threads)
    return PathsResult(
        config=cfg,
        n=n,
        replica_seeds=seeds,
        constants=cfg.constants(),
        tables=tables,
    )


def single_size_config(cfg: ExperimentConfig, n: int) -> ExperimentConfig:
    """Copy of ``cfg`` pinned to one size (volume/voltail/paths kinds)."""
    return replace(cfg, sizes=(n,))
