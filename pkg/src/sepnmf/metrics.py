"""Recovery scoring, robustness-threshold sweeps, and noise-bound
comparison against observed thresholds.

A sweep runs `trials_per_delta` seeded instances at each noise level and
reports the mean recovered fraction per level plus two thresholds: the
largest grid level with perfect recovery in every trial, and the largest
with mean recovery >= 0.99.  Per-trial seeds derive from (master seed,
delta index, trial index), so sweeps are reproducible and trivially
parallel.
"""

from dataclasses import dataclass

import numpy as np

from . import baselines, spa, synth
from .errors import InvalidOptionsError, RankDeficiencyError, SepnmfError
from .rng import Stream, derive_seed
from .selectors import L2, parse_selector

DEFAULT_DELTA_RANGES = {
    1: (1e-2, 1.0),
    2: (1e-2, 1.0),
    3: (1e-4, 1e-1),
    4: (1e-6, 1e-2),
}
DEFAULT_GRID_POINTS = 60

ALGORITHM_NAMES = ("spa", "spa-fast", "ppi", "vca", "sivm")


def geometric_grid(lo, hi, points):
    if not (0 < lo < hi):
        raise InvalidOptionsError("grid needs 0 < lo < hi")
    return [float(d) for d in np.geomspace(lo, hi, points)]


def default_grid(exp_id, points=DEFAULT_GRID_POINTS):
    lo, hi = DEFAULT_DELTA_RANGES[exp_id]
    return geometric_grid(lo, hi, points)


def recovery_fraction(result, truth):
    """Fraction of endmembers that own at least one extracted pure column.

    Duplicate pure columns of the same endmember count once; extracted
    mixture columns count for nothing.
    """
    found = set()
    pure = truth.pure_column_map
    for j in result.indices:
        k = pure[j]
        if k is not None:
            found.add(k)
    return len(found) / truth.r


def run_algorithm(name, M, r, seed, selector=None):
    """Run one named extractor; `selector` only affects the spa variants."""
    if name == "spa":
        return spa.extract(M, spa.ExtractionOptions(target_r=r, selector=selector or L2,
                                                    variant="naive"))
    if name == "spa-fast":
        if selector is not None and selector.kind != "l2":
            raise InvalidOptionsError("spa-fast requires the l2 selector")
        return spa.extract_fast(M, r)
    if name == "ppi":
        return baselines.ppi(M, baselines.BaselineOptions(r=r, seed=seed))
    if name == "vca":
        return baselines.vca(M, baselines.BaselineOptions(r=r, seed=seed))
    if name == "sivm":
        return baselines.sivm(M, baselines.BaselineOptions(r=r, seed=seed))
    raise InvalidOptionsError(f"unknown algorithm {name!r}")


@dataclass
class DeltaStat:
    delta: float
    mean_recovery: float
    trials: int
    failures: int
    all_perfect: bool


@dataclass
class RecoveryReport:
    per_delta: list
    threshold_full: float
    threshold_99: float
    bound_predicted: float | None = None

    def to_dict(self):
        return {
            "per_delta": [
                {"delta": s.delta, "mean_recovery": s.mean_recovery,
                 "trials": s.trials, "failures": s.failures,
                 "all_perfect": s.all_perfect}
                for s in self.per_delta
            ],
            "threshold_full": self.threshold_full,
            "threshold_99": self.threshold_99,
            "bound_predicted": self.bound_predicted,
        }


def trial_recovery(algorithm, config, delta, delta_idx, trial_idx, master_seed,
                   selector_text=None):
    """One seeded trial; extractor failures count as zero recovery.

    Module-level and fully picklable so process pools can fan trials out.
    """
    trial_seed = derive_seed(master_seed, "trial", delta_idx, trial_idx)
    cfg = synth.with_delta_seed(config, delta, trial_seed)
    M, truth = synth.generate_instance(cfg)
    selector = parse_selector(selector_text) if selector_text else None
    try:
        result = run_algorithm(algorithm, M, cfg.r, derive_seed(trial_seed, "algo"),
                               selector=selector)
    except (RankDeficiencyError, SepnmfError):
        return 0.0, True
    return recovery_fraction(result, truth), False


def sweep(algorithm, config, deltas, trials_per_delta, seed, selector=None,
          map_fn=None):
    """Recovery sweep over a sorted noise grid; see module docstring.

    `map_fn` (signature of builtins.map) lets callers substitute a process
    pool's map; results are order-preserving either way.
    """
    deltas = [float(d) for d in deltas]
    if any(b < a for a, b in zip(deltas, deltas[1:])):
        raise InvalidOptionsError("deltas must be sorted ascending")
    selector_text = selector.describe() if selector is not None else None
    tasks = [(algorithm, config, d, di, ti, seed, selector_text)
             for di, d in enumerate(deltas)
             for ti in range(trials_per_delta)]
    mapper = map_fn if map_fn is not None else map
    outcomes = list(mapper(_trial_star, tasks))
    per_delta = []
    for di, d in enumerate(deltas):
        chunk = outcomes[di * trials_per_delta:(di + 1) * trials_per_delta]
        recs = [rec for rec, _ in chunk]
        fails = sum(1 for _, failed in chunk if failed)
        per_delta.append(DeltaStat(
            delta=d,
            mean_recovery=float(np.mean(recs)) if recs else 0.0,
            trials=trials_per_delta,
            failures=fails,
            all_perfect=bool(recs) and all(rec == 1.0 for rec in recs),
        ))
    threshold_full = max((s.delta for s in per_delta if s.all_perfect), default=0.0)
    threshold_99 = max((s.delta for s in per_delta if s.mean_recovery >= 0.99), default=0.0)
    return RecoveryReport(per_delta=per_delta, threshold_full=threshold_full,
                          threshold_99=threshold_99)


def _trial_star(args):
    return trial_recovery(*args)


def noise_ratio(config, W, trials, seed):
    """Average of (max column noise norm)/delta for the config's noise model.

    Exact (no sampling) for the middle-point suites, where the noise is a
    deterministic function of W; averaged over `trials` unit-delta draws for
    the Gaussian suites.
    """
    if trials < 1:
        raise InvalidOptionsError("trials must be >= 1")
    m, r = W.shape
    if synth._HN_KIND[config.exp_id] == "middle":
        M, _ = synth.gen_middle_points(W, 0.0)
        diffs = M[:, r:] - W.mean(axis=1)[:, None]
        return float(np.sqrt(np.einsum("ij,ij->j", diffs, diffs).max()))
    n = 2 * r + config.n_mix
    maxima = []
    for k in range(trials):
        z = Stream(derive_seed(seed, "noise-ratio", k), "noise").normals(m * n)
        N = z.reshape((m, n), order="F")
        maxima.append(np.sqrt(np.einsum("ij,ij->j", N, N).max()))
    return float(np.mean(maxima))


@dataclass
class BoundComparison:
    """Predicted-vs-observed robustness threshold for one basis draw."""

    predicted_delta: float
    observed_delta: float | None
    eps_max: float
    noise_ratio: float


def bound_report(W, config, selector, trials, seed, deltas=None,
                 trials_per_delta=10):
    """Convert the recovery bound into a predicted noise level for W.

    predicted = eps_max / (average max column noise per unit delta).  When a
    delta grid is supplied, `observed_delta` is the perfect-recovery
    threshold of a fresh sweep (spa, naive); otherwise None.
    """
    bound = spa.recovery_bound(W, selector)
    ratio = noise_ratio(config, W, trials, seed)
    predicted = bound.eps_max / ratio
    observed = None
    if deltas is not None:
        observed = sweep("spa", config, deltas, trials_per_delta,
                         derive_seed(seed, "observed"), selector=selector).threshold_full
    return BoundComparison(predicted_delta=float(predicted), observed_delta=observed,
                           eps_max=bound.eps_max, noise_ratio=ratio)
