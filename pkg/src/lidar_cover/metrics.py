"""Solution-quality metrics for stochastic samplers.

``p_opt`` is the fraction of reads that decode to a feasible placement with
the optimal sensor count; ``s_p`` is the number of reads needed to see such a
read with 99 % probability, capped at ``SAMPLE_CAP``; ``tts`` scales ``s_p``
by the per-read compute time. The relaxed variants accept any feasible read
within 10 % of the optimum.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from lidar_cover.errors import ValidationError

SAMPLE_CAP = 5000.0
TARGET_FAILURE = 0.01
RELAXED_FACTOR = 1.1
# below this p_opt a 1000-read estimate is not statistically meaningful
SIGNIFICANCE_FLOOR = 0.0005

REPORT_COLUMNS = (
    "instance", "encoding", "alpha", "sweeps", "seed_group", "p_opt", "s_p", "p_opt_rel",
    "s_p_rel", "tts", "ci_low", "ci_high", "reads", "optimum",
)


def _require_samples(samples):
    if len(samples) == 0:
        raise ValidationError("empty sample set", field="samples")


def _optimal_mask(samples, optimum):
    if optimum < 1:
        raise ValidationError(f"must be >= 1, got {optimum!r}", field="optimum")
    return samples.feasible_mask() & (samples.objectives() == optimum)


def _relaxed_mask(samples, optimum):
    threshold = relaxed_optimum_threshold(optimum)
    return samples.feasible_mask() & (samples.objectives() <= threshold)


def p_opt(samples, optimum):
    _require_samples(samples)
    return float(_optimal_mask(samples, optimum).mean())


def p_opt_rel(samples, optimum):
    _require_samples(samples)
    return float(_relaxed_mask(samples, optimum).mean())


def samples_to_solution(p):
    """Reads needed for a 99 % chance of at least one success, within [1, 5000]."""
    if not (isinstance(p, (int, float, np.floating)) and 0.0 <= p <= 1.0):
        raise ValidationError(f"probability must lie in [0, 1], got {p!r}", field="p")
    if p == 0.0:
        return SAMPLE_CAP
    if p == 1.0:
        return 1.0
    # above p = 0.99 the formula drops below one read; a run needs at least one
    return min(SAMPLE_CAP, max(1.0, math.log(TARGET_FAILURE) / math.log1p(-p)))


def relaxed_optimum_threshold(optimum):
    if optimum < 1:
        raise ValidationError(f"must be >= 1, got {optimum!r}", field="optimum")
    return RELAXED_FACTOR * optimum


def tts(p, t_s):
    if not t_s > 0:
        raise ValidationError(f"must be > 0, got {t_s!r}", field="t_s")
    return samples_to_solution(p) * t_s


def bootstrap_ci(values, level=0.95, resamples=1000, seed=0, statistic=np.mean):
    """Percentile bootstrap interval of ``statistic`` over ``values``."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        raise ValidationError("need at least one value", field="values")
    if not 0 < level < 1:
        raise ValidationError(f"must lie in (0, 1), got {level!r}", field="level")
    res = stats.bootstrap((values,), statistic, n_resamples=resamples, confidence_level=level,
                          method="percentile", vectorized=False,
                          random_state=np.random.default_rng(seed))
    low, high = res.confidence_interval
    return float(low), float(high)


def _s_p_of_mean(indicator):
    return samples_to_solution(float(np.mean(indicator)))


@dataclass(frozen=True)
class MetricsReport:
    p_opt: float
    s_p: float
    p_opt_rel: float
    s_p_rel: float
    tts: float
    optimum_used: int
    relaxed_threshold: float
    reads: int
    ci: dict
    low_significance: bool

    @property
    def ci_low(self):
        return self.ci["s_p_rel"][0]

    @property
    def ci_high(self):
        return self.ci["s_p_rel"][1]

    def row(self, instance, encoding, alpha, sweeps, seed_group):
        """One CSV row (as strings) in REPORT_COLUMNS order."""
        return {
            "instance": instance,
            "encoding": encoding,
            "alpha": f"{alpha:g}",
            "sweeps": str(sweeps),
            "seed_group": str(seed_group),
            "p_opt": f"{self.p_opt:.6f}",
            "s_p": f"{self.s_p:.4f}",
            "p_opt_rel": f"{self.p_opt_rel:.6f}",
            "s_p_rel": f"{self.s_p_rel:.4f}",
            "tts": "" if self.tts is None else f"{self.tts:.6g}",
            "ci_low": f"{self.ci_low:.4f}",
            "ci_high": f"{self.ci_high:.4f}",
            "reads": str(self.reads),
            "optimum": str(self.optimum_used),
        }


def evaluate(samples, optimum, t_s=None, resamples=1000, seed=0):
    """All metrics of one sample set against a known optimum.

    The s_p confidence intervals come from bootstrapping the per-read success
    indicators; ``tts`` is None unless a per-read time is supplied.
    """
    _require_samples(samples)
    opt = _optimal_mask(samples, optimum).astype(float)
    rel = _relaxed_mask(samples, optimum).astype(float)
    p = float(opt.mean())
    pr = float(rel.mean())
    ci = {
        "p_opt": bootstrap_ci(opt, resamples=resamples, seed=seed),
        "p_opt_rel": bootstrap_ci(rel, resamples=resamples, seed=seed),
        "s_p": bootstrap_ci(opt, resamples=resamples, seed=seed, statistic=_s_p_of_mean),
        "s_p_rel": bootstrap_ci(rel, resamples=resamples, seed=seed, statistic=_s_p_of_mean),
    }
    return MetricsReport(
        p_opt=p,
        s_p=samples_to_solution(p),
        p_opt_rel=pr,
        s_p_rel=samples_to_solution(pr),
        tts=None if t_s is None else tts(p, t_s),
        optimum_used=int(optimum),
        relaxed_threshold=relaxed_optimum_threshold(optimum),
        reads=len(samples),
        ci=ci,
        low_significance=p < SIGNIFICANCE_FLOOR,
    )
