"""Discrete power-law fitting for degree samples.

For every candidate lower cutoff ``xmin`` the exponent is the maximum of
the zeta-normalized log-likelihood

    loglik(alpha) = -n * log(zeta(alpha, xmin)) - alpha * sum(log x)

over the tail ``x >= xmin``; the chosen ``xmin`` is the one whose fitted
tail minimizes the Kolmogorov-Smirnov distance to the empirical tail.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import DegenerateSample, EmptyHistogram, InvalidParameter, TooFewSamples
from .metrics.results import DegreeHistogram
from .validation import check_int, check_real, check_samples, rng_from_seed

MIN_SAMPLES = 50
XMIN_QUANTILE = 0.90
ALPHA_BOUNDS = (1.0 + 1e-6, 20.0)

# direct terms are summed until the shifted argument reaches this value
_EM_SHIFT = 20.0
# Bernoulli numbers B2, B4, ..., B16
_BERNOULLI = (
    1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66, -691.0 / 2730, 7.0 / 6, -3617.0 / 510,
)

# inverse-CDF lookup table length and absolute cap on generated values
SAMPLE_TABLE = 100_000
SAMPLE_CAP = 10**12


def hurwitz_zeta(s: float, q) -> np.ndarray:
    """zeta(s, q) = sum_{k>=0} (q + k)^-s for s > 1, q > 0.

    Direct summation up to ``q + N >= 20`` followed by an Euler-Maclaurin
    tail with eight Bernoulli terms; absolute error below 1e-12 for the
    arguments a degree fit meets.
    """
    s = float(s)
    if s <= 1.0:
        raise InvalidParameter(f"zeta needs s > 1, got {s}")
    q = np.asarray(q, dtype=float)
    scalar = q.ndim == 0
    q = np.atleast_1d(q)
    if np.any(q <= 0):
        raise InvalidParameter("zeta needs q > 0")
    shift = np.maximum(0, np.ceil(_EM_SHIFT - q)).astype(np.int64)
    total = np.zeros_like(q)
    for k in range(int(shift.max()) if len(shift) else 0):
        active = k < shift
        total[active] += (q[active] + k) ** -s
    a = q + shift
    total += a ** (1.0 - s) / (s - 1.0) + 0.5 * a ** -s
    # term j: B_2j / (2j)! * s (s+1) ... (s+2j-2) * a^(-s-2j+1)
    rising = s
    fact = 2.0
    power = a ** (-s - 1.0)
    inv_a2 = a ** -2.0
    for j, b in enumerate(_BERNOULLI, start=1):
        total += b / fact * rising * power
        rising *= (s + 2 * j - 1) * (s + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
        power = power * inv_a2
    return total[0] if scalar else total


@dataclass
class PowerLawFit:
    alpha: float
    xmin: int
    ks: float
    n_tail: int
    loglik: float
    candidates_evaluated: int = 1
    p_value: Optional[float] = None
    candidate_ks: dict = field(default_factory=dict, repr=False)

    def to_dict(self) -> dict:
        out = {
            "alpha": self.alpha,
            "xmin": self.xmin,
            "ks": self.ks,
            "n_tail": self.n_tail,
            "loglik": self.loglik,
            "candidates_evaluated": self.candidates_evaluated,
        }
        if self.p_value is not None:
            out["p_value"] = self.p_value
        return out

    def ccdf(self, x) -> np.ndarray:
        """P(X >= x) under the fitted tail."""
        x = np.maximum(np.asarray(x, dtype=float), self.xmin)
        return hurwitz_zeta(self.alpha, x) / hurwitz_zeta(self.alpha, self.xmin)


def _mle_alpha(n: int, sum_log: float, xmin: int) -> tuple[float, float]:
    def nll(a):
        return n * math.log(hurwitz_zeta(a, xmin)) + a * sum_log

    res = minimize_scalar(nll, bounds=ALPHA_BOUNDS, method="bounded", options={"xatol": 1e-10})
    return float(res.x), -float(res.fun)


def _ks(tail_values: np.ndarray, tail_counts: np.ndarray, alpha: float, xmin: int) -> float:
    """KS distance between the empirical tail CDF and the fitted discrete CDF.

    Both CDFs are step functions on the integers; between consecutive
    observed values the empirical CDF is flat and the model's is increasing,
    so checking each observed value and the integer just below it suffices.
    """
    n = tail_counts.sum()
    emp = np.cumsum(tail_counts) / n
    z = hurwitz_zeta(alpha, float(xmin))
    model_at = 1.0 - hurwitz_zeta(alpha, tail_values + 1.0) / z
    d = np.abs(emp - model_at).max()
    if len(tail_values) > 1:
        before = tail_values[1:] - 1.0
        model_before = 1.0 - hurwitz_zeta(alpha, before + 1.0) / z
        d = max(d, np.abs(emp[:-1] - model_before).max())
    return float(d)


def fit_discrete(samples, xmin: Optional[int] = None) -> PowerLawFit:
    """Fit a discrete power law to positive integer samples.

    Values below 1 are dropped.  When ``xmin`` is None every distinct value
    up to the 90th percentile is tried and the one with the smallest KS
    distance wins (ties: the smaller ``xmin``).  A given ``xmin`` fits only
    that cutoff.
    """
    x = check_samples(samples)
    x = np.sort(x[x >= 1])
    if len(x) < MIN_SAMPLES:
        raise TooFewSamples(f"need at least {MIN_SAMPLES} positive samples, got {len(x)}")
    if x[0] == x[-1]:
        raise DegenerateSample("all samples are equal")

    values, counts = np.unique(x, return_counts=True)
    # suffix sums over the distinct values give n and sum(log x) per cutoff
    logs = np.log(values.astype(float)) * counts
    n_ge = np.cumsum(counts[::-1])[::-1]
    sumlog_ge = np.cumsum(logs[::-1])[::-1]

    if xmin is None:
        cutoff = np.quantile(x, XMIN_QUANTILE, method="lower")
        cand = np.flatnonzero(values <= cutoff)
    else:
        xmin = check_int(xmin, "xmin", minimum=1)
        if xmin > x[-1]:
            raise InvalidParameter(f"xmin={xmin} exceeds the largest sample {x[-1]}")
        cand = np.array([np.searchsorted(values, xmin)])

    best = None
    evaluated = 0
    ks_by_xmin = {}
    for i in cand.tolist():
        n_tail = int(n_ge[i])
        if len(values) - i < 2:
            continue
        # forced xmin that is not itself an observed value
        lo = int(values[i]) if xmin is None else xmin
        alpha, ll = _mle_alpha(n_tail, float(sumlog_ge[i]), lo)
        ks = _ks(values[i:].astype(float), counts[i:], alpha, lo)
        evaluated += 1
        ks_by_xmin[lo] = ks
        if best is None or ks < best.ks:
            best = PowerLawFit(alpha, lo, ks, n_tail, ll)
    if best is None:
        raise DegenerateSample("no cutoff leaves a tail with two distinct values")
    best.candidates_evaluated = evaluated
    best.candidate_ks = ks_by_xmin
    return best


def sample_powerlaw(alpha: float, xmin: int, n: int, seed) -> np.ndarray:
    """Draw ``n`` i.i.d. values with P(k) proportional to k^-alpha for k >= xmin.

    Inverse CDF against the exact zeta-normalized tail: a lookup table for
    the first ``SAMPLE_TABLE`` support points and bisection on the Hurwitz
    zeta beyond it.  Values are capped at ``SAMPLE_CAP``.
    """
    alpha = check_real(alpha, "alpha", 1.0, low_open=True)
    xmin = check_int(xmin, "xmin", minimum=1)
    n = check_int(n, "n", minimum=1)
    rng = rng_from_seed(seed)
    u = 1.0 - rng.random(n)  # (0, 1]

    z = hurwitz_zeta(alpha, float(xmin))
    support = np.arange(xmin, xmin + SAMPLE_TABLE, dtype=float)
    ccdf = hurwitz_zeta(alpha, support) / z
    # number of support points with ccdf >= u; the draw is the last of them
    idx = np.searchsorted(-ccdf, -u, side="right")
    out = (xmin + idx - 1).astype(np.int64)

    far = idx == SAMPLE_TABLE
    if far.any():
        uf = u[far]
        lo = np.full(len(uf), float(xmin + SAMPLE_TABLE - 1))
        hi = lo * 2
        while True:
            grow = (hurwitz_zeta(alpha, hi) / z >= uf) & (hi < SAMPLE_CAP)
            if not grow.any():
                break
            hi[grow] *= 2
        hi = np.minimum(hi, SAMPLE_CAP)
        # invariant: ccdf(lo) >= u > ccdf(hi) unless capped
        while np.any(hi - lo > 1):
            mid = np.floor((lo + hi) / 2)
            ok = hurwitz_zeta(alpha, mid) / z >= uf
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
        out[far] = lo.astype(np.int64)
    return out


def bootstrap_pvalue(samples, fit: PowerLawFit, replicates: int = 100, seed=0) -> float:
    """Semi-parametric bootstrap goodness-of-fit p-value.

    Each replicate keeps the sample size, draws tail values from the fitted
    law with probability n_tail/n and otherwise resamples the observed
    values below ``xmin``; the replicate is refitted with a free ``xmin``.
    The p-value is the fraction of replicates whose KS distance is at least
    the observed one.  Slow: one full fit per replicate.
    """
    replicates = check_int(replicates, "replicates", minimum=1)
    rng = rng_from_seed(seed)
    x = check_samples(samples)
    x = x[x >= 1]
    body = x[x < fit.xmin]
    n = len(x)
    p_tail = fit.n_tail / n
    hits = 0
    for _ in range(replicates):
        n_tail = int(rng.binomial(n, p_tail)) if len(body) else n
        tail = sample_powerlaw(fit.alpha, fit.xmin, max(n_tail, 1), rng)[:n_tail]
        head = rng.choice(body, size=n - n_tail, replace=True) if n - n_tail else body[:0]
        try:
            rep = fit_discrete(np.concatenate([head, tail]))
        except (TooFewSamples, DegenerateSample):
            continue
        hits += rep.ks >= fit.ks
    return hits / replicates


@dataclass
class BinnedSeries:
    lower: np.ndarray
    upper: np.ndarray
    degree: np.ndarray
    density: np.ndarray
    count: np.ndarray
    width: np.ndarray
    zero_degree_nodes: int = 0

    def __len__(self):
        return len(self.degree)

    def to_rows(self) -> list:
        return [
            {"lower": float(a), "upper": float(b), "degree": float(d),
             "density": float(p), "count": int(c), "width": int(w)}
            for a, b, d, p, c, w in zip(self.lower, self.upper, self.degree,
                                         self.density, self.count, self.width)
        ]


def loglog_binned(histogram, bins_per_decade: int = 10) -> BinnedSeries:
    """Logarithmically binned degree density for log-log plots.

    Bin edges sit at 10**(j / bins_per_decade).  Each bin reports the
    count-weighted mean degree of its members and
    ``density = count / (total * width)`` where ``width`` is the number of
    integers the bin covers, so ``sum(density * width) == 1``.  Degree-0
    nodes cannot appear on a log axis and are only counted.  Empty bins are
    dropped.
    """
    bins_per_decade = check_int(bins_per_decade, "bins_per_decade", minimum=1)
    counts = histogram.counts if isinstance(histogram, DegreeHistogram) else dict(histogram)
    zeros = int(counts.get(0, 0))
    items = sorted((int(k), int(v)) for k, v in counts.items() if k > 0 and v > 0)
    if not items:
        raise EmptyHistogram("histogram has no positive degrees")
    deg = np.array([k for k, _ in items], dtype=float)
    cnt = np.array([v for _, v in items], dtype=float)
    total = cnt.sum()

    b = bins_per_decade
    k0 = math.floor(b * math.log10(deg[0]) + 1e-9)
    k1 = math.ceil(b * math.log10(deg[-1]) - 1e-9)
    if k1 <= k0:
        k1 = k0 + 1
    edges = 10.0 ** (np.arange(k0, k1 + 1) / b)
    snapped = np.round(edges)
    edges = np.where(np.abs(edges - snapped) < 1e-9, snapped, edges)

    lows, highs, centers, dens, cnts, widths = [], [], [], [], [], []
    last = len(edges) - 2
    for j in range(len(edges) - 1):
        lo, hi = edges[j], edges[j + 1]
        first_int = math.ceil(lo)
        last_int = math.floor(hi) if j == last else math.ceil(hi) - 1
        width = last_int - first_int + 1
        if width <= 0:
            continue
        sel = (deg >= first_int) & (deg <= last_int)
        c = cnt[sel].sum()
        if c == 0:
            continue
        lows.append(lo)
        highs.append(hi)
        centers.append(float((deg[sel] * cnt[sel]).sum() / c))
        dens.append(c / (total * width))
        cnts.append(int(c))
        widths.append(width)
    return BinnedSeries(
        np.array(lows), np.array(highs), np.array(centers), np.array(dens),
        np.array(cnts, dtype=np.int64), np.array(widths, dtype=np.int64), zeros,
    )
