"""Independent Bernoulli random subsets of the positive integers.

Element a is included iff u_a < x_a, where u_a is the counter-based uniform
for (seed, a).  Because the same u_a is shared by every model, raising the
probabilities pointwise can only add elements.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import rng
from .config import worker_count
from .intset import IntSet, check_capacity, count_upto

S2S2 = "S2S2"
NEOLEM = "NEOLEM"
FAMILIES = (S2S2, NEOLEM)

_CHUNK = 1 << 20


@dataclass(frozen=True)
class RandomSetModel:
    """Inclusion law x_a for a >= 1.

    S2S2:   x_a = c / (sqrt(a) * ln(a+1)^(1/4))
    NEOLEM: x_a = c / a^(2/3)   (c = 10/eps for the finite complement lemma)

    Raw values above ``clamp`` are capped.
    """

    family: str = S2S2
    c: float = 1.0
    clamp: float = 1.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c}")
        if not 0 < self.clamp <= 1:
            raise ValueError(f"clamp must be in (0, 1], got {self.clamp}")

    def raw(self, a):
        a = np.asarray(a, dtype=np.float64)
        if self.family == S2S2:
            return self.c / (np.sqrt(a) * np.log1p(a) ** 0.25)
        return self.c / np.cbrt(a * a)

    def probabilities(self, start, stop):
        """x_a for start <= a < stop (start >= 1)."""
        if start < 1:
            raise ValueError("probabilities are defined for a >= 1")
        return np.minimum(self.clamp, self.raw(np.arange(start, stop)))

    def clamped_upto(self):
        """Largest a whose raw probability exceeds the clamp (0 if none).

        Raw probabilities decrease in a, so a bisection suffices.
        """
        if self.raw(1) <= self.clamp:
            return 0
        lo, hi = 1, 2
        while self.raw(hi) > self.clamp:
            lo, hi = hi, hi * 2
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.raw(mid) > self.clamp:
                lo = mid
            else:
                hi = mid
        return lo


def model_probability(model, a):
    if a < 1:
        raise ValueError("a must be >= 1")
    return float(min(model.clamp, model.raw(a)))


def lambda_upto(model, n):
    """lambda_n = sum_{a <= n} x_a, summed with exact rounding."""
    if n < 1:
        return 0.0
    total = []
    for lo in range(1, n + 1, _CHUNK):
        hi = min(n + 1, lo + _CHUNK)
        total.append(math.fsum(model.probabilities(lo, hi)))
    return math.fsum(total)


def lambda_profile(model, ns):
    """lambda_n at every n in the ascending list ``ns``."""
    ns = [int(n) for n in ns]
    if not ns:
        return []
    x = model.probabilities(1, max(ns) + 1)
    csum = np.cumsum(x)
    return [float(csum[n - 1]) if n >= 1 else 0.0 for n in ns]


@dataclass(frozen=True)
class SampleManifest:
    model: RandomSetModel
    limit: int
    seed: int
    generator: str = rng.GENERATOR_ID
    count: int = 0
    extra: dict = field(default_factory=dict)

    def to_json(self):
        d = asdict(self)
        d["kind"] = "sample"
        return d


def _chunk_mask(model, seed, lo, hi):
    u = rng.uniforms(seed, lo, hi)
    return u < model.probabilities(lo, hi)


def sample_set(model, limit, seed, workers=None):
    """Random subset of [1, limit]; a pure function of (model, limit, seed)."""
    limit = int(limit)
    check_capacity(limit)
    workers = worker_count() if workers is None else workers
    mask = np.zeros(limit + 1, dtype=bool)
    bounds = [(lo, min(limit + 1, lo + _CHUNK)) for lo in range(1, limit + 1, _CHUNK)]

    def fill(b):
        lo, hi = b
        mask[lo:hi] = _chunk_mask(model, seed, lo, hi)

    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(workers) as pool:
            list(pool.map(fill, bounds))
    else:
        for b in bounds:
            fill(b)
    A = IntSet.from_mask(mask)
    manifest = SampleManifest(model, limit, int(seed), count=len(A))
    return A.with_meta({"manifest": manifest.to_json()})


def chernoff_bound(eps, lam):
    """2 exp(-eps^2 lambda / 4): bound on P(|A(n) - lambda| > eps lambda)."""
    return 2.0 * math.exp(-eps * eps * lam / 4.0)


@dataclass
class ConcentrationReport:
    eps: float
    rows: list  # (seed, n, A(n), lambda_n, ratio, ok)
    violation_rate: dict  # n -> fraction of seeds violating
    bound: dict  # n -> chernoff bound (unclipped)

    @property
    def violations(self):
        return [r for r in self.rows if not r[5]]

    @property
    def consistent(self):
        return all(self.violation_rate[n] <= self.bound[n] for n in self.bound)


def concentration_check(model, limit, seeds, eps, n_grid, workers=None):
    """Per seed and grid point n, test (1-eps) lambda_n <= A(n) <= (1+eps) lambda_n."""
    grid = sorted(int(n) for n in n_grid)
    if any(n < 2 for n in grid):
        raise ValueError("grid points must be >= 2")
    lams = lambda_profile(model, grid)
    rows = []
    for seed in seeds:
        A = sample_set(model, limit, seed, workers)
        counts = count_upto(A, np.array(grid))
        for n, lam, cnt in zip(grid, lams, counts):
            cnt = int(cnt)
            ok = (1 - eps) * lam <= cnt <= (1 + eps) * lam
            rows.append((int(seed), n, cnt, lam, cnt / lam, ok))
    rate = {}
    bound = {}
    for n, lam in zip(grid, lams):
        bad = sum(1 for r in rows if r[1] == n and not r[5])
        rate[n] = bad / max(1, len(seeds))
        bound[n] = chernoff_bound(eps, lam)
    return ConcentrationReport(eps, rows, rate, bound)
