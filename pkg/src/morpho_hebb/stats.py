"""Unique n-gram histograms, rank-frequency tables and log-normal fits."""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np
from scipy.optimize import minimize

from .exceptions import PreconditionError

MU_GRID = np.round(np.arange(0.5, 2.5 + 1e-9, 0.05), 10)
SIGMA_GRID = np.round(np.arange(0.1, 1.0 + 1e-9, 0.02), 10)


@dataclass(frozen=True)
class NGramHistogram:
    """``counts[n]`` = number of distinct n-grams (``d_n``)."""

    counts: Mapping[int, int]
    source: str = "text"

    def __post_init__(self):
        object.__setattr__(self, "counts", {int(n): int(c) for n, c in sorted(dict(self.counts).items())})
        if any(c < 0 for c in self.counts.values()):
            raise PreconditionError("histogram counts must be non-negative")

    def range(self, min_n: int = 1) -> list[int]:
        return [n for n in self.counts if n >= min_n]

    def total(self, min_n: int = 2) -> int:
        return sum(c for n, c in self.counts.items() if n >= min_n)

    def arrays(self, min_n: int = 2):
        ns = np.array([n for n in self.counts if n >= min_n], dtype=float)
        ds = np.array([self.counts[int(n)] for n in ns], dtype=float)
        return ns, ds


@dataclass(frozen=True)
class RankFrequencyTable:
    """``per_n[n]`` = ``[(gram, frequency), ...]`` by descending frequency."""

    per_n: Mapping[int, list]

    def frequencies(self, n: int) -> list[int]:
        return [f for _, f in self.per_n.get(n, [])]

    def singleton_fraction(self, n: int) -> float:
        f = self.frequencies(n)
        return sum(1 for x in f if x == 1) / len(f) if f else 0.0


@dataclass(frozen=True)
class LogNormalFit:
    mu: float
    sigma: float
    N: float
    residual: float
    rms: float = field(default=float("nan"))
    n_points: int = 0


def _check_words(words) -> list[str]:
    words = list(words)
    for w in words:
        if not isinstance(w, str) or not w or any(c.isspace() for c in w):
            raise PreconditionError(f"invalid word {w!r}")
    return words


def count_intraword_ngrams(words: Iterable[str], source: str = "text", max_n: Optional[int] = None) -> NGramHistogram:
    """Distinct length-n substrings inside any word, for every n that occurs (up to ``max_n``)."""
    seen: dict[int, set] = {}
    for w in set(_check_words(words)):
        top = len(w) if max_n is None else min(len(w), max_n)
        for n in range(1, top + 1):
            bucket = seen.setdefault(n, set())
            for i in range(len(w) - n + 1):
                bucket.add(w[i : i + n])
    return NGramHistogram({n: len(s) for n, s in seen.items()}, source)


def rank_frequency(words: Iterable[str], types: bool = False, max_n: Optional[int] = None) -> RankFrequencyTable:
    """Occurrence counts of every n-gram, ranked per n.

    ``types=True`` counts each distinct word once instead of once per emission.
    Ties are ordered lexicographically.  ``max_n`` bounds the gram length,
    which matters for long unsegmented strings.
    """
    words = _check_words(words)
    mult = Counter(words)
    if types:
        mult = Counter(dict.fromkeys(mult, 1))
    freq: dict[int, Counter] = {}
    for w, c in mult.items():
        top = len(w) if max_n is None else min(len(w), max_n)
        for n in range(1, top + 1):
            ctr = freq.setdefault(n, Counter())
            for i in range(len(w) - n + 1):
                ctr[w[i : i + n]] += c
    per_n = {n: sorted(ctr.items(), key=lambda p: (-p[1], p[0])) for n, ctr in sorted(freq.items())}
    return RankFrequencyTable(per_n)


def lognormal_pdf(n, mu: float, sigma: float, N: float):
    """``F(n) = N exp(-(ln n - mu)^2 / (2 sigma^2)) / (n sigma sqrt(2 pi))``."""
    if not sigma > 0:
        raise PreconditionError("sigma must be > 0")
    n_arr = np.asarray(n, dtype=float)
    if np.any(n_arr <= 0):
        raise PreconditionError("n must be > 0")
    out = N * np.exp(-((np.log(n_arr) - mu) ** 2) / (2 * sigma**2)) / (n_arr * sigma * math.sqrt(2 * math.pi))
    return float(out) if np.ndim(out) == 0 else out


def _ssr(ns, logd, mu, sigma, N):
    return float(np.sum((logd - np.log1p(lognormal_pdf(ns, mu, sigma, N))) ** 2))


def fit_lognormal(hist: NGramHistogram, min_n: int = 2) -> LogNormalFit:
    """Least-squares fit of ``log(d_n + 1)`` against ``log(F(n) + 1)``.

    A fixed grid over ``(mu, sigma)`` with the scale set from the log-space
    mean is refined by bounded Nelder-Mead in ``(mu, log sigma, log N)``.
    """
    ns, ds = hist.arrays(min_n)
    nz = ds > 0
    if nz.sum() < 3:
        raise PreconditionError("need at least 3 nonzero histogram points to fit")
    logd = np.log1p(ds)
    best = None
    for mu in MU_GRID:
        for sigma in SIGMA_GRID:
            shape = lognormal_pdf(ns[nz], mu, sigma, 1.0)
            ok = shape > 0
            if not ok.any():
                continue
            logN = float(np.mean(np.log(ds[nz][ok]) - np.log(shape[ok])))
            N = math.exp(min(logN, 700.0))
            r = _ssr(ns, logd, mu, sigma, N)
            if best is None or r < best[0]:
                best = (r, mu, sigma, N)
    _, mu0, s0, N0 = best

    def obj(x):
        return _ssr(ns, logd, x[0], math.exp(x[1]), math.exp(min(x[2], 700.0)))

    # refinement stays inside the grid box so degenerate data cannot run away
    bounds = [(MU_GRID[0], MU_GRID[-1]), (math.log(SIGMA_GRID[0]), math.log(SIGMA_GRID[-1])), (None, None)]
    res = minimize(obj, np.array([mu0, math.log(s0), math.log(N0)]), method="Nelder-Mead", bounds=bounds,
                   options={"xatol": 1e-8, "fatol": 1e-12, "maxiter": 4000})
    x = res.x if res.fun <= best[0] else np.array([mu0, math.log(s0), math.log(N0)])
    mu, sigma, N = float(x[0]), float(math.exp(x[1])), float(math.exp(x[2]))
    r = _ssr(ns, logd, mu, sigma, N)
    return LogNormalFit(mu, sigma, N, r, math.sqrt(r / len(ns)), len(ns))


def peak_and_collapse(hist: NGramHistogram, min_n: int = 2) -> tuple[int, int]:
    """``(n_peak, n_max)``: argmax of ``d_n`` (smallest on ties) and last nonzero n."""
    items = [(n, c) for n, c in hist.counts.items() if n >= min_n]
    if not items or all(c == 0 for _, c in items):
        raise PreconditionError("histogram has no nonzero entries")
    top = max(c for _, c in items)
    n_peak = min(n for n, c in items if c == top)
    n_max = max(n for n, c in items if c > 0)
    return n_peak, n_max


def is_unimodal(hist: NGramHistogram, min_n: int = 2) -> bool:
    """Non-decreasing up to the peak and non-increasing after it."""
    seq = [c for n, c in hist.counts.items() if n >= min_n]
    if not seq:
        return False
    p = seq.index(max(seq))
    return all(a <= b for a, b in zip(seq[:p], seq[1 : p + 1])) and all(a >= b for a, b in zip(seq[p:], seq[p + 1 :]))


def hierarchy_histogram(h, source: str = "hierarchy") -> NGramHistogram:
    """``d_n`` read off a hierarchy's levels (``d_1 = d``; the empty collapse level is dropped)."""
    counts = {1: h.alphabet.d}
    counts.update({n: c for n, c in h.sizes.items() if c})
    return NGramHistogram(counts, source)


# -- CSV ----------------------------------------------------------------------

def _csv(rows, header) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def histogram_csv(hist: NGramHistogram) -> str:
    return _csv(sorted(hist.counts.items()), ["n", "d_n"])


def rankfreq_csv(table: RankFrequencyTable) -> str:
    rows = []
    for n, items in table.per_n.items():
        for rank, (g, f) in enumerate(items, start=1):
            rows.append((n, rank, g, f))
    return _csv(rows, ["n", "rank", "gram", "frequency"])


def fit_csv(fit: LogNormalFit) -> str:
    return _csv([(repr(fit.mu), repr(fit.sigma), repr(fit.N), repr(fit.residual))], ["mu", "sigma", "N", "residual"])
