"""Next-token evidence, measurement, left/right inference and replay."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .exceptions import ConsistencyError, PreconditionError
from .hierarchy import Hierarchy
from .tokenizer import token

MODES = ("sample", "argmax")
THREADS_ENV = "MORPHO_HEBB_THREADS"


@dataclass(frozen=True)
class MeasureConfig:
    """Inference settings.

    ``beta`` weights order-n evidence by ``beta**n``; ``mode='argmax'`` picks
    the largest evidence (smallest index on ties) instead of sampling.
    """

    beta: float = 1.0
    seed: int = 0
    mode: str = "sample"

    def __post_init__(self):
        if not self.beta >= 1.0:
            raise PreconditionError("beta must be >= 1")
        if self.mode not in MODES:
            raise PreconditionError(f"mode must be one of {MODES}")


@dataclass
class Superposition:
    """Non-negative evidence over the ``d`` basis symbols."""

    evidence: np.ndarray
    alphabet: object = field(repr=False)

    def __post_init__(self):
        self.evidence = np.asarray(self.evidence, dtype=float)
        if self.evidence.shape != (self.alphabet.d,):
            raise PreconditionError("evidence length must equal the alphabet size")

    @property
    def total(self) -> float:
        return float(self.evidence.sum())

    def probabilities(self) -> np.ndarray:
        """``rho_k = evidence_k / sum_j evidence_j`` (all zeros if there is no evidence)."""
        tot = math.fsum(self.evidence)
        if tot == 0:
            return np.zeros_like(self.evidence)
        rho = self.evidence / tot
        # push rounding residue into the largest entry so the sum is exactly 1
        top = int(np.argmax(rho))
        for _ in range(4):
            err = 1.0 - math.fsum(rho)
            if err == 0.0:
                break
            rho[top] += err
        return rho

    def nonzero(self) -> dict:
        return {self.alphabet.symbols[i]: float(v) for i, v in enumerate(self.evidence) if v}


@dataclass(frozen=True)
class Replay:
    word: str
    tokens: tuple


def _context(h: Hierarchy, ctx) -> str:
    ctx = "".join(ctx)
    if not ctx:
        raise PreconditionError("context must be nonempty; use initial_symbols for a cold start")
    return h.alphabet.check(ctx)


def next_token_evidence(h: Hierarchy, ctx, cfg: Optional[MeasureConfig] = None) -> Superposition:
    """Evidence for each next symbol ``k`` given the trailing context.

    ``evidence_k = sum_n beta**n * g[(n)](suffix of length n-1, k)``, summed for
    every order whose context suffix is a learned gram.
    """
    cfg = cfg or MeasureConfig()
    ctx = _context(h, ctx)
    ev = np.zeros(h.alphabet.d)
    top = min(len(ctx) + 1, h.top + 1)
    for n in range(2, top + 1):
        if not h.has_level(n):
            break
        suffix = ctx[len(ctx) - (n - 1) :]
        if not h.is_learned(suffix):
            continue
        cont = h.level(n).continuations.get(suffix)
        if cont:
            scale = cfg.beta ** n
            for k, w in cont:
                ev[k] += scale * w
    return Superposition(ev, h.alphabet)


def previous_token_evidence(h: Hierarchy, ctx, cfg: Optional[MeasureConfig] = None) -> Superposition:
    """Mirror of :func:`next_token_evidence` using the left-tokenized tables."""
    cfg = cfg or MeasureConfig()
    ctx = _context(h, ctx)
    ev = np.zeros(h.alphabet.d)
    top = min(len(ctx) + 1, h.top + 1)
    for n in range(2, top + 1):
        if not h.has_level(n):
            break
        prefix = ctx[: n - 1]
        if not h.is_learned(prefix):
            continue
        pred = h.level(n).predecessors.get(prefix)
        if pred:
            scale = cfg.beta ** n
            for k, w in pred:
                ev[k] += scale * w
    return Superposition(ev, h.alphabet)


def measure(sup: Superposition, cfg: Optional[MeasureConfig] = None, rng=None) -> Optional[str]:
    """Collapse a superposition to one symbol, or ``None`` (halt) if there is no evidence."""
    cfg = cfg or MeasureConfig()
    ev = sup.evidence
    if np.any(ev < 0) or not np.all(np.isfinite(ev)):
        raise ConsistencyError("evidence must be finite and non-negative")
    if not ev.any():
        return None
    if cfg.mode == "argmax":
        return sup.alphabet.symbols[int(np.argmax(ev))]
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    rho = sup.probabilities()
    return sup.alphabet.symbols[int(rng.choice(len(rho), p=rho))]


def _mask(sup: Superposition, allowed) -> Superposition:
    ev = np.zeros_like(sup.evidence)
    for k, _ in allowed or ():
        ev[k] = sup.evidence[k]
    return Superposition(ev, sup.alphabet)


def infer_left(h: Hierarchy, ctx, cfg: Optional[MeasureConfig] = None, rng=None) -> str:
    """Prepend measured symbols until the word cannot grow left and stay smooth.

    Only symbols ``k`` for which ``k + word`` is a learned gram are eligible;
    their weights come from :func:`previous_token_evidence`.
    """
    cfg = cfg or MeasureConfig()
    word = _context(h, ctx)
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    while h.is_learned(word) and h.has_level(len(word) + 1):
        allowed = h.level(len(word) + 1).predecessors.get(word)
        k = measure(_mask(previous_token_evidence(h, word, cfg), allowed), cfg, rng)
        if k is None:
            break
        word = k + word
    return word


def infer_right(h: Hierarchy, ctx, cfg: Optional[MeasureConfig] = None, rng=None) -> str:
    """Append measured symbols until the word cannot grow right and stay smooth."""
    cfg = cfg or MeasureConfig()
    word = _context(h, ctx)
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    while h.is_learned(word) and h.has_level(len(word) + 1):
        allowed = h.level(len(word) + 1).continuations.get(word)
        k = measure(_mask(next_token_evidence(h, word, cfg), allowed), cfg, rng)
        if k is None:
            break
        word = word + k
    return word


def initial_symbols(h: Hierarchy) -> tuple[str, ...]:
    """Symbols eligible to seed a replay: those appearing in any learned bigram."""
    if not h.has_level(2) or h.level(2).d == 0:
        return h.alphabet.symbols
    used = set("".join(h.level(2).grams))
    return tuple(s for s in h.alphabet.symbols if s in used)


def word_tokens(h: Hierarchy, word: str) -> tuple:
    """Every distinct gram of ``word`` (length >= 1), shortest first."""
    out = []
    for n in range(1, len(word) + 1):
        seen = set()
        for i in range(len(word) - n + 1):
            g = word[i : i + n]
            if g not in seen:
                seen.add(g)
                out.append(token(h, g))
    return tuple(out)


def replay_cycle(h: Hierarchy, cfg: Optional[MeasureConfig] = None, rng=None, repeats: int = 1) -> list[Replay]:
    """Generate word(s) from a random seed symbol.

    Left inference runs first to find the left boundary; right inference then
    runs from that boundary until halt.  With ``repeats > 1`` additional right
    passes restart from the same left boundary.
    """
    cfg = cfg or MeasureConfig()
    rng = np.random.default_rng(cfg.seed) if rng is None else rng
    if repeats < 1:
        raise PreconditionError("repeats must be >= 1")
    starts = initial_symbols(h)
    seed_sym = starts[int(rng.integers(len(starts)))]
    left = infer_left(h, seed_sym, cfg, rng)
    out = []
    for _ in range(repeats):
        word = infer_right(h, left, cfg, rng)
        out.append(Replay(word, word_tokens(h, word)))
    return out


def cycle_rng(seed: int, i: int) -> np.random.Generator:
    """Independent generator for replay cycle ``i``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))


def worker_count(default: int = 1) -> int:
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return default
    try:
        return max(1, int(raw))
    except ValueError:
        raise PreconditionError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from None


def generate_vocabulary(h: Hierarchy, n_words: int, cfg: Optional[MeasureConfig] = None, workers: Optional[int] = None) -> list[str]:
    """Run ``n_words`` replay cycles and return the emitted words in cycle order.

    Cycle ``i`` uses a generator derived from ``(cfg.seed, i)``, so the result
    does not depend on the number of workers.
    """
    cfg = cfg or MeasureConfig()
    if n_words < 1:
        raise PreconditionError("n_words must be >= 1")
    workers = worker_count() if workers is None else workers

    def one(i):
        return replay_cycle(h, cfg, cycle_rng(cfg.seed, i))[0].word

    if workers <= 1:
        return [one(i) for i in range(n_words)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, range(n_words)))


def maximal_smooth_strings(h: Hierarchy) -> set:
    """Brute-force set of learned grams (length >= 2) that cannot grow on either side."""
    out = set()
    for g in h.all_grams(2):
        n = len(g) + 1
        if h.has_level(n):
            lvl = h.level(n)
            if g in lvl.continuations or g in lvl.predecessors:
                continue
        out.add(g)
    return out
