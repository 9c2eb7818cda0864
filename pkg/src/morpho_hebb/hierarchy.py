"""Hierarchy of learned n-grams grown by a Hebbian rule with forgetting.

Each level ``n`` holds the learned n-grams (tokens ``mu_n``) together with
the synapse value that admitted them.  A level is derived from a synapse
matrix over pairs ``(mu_{n-1}, k)`` -- a learned (n-1)-gram followed by a basis
symbol -- by thresholding at the level cutoff ``eps_n``.  Only smooth grams
(prefix and suffix both learned one level below) may ever be admitted, so the
levels form a DAG.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .alphabet import SEPARATOR, Alphabet, as_alphabet
from .corpus import NormalizedStream
from .exceptions import ConsistencyError, HierarchyOrderError, PreconditionError

HIERARCHY_VERSION = 1


@dataclass(frozen=True)
class TrainConfig:
    """Training hyper-parameters.

    Parameters
    ----------
    n_g : float
        Forgetting horizon in steps.  ``math.inf`` switches to pure
        accumulation: ``g`` is the empirical window frequency.
    xi_g : float, optional
        Update fraction.  Defaults to ``1 / n_g``; if both are given they must
        agree.
    epsilons : sequence of float
        Cutoffs ``eps_2, eps_3, ...``.  Levels past the end of the list use 0.
    max_level : int
        Hard cap on gram length.
    seed : int
        Seed for random growth.
    """

    n_g: float = math.inf
    xi_g: Optional[float] = None
    epsilons: tuple = ()
    max_level: int = 32
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "epsilons", tuple(float(e) for e in self.epsilons))
        if self.max_level < 2:
            raise PreconditionError("max_level must be >= 2")
        for e in self.epsilons:
            if not 0.0 <= e < 1.0:
                raise PreconditionError(f"epsilon {e} outside [0, 1)")
        if not self.n_g >= 1:
            raise PreconditionError("n_g must be >= 1")
        if self.xi_g is not None:
            if not 0.0 < self.xi_g <= 1.0:
                raise PreconditionError("xi_g must lie in (0, 1]")
            if math.isfinite(self.n_g) and not math.isclose(self.xi_g * self.n_g, 1.0):
                raise PreconditionError("xi_g and n_g disagree (xi_g must equal 1/n_g)")

    @property
    def xi(self) -> Optional[float]:
        """Per-step update fraction, or ``None`` in accumulation mode."""
        if self.xi_g is not None:
            return float(self.xi_g)
        if math.isinf(self.n_g):
            return None
        return 1.0 / self.n_g

    def epsilon(self, n: int) -> float:
        i = n - 2
        return self.epsilons[i] if 0 <= i < len(self.epsilons) else 0.0


class Level:
    """Learned n-grams of one length, lexicographically indexed."""

    def __init__(self, n: int, grams: Iterable[str], weights: Iterable[float], alphabet: Alphabet):
        pairs = list(zip(grams, weights))
        self.n = int(n)
        self.alphabet = alphabet
        for g, _ in pairs:
            if len(g) != self.n:
                raise ConsistencyError(f"gram {g!r} has length {len(g)} at level {self.n}")
            alphabet.check(g)
        pairs.sort(key=lambda p: alphabet.sort_key(p[0]))
        self.grams: tuple[str, ...] = tuple(g for g, _ in pairs)
        self.weights: tuple[float, ...] = tuple(float(w) for _, w in pairs)
        self.index_of: dict[str, int] = {g: i for i, g in enumerate(self.grams)}
        if len(self.index_of) != len(self.grams):
            raise ConsistencyError(f"duplicate grams at level {self.n}")

    @property
    def d(self) -> int:
        return len(self.grams)

    def __len__(self):
        return len(self.grams)

    def __contains__(self, gram):
        return gram in self.index_of

    def __iter__(self):
        return iter(self.grams)

    def __eq__(self, other):
        return (
            isinstance(other, Level)
            and self.n == other.n
            and self.grams == other.grams
            and self.weights == other.weights
        )

    def __repr__(self):
        return f"Level(n={self.n}, d={self.d})"

    def weight(self, gram: str) -> float:
        i = self.index_of.get(gram)
        return 0.0 if i is None else self.weights[i]

    @cached_property
    def continuations(self) -> dict[str, list[tuple[int, float]]]:
        """(n-1)-prefix -> [(basis index of last symbol, weight)]: right-tokenized g."""
        table: dict[str, list] = {}
        for g, w in zip(self.grams, self.weights):
            table.setdefault(g[:-1], []).append((self.alphabet.index(g[-1]), w))
        return table

    @cached_property
    def predecessors(self) -> dict[str, list[tuple[int, float]]]:
        """(n-1)-suffix -> [(basis index of first symbol, weight)]: left-tokenized g."""
        table: dict[str, list] = {}
        for g, w in zip(self.grams, self.weights):
            table.setdefault(g[1:], []).append((self.alphabet.index(g[0]), w))
        return table


class Hierarchy:
    """Alphabet plus contiguous levels ``n = 2 .. N``.

    If growth stopped because a level came out empty, that empty level is kept
    as the last entry and :attr:`collapsed` is true.
    """

    def __init__(self, alphabet=None, levels: Sequence[Level] = (), frozen: bool = True, validate: bool = True):
        self.alphabet = as_alphabet(alphabet)
        self.levels: tuple[Level, ...] = tuple(levels)
        self.frozen = bool(frozen)
        for i, lvl in enumerate(self.levels):
            if lvl.n != i + 2:
                raise HierarchyOrderError(f"levels must be contiguous from n=2; got n={lvl.n} at slot {i}")
            if lvl.d == 0 and i != len(self.levels) - 1:
                raise ConsistencyError(f"empty level n={lvl.n} followed by further levels")
        if validate:
            self.check_dag()

    # -- structure -------------------------------------------------------
    def level(self, n: int) -> Level:
        if n < 2 or n - 2 >= len(self.levels):
            raise HierarchyOrderError(f"level {n} has not been built")
        return self.levels[n - 2]

    def has_level(self, n: int) -> bool:
        return 2 <= n < len(self.levels) + 2

    @property
    def top(self) -> int:
        """Longest learned gram length (1 if only the alphabet exists)."""
        for lvl in reversed(self.levels):
            if lvl.d:
                return lvl.n
        return 1

    @property
    def collapsed(self) -> bool:
        return bool(self.levels) and self.levels[-1].d == 0

    @property
    def sizes(self) -> dict[int, int]:
        """``{n: d_n}`` for every stored level (including a terminal empty one)."""
        return {lvl.n: lvl.d for lvl in self.levels}

    @property
    def n_tokens(self) -> int:
        return sum(lvl.d for lvl in self.levels)

    def grams(self, n: int) -> tuple[str, ...]:
        if n == 1:
            return self.alphabet.symbols
        return self.level(n).grams if self.has_level(n) else ()

    def all_grams(self, min_n: int = 2):
        for lvl in self.levels:
            if lvl.n >= min_n:
                yield from lvl.grams

    def is_learned(self, gram: str) -> bool:
        n = len(gram)
        if n == 1:
            return gram in self.alphabet
        return self.has_level(n) and gram in self.levels[n - 2]

    def weight(self, gram: str) -> float:
        n = len(gram)
        if n < 2 or not self.has_level(n):
            return 0.0
        return self.levels[n - 2].weight(gram)

    def index(self, gram: str) -> Optional[int]:
        """Token index ``mu_n`` of a gram (basis index for single symbols)."""
        if len(gram) == 1:
            return self.alphabet.index(gram) if gram in self.alphabet else None
        if not self.has_level(len(gram)):
            return None
        return self.levels[len(gram) - 2].index_of.get(gram)

    def check_dag(self) -> None:
        """Raise :class:`ConsistencyError` unless every gram's prefix and suffix are learned."""
        for lvl in self.levels:
            for g in lvl.grams:
                if lvl.n == 2:
                    self.alphabet.check(g)
                elif not (self.is_learned(g[:-1]) and self.is_learned(g[1:])):
                    raise ConsistencyError(f"gram {g!r} at level {lvl.n} is not smooth")

    def with_level(self, level: Level) -> "Hierarchy":
        """Return a new, unfrozen hierarchy with ``level`` appended or replaced."""
        n = level.n
        if n > len(self.levels) + 2:
            raise HierarchyOrderError(f"cannot add level {n} before level {n - 1}")
        levels = list(self.levels[: n - 2]) + [level]
        return Hierarchy(self.alphabet, levels, frozen=False, validate=False)

    def freeze(self) -> "Hierarchy":
        return Hierarchy(self.alphabet, self.levels, frozen=True, validate=False)

    def __eq__(self, other):
        return (
            isinstance(other, Hierarchy)
            and self.alphabet == other.alphabet
            and self.levels == other.levels
        )

    def __repr__(self):
        return f"Hierarchy(d={self.alphabet.d}, sizes={self.sizes}, collapsed={self.collapsed})"

    # -- projector tables ----------------------------------------------
    @cached_property
    def _up(self) -> list[dict]:
        # _up[n-2][(mu_{n-1}, k)] = mu_n : the 0/1 projector P_n as a lookup
        tables = []
        for lvl in self.levels:
            t = {}
            for mu, g in enumerate(lvl.grams):
                t[(self._lower_index(g[:-1]), self.alphabet.index(g[-1]))] = mu
            tables.append(t)
        return tables

    @cached_property
    def _up_left(self) -> list[dict]:
        # left-gauge projector: (k, mu_{n-1} of the suffix) -> mu_n
        tables = []
        for lvl in self.levels:
            t = {}
            for mu, g in enumerate(lvl.grams):
                t[(self.alphabet.index(g[0]), self._lower_index(g[1:]))] = mu
            tables.append(t)
        return tables

    @cached_property
    def _parent(self) -> list[list[tuple[int, int]]]:
        # inverse projector: mu_n -> (mu_{n-1}, k)
        return [
            [(self._lower_index(g[:-1]), self.alphabet.index(g[-1])) for g in lvl.grams]
            for lvl in self.levels
        ]

    def _lower_index(self, gram: str) -> int:
        i = self.index(gram)
        if i is None:
            raise ConsistencyError(f"gram {gram!r} is not learned one level down")
        return i

    def project(self, mu_prev: int, k: int, n: int) -> Optional[int]:
        """Apply ``P_n`` to ``(mu_{n-1}, k)``; ``None`` when the projection vanishes."""
        if not self.has_level(n):
            return None
        return self._up[n - 2].get((mu_prev, k))

    def project_left(self, k: int, mu_prev: int, n: int) -> Optional[int]:
        """Left-gauge projector: basis ``k`` followed by the (n-1)-token ``mu_prev``."""
        if not self.has_level(n):
            return None
        return self._up_left[n - 2].get((k, mu_prev))

    def unproject(self, mu: int, n: int) -> tuple[int, int]:
        """Inverse of :meth:`project`: split token ``mu_n`` into ``(mu_{n-1}, k)``."""
        return self._parent[n - 2][mu]

    # -- persistence -----------------------------------------------------
    def to_document(self) -> dict:
        return {
            "version": HIERARCHY_VERSION,
            "alphabet": str(self.alphabet),
            "levels": [
                {"n": lvl.n, "grams": list(lvl.grams), "weights": list(lvl.weights)}
                for lvl in self.levels
            ],
        }

    @classmethod
    def from_document(cls, doc: Mapping) -> "Hierarchy":
        alphabet = Alphabet.from_string(doc["alphabet"])
        levels = []
        for entry in doc["levels"]:
            if len(entry["grams"]) != len(entry["weights"]):
                raise ConsistencyError(f"level {entry['n']}: grams/weights length mismatch")
            levels.append(Level(entry["n"], entry["grams"], entry["weights"], alphabet))
        return cls(alphabet, levels, frozen=True)

    @classmethod
    def from_grams(cls, grams: Iterable[str], alphabet=None, weight: float = 1.0) -> "Hierarchy":
        """Build a hierarchy directly from a set of learned grams (length >= 2).

        Raises :class:`ConsistencyError` if the set is not smooth.
        """
        alphabet = as_alphabet(alphabet)
        by_n: dict[int, set] = {}
        for g in grams:
            if len(g) >= 2:
                by_n.setdefault(len(g), set()).add(alphabet.check(g))
        top = max(by_n, default=1)
        levels = [Level(n, sorted(by_n.get(n, ())), [weight] * len(by_n.get(n, ())), alphabet) for n in range(2, top + 1)]
        while levels and levels[-1].d == 0:
            levels.pop()
        return cls(alphabet, levels, frozen=True)


# -- synapse matrices and the Hebbian rule -------------------------------

class SynapseMatrix:
    """Synapse values ``g^(n)[mu_{n-1}, k]`` for one target level.

    Entries are keyed by the n-gram string (the (n-1)-prefix followed by
    ``k``).  In accumulation mode (``xi is None``) raw counts are kept and
    normalized by the number of steps on read.
    """

    def __init__(self, n: int, alphabet: Alphabet, xi: Optional[float], values=None, steps: int = 0):
        self.n = int(n)
        self.alphabet = alphabet
        self.xi = xi
        self.steps = int(steps)
        self._values: dict[str, float] = dict(values or {})

    def copy(self) -> "SynapseMatrix":
        return SynapseMatrix(self.n, self.alphabet, self.xi, self._values, self.steps)

    def value(self, gram: str) -> float:
        v = self._values.get(gram, 0.0)
        if self.xi is None:
            return v / self.steps if self.steps else 0.0
        return v

    def __getitem__(self, pair) -> float:
        prefix, k = pair
        return self.value(prefix + k)

    def entries(self) -> dict[str, float]:
        """Nonzero entries, normalized, keyed by n-gram."""
        out = {g: self.value(g) for g in self._values}
        return {g: v for g, v in out.items() if v != 0.0}

    def nonzero(self) -> int:
        return len(self.entries())

    def __repr__(self):
        mode = "accumulate" if self.xi is None else f"xi={self.xi}"
        return f"SynapseMatrix(n={self.n}, {mode}, steps={self.steps}, nonzero={self.nonzero()})"


def _check_pair(g: SynapseMatrix, pair) -> str:
    prefix, k = pair
    if not isinstance(prefix, str) or len(prefix) != g.n - 1:
        raise IndexError(f"context {prefix!r} is not an index of level {g.n - 1}")
    if not isinstance(k, str) or len(k) != 1 or k not in g.alphabet:
        raise IndexError(f"basis index {k!r} out of range")
    for c in prefix:
        if c not in g.alphabet:
            raise IndexError(f"symbol {c!r} out of range")
    return prefix + k


def hebbian_step(g: SynapseMatrix, pair, active: bool, cfg: Optional[TrainConfig] = None) -> SynapseMatrix:
    """One time step of the Hebbian rule, returning a new matrix.

    Every entry decays by ``1 - xi``; the observed pair additionally gains
    ``xi`` when ``active``.  In accumulation mode the step is the running mean
    (``xi_t = 1/t``), stored exactly as counts.
    """
    gram = _check_pair(g, pair) if pair is not None else None
    xi = g.xi if cfg is None else cfg.xi
    out = SynapseMatrix(g.n, g.alphabet, xi, steps=g.steps + 1)
    if xi is None:
        out._values = dict(g._values)
        if active and gram is not None:
            out._values[gram] = out._values.get(gram, 0.0) + 1.0
        return out
    keep = 1.0 - xi
    out._values = {k: v * keep for k, v in g._values.items()}
    if active and gram is not None:
        out._values[gram] = out._values.get(gram, 0.0) + xi
    return out


def _admissible(h: Hierarchy, window: str) -> bool:
    n = len(window)
    if n == 2:
        return True
    return h.is_learned(window[:-1]) and h.is_learned(window[1:])


def train_level(h: Hierarchy, n: int, stream, cfg: TrainConfig) -> SynapseMatrix:
    """Train ``g^(n)`` by sliding the two-slot window over ``stream``.

    At each step the trailing ``n - 1`` symbols are projected through the
    existing levels; windows that straddle a separator, whose context does not
    project, or whose implied n-gram is not smooth are inactive (they only
    decay).  The result equals iterating :func:`hebbian_step` once per window.
    """
    if n < 2:
        raise PreconditionError("target level must be >= 2")
    if n > 2 and not h.has_level(n - 1):
        raise HierarchyOrderError(f"level {n - 1} must be built before training level {n}")
    if isinstance(stream, str):
        stream = NormalizedStream(stream)
    text = stream.text
    xi = cfg.xi
    total = max(0, len(text) - n + 1)
    g = SynapseMatrix(n, h.alphabet, xi, steps=total)
    if total == 0:
        return g
    if n > 2 and h.level(n - 1).d == 0:
        return g

    if xi is None:
        counts: dict[str, float] = {}
        for start, word in stream.word_spans():
            for i in range(len(word) - n + 1):
                w = word[i : i + n]
                if _admissible(h, w):
                    counts[w] = counts.get(w, 0.0) + 1.0
        g._values = counts
        return g

    # lazy decay: store (value after last imprint, step of last imprint)
    keep = 1.0 - xi
    last: dict[str, list] = {}
    for start, word in stream.word_spans():
        for i in range(len(word) - n + 1):
            w = word[i : i + n]
            if not _admissible(h, w):
                continue
            t = start + i + 1  # 1-based step index of the window ending at start+i+n-1
            rec = last.get(w)
            if rec is None:
                last[w] = [xi, t]
            else:
                rec[0] = rec[0] * keep ** (t - rec[1]) + xi
                rec[1] = t
    g._values = {w: v * keep ** (total - t) for w, (v, t) in last.items()}
    return g


def build_level(g: SynapseMatrix, prev: Optional[Level], eps: float) -> Level:
    """Threshold ``g`` at ``eps``: the new level holds exactly the grams with ``g > eps``."""
    expected = 1 if prev is None else prev.n
    if g.n != expected + 1:
        raise HierarchyOrderError(f"synapse matrix for level {g.n} does not sit above level {expected}")
    grams, weights = [], []
    for gram, v in g.entries().items():
        if v > eps:
            grams.append(gram)
            weights.append(v)
    return Level(g.n, grams, weights, g.alphabet)


def enforce_smoothness(h: Hierarchy, n: int) -> Hierarchy:
    """Drop grams at level ``n`` (and above) whose (n-1)-prefix or suffix is unlearned.

    Idempotent.  Levels above ``n`` are re-filtered so the DAG property holds
    throughout, and levels after the first empty one are discarded.
    """
    if not h.has_level(n):
        raise HierarchyOrderError(f"level {n} has not been built")
    levels = list(h.levels[: n - 2])
    learned = Hierarchy(h.alphabet, levels, frozen=False, validate=False)
    for lvl in h.levels[n - 2 :]:
        if lvl.n == 2:
            kept = list(zip(lvl.grams, lvl.weights))
        else:
            kept = [
                (g, w)
                for g, w in zip(lvl.grams, lvl.weights)
                if learned.is_learned(g[:-1]) and learned.is_learned(g[1:])
            ]
        new = lvl if len(kept) == lvl.d else Level(lvl.n, [g for g, _ in kept], [w for _, w in kept], h.alphabet)
        levels.append(new)
        learned = Hierarchy(h.alphabet, levels, frozen=False, validate=False)
        if new.d == 0:
            break
    return Hierarchy(h.alphabet, levels, frozen=h.frozen, validate=False)


def grow_from_text(text, cfg: Optional[TrainConfig] = None, alphabet=None) -> Hierarchy:
    """Grow levels ``2, 3, ...`` from a normalized stream until collapse or ``max_level``."""
    cfg = cfg or TrainConfig()
    if isinstance(text, NormalizedStream):
        stream = text
    else:
        stream = NormalizedStream(text)
    alphabet = as_alphabet(alphabet)
    alphabet.check(stream.text.replace(SEPARATOR, ""))
    h = Hierarchy(alphabet, (), frozen=False, validate=False)
    if stream.letters() == 0:
        return h.freeze()
    prev = None
    for n in range(2, cfg.max_level + 1):
        g = train_level(h, n, stream, cfg)
        lvl = build_level(g, prev, cfg.epsilon(n))
        h = h.with_level(lvl)
        smoothed = enforce_smoothness(h, n)
        if smoothed.level(n).d != lvl.d:
            raise ConsistencyError(f"level {n} admitted non-smooth grams")
        if lvl.d == 0:
            break
        prev = lvl
    return h.freeze()


def _smooth_candidates(prev: Level, alphabet: Alphabet) -> list[str]:
    """Lexicographically ordered (n)-grams whose prefix and suffix are in ``prev``."""
    tails = prev.continuations  # (n-2)-prefix -> last symbols of grams in prev
    out = []
    for p in prev.grams:
        for k, _ in sorted(tails.get(p[1:], ())):
            out.append(p + alphabet.symbols[k])
    return out


def grow_random(cfg: Optional[TrainConfig] = None, alphabet=None, overrides: Optional[Mapping[str, float]] = None) -> Hierarchy:
    """Grow a hierarchy without data by sampling synapse values uniformly in [0, 1).

    Only smoothness-admissible pairs are sampled; entries in ``overrides``
    (n-gram -> value) replace the sampled value, which lets callers force
    specific entries to zero.
    """
    cfg = cfg or TrainConfig()
    alphabet = as_alphabet(alphabet)
    overrides = dict(overrides or {})
    rng = np.random.default_rng(cfg.seed)
    h = Hierarchy(alphabet, (), frozen=False, validate=False)
    prev = None
    for n in range(2, cfg.max_level + 1):
        if n == 2:
            cand = [a + b for a in alphabet.symbols for b in alphabet.symbols]
        else:
            cand = _smooth_candidates(prev, alphabet)
        values = rng.random(len(cand))
        eps = cfg.epsilon(n)
        grams, weights = [], []
        for gram, v in zip(cand, values):
            v = overrides.get(gram, float(v))
            if v > eps:
                grams.append(gram)
                weights.append(v)
        lvl = Level(n, grams, weights, alphabet)
        h = enforce_smoothness(h.with_level(lvl), n)
        lvl = h.level(n)
        if lvl.d == 0:
            break
        prev = lvl
    return h.freeze()


# -- analytic helpers ------------------------------------------------------

def decay_closed_form(g0: float, t: float, tau_g: float, Lambda: float = 1.0) -> float:
    """Solution of ``tau_g * dg/dt + g = Lambda`` with ``g(0) = g0``."""
    if not tau_g > 0:
        raise PreconditionError("tau_g must be > 0")
    if t < 0:
        raise PreconditionError("t must be >= 0")
    return (g0 - Lambda) * math.exp(-t / tau_g) + Lambda


def learning_threshold_bound(eps: float, n_g: int) -> int:
    """Smallest occurrence count ``M`` with ``M / n_g > eps``."""
    if not 0.0 <= eps < 1.0:
        raise PreconditionError("eps must lie in [0, 1)")
    if n_g < 1:
        raise PreconditionError("n_g must be >= 1")
    m = math.floor(eps * n_g) + 1
    # guard against eps * n_g landing a hair off an integer
    while m > 1 and (m - 1) / n_g > eps:
        m -= 1
    while m / n_g <= eps:
        m += 1
    return m
