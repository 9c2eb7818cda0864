"""Smoothness tests, segmentation into maximal smooth tokens, and token decoding."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .exceptions import ConsistencyError, PreconditionError
from .hierarchy import Hierarchy


@dataclass(frozen=True)
class TokenRef:
    """A learned gram: level ``n``, index ``mu`` within that level, and its letters.

    Equality and hashing use ``(n, expansion)`` only, so refs built against
    different hierarchies compare equal when they name the same gram.
    """

    n: int
    mu: Optional[int] = field(compare=False)
    expansion: str

    def __str__(self):
        return self.expansion


@dataclass(frozen=True)
class Segmentation:
    tokens: tuple
    boundaries: tuple
    unique: bool = True

    def expansions(self) -> list[str]:
        return [t.expansion for t in self.tokens]

    def render(self, sep: str = "|") -> str:
        return sep.join(self.expansions())


def _check(h: Hierarchy, s: str) -> str:
    if not isinstance(s, str) or not s:
        raise PreconditionError("expected a nonempty string")
    return h.alphabet.check(s)


def is_smooth(h: Hierarchy, s: str) -> bool:
    """True iff ``s`` is a learned gram (single letters are always smooth).

    Because every level is a smooth DAG this is the same as every length-m
    window of ``s`` being learned for all ``2 <= m <= len(s)``.
    """
    _check(h, s)
    return h.is_learned(s)


def project_up(h: Hierarchy, s: str) -> Optional[TokenRef]:
    """Right-first bracketing ``P_n(... P_3(P_2(s0 s1) s2) ... )``."""
    _check(h, s)
    a = h.alphabet
    mu = a.index(s[0])
    for n in range(2, len(s) + 1):
        mu = h.project(mu, a.index(s[n - 1]), n)
        if mu is None:
            return None
    return TokenRef(len(s), mu, s)


def project_left(h: Hierarchy, s: str) -> Optional[TokenRef]:
    """Left-first bracketing ``P_n(s0 P_{n-1}(... P_2(s_{L-2} s_{L-1})))``."""
    _check(h, s)
    a = h.alphabet
    L = len(s)
    mu = a.index(s[-1])
    for n in range(2, L + 1):
        mu = h.project_left(a.index(s[L - n]), mu, n)
        if mu is None:
            return None
    return TokenRef(L, mu, s)


def token(h: Hierarchy, s: str) -> TokenRef:
    """TokenRef for a gram known to be smooth."""
    if len(s) == 1:
        return TokenRef(1, h.alphabet.index(s), s)
    mu = h.index(s)
    if mu is None:
        raise ConsistencyError(f"{s!r} is not a learned gram")
    return TokenRef(len(s), mu, s)


def decode_token(h: Hierarchy, t: TokenRef) -> list[str]:
    """Letters of ``t`` obtained by peeling one suffix symbol per level."""
    if t.n == 1:
        return [h.alphabet.symbol(t.mu)]
    if not h.has_level(t.n) or t.mu is None or not 0 <= t.mu < h.level(t.n).d:
        raise ConsistencyError(f"stale token {t!r}")
    if h.level(t.n).grams[t.mu] != t.expansion:
        raise ConsistencyError(f"token index {t.mu} at level {t.n} no longer names {t.expansion!r}")
    out = []
    mu, n = t.mu, t.n
    while n >= 2:
        mu, k = h.unproject(mu, n)
        out.append(h.alphabet.symbol(k))
        n -= 1
    out.append(h.alphabet.symbol(mu))
    return out[::-1]


# -- segmentation ---------------------------------------------------------

def _runs(h: Hierarchy, s: str) -> list[int]:
    # R[i]: length of the longest smooth substring starting at i.  Smoothness is
    # prefix-closed, so s[i:j] is smooth iff j - i <= R[i].
    R = []
    for i in range(len(s)):
        L = 1
        while i + L < len(s) and h.is_learned(s[i : i + L + 1]):
            L += 1
        R.append(L)
    return R


class _Segmenter:
    """Search over partitions of ``s`` into smooth tokens with admissible cuts.

    A cut between tokens ``s[a:b]`` and ``s[b:c]`` is admissible unless both
    tokens could absorb the neighbouring symbol across the cut and stay
    smooth, i.e. unless ``s[a:b+1]`` and ``s[b-1:c]`` are both learned.
    """

    def __init__(self, h: Hierarchy, s: str):
        self.h = h
        self.s = s
        self.R = _runs(h, s)
        self.L = len(s)
        self._done = lru_cache(maxsize=None)(self._completable)

    def smooth(self, a, b):
        return b - a <= self.R[a]

    def cut_ok(self, a, b, c):
        if a is None:
            return True
        right_ext = self.smooth(a, b + 1)
        left_ext = self.smooth(b - 1, c)
        return not (right_ext and left_ext)

    def nexts(self, a, b):
        # candidate ends c for the token starting at b, longest first
        for c in range(min(self.L, b + self.R[b]), b, -1):
            if self.cut_ok(a, b, c):
                yield c

    def _completable(self, a, b) -> bool:
        if b == self.L:
            return True
        return any(self._done(b, c) for c in self.nexts(a, b))

    def enumerate(self, limit=None):
        out = []
        path = [0]

        def rec(a, b):
            if limit is not None and len(out) >= limit:
                return
            if b == self.L:
                out.append(tuple(path))
                return
            for c in self.nexts(a, b):
                if self._done(b, c):
                    path.append(c)
                    rec(b, c)
                    path.pop()

        rec(None, 0)
        return out

    def used_tokens(self) -> set:
        """Tokens ``(b, c)`` appearing in at least one complete segmentation."""
        used = set()
        frontier = {(None, 0)}
        seen = set(frontier)
        while frontier:
            nxt = set()
            for a, b in frontier:
                if b == self.L:
                    continue
                for c in self.nexts(a, b):
                    if self._done(b, c):
                        used.add((b, c))
                        if (b, c) not in seen:
                            seen.add((b, c))
                            nxt.add((b, c))
            frontier = nxt
        return used


def tokenize(h: Hierarchy, s: str, limit: Optional[int] = None) -> list[Segmentation]:
    """All segmentations of ``s`` into maximal smooth tokens, leftmost-longest first.

    Parameters
    ----------
    h : Hierarchy
    s : str
        String over the hierarchy's alphabet (no separators).
    limit : int, optional
        Stop after this many segmentations.  ``unique`` is still exact.

    Returns
    -------
    list of Segmentation
        Each segmentation covers ``s`` exactly.  A cut is kept only where at
        least one of the two adjacent tokens cannot grow across it and remain
        smooth, so every token is grown until its boundary is reached.
    """
    _check(h, s)
    seg = _Segmenter(h, s)
    cut_lists = seg.enumerate(limit=None if limit is None else max(limit, 2))
    unique = len(cut_lists) == 1
    if limit is not None:
        cut_lists = cut_lists[:limit]
    out = []
    for cuts in cut_lists:
        toks = tuple(token(h, s[a:b]) for a, b in zip(cuts, cuts[1:]))
        out.append(Segmentation(toks, tuple(cuts[1:-1]), unique))
    return out


def find_boundaries(h: Hierarchy, s: str) -> list[int]:
    """Cut positions shared by every segmentation of ``s``."""
    _check(h, s)
    seg = _Segmenter(h, s)
    covered = [False] * (len(s) + 1)
    for b, c in seg.used_tokens():
        for p in range(b + 1, c):
            covered[p] = True
    return [p for p in range(1, len(s)) if not covered[p]]


def is_valid_segmentation(h: Hierarchy, s: str, cuts) -> bool:
    """Check a cut list (interior positions) against the segmentation rule directly."""
    edges = [0, *cuts, len(s)]
    pieces = [s[a:b] for a, b in zip(edges, edges[1:])]
    if any(not p or not h.is_learned(p) for p in pieces):
        return False
    for (a, b), c in zip(zip(edges, edges[1:]), edges[2:]):
        if h.is_learned(s[a : b + 1]) and h.is_learned(s[b - 1 : c]):
            return False
    return True
