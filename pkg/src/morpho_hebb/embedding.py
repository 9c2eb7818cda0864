"""Auxiliary word neurons learned by replay, and key-value recognition."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .exceptions import AllocationError, ConsistencyError, PreconditionError
from .hierarchy import Hierarchy
from .inference import Superposition

STORE_VERSION = 1
LAMBDA_A = 1.0
DEFAULT_XI_M = 0.25


def _clip(x: float) -> float:
    return min(max(x, 0.0), LAMBDA_A)


def _expansion(t) -> str:
    return t if isinstance(t, str) else t.expansion


@dataclass
class EmbeddingRecord:
    """One auxiliary neuron.

    ``m`` maps gram strings to synapse weights; the gram length is its level.
    Keeping strings (not level indices) lets the record outlive the hierarchy
    it was learned from.
    """

    alpha: int
    word: Optional[str] = None
    m: dict = field(default_factory=dict)
    compressed: object = None

    def weight(self, gram: str) -> float:
        return self.m.get(gram, 0.0)

    def top_grams(self) -> list[str]:
        if not self.m:
            return []
        top = max(len(g) for g in self.m)
        return [g for g in self.m if len(g) == top]

    def to_document(self) -> dict:
        doc = {
            "alpha": self.alpha,
            "word": self.word,
            "m": [{"n": len(g), "gram": g, "w": w} for g, w in sorted(self.m.items(), key=lambda p: (len(p[0]), p[0]))],
        }
        if self.compressed is not None:
            doc["compressed"] = self.compressed.to_document()
        return doc

    @classmethod
    def from_document(cls, doc) -> "EmbeddingRecord":
        m = {}
        for entry in doc["m"]:
            if len(entry["gram"]) != entry["n"]:
                raise ConsistencyError(f"embedding {doc['alpha']}: gram {entry['gram']!r} is not of length {entry['n']}")
            m[entry["gram"]] = float(entry["w"])
        comp = doc.get("compressed")
        if comp is not None:
            from .compression import CompressedChain

            comp = CompressedChain.from_document(comp)
        return cls(int(doc["alpha"]), doc.get("word"), m, comp)


@dataclass(frozen=True)
class PinningField:
    """External drive holding ``pinned_alpha`` active during a replay cycle."""

    pinned_alpha: int
    magnitude: float = 1e3

    def __post_init__(self):
        if not self.magnitude > LAMBDA_A:
            raise PreconditionError("pinning magnitude must exceed the activation bound 1")


class EmbeddingStore:
    """Mapping ``alpha -> EmbeddingRecord`` with word-deduplicated allocation."""

    def __init__(self, records: Iterable[EmbeddingRecord] = ()):
        self.records: dict[int, EmbeddingRecord] = {}
        for r in records:
            self.records[r.alpha] = r

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records[a] for a in sorted(self.records))

    def __contains__(self, alpha):
        return alpha in self.records

    def __eq__(self, other):
        return isinstance(other, EmbeddingStore) and self.to_document() == other.to_document()

    def get(self, alpha: int) -> EmbeddingRecord:
        try:
            return self.records[alpha]
        except KeyError:
            raise AllocationError(f"embedding {alpha} has not been allocated") from None

    def allocate(self, word: Optional[str] = None) -> int:
        """Fresh id, or the existing id already bound to ``word``."""
        if word is not None:
            found = self.find(word)
            if found is not None:
                return found
        alpha = max(self.records, default=-1) + 1
        self.records[alpha] = EmbeddingRecord(alpha, word)
        return alpha

    def find(self, word: str) -> Optional[int]:
        for r in self:
            if r.word == word:
                return r.alpha
        return None

    def words(self) -> dict[int, Optional[str]]:
        return {r.alpha: r.word for r in self}

    def copy(self) -> "EmbeddingStore":
        return EmbeddingStore(EmbeddingRecord(r.alpha, r.word, dict(r.m), r.compressed) for r in self)

    def to_document(self) -> dict:
        return {"version": STORE_VERSION, "embeddings": [r.to_document() for r in self]}

    @classmethod
    def from_document(cls, doc) -> "EmbeddingStore":
        return cls(EmbeddingRecord.from_document(e) for e in doc["embeddings"])


def replay_relearn(store: EmbeddingStore, h: Hierarchy, cycle_output, pin: Optional[PinningField], xi_m: float = DEFAULT_XI_M) -> EmbeddingStore:
    """Imprint the grams of one replayed word into the store (in place).

    With a pinning field the pinned neuron sits at ``a = 1`` and is the only
    one that learns.  Without pinning every neuron's activation follows the
    clipped drive of the replayed grams, so an empty store stays empty.
    Imprints are ``xi_m * a`` per gram of order >= 2, with weights clipped to 1.
    """
    if not 0.0 < xi_m <= 1.0:
        raise PreconditionError("xi_m must lie in (0, 1]")
    grams = [_expansion(t) for t in cycle_output]
    grams = [g for g in grams if len(g) >= 2]
    for g in grams:
        h.alphabet.check(g)
    word = max(grams, key=len) if grams else None

    if pin is not None:
        rec = store.get(pin.pinned_alpha)
        targets = [(rec, LAMBDA_A)]
    else:
        targets = [(r, embedding_activation_one(r, grams)) for r in store]

    for rec, a in targets:
        if a <= 0.0:
            continue
        for g in grams:
            rec.m[g] = min(LAMBDA_A, rec.m.get(g, 0.0) + xi_m * a)
        if pin is not None and word is not None and (rec.word is None or len(word) > len(rec.word)):
            rec.word = word
    return store


def embedding_activation_one(rec: EmbeddingRecord, grams) -> float:
    return _clip(sum(rec.m.get(_expansion(g), 0.0) for g in grams))


def embedding_drive(store: EmbeddingStore, ctx_grams) -> dict[int, float]:
    """Unclipped ``sum m * v`` per embedding."""
    grams = [_expansion(g) for g in ctx_grams]
    return {r.alpha: float(sum(r.m.get(g, 0.0) for g in grams)) for r in store}


def embedding_activation(store: EmbeddingStore, h: Optional[Hierarchy], ctx_grams) -> dict[int, float]:
    """Equilibrium activation ``a_alpha = clip(sum over ctx grams of m_alpha)``."""
    return {a: _clip(v) for a, v in embedding_drive(store, ctx_grams).items()}


def _suffixes(ctx: str, min_len: int = 2):
    for n in range(min_len, len(ctx) + 1):
        yield ctx[len(ctx) - n :]


def key_value_next_token(store: EmbeddingStore, h: Hierarchy, ctx) -> Superposition:
    """Next-symbol evidence routed through the embeddings.

    The key is the activation from the context's trailing grams (orders
    >= 2); the value is the embedding's stored weight for each continuation
    ``suffix + k`` at every order.  Embeddings add independently.
    """
    ctx = h.alphabet.check("".join(ctx))
    if not ctx:
        raise PreconditionError("context must be nonempty")
    keys = list(_suffixes(ctx))
    sym = h.alphabet.symbols
    ev = np.zeros(h.alphabet.d)
    for rec in store:
        a = embedding_activation_one(rec, keys)
        if a == 0.0:
            continue
        val = np.zeros(h.alphabet.d)
        for suffix in _suffixes(ctx, 1):
            for k in range(h.alphabet.d):
                w = rec.m.get(suffix + sym[k])
                if w:
                    val[k] += w
        ev += a * val
    return Superposition(ev, h.alphabet)


def fragment_grams(fragment: str) -> list[str]:
    """Distinct substrings of length >= 2."""
    out, seen = [], set()
    for n in range(2, len(fragment) + 1):
        for i in range(len(fragment) - n + 1):
            g = fragment[i : i + n]
            if g not in seen:
                seen.add(g)
                out.append(g)
    return out


def recognize_word(store: EmbeddingStore, h: Hierarchy, fragment: str) -> list[tuple[int, float]]:
    """Embeddings triggered by a fragment, strongest first.

    Ranking is by activation, then by unclipped drive (so saturated
    activations still prefer the better match), then by id.  Embeddings with
    zero activation are omitted.
    """
    if not fragment:
        raise PreconditionError("fragment must be nonempty")
    h.alphabet.check(fragment)
    grams = fragment_grams(fragment)
    drive = embedding_drive(store, grams)
    ranked = [(a, _clip(v), v) for a, v in drive.items() if _clip(v) > 0]
    ranked.sort(key=lambda t: (-t[1], -t[2], t[0]))
    return [(a, act) for a, act, _ in ranked]


def learn_words(store: EmbeddingStore, h: Hierarchy, words: Iterable[str], xi_m: float = DEFAULT_XI_M, cycles: int = 1) -> EmbeddingStore:
    """Pin one embedding per word and replay it ``cycles`` times."""
    from .inference import word_tokens

    for w in words:
        alpha = store.allocate(w)
        toks = word_tokens(h, w)
        for _ in range(cycles):
            replay_relearn(store, h, toks, PinningField(alpha), xi_m)
    return store


def forget_and_continue(store: EmbeddingStore, h: Hierarchy, retain) -> tuple[EmbeddingStore, Hierarchy]:
    """Keep only the ``retain`` embeddings and reset the hierarchy for new training."""
    retain = set(retain)
    kept = []
    for alpha in sorted(retain):
        rec = store.get(alpha)
        if not rec.word or not rec.m:
            raise ConsistencyError(f"embedding {alpha} has no stored expansion and would not survive forgetting")
        kept.append(rec)
    return EmbeddingStore(kept), Hierarchy(h.alphabet, (), frozen=True)
