"""scikit-learn style wrappers over the functional API."""

from __future__ import annotations

import math

from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import check_epsilons, check_is_fitted, check_strings, check_texts
from .alphabet import SEPARATOR, as_alphabet
from .corpus import NormalizedStream
from .embedding import DEFAULT_XI_M, EmbeddingStore, PinningField, recognize_word, replay_relearn
from .hierarchy import Hierarchy, TrainConfig, grow_from_text
from .inference import MeasureConfig, cycle_rng, generate_vocabulary, replay_cycle
from .tokenizer import tokenize


class HebbianTokenizer(TransformerMixin, BaseEstimator):
    """Learn an n-gram hierarchy from text and segment strings with it.

    Parameters
    ----------
    epsilons : float or sequence of float, default=0.0
        Level cutoffs ``eps_2, eps_3, ...``.
    n_g : float, default=inf
        Forgetting horizon.  ``inf`` accumulates frequencies.
    max_level : int, default=32
    alphabet : str, optional
        Basis symbols (default: a-z).

    Attributes
    ----------
    hierarchy_ : Hierarchy
    """

    def __init__(self, epsilons=0.0, n_g=math.inf, max_level=32, alphabet=None):
        self.epsilons = epsilons
        self.n_g = n_g
        self.max_level = max_level
        self.alphabet = alphabet

    def fit(self, X, y=None):
        streams = check_texts(X, self.alphabet)
        text = SEPARATOR.join(s.text for s in streams)
        cfg = TrainConfig(n_g=self.n_g, epsilons=check_epsilons(self.epsilons), max_level=self.max_level)
        self.hierarchy_ = grow_from_text(NormalizedStream(text), cfg, as_alphabet(self.alphabet))
        return self

    def segment(self, X):
        """All segmentations per word of each input text."""
        check_is_fitted(self, "hierarchy_")
        out = []
        for stream in check_texts(X, self.alphabet):
            out.append([tokenize(self.hierarchy_, w) for w in stream.words()])
        return out

    def transform(self, X):
        """First (leftmost-longest) segmentation of each text as a token list."""
        out = []
        for per_word in self.segment(X):
            toks = []
            for segs in per_word:
                toks.extend(segs[0].expansions())
            out.append(toks)
        return out

    def sample_words(self, n_words, beta=1.0, seed=0, mode="sample"):
        check_is_fitted(self, "hierarchy_")
        return generate_vocabulary(self.hierarchy_, n_words, MeasureConfig(beta, seed, mode))


class ReplayEmbedder(BaseEstimator):
    """Learn word embeddings by replaying a hierarchy, then recognize fragments.

    ``fit`` runs ``n_cycles`` replay cycles, pinning one embedding per distinct
    word; ``predict`` returns the best-ranked word for each fragment (or
    ``None`` when nothing is recognized).
    """

    def __init__(self, n_cycles=200, xi_m=DEFAULT_XI_M, beta=1.0, seed=0):
        self.n_cycles = n_cycles
        self.xi_m = xi_m
        self.beta = beta
        self.seed = seed

    def fit(self, X, y=None):
        h = X.hierarchy_ if isinstance(X, HebbianTokenizer) else X
        if not isinstance(h, Hierarchy):
            raise TypeError("ReplayEmbedder.fit expects a Hierarchy or a fitted HebbianTokenizer")
        cfg = MeasureConfig(self.beta, self.seed)
        store = EmbeddingStore()
        for i in range(self.n_cycles):
            rep = replay_cycle(h, cfg, cycle_rng(self.seed, i))[0]
            alpha = store.allocate(rep.word)
            replay_relearn(store, h, rep.tokens, PinningField(alpha), self.xi_m)
        self.hierarchy_ = h
        self.store_ = store
        return self

    def rank(self, fragment):
        check_is_fitted(self, "store_")
        return [(self.store_.get(a).word, act) for a, act in recognize_word(self.store_, self.hierarchy_, fragment)]

    def predict(self, X):
        check_is_fitted(self, "store_")
        out = []
        for frag in check_strings(X, self.hierarchy_.alphabet):
            ranked = self.rank(frag)
            out.append(ranked[0][0] if ranked else None)
        return out
