import math

import numpy as np
import pytest

from morpho_hebb.alphabet import LATIN, Alphabet
from morpho_hebb.corpus import normalize_text, prefix_letters, split_batches
from morpho_hebb.exceptions import ConsistencyError, HierarchyOrderError, PreconditionError
from morpho_hebb.hierarchy import (Hierarchy, Level, SynapseMatrix, TrainConfig, build_level, decay_closed_form,
                                   enforce_smoothness, grow_from_text, grow_random, hebbian_step,
                                   learning_threshold_bound, train_level)

from oracles import ema_scalar, smooth_set, unique_intraword, words_of

AB = Alphabet.from_string("ab")


def _windows(text, n):
    return [text[i : i + n] for i in range(len(text) - n + 1)]


class TestHebbianStep:
    def test_abab_stream(self):
        g = SynapseMatrix(2, LATIN, 0.1)
        for w in _windows("abab", 2):
            g = hebbian_step(g, (w[0], w[1]), True)
        assert g.value("ab") == pytest.approx(0.181, abs=1e-15)
        assert g.value("ba") == pytest.approx(0.09, abs=1e-15)
        # independent scalar EMA
        assert g.value("ab") == pytest.approx(ema_scalar([1, 0, 1], 0.1), rel=1e-12)

    def test_pure_decay(self):
        g = SynapseMatrix(2, LATIN, 0.1, {"ab": 0.5})
        g = hebbian_step(g, ("a", "b"), False)
        assert g.value("ab") == pytest.approx(0.45)

    def test_constant_pinning_approaches_one(self):
        g = SynapseMatrix(2, LATIN, 0.1)
        for _ in range(400):
            g = hebbian_step(g, ("a", "b"), True)
        assert g.value("ab") == pytest.approx(1.0, abs=1e-12)
        assert g.value("ab") <= 1.0

    def test_bad_index(self):
        g = SynapseMatrix(2, LATIN, 0.1)
        with pytest.raises(IndexError):
            hebbian_step(g, ("a", "B"), True)
        with pytest.raises(IndexError):
            hebbian_step(g, ("ab", "c"), True)

    def test_accumulation_mode(self):
        g = SynapseMatrix(2, LATIN, None)
        for w in ["ab", "ba", "ab", "zz"]:
            g = hebbian_step(g, (w[0], w[1]), w != "zz")
        assert g.value("ab") == 0.5
        assert g.value("ba") == 0.25


class TestTrainLevel:
    def test_abba_rejects_nonsmooth(self):
        h = Hierarchy.from_grams(["ab", "ba"], AB)
        g = train_level(h, 3, normalize_text("abba", AB), TrainConfig())
        assert g.entries() == {}

    def test_aba_single_entry(self):
        h = Hierarchy.from_grams(["ab", "ba"], AB)
        g = train_level(h, 3, normalize_text("aba", AB), TrainConfig())
        assert set(g.entries()) == {"aba"}
        assert g.value("aba") > 0

    def test_empty_stream(self):
        h = Hierarchy(LATIN)
        g = train_level(h, 2, normalize_text(""), TrainConfig())
        assert g.entries() == {}

    def test_missing_level(self):
        with pytest.raises(HierarchyOrderError):
            train_level(Hierarchy(LATIN), 3, normalize_text("abc"), TrainConfig())

    def test_matches_iterated_step(self):
        text = "abab ab bba abab"
        cfg = TrainConfig(n_g=10)
        g = train_level(Hierarchy(AB), 2, normalize_text(text, AB), cfg)
        ref = SynapseMatrix(2, AB, 0.1)
        for w in _windows(text, 2):
            ref = hebbian_step(ref, (w[0], w[1]) if " " not in w else None, " " not in w)
        for gram in ["ab", "ba", "bb", "aa"]:
            assert g.value(gram) == pytest.approx(ref.value(gram), rel=1e-12, abs=1e-15)


class TestBuildLevel:
    def test_threshold(self):
        g = SynapseMatrix(2, AB, 0.1, {"ab": 0.3, "ba": 0.2, "bb": 0.1})
        lvl = build_level(g, None, 0.15)
        assert lvl.grams == ("ab", "ba")
        assert lvl.d == 2
        assert lvl.weights == (0.3, 0.2)

    def test_collapse(self):
        g = SynapseMatrix(2, AB, 0.1, {"ab": 0.1})
        assert build_level(g, None, 0.5).d == 0

    def test_lexicographic_by_alphabet_order(self):
        ba = Alphabet.from_string("ba")
        g = SynapseMatrix(2, ba, 0.1, {"ab": 0.3, "ba": 0.3, "bb": 0.3})
        assert build_level(g, None, 0.0).grams == ("bb", "ba", "ab")


class TestSmoothness:
    def test_remove_abb(self):
        raw = Hierarchy(AB, [Level(2, ["ab", "ba"], [1, 1], AB), Level(3, ["aba", "abb"], [1, 1], AB)], validate=False)
        fixed = enforce_smoothness(raw, 3)
        assert fixed.level(3).grams == ("aba",)
        assert enforce_smoothness(fixed, 3) == fixed

    def test_exhaustive_d2(self):
        import itertools

        tri = ["".join(t) for t in itertools.product("ab", repeat=3)]
        rng = np.random.default_rng(0)
        for _ in range(20):
            pick = [t for t in tri if rng.random() < 0.5]
            raw = Hierarchy(AB, [Level(2, ["ab", "ba"], [1, 1], AB), Level(3, pick, [1] * len(pick), AB)], validate=False)
            assert set(enforce_smoothness(raw, 3).level(3).grams) <= {"aba", "bab"}

    def test_dag_check_rejects(self):
        with pytest.raises(ConsistencyError):
            Hierarchy(AB, [Level(2, ["ab"], [1], AB), Level(3, ["abb"], [1], AB)])

    def test_noncontiguous_levels(self):
        with pytest.raises(HierarchyOrderError):
            Hierarchy(AB, [Level(3, ["aba"], [1], AB)])


class TestGrowFromText:
    def test_run_sentence(self, run_h):
        learned = set(run_h.all_grams())
        listed = {"ru", "un", "ra", "an", "th", "he", "ey", "run", "ran", "the", "hey", "they"}
        assert listed <= learned
        assert "ns" in learned
        assert learned == smooth_set(words_of("I run, he runs, they ran."))
        assert run_h.collapsed

    def test_empty_text(self):
        h = grow_from_text(normalize_text("...!"))
        assert h.levels == ()

    def test_repeated_letter_chain(self):
        h = grow_from_text(normalize_text("a" * 40), TrainConfig(max_level=12))
        assert [lvl.grams for lvl in h.levels] == [("a" * n,) for n in range(2, 13)]
        assert not h.collapsed

    def test_alice_prefix_oracle(self, alice_stream):
        s = prefix_letters(alice_stream, 22762)
        h = grow_from_text(s)
        ref = unique_intraword(s.words())
        assert sum(h.sizes.values()) == sum(len(v) for n, v in ref.items() if n >= 2)
        for lvl in h.levels:
            assert set(lvl.grams) == ref.get(lvl.n, set())

    def test_batch_union(self, alice_stream):
        s = prefix_letters(alice_stream, 5000)
        full = set(grow_from_text(s).all_grams())
        union = set()
        for b in split_batches(s, 7):
            union |= set(grow_from_text(b).all_grams())
        assert union == full

    def test_epsilon_filters(self):
        text = normalize_text("ab ab ab ab cd")
        h = grow_from_text(text, TrainConfig(epsilons=(0.2,)))
        assert h.level(2).grams == ("ab",)

    def test_serialization_deterministic(self, run_h):
        doc = run_h.to_document()
        assert Hierarchy.from_document(doc) == run_h
        assert grow_from_text(normalize_text("I run, he runs, they ran.")).to_document() == doc


class TestGrowRandom:
    def test_d2_exponential(self):
        h = grow_random(TrainConfig(max_level=8, seed=3), AB)
        assert h.sizes == {n: 2**n for n in range(2, 9)}

    def test_forced_collapse(self):
        h = grow_random(TrainConfig(max_level=8, seed=1), AB, overrides={"aa": 0.0, "bb": 0.0, "aba": 0.0})
        assert h.level(2).grams == ("ab", "ba")
        assert h.level(3).grams == ("bab",)
        assert h.level(4).d == 0
        assert h.top == 3

    def test_reference_schedule_finite_and_deterministic(self):
        cfg = TrainConfig(epsilons=(0.7, 0.85, 0.45), max_level=12, seed=5)
        a, b = grow_random(cfg), grow_random(cfg)
        assert a.to_document() == b.to_document()
        assert 50 < a.level(2).d < 300
        n_peak = max(a.sizes, key=lambda n: (a.sizes[n], -n))
        assert n_peak <= 4

    def test_dag(self):
        h = grow_random(TrainConfig(epsilons=(0.5, 0.5, 0.5), max_level=6, seed=2), Alphabet.from_string("abcd"))
        h.check_dag()


class TestAnalytic:
    def test_fixed_point(self):
        assert decay_closed_form(0.0, 1e4, 1.0, 1.0) == pytest.approx(1.0)

    def test_one_time_constant(self):
        assert decay_closed_form(1.0, 2.5, 2.5, 0.0) == pytest.approx(math.exp(-1))

    def test_domain(self):
        with pytest.raises(PreconditionError):
            decay_closed_form(0, 1, 0)

    @pytest.mark.parametrize("eps,n_g,M", [(0.5, 10, 6), (0.0, 7, 1), (0.85, 100, 86), (0.3, 10, 4)])
    def test_threshold_bound(self, eps, n_g, M):
        assert learning_threshold_bound(eps, n_g) == M

    def test_threshold_bound_by_simulation(self):
        # accumulate N_g windows with M evenly spaced occurrences
        for eps, n_g in [(0.5, 10), (0.85, 100), (0.3, 17)]:
            M = learning_threshold_bound(eps, n_g)
            for count, learned in [(M, True), (M - 1, False)]:
                g = SynapseMatrix(2, AB, None)
                hits = set(np.linspace(0, n_g - 1, count).round().astype(int)) if count else set()
                for t in range(n_g):
                    g = hebbian_step(g, ("a", "b"), t in hits)
                assert (g.value("ab") > eps) is learned


class TestConfig:
    def test_defaults(self):
        cfg = TrainConfig()
        assert cfg.xi is None and cfg.epsilon(9) == 0.0

    def test_xi_from_ng(self):
        assert TrainConfig(n_g=20).xi == 0.05

    def test_mismatch(self):
        with pytest.raises(PreconditionError):
            TrainConfig(n_g=10, xi_g=0.5)

    def test_max_level(self):
        with pytest.raises(PreconditionError):
            TrainConfig(max_level=1)
