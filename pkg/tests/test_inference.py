import math

import numpy as np
import pytest

from morpho_hebb.alphabet import LATIN, Alphabet
from morpho_hebb.corpus import normalize_text
from morpho_hebb.exceptions import ConsistencyError, PreconditionError
from morpho_hebb.hierarchy import Hierarchy, TrainConfig, grow_from_text, grow_random
from morpho_hebb.inference import (MeasureConfig, Superposition, generate_vocabulary, infer_left, infer_right,
                                   initial_symbols, measure, next_token_evidence, previous_token_evidence,
                                   replay_cycle)
from morpho_hebb.tokenizer import is_smooth

from oracles import maximal_smooth_oracle

ARGMAX = MeasureConfig(mode="argmax")


def sup(values):
    ev = np.zeros(26)
    ev[: len(values)] = values
    return Superposition(ev, LATIN)


class TestEvidence:
    def test_ru(self, run_h):
        ev = next_token_evidence(run_h, "ru")
        expected = run_h.weight("un") + run_h.weight("run")
        assert ev.nonzero() == {"n": pytest.approx(expected)}

    def test_ra_vs_ru(self, run_h):
        ra = next_token_evidence(run_h, "ra").nonzero()
        assert ra == {"n": pytest.approx(run_h.weight("an") + run_h.weight("ran"))}
        ru = next_token_evidence(run_h, "ru").nonzero()
        assert ra["n"] != ru["n"]

    def test_no_continuation(self, run_h):
        assert next_token_evidence(run_h, "x").total == 0

    def test_empty_context(self, run_h):
        with pytest.raises(PreconditionError):
            next_token_evidence(run_h, "")

    def test_beta_scaling(self, run_h):
        e1 = next_token_evidence(run_h, "ru", MeasureConfig(beta=1)).evidence
        e2 = next_token_evidence(run_h, "ru", MeasureConfig(beta=2)).evidence
        k = LATIN.index("n")
        assert e2[k] == pytest.approx(4 * run_h.weight("un") + 8 * run_h.weight("run"))
        assert e1[k] < e2[k]

    def test_left_evidence(self, run_h):
        ev = previous_token_evidence(run_h, "ey").nonzero()
        assert set(ev) == {"h"}


class TestMeasure:
    def test_normalization(self):
        rho = sup([0.2, 0.6]).probabilities()
        assert rho[0] == pytest.approx(0.25) and rho[1] == pytest.approx(0.75)
        assert math.fsum(rho) == 1.0

    def test_single(self):
        assert measure(sup([0, 0, 3.0]), MeasureConfig(seed=4)) == "c"

    def test_halt(self):
        assert measure(sup([])) is None

    def test_negative(self):
        with pytest.raises(ConsistencyError):
            measure(sup([0.1, -0.2]))

    def test_argmax_tie_smallest(self):
        assert measure(sup([0, 1, 1]), ARGMAX) == "b"

    def test_seeded_sampling(self):
        s = sup([1, 1, 1, 1])
        a = [measure(s, None, np.random.default_rng(3)) for _ in range(5)]
        b = [measure(s, None, np.random.default_rng(3)) for _ in range(5)]
        assert a == b

    def test_config_validation(self):
        with pytest.raises(PreconditionError):
            MeasureConfig(beta=0.5)
        with pytest.raises(PreconditionError):
            MeasureConfig(mode="greedy")


class TestInferLeft:
    def test_ey_to_they(self, run_h):
        assert infer_left(run_h, "ey", ARGMAX) == "they"

    def test_run_at_boundary(self, run_h):
        assert infer_left(run_h, "run", ARGMAX) == "run"

    def test_letter_without_left_bigram(self, run_h):
        assert infer_left(run_h, "t", ARGMAX) == "t"

    def test_right(self, run_h):
        assert infer_right(run_h, "th", ARGMAX) == "they"


class TestReplay:
    def test_aba(self, aba_h):
        for seed in range(20):
            (rep,) = replay_cycle(aba_h, MeasureConfig(seed=seed))
            assert rep.word == "aba"
            assert {t.expansion for t in rep.tokens} == {"a", "b", "ab", "ba", "aba"}

    def test_start_h_argmax(self, run_h):
        rng = np.random.default_rng(0)
        words = {replay_cycle(run_h, ARGMAX, rng)[0].word for _ in range(50)}
        assert words <= {"they", "runs", "ran"}
        assert not any("runh" in w for w in words)

    def test_empty_hierarchy(self):
        (rep,) = replay_cycle(Hierarchy(LATIN), MeasureConfig(seed=1))
        assert len(rep.word) == 1

    def test_repeats_share_left_boundary(self, run_h):
        reps = replay_cycle(run_h, MeasureConfig(seed=2), repeats=4)
        assert len(reps) == 4
        assert len({r.word[0] for r in reps}) == 1

    def test_initial_symbols(self, run_h):
        assert set(initial_symbols(run_h)) == set("runhetya s".replace(" ", ""))


class TestVocabulary:
    def test_aba(self, aba_h):
        assert set(generate_vocabulary(aba_h, 30, MeasureConfig(seed=0))) == {"aba"}

    def test_deterministic_and_parallel(self, run_h):
        cfg = MeasureConfig(seed=11)
        a = generate_vocabulary(run_h, 200, cfg)
        assert a == generate_vocabulary(run_h, 200, cfg)
        assert a == generate_vocabulary(run_h, 200, cfg, workers=4)

    def test_rejects_zero(self, run_h):
        with pytest.raises(PreconditionError):
            generate_vocabulary(run_h, 0)

    def test_reachable_equals_oracle(self, run_h, d4_h):
        for h in (run_h, d4_h):
            learned = set(h.all_grams())
            symbols = sorted(set("".join(learned)))
            ref = maximal_smooth_oracle(learned, symbols, h.top + 1)
            got = set(generate_vocabulary(h, 3000, MeasureConfig(seed=5)))
            assert got == ref

    def test_random_language_size(self):
        h = grow_random(TrainConfig(epsilons=(0.7, 0.85, 0.45), max_level=12, seed=0))
        words = generate_vocabulary(h, 2000, MeasureConfig(seed=0))
        assert 100 <= len(set(words)) <= 1000
        for w in set(words):
            assert is_smooth(h, w)
            assert not any(is_smooth(h, w + c) or is_smooth(h, c + w) for c in LATIN)
