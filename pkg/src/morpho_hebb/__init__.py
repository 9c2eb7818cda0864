"""Hierarchical Hebbian n-gram learning, tokenization, replay embeddings and statistics."""

from .alphabet import LATIN, SEPARATOR, Alphabet
from .corpus import NormalizedStream, normalize_text, uniform_random_string
from .embedding import (EmbeddingRecord, EmbeddingStore, PinningField, embedding_activation, forget_and_continue,
                        key_value_next_token, recognize_word, replay_relearn)
from .compression import (CompressedChain, ProjectorChain, chain_apply, compress_chain, cost_gamma,
                          measured_cost, projector_chain, svd_decompose)
from .estimators import HebbianTokenizer, ReplayEmbedder
from .hierarchy import (Hierarchy, Level, SynapseMatrix, TrainConfig, build_level, decay_closed_form,
                        enforce_smoothness, grow_from_text, grow_random, hebbian_step, learning_threshold_bound,
                        train_level)
from .inference import (MeasureConfig, Superposition, generate_vocabulary, infer_left, infer_right, measure,
                        next_token_evidence, replay_cycle)
from .stats import (LogNormalFit, NGramHistogram, RankFrequencyTable, count_intraword_ngrams, fit_lognormal,
                    lognormal_pdf, peak_and_collapse, rank_frequency)
from .tokenizer import Segmentation, TokenRef, decode_token, find_boundaries, is_smooth, project_up, tokenize

__version__ = "0.1.0"
