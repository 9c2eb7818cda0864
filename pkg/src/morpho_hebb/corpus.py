"""Text ingestion: normalization to basis streams, random strings, batching."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .alphabet import SEPARATOR, Alphabet, as_alphabet


@dataclass(frozen=True)
class NormalizedStream:
    """A sequence of basis symbols and word separators.

    The stream is stored as a string whose characters are alphabet symbols
    or :data:`~morpho_hebb.alphabet.SEPARATOR`; separators are never doubled.
    """

    text: str
    origin: str = "<memory>"

    @property
    def tokens(self) -> tuple:
        """One entry per step: a symbol, or ``None`` for the zero token."""
        return tuple(None if c == SEPARATOR else c for c in self.text)

    def __len__(self):
        return len(self.text)

    def words(self) -> list[str]:
        return self.text.split()

    def word_spans(self):
        """Yield ``(start, word)`` for every maximal separator-free run."""
        start = None
        for i, c in enumerate(self.text):
            if c == SEPARATOR:
                if start is not None:
                    yield start, self.text[start:i]
                    start = None
            elif start is None:
                start = i
        if start is not None:
            yield start, self.text[start:]

    def letters(self) -> int:
        return len(self.text) - self.text.count(SEPARATOR)

    def render(self) -> str:
        return self.text


def normalize_text(raw: str, alphabet=None, origin: str = "<memory>") -> NormalizedStream:
    """Lowercase ``A-Z`` and collapse every run of other characters to one separator.

    Examples
    --------
    >>> normalize_text("My name").text
    'my name'
    >>> normalize_text("Alice!").text
    'alice '
    """
    alphabet = as_alphabet(alphabet)
    out = []
    prev_sep = False
    for ch in raw:
        if "A" <= ch <= "Z":
            ch = ch.lower()
        if ch in alphabet:
            out.append(ch)
            prev_sep = False
        elif not prev_sep:
            out.append(SEPARATOR)
            prev_sep = True
    return NormalizedStream("".join(out), origin)


def prefix_letters(stream: NormalizedStream, n_letters: int) -> NormalizedStream:
    """Truncate a stream after its first ``n_letters`` basis symbols."""
    count = 0
    for i, c in enumerate(stream.text):
        if c != SEPARATOR:
            count += 1
            if count == n_letters:
                return NormalizedStream(stream.text[: i + 1], f"{stream.origin}[:{n_letters}]")
    return stream


def split_batches(stream: NormalizedStream, n_batches: int) -> list[NormalizedStream]:
    """Split a stream into about ``n_batches`` pieces, cutting only at separators."""
    if n_batches < 1:
        raise ValueError("n_batches must be >= 1")
    text = stream.text
    target = max(1, len(text) // n_batches)
    pieces, start = [], 0
    while start < len(text) and len(pieces) < n_batches - 1:
        cut = text.find(SEPARATOR, start + target)
        if cut < 0:
            break
        pieces.append(text[start : cut + 1])
        start = cut + 1
    if start < len(text):
        pieces.append(text[start:])
    return [NormalizedStream(p, f"{stream.origin}#batch{i}") for i, p in enumerate(pieces)]


def uniform_random_string(length: int, seed, alphabet=None) -> str:
    """I.i.d. uniform symbols, deterministic under ``seed``."""
    if length < 1:
        raise ValueError("length must be >= 1")
    alphabet = as_alphabet(alphabet)
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, alphabet.d, size=length)
    return "".join(alphabet.symbols[i] for i in idx)


def derive_seed(seed: int, label) -> int:
    """Stable 63-bit sub-seed for ``(seed, label)``, independent of hash randomization."""
    digest = hashlib.sha256(f"{seed}:{label}".encode()).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def read_text(path) -> str:
    with open(path, encoding="utf-8", errors="replace") as fh:
        return fh.read()
