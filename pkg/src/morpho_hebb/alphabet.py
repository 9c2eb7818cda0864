"""Basis symbol set and index mapping."""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from typing import Iterable

from .exceptions import AlphabetError

#: Character used for the word separator (the zero token) in normalized streams.
SEPARATOR = " "


@dataclass(frozen=True)
class Alphabet:
    """Ordered set of distinct single-character basis symbols.

    The position of a symbol in ``symbols`` is its basis index, and
    lexicographic order of grams is taken with respect to these indices.
    """

    symbols: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        symbols = tuple(self.symbols)
        if not symbols:
            raise AlphabetError("alphabet must contain at least one symbol")
        for s in symbols:
            if not isinstance(s, str) or len(s) != 1:
                raise AlphabetError(f"alphabet symbols must be single characters, got {s!r}")
            if s.isspace():
                raise AlphabetError("whitespace is reserved for the word separator")
        if len(set(symbols)) != len(symbols):
            raise AlphabetError("alphabet symbols must be unique")
        object.__setattr__(self, "symbols", symbols)
        object.__setattr__(self, "_index", {s: i for i, s in enumerate(symbols)})

    @classmethod
    def from_string(cls, chars: str) -> "Alphabet":
        return cls(tuple(chars))

    @property
    def d(self) -> int:
        return len(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __contains__(self, symbol):
        return symbol in self._index

    def __iter__(self):
        return iter(self.symbols)

    def __str__(self):
        return "".join(self.symbols)

    def index(self, symbol: str) -> int:
        try:
            return self._index[symbol]
        except KeyError:
            raise AlphabetError(f"symbol {symbol!r} is not in the alphabet") from None

    def symbol(self, i: int) -> str:
        if not 0 <= i < len(self.symbols):
            raise IndexError(f"basis index {i} out of range for d={self.d}")
        return self.symbols[i]

    def encode(self, s: str) -> tuple[int, ...]:
        return tuple(self.index(c) for c in s)

    def decode(self, indices: Iterable[int]) -> str:
        return "".join(self.symbol(i) for i in indices)

    def check(self, s: str) -> str:
        """Return ``s`` unchanged, raising :class:`AlphabetError` on foreign symbols."""
        for c in s:
            if c not in self._index:
                raise AlphabetError(f"symbol {c!r} is not in the alphabet {str(self)!r}")
        return s

    def sort_key(self, gram: str) -> tuple[int, ...]:
        return tuple(self._index[c] for c in gram)


LATIN = Alphabet.from_string(string.ascii_lowercase)


def as_alphabet(alphabet) -> Alphabet:
    """Coerce a string, sequence of symbols or :class:`Alphabet` to an Alphabet."""
    if alphabet is None:
        return LATIN
    if isinstance(alphabet, Alphabet):
        return alphabet
    return Alphabet(tuple(alphabet))
