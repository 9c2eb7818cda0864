"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

from sklearn.utils.validation import check_is_fitted  # noqa: F401  re-exported

from .alphabet import as_alphabet
from .corpus import NormalizedStream, normalize_text


def check_texts(X, alphabet=None) -> list[NormalizedStream]:
    """Accept a string or an iterable of strings; return normalized streams."""
    if isinstance(X, (str, NormalizedStream)):
        X = [X]
    try:
        items = list(X)
    except TypeError:
        raise TypeError(f"expected a string or iterable of strings, got {type(X).__name__}") from None
    if not items:
        raise ValueError("need at least one text")
    alphabet = as_alphabet(alphabet)
    out = []
    for x in items:
        if isinstance(x, NormalizedStream):
            out.append(x)
        elif isinstance(x, str):
            out.append(normalize_text(x, alphabet))
        else:
            raise TypeError(f"texts must be strings, got {type(x).__name__}")
    return out


def check_strings(X, alphabet=None) -> list[str]:
    """Strings already over the alphabet (no normalization, no separators)."""
    if isinstance(X, str):
        X = [X]
    alphabet = as_alphabet(alphabet)
    out = []
    for x in X:
        if not isinstance(x, str) or not x:
            raise ValueError(f"expected nonempty strings, got {x!r}")
        out.append(alphabet.check(x))
    return out


def check_epsilons(eps) -> tuple:
    if eps is None:
        return ()
    if isinstance(eps, (int, float)):
        return (float(eps),)
    return tuple(float(e) for e in eps)
