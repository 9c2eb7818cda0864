"""Per-embedding disentanglement of the projector chain by SVD sweeps."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .alphabet import Alphabet, as_alphabet
from .exceptions import CompressionError, ConsistencyError, PreconditionError
from .hierarchy import Hierarchy

DEFAULT_TOL = 1e-10
CHECK_ATOL = 1e-10


@dataclass
class SparseProjector:
    """0/1 tensor ``P_n[mu_n, mu_{n-1}, k]`` stored as nonzero triplets."""

    n: int
    shape: tuple
    triplets: list  # [(mu_n, mu_prev, k)]

    def __post_init__(self):
        self._lookup = {(p, k): m for m, p, k in self.triplets}

    def get(self, mu_prev: int, k: int) -> Optional[int]:
        return self._lookup.get((mu_prev, k))

    def dense(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for m, p, k in self.triplets:
            out[m, p, k] = 1.0
        return out

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


@dataclass
class ProjectorChain:
    """Uncompressed chain ``m . P_N ... P_2`` for one embedding.

    ``levels[i]`` is ``P_{i+2}``; ``cap`` is the embedding's weight vector over
    the top-level tokens.
    """

    alphabet: Alphabet
    levels: list
    cap: np.ndarray
    word: Optional[str] = None

    @property
    def N(self) -> int:
        return len(self.levels) + 1

    def dims(self) -> list[int]:
        return [p.shape[0] for p in self.levels]

    def cost(self) -> int:
        return sum(p.size for p in self.levels)


@dataclass
class CompressedChain:
    """Compressed chain ``m_hat . P_hat_N ... P_hat_2``.

    ``levels[i]`` is ``P_hat_{i+2}`` with shape ``(b_n, b_{n-1}, d)``, except
    ``P_hat_2`` which has shape ``(b_2, d, d)``.
    """

    alphabet: Alphabet
    levels: list
    cap: np.ndarray
    word: Optional[str] = None

    @property
    def N(self) -> int:
        return len(self.levels) + 1

    def bonds(self) -> dict[int, int]:
        return {i + 2: int(p.shape[0]) for i, p in enumerate(self.levels)}

    def to_document(self) -> dict:
        return {
            "alphabet": str(self.alphabet),
            "word": self.word,
            "cap": [float(x) for x in self.cap],
            "levels": [
                {"n": i + 2, "shape": list(p.shape), "data": [float(x) for x in p.ravel()]}
                for i, p in enumerate(self.levels)
            ],
        }

    @classmethod
    def from_document(cls, doc) -> "CompressedChain":
        levels = []
        for entry in doc["levels"]:
            shape = tuple(int(s) for s in entry["shape"])
            data = np.asarray(entry["data"], dtype=float)
            if data.size != int(np.prod(shape)):
                raise ConsistencyError(f"compressed level {entry['n']}: data does not match shape {shape}")
            levels.append(data.reshape(shape))
        return cls(Alphabet.from_string(doc["alphabet"]), levels, np.asarray(doc["cap"], dtype=float), doc.get("word"))


def projector_chain(h: Hierarchy, record, N: Optional[int] = None) -> ProjectorChain:
    """Shared projectors ``P_2 .. P_N`` capped by the record's top-level weights."""
    N = N or max((len(g) for g in record.m), default=0)
    if N < 2:
        raise PreconditionError("embedding has no gram of order >= 2")
    if not h.has_level(N):
        raise ConsistencyError(f"hierarchy has no level {N}; it may have been forgotten")
    levels = []
    for n in range(2, N + 1):
        lvl = h.level(n)
        d_prev = h.alphabet.d if n == 2 else h.level(n - 1).d
        trip = []
        for mu in range(lvl.d):
            p, k = h.unproject(mu, n)
            trip.append((mu, p, k))
        levels.append(SparseProjector(n, (lvl.d, d_prev, h.alphabet.d), trip))
    cap = np.zeros(h.level(N).d)
    for g, w in record.m.items():
        if len(g) == N:
            mu = h.index(g)
            if mu is None:
                raise ConsistencyError(f"gram {g!r} is no longer learned")
            cap[mu] = w
    return ProjectorChain(h.alphabet, levels, cap, record.word)


def svd_decompose(M, tol: float = DEFAULT_TOL):
    """Truncated SVD ``M = U diag(D) V`` with a canonical sign choice.

    Singular values at or below ``tol * max(D)`` are dropped.  Each row of
    ``V`` is flipped so its first nonzero entry is positive.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise PreconditionError("svd_decompose expects a matrix")
    if not np.all(np.isfinite(M)):
        raise FloatingPointError("matrix has non-finite entries")
    if M.size == 0:
        return np.zeros((M.shape[0], 0)), np.zeros(0), np.zeros((0, M.shape[1]))
    U, D, V = np.linalg.svd(M, full_matrices=False)
    keep = D > tol * D[0] if D.size and D[0] > 0 else np.zeros(D.shape, bool)
    U, D, V = U[:, keep], D[keep], V[keep]
    for i in range(V.shape[0]):
        nz = np.flatnonzero(np.abs(V[i]) > 1e-12)
        if nz.size and V[i, nz[0]] < 0:
            V[i] *= -1
            U[:, i] *= -1
    return U, D, V


def _contract_sparse(V3: np.ndarray, P: SparseProjector) -> np.ndarray:
    """``T[w, z, mu_{n-2}, l] = sum_{mu_{n-1}} V3[w, mu_{n-1}, z] P[mu_{n-1}, mu_{n-2}, l]``."""
    w, _, d = V3.shape
    _, d_prev, _ = P.shape
    T = np.zeros((w, d, d_prev, d))
    for m, p, l in P.triplets:
        T[:, :, p, l] += V3[:, m, :]
    return T


def _svd_columns(M: np.ndarray, tol: float):
    # SVD over nonzero columns only, scattered back; identical result, less work
    cols = np.flatnonzero(np.any(M != 0, axis=0))
    U, D, Vs = svd_decompose(M[:, cols], tol)
    V = np.zeros((Vs.shape[0], M.shape[1]))
    V[:, cols] = Vs
    return U, D, V


def compress_chain(pc: ProjectorChain, tol: float = DEFAULT_TOL, verify: bool = True) -> CompressedChain:
    """Carry the cap down the chain, compressing one projector per step.

    Steps: SVD the cap; contract its ``V`` into ``P_N``; for each ``n`` split
    the carried tensor over its merged right indices, contract the right
    factor into ``P_{n-1}``, split again over ``(omega z) | (mu l)`` and keep
    ``U U' D'`` as the compressed ``P_hat_n``.  The last carry is ``P_hat_2``.
    """
    d = pc.alphabet.d
    N = pc.N
    U0, D0, V0 = svd_decompose(pc.cap[None, :], tol)
    cap = (U0 * D0)[0]
    PN = pc.levels[-1]
    carry = np.zeros((V0.shape[0], PN.shape[1], d))
    for m, p, k in PN.triplets:
        carry[:, p, k] += V0[:, m]
    hats = [None] * (N - 1)
    for n in range(N, 2, -1):
        b_n, d_prev, _ = carry.shape
        U, D, V = _svd_columns(carry.reshape(b_n, d_prev * d), tol)
        V3 = (D[:, None] * V).reshape(-1, d_prev, d)
        T = _contract_sparse(V3, pc.levels[n - 3])
        w, _, d_pp, _ = T.shape
        U2, D2, V2 = _svd_columns(T.reshape(w * d, d_pp * d), tol)
        U2 = U2.reshape(w, d, -1)
        hats[n - 2] = np.einsum("bw,wzc,c->bcz", U, U2, D2)
        carry = V2.reshape(-1, d_pp, d)
    hats[0] = carry
    out = CompressedChain(pc.alphabet, hats, cap, pc.word)
    if verify:
        verify_equivalence(pc, out)
    return out


def chain_apply(c, s: str) -> float:
    """Contract the chain against the one-hot encoding of ``s``."""
    a = c.alphabet
    if len(s) != c.N:
        raise PreconditionError(f"string length {len(s)} does not match chain length {c.N}")
    idx = a.encode(s)
    if isinstance(c, ProjectorChain):
        mu = idx[0]
        for p, k in zip(c.levels, idx[1:]):
            mu = p.get(mu, k)
            if mu is None:
                return 0.0
        return float(c.cap[mu])
    x = c.levels[0][:, idx[0], idx[1]]
    for P, k in zip(c.levels[1:], idx[2:]):
        x = P[:, :, k] @ x
    return float(c.cap @ x)


def support_strings(pc: ProjectorChain) -> list[str]:
    """Top-level grams carrying nonzero cap weight."""
    out = []
    for mu in np.flatnonzero(pc.cap):
        # peel indices back down to letters
        letters = []
        m = int(mu)
        for p in reversed(pc.levels):
            prev = next((pp, k) for mm, pp, k in p.triplets if mm == m)
            letters.append(pc.alphabet.symbol(prev[1]))
            m = prev[0]
        letters.append(pc.alphabet.symbol(m))
        out.append("".join(reversed(letters)))
    return out


def verify_equivalence(pc: ProjectorChain, cc: CompressedChain, extra=(), atol: float = CHECK_ATOL) -> None:
    """Compare both chains on the support strings and their one-symbol mutations."""
    probes = set(extra)
    for s in support_strings(pc):
        probes.add(s)
        for i in range(len(s)):
            for c in pc.alphabet.symbols:
                probes.add(s[:i] + c + s[i + 1 :])
    for s in sorted(probes):
        u, v = chain_apply(pc, s), chain_apply(cc, s)
        if abs(u - v) > atol:
            raise CompressionError(f"compressed chain disagrees on {s!r}: {v} vs {u}")


def all_strings(alphabet, N: int):
    alphabet = as_alphabet(alphabet)
    for t in itertools.product(alphabet.symbols, repeat=N):
        yield "".join(t)


def cost_gamma(d: int, N_alpha: int) -> int:
    """Element count of a disentangled chain (summation form)."""
    if N_alpha < 2:
        raise PreconditionError("N_alpha must be >= 2")
    if d < 1:
        raise PreconditionError("d must be >= 1")
    N = N_alpha
    s1 = sum(N - n + 1 for n in range(3, N + 1))
    s2 = sum((n - 3) * (N - n + 1) ** 2 for n in range(3, N + 1))
    return d * d + (d + d * d) * s1 + d * s2


def cost_gamma_closed(d: int, N_alpha: int) -> int:
    """Quartic closed form of :func:`cost_gamma`, in exact rational arithmetic."""
    if N_alpha < 2:
        raise PreconditionError("N_alpha must be >= 2")
    N = N_alpha
    val = Fraction(d, 12) * (24 - 46 * N + 29 * N**2 - 8 * N**3 + N**4 + 6 * d * (4 - 3 * N + N**2))
    if val.denominator != 1:
        raise ConsistencyError("closed-form cost is not an integer")
    return int(val)


def measured_cost(c) -> int:
    """Stored projector elements (the cap vector is not counted)."""
    if isinstance(c, ProjectorChain):
        return c.cost()
    return int(sum(p.size for p in c.levels))


def compress_record(h: Hierarchy, record, tol: float = DEFAULT_TOL) -> CompressedChain:
    return compress_chain(projector_chain(h, record), tol)
