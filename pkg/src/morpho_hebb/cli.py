"""Command-line entry point: ``morpho-hebb <command> [flags]``.

Exit status is 0 on success, 1 on consistency or verification failures
(including unreadable documents) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .alphabet import as_alphabet
from .compression import compress_chain, cost_gamma, measured_cost, projector_chain
from .corpus import normalize_text, read_text
from .embedding import DEFAULT_XI_M, EmbeddingStore, PinningField, recognize_word, replay_relearn
from .exceptions import AlphabetError, ConsistencyError, DocumentError, HierarchyOrderError, PreconditionError
from .hierarchy import TrainConfig, grow_from_text, grow_random
from .inference import MeasureConfig, cycle_rng, generate_vocabulary, replay_cycle, worker_count
from .persistence import atomic_write, load_hierarchy, load_store, save_hierarchy, save_store
from .stats import (count_intraword_ngrams, fit_csv, fit_lognormal, hierarchy_histogram, histogram_csv,
                    peak_and_collapse, rank_frequency, rankfreq_csv)
from .tokenizer import TokenRef, decode_token, project_up, tokenize

EXIT_OK, EXIT_CONSISTENCY, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _eps_list(raw: str):
    try:
        vals = tuple(float(x) for x in raw.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"--eps expects a comma-separated list of numbers, got {raw!r}")
    return vals


def _summary(**fields) -> None:
    print(json.dumps(fields, sort_keys=True, separators=(",", ":")), file=sys.stderr)


def _train_config(args) -> TrainConfig:
    n_g = math.inf if args.n_g is None else args.n_g
    if args.xi_g is not None and args.n_g is None:
        n_g = 1.0 / args.xi_g
    return TrainConfig(n_g=n_g, xi_g=args.xi_g, epsilons=args.eps, max_level=args.max_level, seed=args.seed or 0)


def _measure_config(args) -> MeasureConfig:
    return MeasureConfig(beta=args.beta, seed=args.seed if args.seed is not None else 0, mode=args.mode)


def _require(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise UsageError(f"--{n.replace('_', '-')} is required for {args.command}")


def _write_or_print(args, text: str) -> None:
    if args.out:
        atomic_write(args.out, text)
    else:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------

def cmd_train(args):
    _require(args, "input", "out")
    alphabet = as_alphabet(args.alphabet)
    stream = normalize_text(read_text(args.input), alphabet, origin=str(args.input))
    h = grow_from_text(stream, _train_config(args), alphabet)
    save_hierarchy(h, args.out)
    _summary(command="train", out=str(args.out), sizes=h.sizes, tokens=h.n_tokens, collapsed=h.collapsed)


def cmd_grow_random(args):
    _require(args, "out", "seed")
    alphabet = as_alphabet(args.alphabet)
    h = grow_random(_train_config(args), alphabet)
    save_hierarchy(h, args.out)
    _summary(command="grow-random", out=str(args.out), seed=args.seed, sizes=h.sizes, collapsed=h.collapsed)


def cmd_replay(args):
    _require(args, "hierarchy", "seed")
    h = load_hierarchy(args.hierarchy)
    cfg = _measure_config(args)
    store = load_store(args.store) if args.store and Path(args.store).exists() else EmbeddingStore()
    words = []
    for i in range(args.count):
        rep = replay_cycle(h, cfg, cycle_rng(cfg.seed, i))[0]
        words.append(rep.word)
        alpha = store.allocate(rep.word)
        replay_relearn(store, h, rep.tokens, PinningField(alpha), args.xi_m)
    sys.stdout.write("".join(w + "\n" for w in words))
    target = args.out or args.store
    if target:
        save_store(store, target)
    _summary(command="replay", count=args.count, embeddings=len(store), out=str(target) if target else None)


def cmd_generate_vocab(args):
    _require(args, "hierarchy", "seed")
    h = load_hierarchy(args.hierarchy)
    words = generate_vocabulary(h, args.count, _measure_config(args))
    _write_or_print(args, "".join(w + "\n" for w in words))
    _summary(command="generate-vocab", count=len(words), unique=len(set(words)), out=str(args.out) if args.out else None)


def cmd_tokenize(args):
    _require(args, "hierarchy", "string")
    h = load_hierarchy(args.hierarchy)
    segs = tokenize(h, args.string, limit=args.limit)
    for s in segs:
        print(s.render())
    unique = segs[0].unique
    print(f"unique: {'yes' if unique else 'no'}")
    _summary(command="tokenize", string=args.string, segmentations=len(segs), unique=unique)


def cmd_recognize(args):
    _require(args, "hierarchy", "store", "fragment")
    h = load_hierarchy(args.hierarchy)
    store = load_store(args.store)
    ranked = recognize_word(store, h, args.fragment)
    for alpha, act in ranked[: args.limit]:
        print(f"{store.get(alpha).word}\t{act:.6g}")
    _summary(command="recognize", fragment=args.fragment, matches=len(ranked))


def cmd_compress(args):
    _require(args, "hierarchy", "store")
    h = load_hierarchy(args.hierarchy)
    store = load_store(args.store)
    records = [r for r in store if r.m]

    def one(rec):
        return compress_chain(projector_chain(h, rec))

    workers = worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chains = list(pool.map(one, records))
    else:
        chains = [one(r) for r in records]
    print("word\tN_alpha\tmeasured_cost\tcost_gamma")
    for rec, cc in zip(records, chains):
        rec.compressed = cc
        print(f"{rec.word}\t{cc.N}\t{measured_cost(cc)}\t{cost_gamma(h.alphabet.d, cc.N)}")
    save_store(store, args.out or args.store)
    _summary(command="compress", compressed=len(chains), out=str(args.out or args.store))


def cmd_stats(args):
    if args.hierarchy is None and args.input is None:
        raise UsageError("stats needs --input (text or vocabulary file) or --hierarchy")
    out = Path(args.out or ".")
    if args.hierarchy:
        h = load_hierarchy(args.hierarchy)
        hist = hierarchy_histogram(h)
        words = None
    else:
        stream = normalize_text(read_text(args.input), as_alphabet(args.alphabet), origin=str(args.input))
        words = stream.words()
        if not words:
            raise UsageError(f"{args.input} contains no words")
        hist = count_intraword_ngrams(words, "text")
    atomic_write(out / "histogram.csv", histogram_csv(hist))
    if words is not None:
        atomic_write(out / "rankfreq.csv", rankfreq_csv(rank_frequency(words, types=args.types)))
    fit = None
    try:
        fit = fit_lognormal(hist)
        atomic_write(out / "fit.csv", fit_csv(fit))
    except PreconditionError:
        pass
    n_peak, n_max = peak_and_collapse(hist)
    _summary(command="stats", out=str(out), n_peak=n_peak, n_max=n_max,
             fit=None if fit is None else {"mu": fit.mu, "sigma": fit.sigma, "N": fit.N, "rms": fit.rms})


def cmd_decode(args):
    _require(args, "hierarchy")
    h = load_hierarchy(args.hierarchy)
    if args.token:
        try:
            n, mu = (int(x) for x in args.token.split(":"))
        except ValueError:
            raise UsageError("--token expects n:mu") from None
        if not h.has_level(n) or not 0 <= mu < h.level(n).d:
            raise ConsistencyError(f"token {n}:{mu} does not exist in the hierarchy")
        t = TokenRef(n, mu, h.level(n).grams[mu])
    elif args.string:
        t = project_up(h, args.string)
        if t is None:
            raise ConsistencyError(f"{args.string!r} is not a learned token")
    else:
        raise UsageError("decode needs --token n:mu or --string")
    letters = decode_token(h, t)
    print(" ".join(letters))
    _summary(command="decode", n=t.n, mu=t.mu, expansion="".join(letters))


COMMANDS = {
    "train": cmd_train,
    "grow-random": cmd_grow_random,
    "replay": cmd_replay,
    "generate-vocab": cmd_generate_vocab,
    "tokenize": cmd_tokenize,
    "recognize": cmd_recognize,
    "compress": cmd_compress,
    "stats": cmd_stats,
    "decode": cmd_decode,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input")
    common.add_argument("--out")
    common.add_argument("--eps", type=_eps_list, default=())
    common.add_argument("--xi-g", type=float, dest="xi_g")
    common.add_argument("--n-g", type=float, dest="n_g")
    common.add_argument("--beta", type=float, default=1.0)
    common.add_argument("--seed", type=int)
    common.add_argument("--count", type=int, default=1)
    common.add_argument("--mode", choices=["sample", "argmax"], default="sample")
    common.add_argument("--max-level", type=int, default=32, dest="max_level")
    common.add_argument("--types", action="store_true")
    common.add_argument("--hierarchy")
    common.add_argument("--store")
    common.add_argument("--string")
    common.add_argument("--fragment")
    common.add_argument("--token")
    common.add_argument("--alphabet")
    common.add_argument("--xi-m", type=float, default=DEFAULT_XI_M, dest="xi_m")
    common.add_argument("--limit", type=int)

    p = argparse.ArgumentParser(prog="morpho-hebb", description="Hierarchical Hebbian n-gram models")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        if args.count is not None and args.count < 1:
            raise UsageError("--count must be >= 1")
        COMMANDS[args.command](args)
    except (UsageError, PreconditionError, AlphabetError, FileNotFoundError) as e:
        print(f"morpho-hebb {args.command}: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ConsistencyError, DocumentError, HierarchyOrderError) as e:
        print(f"morpho-hebb {args.command}: {e}", file=sys.stderr)
        return EXIT_CONSISTENCY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
