"""Command-line front end.

Subcommands: ``analyze``, ``surrogate``, ``fgn``, ``dfa``, ``shuffle``. Each
writes its outputs plus a ``manifest.json`` into ``--out`` (default: the
``ZIPFSURROGATE_OUT`` environment variable, else the current directory).
``--replay MANIFEST`` re-runs a recorded command with identical settings.

Exit codes: 0 success, 2 validation error, 3 non-convergence, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import math
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from ._random import RNG_ALGORITHM
from .baselines import ShuffleLevel, shuffle_characters, shuffle_sentences, shuffle_words
from .dfa import DfaConfig, Segmentation, dfa_exponent
from .encoders import (
    DnaEncodeOptions,
    PunctuationMode,
    TokenizerOptions,
    base_composition,
    decode_utf8,
    parse_fasta,
    ry_encode,
    tokenize,
)
from .fgn import FgnConfig, generate_fgn
from .seqmodel import build_frequency_table, zipf_rank_encode
from .surrogate import (
    Encoding,
    MatchConfig,
    TargetUnreachableError,
    match_target_exponent,
    numerify,
)

log = logging.getLogger("zipfsurrogate")

EXIT_OK, EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_IO = 0, 2, 3, 4
OUT_ENV = "ZIPFSURROGATE_OUT"


class NotConverged(Exception):
    pass


# -- output helpers ---------------------------------------------------------


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _clean(obj):
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    return obj


def write_json(path: Path, obj) -> None:
    _atomic_write(path, (json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n").encode())


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    _atomic_write(path, buf.getvalue().encode("utf-8"))


def write_lines(path: Path, items) -> None:
    _atomic_write(path, ("\n".join(items) + "\n").encode("utf-8"))


def _digest(data: bytes, path: str) -> dict:
    return {"path": path, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}


# execution settings that cannot change any output byte
_NOT_RECORDED = ("out", "func", "replay", "verbose", "workers")


def _manifest(args, inputs, seeds) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in _NOT_RECORDED}
    return {
        "command": args.command,
        "config": config,
        "inputs": inputs,
        "seeds": seeds,
        "tool_version": __version__,
        "numpy_version": np.__version__,
        "rng": RNG_ALGORITHM,
    }


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


# -- shared option handling -------------------------------------------------


def _fit_range(text: str):
    try:
        lo, hi = text.split(":")
        return int(float(lo)), int(float(hi))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


def _dfa_config(args) -> DfaConfig:
    return DfaConfig(
        order=args.order,
        fit_range=tuple(args.fit_range) if args.fit_range else None,
        segmentation=args.segmentation,
        n_windows=args.windows,
    )


def _tok_opts(args) -> TokenizerOptions:
    return TokenizerOptions(
        lowercase=not args.no_lowercase,
        punctuation_mode=PunctuationMode.AS_TOKENS if args.keep_punctuation else PunctuationMode.STRIP,
    )


def _load_sequence(args):
    """Read the input file and return (bytes, symbol sequence, extra summary fields)."""
    data = _read_input(args.input)
    extra = {}
    if args.format == "fasta":
        res = parse_fasta(data, record=args.record, opts=DnaEncodeOptions(args.non_acgt))
        seq = res.sequence
        extra["skipped_non_acgt"] = res.skipped
    else:
        seq = tokenize(decode_utf8(data), _tok_opts(args))
    if len(seq) == 0:
        raise ValueError("empty corpus")
    if args.format == "fasta":
        extra["composition"] = base_composition(seq)
    return data, seq, extra


def _encoding(args) -> Encoding:
    if args.encoding:
        return Encoding(args.encoding)
    return Encoding.RY if args.format == "fasta" else Encoding.RANK


def _numeric(seq, table, encoding: Encoding) -> np.ndarray:
    if encoding is Encoding.RY:
        return ry_encode(seq)
    return zipf_rank_encode(seq, table)


def _zipf_rows(table):
    n = table.total
    return [
        (r, sym, int(c), repr(c / n))
        for r, (sym, c) in enumerate(zip(table.alphabet.symbols, table.counts.tolist()), start=1)
    ]


# -- subcommands ------------------------------------------------------------


def cmd_analyze(args) -> int:
    data, seq, extra = _load_sequence(args)
    out = Path(args.out)
    table = build_frequency_table(seq)
    encoding = _encoding(args)
    res = dfa_exponent(_numeric(seq, table, encoding), _dfa_config(args), workers=args.workers)
    manifest = _manifest(args, [_digest(data, args.input)], [])
    write_csv(out / "zipf.csv", ["rank", "symbol", "count", "freq"], _zipf_rows(table))
    write_csv(out / "dfa.csv", ["L", "F"], [(int(L), repr(float(F))) for L, F in zip(res.window_sizes, res.fluctuations)])
    summary = {
        "N": len(seq),
        "V": table.size,
        "encoding": encoding.value,
        **res.summary(),
        "dfa_config": res.config.to_dict(),
        **extra,
        "manifest": manifest,
    }
    write_json(out / "summary.json", summary)
    write_json(out / "manifest.json", manifest)
    print(f"N={len(seq)} V={table.size} alpha={res.alpha:.4f} (stderr {res.fit_stderr:.4f}, R2 {res.r_squared:.4f})")
    return EXIT_OK


def cmd_surrogate(args) -> int:
    data, seq, extra = _load_sequence(args)
    out = Path(args.out)
    table = build_frequency_table(seq)
    encoding = _encoding(args)
    dfa_cfg = _dfa_config(args).resolve(len(seq))
    original = dfa_exponent(_numeric(seq, table, encoding), dfa_cfg, workers=args.workers)
    target = original.alpha if args.match_input else args.target_alpha
    cfg = MatchConfig(
        target_alpha=target,
        epsilon=args.eps,
        bracket=tuple(args.bracket),
        max_iters=args.max_iters,
        reseed_after=args.reseed_after,
        base_seed=args.seed,
        dfa_config=dfa_cfg,
        encoding=encoding,
    )
    result = match_target_exponent(table, cfg)
    surr = result.sequence
    check = dfa_exponent(numerify(surr, encoding), result.dfa_config, workers=args.workers)

    if args.emit == "ranks":
        write_lines(out / "surrogate.txt", [str(i + 1) for i in surr.ids.tolist()])
    else:
        write_lines(out / "surrogate.txt", surr.labels())
    surr_counts = surr.counts()
    write_csv(
        out / "zipf_compare.csv",
        ["rank", "symbol", "count_input", "count_surrogate"],
        [(r, s, int(c), int(sc)) for r, (s, c, sc) in enumerate(zip(table.alphabet.symbols, table.counts.tolist(), surr_counts.tolist()), start=1)],
    )
    write_csv(
        out / "dfa_compare.csv",
        ["L", "F_input", "F_surrogate"],
        [(int(L), repr(float(a)), repr(float(b))) for L, a, b in zip(original.window_sizes, original.fluctuations, check.fluctuations)],
    )
    manifest = _manifest(args, [_digest(data, args.input)], list(result.seeds_used))
    summary = {
        "N": len(seq),
        "V": table.size,
        "encoding": encoding.value,
        "input_alpha": original.alpha,
        "target_alpha": target,
        "epsilon": args.eps,
        "achieved_alpha": result.achieved_alpha,
        "final_alpha0": result.final_alpha0,
        "iterations": result.iterations,
        "converged": result.converged,
        "seeds_used": list(result.seeds_used),
        "trace": result.trace_dicts(),
        "dfa_config": result.dfa_config.to_dict(),
        "match_config": cfg.to_dict(),
        "frequencies_preserved": bool(np.array_equal(surr_counts, table.counts)),
        **extra,
        "manifest": manifest,
    }
    write_json(out / "summary.json", summary)
    write_json(out / "manifest.json", manifest)
    print(
        f"target={target:.4f} achieved={result.achieved_alpha:.4f} alpha0={result.final_alpha0:.4f} "
        f"iterations={result.iterations} converged={result.converged}"
    )
    if not result.converged:
        raise NotConverged(f"no surrogate within {args.eps} of {target:.4f} after {result.iterations} iterations")
    return EXIT_OK


def cmd_fgn(args) -> int:
    out = Path(args.out)
    z = generate_fgn(FgnConfig(args.n, args.alpha0, args.seed))
    if args.binary:
        _atomic_write(out / "series.f64", z.astype("<f8").tobytes())
    else:
        write_lines(out / "series.txt", map(repr, z.tolist()))
    write_json(out / "manifest.json", _manifest(args, [], [args.seed]))
    return EXIT_OK


def read_series(data: bytes, fmt: str) -> np.ndarray:
    if fmt == "f64":
        if len(data) % 8:
            raise ValueError("binary series length is not a multiple of 8 bytes")
        return np.frombuffer(data, dtype="<f8").astype(np.float64)
    text = decode_utf8(data)
    return np.array([float(v) for v in text.split()], dtype=np.float64)


def cmd_dfa(args) -> int:
    data = _read_input(args.input)
    fmt = args.input_format
    if fmt == "auto":
        fmt = "f64" if args.input.endswith((".f64", ".bin")) else "text"
    x = read_series(data, fmt)
    res = dfa_exponent(x, _dfa_config(args), workers=args.workers)
    out = Path(args.out)
    rows = [
        (int(L), repr(float(F)), repr(float(np.log10(L))), repr(float(np.log10(F))) if F > 0 else "")
        for L, F in zip(res.window_sizes, res.fluctuations)
    ]
    manifest = _manifest(args, [_digest(data, args.input)], [])
    write_csv(out / "dfa.csv", ["L", "F", "log10L", "log10F"], rows)
    write_json(out / "summary.json", {"N": int(x.size), **res.summary(), "dfa_config": res.config.to_dict(), "manifest": manifest})
    write_json(out / "manifest.json", manifest)
    print(f"alpha={res.alpha:.4f} stderr={res.fit_stderr:.4f} r2={res.r_squared:.4f}")
    return EXIT_OK


def cmd_shuffle(args) -> int:
    data = _read_input(args.input)
    text = decode_utf8(data)
    out = Path(args.out)
    level = ShuffleLevel(args.level)
    if level is ShuffleLevel.CHARACTERS:
        _atomic_write(out / "shuffled.txt", shuffle_characters(text, args.seed).encode("utf-8"))
    elif level is ShuffleLevel.WORDS:
        write_lines(out / "shuffled.txt", shuffle_words(tokenize(text, _tok_opts(args)), args.seed).labels())
    else:
        if not text.strip():
            raise ValueError("empty corpus")
        write_lines(out / "shuffled.txt", shuffle_sentences(text, args.seed, _tok_opts(args)).labels())
    write_json(out / "manifest.json", _manifest(args, [_digest(data, args.input)], [args.seed]))
    return EXIT_OK


# -- parser -----------------------------------------------------------------


def _add_dfa_flags(p):
    g = p.add_argument_group("DFA")
    g.add_argument("--order", type=int, default=1, help="detrending polynomial order (default 1)")
    g.add_argument("--windows", type=int, default=20, help="number of log-spaced window sizes (default 20)")
    g.add_argument("--fit-range", type=_fit_range, default=None, metavar="LO:HI", help="window range for the power-law fit")
    g.add_argument("--segmentation", choices=[s.value for s in Segmentation], default=Segmentation.BOTH_ENDS.value)
    g.add_argument("--workers", type=int, default=1, help="threads for per-window work (results do not depend on it)")


def _add_input_flags(p):
    p.add_argument("input", help="input file, or - for stdin")
    p.add_argument("--format", choices=["text", "fasta"], default="text")
    p.add_argument("--encoding", choices=[e.value for e in Encoding], default=None, help="default: rank for text, ry for fasta")
    p.add_argument("--keep-punctuation", action="store_true", help="treat punctuation marks as tokens")
    p.add_argument("--no-lowercase", action="store_true")
    p.add_argument("--record", default=None, help="FASTA record id to use (default: all records)")
    p.add_argument("--non-acgt", choices=["skip", "fail"], default="skip")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="zipfsurrogate", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--replay", metavar="MANIFEST", help="re-run the command recorded in a manifest.json")
    parser.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or .)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("analyze", help="Zipf table and DFA curve of a corpus")
    _add_input_flags(p)
    _add_dfa_flags(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("surrogate", help="Zipf-preserving surrogate matched to a DFA exponent")
    _add_input_flags(p)
    _add_dfa_flags(p)
    tgt = p.add_mutually_exclusive_group(required=True)
    tgt.add_argument("--target-alpha", type=float)
    tgt.add_argument("--match-input", action="store_true", help="target the measured exponent of the input")
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=40)
    p.add_argument("--reseed-after", type=int, default=5)
    p.add_argument("--bracket", type=_fit_range_float, default=(0.5, 0.99), metavar="LO:HI")
    p.add_argument("--emit", choices=["symbols", "ranks"], default="symbols")
    p.set_defaults(func=cmd_surrogate)

    p = sub.add_parser("fgn", help="fractional Gaussian noise series")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha0", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--binary", action="store_true", help="write little-endian float64 (series.f64)")
    p.set_defaults(func=cmd_fgn)

    p = sub.add_parser("dfa", help="DFA of a numeric series")
    p.add_argument("input", help="series file (one value per line, or .f64 binary), or - for stdin")
    p.add_argument("--input-format", choices=["auto", "text", "f64"], default="auto")
    _add_dfa_flags(p)
    p.set_defaults(func=cmd_dfa)

    p = sub.add_parser("shuffle", help="shuffled baseline of a text")
    p.add_argument("input")
    p.add_argument("--level", choices=[lv.value for lv in ShuffleLevel], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--keep-punctuation", action="store_true")
    p.add_argument("--no-lowercase", action="store_true")
    p.set_defaults(func=cmd_shuffle)
    for p in sub.choices.values():
        # also accept --out after the subcommand; SUPPRESS keeps the global value otherwise
        p.add_argument("--out", default=argparse.SUPPRESS, help="output directory")
    return parser


def _fit_range_float(text: str):
    try:
        lo, hi = text.split(":")
        return float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO:HI, got {text!r}") from None


_COMMANDS = {"analyze": cmd_analyze, "surrogate": cmd_surrogate, "fgn": cmd_fgn, "dfa": cmd_dfa, "shuffle": cmd_shuffle}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    out = args.out or os.environ.get(OUT_ENV, ".")
    try:
        if args.replay:
            manifest = json.loads(Path(args.replay).read_text())
            config = manifest["config"]
            if config.get("fit_range"):
                config["fit_range"] = tuple(config["fit_range"])
            if config.get("bracket"):
                config["bracket"] = tuple(config["bracket"])
            args = argparse.Namespace(**{"workers": 1, **config}, out=out, replay=None, verbose=args.verbose)
        elif args.command is None:
            parser.print_help()
            return EXIT_INVALID
        args.out = out
        return _COMMANDS[args.command](args)
    except NotConverged as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, KeyError, TargetUnreachableError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
