"""Command-line interface: ``tenseg <subcommand> [options]``.

Data goes to stdout, diagnostics to stderr. Exit codes: 0 success, 2 bad
configuration, 3 input/output failure, 4 numerical failure.

Every subcommand accepts ``--config FILE``, a flat ``key = value`` file whose
keys are long option names (``lambda-t = 4``, ``auto-rank = true``); options
given on the command line override the file.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from . import __version__
from .ccid import CcidConfig
from .decompose import AlsConfig, cp_als, hosvd
from .evaluate import evaluate, table_row, tabulate, write_table
from .io import (FileFormatError, read_config, read_tensor, read_truth, save_model,
                 write_detection, write_tsr1, write_truth)
from .pipeline import DecompConfig, detect_series, extract_series, normalize_slices, run_bench
from .rank_select import NormoConfig, normo_select
from .simulate import SCENARIOS, ScenarioSpec, generate, scenario_spec

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_CONFIG", "EXIT_IO", "EXIT_NUMERIC"]


class ConfigError(ValueError):
    pass


def _log(*args) -> None:
    print(*args, file=sys.stderr)


def _int_list(text: str) -> List[int]:
    return [int(v) for v in text.replace(";", ",").split(",") if v.strip()]


# ---------------------------------------------------------------- options

def _add_scenario(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scenario")
    g.add_argument("--scenario", default="CP4", type=str.upper, choices=sorted(SCENARIOS))
    g.add_argument("--structure", default="ar", type=str.lower, choices=("ar", "sb", "er"))
    g.add_argument("--magnitude", default="standard", choices=("standard", "small"))
    g.add_argument("--noise", default="iid", choices=("iid", "ar1"))
    g.add_argument("--alpha", type=float, default=0.7, help="AR(1) noise coefficient")
    g.add_argument("--time-term", default="none", choices=("none", "identity"))
    g.add_argument("--change-points", type=_int_list, default=None,
                   help="comma-separated change-points replacing the scenario's")
    g.add_argument("--length", type=int, default=None, help="series length T for --change-points")


def _add_decomp(p: argparse.ArgumentParser, rel_tol: float = 1e-6) -> None:
    g = p.add_argument_group("decomposition")
    g.add_argument("--decomp", default="cp", choices=("cp", "hosvd"))
    g.add_argument("--rank", type=int, default=20)
    g.add_argument("--auto-rank", action="store_true", help="choose the CP rank with NORMO")
    g.add_argument("--rmax", type=int, default=25)
    g.add_argument("--delta", type=float, default=0.7)
    g.add_argument("--rel-tol", type=float, default=rel_tol)
    g.add_argument("--max-iters", type=int, default=100)
    g.add_argument("--normalize", action="store_true",
                   help="centre and scale every time slice before decomposing")


def _add_ccid(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("detection")
    g.add_argument("--norm", default="l2", choices=("l2", "linf"))
    g.add_argument("--stop", default="ic", choices=("threshold", "ic"))
    g.add_argument("--const", type=float, default=None, help="threshold constant C")
    g.add_argument("--lambda-t", type=int, default=3)
    g.add_argument("--min-seg", type=int, default=None)
    g.add_argument("--ic-alpha", type=float, default=None, help="penalty multiplier")
    g.add_argument("--rho-sub", type=float, default=None, help="overestimation factor")
    g.add_argument("--subsample", type=int, default=1)
    g.add_argument("--preaverage", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tenseg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def command(name, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--config", type=Path, default=None, help="key = value option file")
        return p

    p = command("simulate", "draw a tensor time series with planted change-points")
    _add_scenario(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True,
                   help="output prefix: writes PREFIX.tsr and PREFIX_truth.csv")
    p.set_defaults(func=cmd_simulate)

    p = command("decompose", "fit a CP or HOSVD model and save it")
    p.add_argument("input", type=Path)
    _add_decomp(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True, help="model directory")
    p.set_defaults(func=cmd_decompose)

    p = command("normo", "NORMO rank sweep; prints rank, max_corr, redundant as CSV")
    p.add_argument("input", type=Path)
    p.add_argument("--rmax", type=int, default=25)
    p.add_argument("--delta", type=float, default=0.7)
    p.add_argument("--rel-tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_normo)

    p = command("detect", "detect change-points in a TSR1 tensor or a CSV matrix")
    p.add_argument("input", type=Path)
    _add_decomp(p)
    _add_ccid(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, default=None,
                   help="output prefix: writes PREFIX.csv and PREFIX.json")
    p.set_defaults(func=cmd_detect)

    p = command("bench", "Monte Carlo replications of a scenario; prints a table row as CSV")
    _add_scenario(p)
    _add_decomp(p, rel_tol=1e-4)
    _add_ccid(p)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--start", type=int, default=0, help="index of the first replication")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timing", action="store_true",
                   help="fill the time column (makes the output run-dependent)")
    p.add_argument("--records", type=Path, default=None,
                   help="also write one CSV line per replication here")
    p.add_argument("--out", type=Path, default=None, help="table CSV (default: stdout)")
    p.set_defaults(func=cmd_bench)

    p = command("eval", "score estimated change-points against the truth")
    p.add_argument("--truth", type=Path, required=True, help="truth CSV from simulate")
    p.add_argument("--estimate", type=Path, required=True,
                   help="detection CSV (index column) or truth-format CSV")
    p.add_argument("--length", type=int, required=True, help="series length T")
    p.set_defaults(func=cmd_eval)

    p = command("run", "simulate once, detect and score (one replication of bench)")
    _add_scenario(p)
    _add_decomp(p, rel_tol=1e-4)
    _add_ccid(p)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_run)
    return parser


# ---------------------------------------------------------------- builders

def _scenario(args) -> ScenarioSpec:
    spec = scenario_spec(args.scenario, args.structure, args.magnitude, args.noise,
                         args.alpha, time_term=args.time_term)
    if args.change_points is None:
        if args.length is not None:
            raise ConfigError("--length needs --change-points")
        return spec
    T = args.length if args.length is not None else spec.T
    pair = spec.segments[:2] if len(spec.segments) > 1 else spec.segments * 2
    cps = tuple(args.change_points)
    segs = tuple(pair[i % 2] for i in range(len(cps) + 1))
    return replace(spec, T=T, change_points=cps, segments=segs, name=f"{spec.name}/custom")


def _decomp(args) -> DecompConfig:
    if args.auto_rank and args.decomp != "cp":
        raise ConfigError("--auto-rank works with --decomp cp only")
    return DecompConfig(kind=args.decomp, rank=None if args.auto_rank else args.rank,
                        r_max=args.rmax, delta=args.delta, rel_tol=args.rel_tol,
                        max_iters=args.max_iters, normalize=args.normalize)


def _ccid(args) -> CcidConfig:
    kw = dict(norm=args.norm, stop=args.stop, const=args.const, lambda_t=args.lambda_t,
              min_seg=args.min_seg)
    if args.ic_alpha is not None:
        kw["ic_alpha"] = args.ic_alpha
    if args.rho_sub is not None:
        kw["rho_sub"] = args.rho_sub
    if args.subsample > 1 and args.preaverage > 1:
        raise ConfigError("--subsample and --preaverage are exclusive")
    if args.subsample < 1 or args.preaverage < 1:
        raise ConfigError("--subsample and --preaverage must be >= 1")
    return CcidConfig(**kw)


# ---------------------------------------------------------------- commands

def cmd_simulate(args) -> int:
    spec = _scenario(args)
    x, truth = generate(spec, args.seed)
    prefix = Path(args.out)
    write_tsr1(prefix.with_name(prefix.name + ".tsr"), x)
    write_truth(prefix.with_name(prefix.name + "_truth.csv"), truth)
    _log(f"{spec.name}: tensor {x.shape}, change-points {truth}")
    print(",".join(str(c) for c in truth))
    return EXIT_OK


def cmd_decompose(args) -> int:
    x = _load(args.input)
    if x.ndim < 3:
        raise ConfigError("decompose needs a tensor with at least 3 modes")
    cfg = _decomp(args)
    if cfg.normalize:
        x = normalize_slices(x)
    if cfg.kind == "hosvd":
        model = hosvd(x, [min(cfg.rank, n) for n in x.shape])
    elif cfg.rank is None:
        als = AlsConfig(rank=1, max_iters=cfg.max_iters, rel_tol=cfg.rel_tol, seed=args.seed)
        model = normo_select(x, NormoConfig(cfg.r_max, cfg.delta, als), keep_model=True).model
    else:
        model = cp_als(x, AlsConfig(rank=cfg.rank, max_iters=cfg.max_iters,
                                    rel_tol=cfg.rel_tol, seed=args.seed))
    save_model(args.out, model)
    fit = np.linalg.norm(model.full() - x) / np.linalg.norm(x)
    print(f"kind,rank,relative_error\n{cfg.kind},{_model_rank(model)},{fit:.6g}")
    return EXIT_OK


def _load(path: Path) -> np.ndarray:
    x = read_tensor(path)
    if not np.all(np.isfinite(x)):
        raise FloatingPointError(f"{path}: input contains NaN or infinite values")
    return x


def _model_rank(model) -> int:
    return model.rank if hasattr(model, "rank") else model.core.shape[-1]


def cmd_normo(args) -> int:
    x = _load(args.input)
    if x.ndim < 3:
        raise ConfigError("normo needs a tensor with at least 3 modes")
    if args.normalize:
        x = normalize_slices(x)
    als = AlsConfig(rank=1, max_iters=args.max_iters, rel_tol=args.rel_tol, seed=args.seed)
    res = normo_select(x, NormoConfig(args.rmax, args.delta, als))
    print("rank,max_corr,redundant")
    for s in res.steps:
        print(f"{s.rank},{s.max_corr:.6f},{int(s.redundant)}")
    _log(f"selected rank {res.rank}")
    return EXIT_OK


def cmd_detect(args) -> int:
    x = _load(args.input)
    ccid = _ccid(args)
    info = {"input": str(args.input), "shape": list(x.shape)}
    if x.ndim == 2:
        series = x  # a p x T matrix goes to the detector unchanged
        info["decomposition"] = None
    elif x.ndim >= 3:
        series, dinfo = extract_series(x, _decomp(args), seed=args.seed)
        info["decomposition"] = dinfo
    else:
        raise ConfigError("input must be a matrix or a tensor with at least 3 modes")
    res = detect_series(series, ccid, args.subsample, args.preaverage)
    if args.out is not None:
        write_detection(args.out, res, {"run": info})
    print("index")
    for c in res.change_points:
        print(c)
    _log(f"{res.n_cpts} change-point(s) in {res.elapsed:.2f} s")
    return EXIT_OK


def cmd_bench(args) -> int:
    spec = _scenario(args)
    records = run_bench(spec, args.reps, args.seed, _decomp(args), _ccid(args), args.workers,
                        args.subsample, args.preaverage, args.start)
    table = tabulate(records)
    if not args.timing:
        table["mean_time"] = None
    rank = "auto" if args.auto_rank else args.rank
    row = table_row(table, "TenSeg", spec.name, rank)
    text = write_table([row])
    if args.out is None:
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text)
    if args.records is not None:
        with open(args.records, "w") as fh:
            fh.write("index,n_hat_minus_n,d_H,estimate\n")
            for i, r in enumerate(records, args.start):
                est = " ".join(str(c) for c in r.est_cps)
                fh.write(f"{i},{r.n_hat_minus_n},{r.d_h:.6f},{est}\n")
    share = table["bins"]["0"] / table["n"]
    _log(f"{spec.name}: exact share {share:.3f} over {table['n']} runs")
    return EXIT_OK


def _read_estimate(path: Path) -> List[int]:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ConfigError(f"{path}: empty file")
    header = lines[0].split(",")
    col = header.index("index") if "index" in header else 0
    try:
        return sorted(int(ln.split(",")[col]) for ln in lines[1:])
    except (ValueError, IndexError):
        raise ConfigError(f"{path}: expected integer change-points") from None


def cmd_eval(args) -> int:
    truth = read_truth(args.truth)
    est = _read_estimate(args.estimate)
    rec = evaluate(truth, est, args.length)
    print("N,N_hat,N_hat_minus_N,d_H")
    print(f"{len(truth)},{len(est)},{rec.n_hat_minus_n},{rec.d_h:.6f}")
    return EXIT_OK


def cmd_run(args) -> int:
    spec = _scenario(args)
    rec = run_bench(spec, 1, args.seed, _decomp(args), _ccid(args),
                    subsample=args.subsample, preaverage=args.preaverage)[0]
    print(json.dumps({"scenario": spec.name, "truth": list(rec.true_cps),
                      "estimate": list(rec.est_cps), "d_H": rec.d_h,
                      "N_hat_minus_N": rec.n_hat_minus_n}))
    return EXIT_OK


# ---------------------------------------------------------------- entry

def _config_tokens(path: Path) -> List[str]:
    tokens = []
    for key, value in read_config(path).items():
        flag = "--" + key.replace("_", "-")
        low = value.lower()
        if low in ("true", "yes", "on"):
            tokens.append(flag)
        elif low in ("false", "no", "off"):
            continue
        else:
            tokens.extend([flag, value])
    return tokens


def _expand_config(argv: List[str]) -> List[str]:
    """Splice ``--config`` entries in right after the subcommand name."""
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path, rest = argv[i + 1], argv[:i] + argv[i + 2:]
        elif tok.startswith("--config="):
            path, rest = tok.split("=", 1)[1], argv[:i] + argv[i + 1:]
        else:
            continue
        cmd = next((j for j, t in enumerate(rest) if not t.startswith("-")), None)
        if cmd is None:
            return argv
        return rest[:cmd + 1] + _config_tokens(Path(path)) + rest[cmd + 1:]
    return argv


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _expand_config(argv)
    except OSError as err:
        _log(f"tenseg: cannot read config: {err}")
        return EXIT_IO
    except FileFormatError as err:
        _log(f"tenseg: {err}")
        return EXIT_CONFIG
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (OSError, EOFError, FileFormatError) as err:
        _log(f"tenseg: I/O error: {err}")
        return EXIT_IO
    except (np.linalg.LinAlgError, FloatingPointError, ArithmeticError) as err:
        _log(f"tenseg: numerical failure: {err}")
        return EXIT_NUMERIC
    except ValueError as err:
        _log(f"tenseg: {err}")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
