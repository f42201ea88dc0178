"""Command-line entry point.

Subcommands: phantom, design, baseline, eval, sweep, batch, check.
Exit codes: 0 success, 1 check failure, 2 usage or config error.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .accounting import batch_sweep, fmt6, rows_to_csv
from .baselines import coherence, coherence_vd_design, lbvd_design, uniform_random_mask
from .config import ConfigError, RunConfig, phantom_specs
from .core import DesignConfig, lines_for_rate, mean_metric, read_mask, write_mask
from .decoders import NoMeasurementsError
from .maskdesign import design_mask, evaluate_mask
from .phantom import generate_phantom, spec_to_meta, write_volume

log = logging.getLogger("sgmask")

EXIT_OK, EXIT_CHECK, EXIT_USAGE = 0, 1, 2
SWEEP_METHODS = ("sg", "g", "coherence-vd", "lb-vd", "uniform-random")


class UsageError(Exception):
    pass


def _out_dir(args) -> Path:
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _write(path: Path, text: str):
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def _config(args) -> RunConfig:
    if not args.config:
        raise UsageError("--config is required for this command")
    return RunConfig.load(args.config)


def _dims(vols):
    T, N, _ = vols[0].data.shape if hasattr(vols[0], "data") else vols[0].shape
    return N, T


def _rate_tag(rate):
    return f"{rate:.4f}".rstrip("0").rstrip(".")


# ----------------------------------------------------------------- commands


def cmd_phantom(args):
    cfg = _config(args)
    try:
        specs = phantom_specs(cfg)
        images = [generate_phantom(s) for s in specs]
    except ValueError as exc:
        raise UsageError(f"bad phantom spec: {exc}") from None
    out = _out_dir(args)
    for i, (spec, img) in enumerate(zip(specs, images)):
        path = out / f"vol_{i:03d}.vol"
        try:
            write_volume(path, img, spec_to_meta(spec))
        except OSError as exc:
            raise UsageError(f"cannot write {path}: {exc.strerror}") from None
        print(path)
    return EXIT_OK


def cmd_design(args):
    cfg = _config(args)
    train = cfg.volumes("train")
    if not train:
        raise UsageError("no training volumes")
    dims = _dims(train)
    design, budgets = cfg.design(dims, args.seed)
    decoder = cfg.decoder()
    metric = cfg.metric(args.metric)
    try:
        mask, trace = design_mask(design, train, decoder, metric, threads=args.threads)
    except ValueError as exc:
        raise ConfigError("design", str(exc)) from None
    out = _out_dir(args)
    if len(budgets) == 1:
        _write_mask(out / "mask.txt", mask)
    else:
        # budgets are sorted like the configured rates
        rates = sorted(cfg.get_list("design", "rates", float))
        for rate, n in zip(rates, budgets):
            _write_mask(out / f"mask_r{_rate_tag(rate)}.txt", mask.prefix(n))
    _write(out / "trace.jsonl", trace.dumps())
    print(f"designed {design.label} mask: {len(mask)} lines, {trace.decoder_call_count} decoder calls")
    return EXIT_OK


def _write_mask(path, mask):
    try:
        write_mask(path, mask)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None


def cmd_baseline(args):
    cfg = _config(args)
    method = cfg.raw("baseline", "id").lower()
    rate = cfg.get_float("baseline", "rate")
    seed = args.seed if args.seed is not None else cfg.get_int("baseline", "seed", 0)
    grid = cfg.grid("baseline", rate)
    draws = cfg.draws("baseline")
    if method == "coherence-vd":
        if cfg.has("data"):
            dims = _dims(cfg.volumes("train"))
        else:
            dims = (cfg.get_int("baseline", "N", 32), cfg.get_int("baseline", "T", 8))
        res = coherence_vd_design(rate, dims, grid, draws, seed, threads=args.threads)
    elif method == "lb-vd":
        train = cfg.volumes("train")
        res = lbvd_design(rate, _dims(train), train, cfg.decoder(), cfg.metric(args.metric), grid, draws, seed,
                          threads=args.threads)
    else:
        raise UsageError(f"unknown baseline {method!r}; expected coherence-vd or lb-vd")
    out = _out_dir(args)
    _write_mask(out / "mask.txt", res.mask)
    p = res.params
    summary = (
        f"# method={res.method} width={p.width:.6g} central={p.central} rate={p.rate:.6g} "
        f"mask_coherence={fmt6(coherence(res.mask)) if len(res.mask) else 'nan'}\n"
    )
    _write(out / "baseline.csv", summary + res.to_csv())
    print(summary.strip())
    return EXIT_OK


def cmd_eval(args):
    cfg = _config(args)
    mask_path = cfg.path(cfg.raw("eval", "mask"))
    if not mask_path.exists():
        raise FileNotFoundError(f"mask file not found: {mask_path}")
    mask = read_mask(mask_path)
    vols = cfg.volumes("test")
    dims = _dims(vols)
    if dims != mask.dims:
        raise UsageError(f"mask dims {mask.dims} do not match volume dims {dims}")
    decoder = cfg.decoder()
    metric = cfg.metric(args.metric)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["volume", "rate", "decoder", "metric", "value", "calls"])
    rate = fmt6(len(mask) / (mask.N * mask.T))
    try:
        rep = evaluate_mask(mask, vols, decoder, metric, mask_id=mask_path.name)
    except NoMeasurementsError as exc:
        w.writerow(["all", rate, decoder.id, metric.id, f"error: {exc}", 0])
    else:
        for i, v in enumerate(rep.values):
            w.writerow([i, rate, decoder.id, metric.id, fmt6(v), 1])
        w.writerow(["mean", rate, decoder.id, metric.id, fmt6(rep.mean), rep.decoder_call_count])
    out = _out_dir(args)
    _write(out / "eval.csv", buf.getvalue())
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def _sweep_values(method, rates, seeds, cfg, train, test, decoder, metric, threads):
    """{rate: [per-(seed, volume) metric values]} for one method."""
    N, T = _dims(train)
    budgets = {r: lines_for_rate(r, N, T) for r in rates}
    out = {r: [] for r in rates}

    def score(mask):
        return evaluate_mask(mask, test, decoder, metric).values

    if method in ("sg", "g"):
        design, _ = cfg.design((N, T)) if cfg.has("design") else (None, None)
        k = cfg.get_int("sweep", "k", design.k if design else max(1, N // 4))
        l = cfg.get_int("sweep", "l", design.l if design else 1)  # noqa: E741
        if method == "sg":
            run_seeds = seeds
            template = DesignConfig("SG", "v2", n=max(budgets.values()), k=k, l=l)
        else:
            run_seeds = seeds[:1]  # G-v1 draws no random numbers
            template = DesignConfig("G", "v1", n=max(budgets.values()), k=1, l=1)
        for seed in run_seeds:
            mask, _ = design_mask(replace(template, seed=seed), train, decoder, metric, threads=threads)
            for r in rates:
                out[r].extend(score(mask.prefix(budgets[r])))
        return out
    for seed in seeds:
        for r in rates:
            if method == "uniform-random":
                mask = uniform_random_mask(r, (N, T), seed)
            elif method == "coherence-vd":
                mask = coherence_vd_design(r, (N, T), cfg.grid("sweep", r), cfg.draws("sweep"), seed, threads).mask
            elif method == "lb-vd":
                mask = lbvd_design(r, (N, T), train, decoder, metric, cfg.grid("sweep", r), cfg.draws("sweep"), seed,
                                   threads=threads).mask
            else:
                raise UsageError(f"unknown sweep method {method!r}")
            out[r].extend(score(mask))
    return out


def cmd_sweep(args):
    cfg = _config(args)
    methods = [m.lower() for m in cfg.get_list("sweep", "methods")]
    for m in methods:
        if m not in SWEEP_METHODS:
            raise ConfigError("sweep.methods", f"unknown method {m!r}")
    rates = sorted(set(cfg.get_list("sweep", "rates", float)))
    seeds = [args.seed] if args.seed is not None else cfg.get_list("sweep", "seeds", int, [0])
    train, test = cfg.volumes("train"), cfg.volumes("test")
    decoder, metric = cfg.decoder(), cfg.metric(args.metric)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "rate", "metric", "mean", "count"])
    rows = []
    for m in methods:
        vals = _sweep_values(m, rates, seeds, cfg, train, test, decoder, metric, args.threads)
        for r in rates:
            rows.append((r, methods.index(m), m, mean_metric(vals[r]), len(vals[r])))
    rows.sort()
    for r, _, m, mean, count in rows:
        w.writerow([m, fmt6(r), metric.id, fmt6(mean), count])
    out = _out_dir(args)
    _write(out / "sweep.csv", buf.getvalue())
    sys.stdout.write(buf.getvalue())
    return EXIT_OK


def cmd_batch(args):
    cfg = _config(args)
    train, test = cfg.volumes("train"), cfg.volumes("test")
    dims = _dims(train)
    if cfg.has("design"):
        template, _ = cfg.design(dims)
    else:
        template = DesignConfig("SG", "v2", n=0, k=1, l=1)
    template = replace(template, training_mode=cfg.raw("batch", "training_mode", template.training_mode))
    k_values = cfg.get_list("batch", "k_values", int)
    seeds = [args.seed] if args.seed is not None else cfg.get_list("batch", "seeds", int, [0])
    rates = cfg.get_list("batch", "rates", float, [0.25])
    rows = batch_sweep(template, k_values, seeds, train, test, cfg.decoder(), cfg.metric(args.metric),
                       rates=rates, threads=args.threads)
    text = rows_to_csv(rows)
    out = _out_dir(args)
    _write(out / "batch.csv", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args):
    from .checks import run_checks

    results = run_checks()
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]
    failed = [name for name, ok, _ in results if not ok]
    lines.append("all checks passed" if not failed else "failed checks: " + ", ".join(failed))
    text = "\n".join(lines) + "\n"
    if args.out:
        _write(_out_dir(args) / "check.txt", text)
    sys.stdout.write(text)
    return EXIT_CHECK if failed else EXIT_OK


COMMANDS = {
    "phantom": cmd_phantom,
    "design": cmd_design,
    "baseline": cmd_baseline,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "batch": cmd_batch,
    "check": cmd_check,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="sgmask", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="run-config file (INI)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--metric", choices=("psnr", "ssim", "negmse"), help="override the configured metric")
    parser.add_argument("--threads", type=int, default=1, help="worker threads, 0 = auto")
    parser.add_argument("--seed", type=int, help="override the configured seed")
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.threads == 0:
        args.threads = os.cpu_count() or 1
    if args.threads < 0:
        print("error: --threads must be >= 0", file=sys.stderr)
        return EXIT_USAGE
    if args.out is None and args.command != "check":
        args.out = "."
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
