"""Command line front end: ``match``, ``eval`` and ``arch``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import arch, evaluation
from .config import SgmConfig, apply_settings, load_config
from .cost import ALL_KINDS, CostFamily, CostKind, max_cost
from .imagery import GrayImage, load_gray, save_gray
from .pipeline import match

log = logging.getLogger("rankstereo")


def _shared(p: argparse.ArgumentParser):
    g = p.add_argument_group("matcher options (override --config)")
    g.add_argument("--config", metavar="FILE", help="key = value configuration file")
    g.add_argument("--kernel", metavar="MxN")
    g.add_argument("--dmax", type=int)
    g.add_argument("--p1", type=int)
    g.add_argument("--p2", type=int, help="numerator P2' of the adaptive penalty")
    g.add_argument("--cost", choices=[f.value for f in CostFamily])
    g.add_argument("--alpha", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--border-margin", type=int)
    g.add_argument("--lmax", type=int)
    g.add_argument("--workers", type=int)
    g.add_argument("--no-subpixel", action="store_true")
    g.add_argument("--no-median", action="store_true")
    g.add_argument("--no-lr-check", action="store_true")
    g.add_argument("--no-fill", action="store_true")
    g.add_argument("--out", metavar="PATH")


def build_config(args) -> SgmConfig:
    cfg = load_config(args.config) if args.config else SgmConfig()
    flags = {
        "kernel": args.kernel, "dmax": args.dmax, "p1": args.p1, "p2": args.p2,
        "cost": args.cost, "alpha": args.alpha, "delta": args.delta,
        "border_margin": args.border_margin, "lmax": args.lmax, "workers": args.workers,
    }
    for name, key in (("no_subpixel", "subpixel"), ("no_median", "median"),
                      ("no_lr_check", "lr_check"), ("no_fill", "fill_holes")):
        if getattr(args, name):
            flags[key] = "false"
    return apply_settings(cfg, flags)


def _echo(cfg: SgmConfig, out=None):
    out = out or sys.stdout
    for line in cfg.to_text().splitlines():
        print(f"# {line}", file=out)


def cmd_match(args) -> int:
    cfg = build_config(args)
    out = args.out or "disparity.pgm"
    left, right = load_gray(args.left), load_gray(args.right)
    res = match(left, right, cfg)
    save_gray(GrayImage(res.rendered), out)
    _echo(cfg)
    print(f"wrote {out} ({left.width}x{left.height})")
    print(f"runtime_ms = {res.runtime_ms:.1f}")
    print(f"coverage = {res.coverage:.4f}")
    return 0


def cmd_eval(args) -> int:
    cfg = build_config(args)
    kinds = [CostKind(CostFamily(args.cost), cfg.cost_kind.alpha)] if args.cost else [
        CostKind(k.variant, cfg.cost_kind.alpha) for k in ALL_KINDS]
    datasets = evaluation.discover(args.dataset_dir)
    reports = evaluation.run_benchmark(datasets, kinds, cfg) if datasets else []
    text = evaluation.to_csv(reports)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    _echo(cfg, sys.stderr)
    if not datasets:
        print(f"no datasets found under {args.dataset_dir}", file=sys.stderr)
        return 1
    if reports:
        print(evaluation.table(reports), file=sys.stderr)
    failed = [r for r in reports if not r.ok]
    for r in failed:
        print(f"{r.dataset}/{r.cost_kind}: {r.error}", file=sys.stderr)
    return 1 if failed else 0


def _parse_list(text, conv):
    return [conv(t) for t in text.split(",") if t.strip()]


def _resolution(text):
    aliases = {"720p": (1280, 720), "1080p": (1920, 1080), "vga": (640, 480)}
    if text.lower() in aliases:
        return text, *aliases[text.lower()]
    w, _, h = text.lower().partition("x")
    return text, int(w), int(h)


def cmd_arch(args) -> int:
    cfg = build_config(args)
    if args.res or args.fps:
        resolutions = _parse_list(args.res or "450x375", _resolution)
        rates = _parse_list(args.fps or "30", float)
        configs = [(f"{label}/{fps:g}fps", w, h, fps) for label, w, h in resolutions for fps in rates]
    else:
        configs = arch.OPERATING_POINTS

    print("configuration,f_max_mhz")
    for label, w, h, fps in configs:
        print(f"{label},{arch.max_frequency(w, h, fps):.1f}")

    widths = sorted({w for _, w, _, _ in configs})
    print()
    print("dmax,width,l_max,m_b_bits,m_b_kb")
    for w in widths:
        bits = arch.memory_budget(cfg.dmax, w, cfg.lmax)
        print(f"{cfg.dmax},{w},{cfg.lmax},{bits},{bits / 8 / 1024:.1f}")

    pen = cfg.penalties
    cost_bits, lr_bits = arch.bitwidth_plan(max_cost(cfg.cost_kind, cfg.kernel), pen)
    print()
    print(f"cost_kind = {cfg.cost_kind.name}")
    print(f"cost_bits = {cost_bits}")
    print(f"lr_bits = {lr_bits}")

    if args.simulate:
        if args.left and args.right:
            left, right = load_gray(args.left), load_gray(args.right)
        else:
            rng = np.random.default_rng(args.seed)
            w, h = _resolution(args.sim_size)[1:]
            left = GrayImage(rng.integers(0, 256, (h, w), dtype=np.uint8))
            right = GrayImage(rng.integers(0, 256, (h, w), dtype=np.uint8))
        sim_cfg = cfg if cfg.cost_kind.variant.is_rank else cfg.replace(cost_kind=CostKind())
        _, rep = arch.streaming_pipeline(left, right, sim_cfg, fps=configs[0][3])
        print()
        print(f"simulated = {left.width}x{left.height}, dmax {sim_cfg.dmax}")
        for line in rep.lines():
            print(line)
        if not rep.equivalent:
            return 1
    return 0


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rankstereo", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    m = sub.add_parser("match", help="match a rectified pair and write a rendered disparity PGM")
    m.add_argument("left")
    m.add_argument("right")
    _shared(m)
    m.set_defaults(func=cmd_match)

    e = sub.add_parser("eval", help="error matching ratios over a dataset directory")
    e.add_argument("dataset_dir")
    _shared(e)
    e.set_defaults(func=cmd_eval)

    a = sub.add_parser("arch", help="operating frequencies, buffer budget, streaming simulation")
    a.add_argument("--res", help="comma-separated WxH list (720p accepted)")
    a.add_argument("--fps", help="comma-separated frame rates")
    a.add_argument("--simulate", action="store_true", help="run the streaming model")
    a.add_argument("--left")
    a.add_argument("--right")
    a.add_argument("--sim-size", default="16x12")
    a.add_argument("--seed", type=int, default=0)
    _shared(a)
    a.set_defaults(func=cmd_arch)
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
