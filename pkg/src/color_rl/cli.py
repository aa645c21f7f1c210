"""Command line interface: train, eval, bench, mapgen."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from color_rl import net
from color_rl.bench import run_bench
from color_rl.config import ConfigError, RunConfig, load_config
from color_rl.evaluate import evaluate_params
from color_rl.mapgen import generate_maps, write_maps
from color_rl.net import CheckpointError, Q_NET_SIZES, TrainingDiverged
from color_rl.sim.gridmap import GridMap, MapError
from color_rl.train import cmd_train


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="color",
        description="Train, evaluate, and benchmark a grid-world local path planner.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="run training per a config file")
    p_train.add_argument("--config", required=True, type=Path)
    p_train.add_argument("--seed", type=int, default=None,
                         help="override the config's seed list with one seed")

    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on a map directory")
    p_eval.add_argument("--ckpt", required=True, type=Path)
    p_eval.add_argument("--maps", required=True, type=Path,
                        help="directory of .txt maps")
    p_eval.add_argument("--episodes", type=int, default=20)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--randomize", type=float, default=0.0,
                        help="resample physics per episode within +/- this fraction")
    p_eval.add_argument("--config", type=Path, default=None,
                        help="optional config supplying environment settings")
    p_eval.add_argument("--out", type=Path, default=None, help="write report JSON here")

    p_bench = sub.add_parser("bench", help="measure simulator throughput")
    p_bench.add_argument("--config", required=True, type=Path)
    p_bench.add_argument("--duration", required=True, type=float,
                         help="wall seconds per width")
    p_bench.add_argument("--copies", type=str, default="1,16,64")
    p_bench.add_argument("--backends", type=str, default=None,
                         help="comma list: cy,py (default: all available)")
    p_bench.add_argument("--out", type=Path, default=None)

    p_mapgen = sub.add_parser("mapgen", help="generate random maps")
    p_mapgen.add_argument("--count", required=True, type=int)
    p_mapgen.add_argument("--size", type=int, default=366, help="side length in cm")
    p_mapgen.add_argument("--density", type=float, default=0.08)
    p_mapgen.add_argument("--seed", type=int, default=0)
    p_mapgen.add_argument("--out", required=True, type=Path)
    return parser


def _map_dir(path: Path) -> tuple[list[GridMap], list[str]]:
    files = sorted(path.glob("*.txt"))
    if not files:
        raise MapError(f"no .txt maps found in {path}")
    return [GridMap.load(f) for f in files], [f.stem for f in files]


def _cmd_eval(args) -> int:
    cfg = load_config(args.config) if args.config else RunConfig()
    params = net.load_params(args.ckpt)
    if params.sizes[0] != Q_NET_SIZES[0] or params.sizes[-1] != Q_NET_SIZES[-1]:
        raise CheckpointError(
            f"checkpoint network {params.sizes} is not a "
            f"{Q_NET_SIZES[0]}-state/{Q_NET_SIZES[-1]}-action policy")
    maps, names = _map_dir(args.maps)
    report = evaluate_params(
        params, maps, names, args.episodes, args.seed,
        cfg.env_config(), cfg.nominal_params(),
        randomize_fraction=args.randomize)
    print(report.render())
    if args.out:
        args.out.write_text(json.dumps(report.to_dict(), indent=2))
    return 0


def _cmd_bench(args) -> int:
    cfg = load_config(args.config)
    if not cfg.run.maps:
        raise ConfigError("bench needs maps in the config's [run] maps")
    maps = [GridMap.load(p) for p in cfg.run.maps]
    n_list = tuple(int(v) for v in args.copies.split(",") if v.strip())
    backends = None
    if args.backends:
        backends = tuple(v.strip() for v in args.backends.split(",") if v.strip())
    report = run_bench(maps, args.duration, n_list=n_list, backends=backends,
                       config=cfg.env_config(), nominal=cfg.nominal_params())
    print(report.render())
    if args.out:
        args.out.write_text(json.dumps(report.to_dict(), indent=2))
    return 0


def _cmd_mapgen(args) -> int:
    maps = generate_maps(args.count, args.seed, size_cm=args.size,
                         density=args.density)
    paths = write_maps(maps, args.out)
    for p in paths:
        print(p)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "train":
            cfg = load_config(args.config)
            if args.seed is not None:
                cfg.run.seeds = (args.seed,)
            cmd_train(cfg)
            return 0
        if args.command == "eval":
            return _cmd_eval(args)
        if args.command == "bench":
            return _cmd_bench(args)
        if args.command == "mapgen":
            return _cmd_mapgen(args)
        raise AssertionError(f"unhandled command {args.command}")
    except TrainingDiverged as exc:
        print(f"training aborted: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, MapError, CheckpointError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
