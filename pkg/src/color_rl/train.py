"""Training orchestration: wires the vectorized environment, the DDQN learner,
and the actor/learner session; owns run directories, metrics, periodic
evaluation, and checkpoints."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from color_rl import net
from color_rl.asl.loops import METRIC_COLUMNS, start_session
from color_rl.asl.sharer import Sharer
from color_rl.config import RunConfig, dump_config
from color_rl.ddqn import DdqnLearner
from color_rl.evaluate import EvalReport, evaluate_params
from color_rl.metrics import MetricsWriter
from color_rl.replay import ReplayBuffer
from color_rl.sim.gridmap import GridMap
from color_rl.vecenv import VecEnv

OUT_DIR_ENV_VAR = "COLOR_OUT_DIR"

_POLL_S = 0.2


@dataclass
class RunResult:
    run_dir: Path
    seed: int
    t_step: int
    b_step: int
    wall_s: float
    final_train_eval: EvalReport
    final_test_eval: EvalReport | None
    best_train_rate: float
    eval_history: list[dict] = field(default_factory=list)

    @property
    def checkpoint_best(self) -> Path:
        return self.run_dir / "best.ckpt"

    @property
    def checkpoint_latest(self) -> Path:
        return self.run_dir / "latest.ckpt"


def resolve_out_root(cfg: RunConfig) -> Path:
    override = os.environ.get(OUT_DIR_ENV_VAR, "").strip()
    return Path(override) if override else Path(cfg.run.out_dir)


def make_run_dir(cfg: RunConfig, seed: int) -> Path:
    root = resolve_out_root(cfg)
    stamp = datetime.now().strftime("%Y%m%d_%H%M%S")
    base = root / f"{cfg.run.mode}_s{seed}_{stamp}"
    run_dir = base
    suffix = 1
    while run_dir.exists():
        run_dir = Path(f"{base}_{suffix}")
        suffix += 1
    run_dir.mkdir(parents=True)
    return run_dir


def _load_maps(paths) -> tuple[list[GridMap], list[str]]:
    maps = [GridMap.load(p) for p in paths]
    names = [Path(p).stem for p in paths]
    return maps, names


def run_training(cfg: RunConfig, seed: int, log=print) -> RunResult:
    cfg.validate()
    if not cfg.run.maps:
        raise ValueError("training requires at least one map in [run] maps")
    train_paths = cfg.train_map_paths()
    maps, map_names = _load_maps(train_paths)
    eval_maps, eval_names = _load_maps(cfg.run.eval_maps)

    run_dir = make_run_dir(cfg, seed)
    (run_dir / "resolved_config.cfg").write_text(dump_config(cfg))

    env_cfg = cfg.env_config()
    vec_env = VecEnv(maps, cfg.env.n_copies, cfg.ranges(), env_cfg)
    initial_states = vec_env.reset_all(seed)

    params = net.init_params(np.random.default_rng(np.random.SeedSequence((seed, 0x0D))))
    algo = DdqnLearner(params, cfg.ddqn_config())
    sharer = Sharer(ReplayBuffer(cfg.train.buffer_capacity))
    sharer.tfm.ema_factor = cfg.tfm.ema_factor
    vem = cfg.vem_schedule()
    tfm_cfg = cfg.tfm_config()

    session = start_session(
        sharer, vec_env, initial_states, algo.online, vem, tfm_cfg,
        cfg.train.t_total, algo, cfg.train.learn_start,
        cfg.train.upload_period, seed)

    cadence = cfg.train.eval_cadence_b_steps
    next_eval_b = cadence if cadence > 0 else None
    eval_history: list[dict] = []
    best_rate = -1.0
    started = time.perf_counter()
    last_metrics = started

    def latest_params():
        snap = sharer.fetch_params(-1)
        return snap.params if snap is not None else algo.online.copy()

    def run_eval(tag: str) -> tuple[EvalReport, EvalReport | None]:
        p = latest_params()
        train_rep = evaluate_params(
            p, maps, map_names, cfg.train.eval_episodes_per_map, seed,
            env_cfg, cfg.nominal_params())
        test_rep = None
        if eval_maps:
            test_rep = evaluate_params(
                p, eval_maps, eval_names, cfg.train.eval_episodes_per_map, seed,
                env_cfg, cfg.nominal_params())
        eval_history.append({
            "tag": tag,
            "t_step": sharer.t_step,
            "b_step": sharer.b_step,
            "wall_s": time.perf_counter() - started,
            "train_arrival_rate": train_rep.arrival_rate,
            "test_arrival_rate": test_rep.arrival_rate if test_rep else None,
            "model_version": p.version,
        })
        return train_rep, test_rep

    def write_metrics_row(writer: MetricsWriter) -> None:
        tfm = sharer.tfm
        xi_ms = None
        if tfm.v_period_s is not None and tfm.b_period_s is not None:
            xi_ms = tfm.compute_xi(tfm_cfg) * 1e3
        snap = vec_env.snapshot_stats(reset=True)
        writer.write_row({
            "wall_time_s": round(time.perf_counter() - started, 3),
            "T_step": sharer.t_step,
            "B_step": sharer.b_step,
            "measured_TPS": sharer.measured_tps(cfg.train.batch_size),
            "xi_ms": None if xi_ms is None else round(xi_ms, 3),
            "epsilon_min_active": float(vem.epsilons(sharer.t_step).min()),
            "buffer_size": len(sharer.buffer),
            "recent_arrival_rate": snap.arrival_rate,
            "recent_mean_return": snap.mean_return,
        })

    with MetricsWriter(run_dir / "metrics.csv", METRIC_COLUMNS) as writer:
        try:
            while session.running:
                time.sleep(_POLL_S)
                now = time.perf_counter()
                if now - last_metrics >= cfg.train.metrics_interval_s:
                    write_metrics_row(writer)
                    last_metrics = now
                if next_eval_b is not None and sharer.b_step >= next_eval_b:
                    train_rep, _ = run_eval(f"b{next_eval_b}")
                    if train_rep.arrival_rate > best_rate:
                        best_rate = train_rep.arrival_rate
                        net.save_params(latest_params(), run_dir / "best.ckpt")
                    next_eval_b += cadence
                if sharer.failed:
                    break
            session.wait()
        finally:
            session.abort()
            write_metrics_row(writer)

    final_params = latest_params()
    net.save_params(final_params, run_dir / "latest.ckpt")
    final_train, final_test = run_eval("final")
    if final_train.arrival_rate >= best_rate:
        best_rate = final_train.arrival_rate
        net.save_params(final_params, run_dir / "best.ckpt")
    if not (run_dir / "best.ckpt").exists():
        net.save_params(final_params, run_dir / "best.ckpt")

    wall = time.perf_counter() - started
    result = RunResult(
        run_dir=run_dir, seed=seed, t_step=sharer.t_step, b_step=sharer.b_step,
        wall_s=wall, final_train_eval=final_train, final_test_eval=final_test,
        best_train_rate=best_rate, eval_history=eval_history)

    report = {
        "seed": seed,
        "mode": cfg.run.mode,
        "t_step": sharer.t_step,
        "b_step": sharer.b_step,
        "wall_s": wall,
        "measured_tps": sharer.measured_tps(cfg.train.batch_size),
        "best_train_arrival_rate": best_rate,
        "final_train_eval": final_train.to_dict(),
        "final_test_eval": final_test.to_dict() if final_test else None,
        "eval_history": eval_history,
    }
    (run_dir / "report.json").write_text(json.dumps(report, indent=2))
    log(f"[seed {seed}] done: t_step={sharer.t_step} b_step={sharer.b_step} "
        f"wall={wall:.1f}s train_rate={final_train.arrival_rate:.2f}"
        + (f" test_rate={final_test.arrival_rate:.2f}" if final_test else ""))
    return result


def cmd_train(cfg: RunConfig, log=print) -> list[RunResult]:
    return [run_training(cfg, seed, log=log) for seed in cfg.run.seeds]
