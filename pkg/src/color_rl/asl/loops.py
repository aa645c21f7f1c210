"""The two long-lived loops and the thread session that runs them together.

Actor: fetch the newest published model, act epsilon-greedily on the batched
state, step the vectorized environment, store the transitions, report the
measured interaction period, sleep if the feedback signal says it is ahead.

Learner: once the buffer passes the start threshold, sample, update, publish
every upload_period steps, report the optimization period, sleep if it is
ahead.  The actor owns t_step and raises the stop flag when the step budget
is spent; the learner finishes its current update and exits.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

import numpy as np

from color_rl import net
from color_rl.asl.sharer import Sharer
from color_rl.asl.tfm import TfmConfig
from color_rl.asl.vem import VemSchedule, select_actions
from color_rl.net import MlpParams
from color_rl.replay import BufferNotReady

METRIC_COLUMNS = (
    "wall_time_s",
    "T_step",
    "B_step",
    "measured_TPS",
    "xi_ms",
    "epsilon_min_active",
    "buffer_size",
    "recent_arrival_rate",
    "recent_mean_return",
)

_IDLE_POLL_S = 0.002


def actor_loop(sharer: Sharer, vec_env, initial_states: np.ndarray,
               params: MlpParams, vem: VemSchedule, tfm_cfg: TfmConfig,
               max_steps: int, rng: np.random.Generator) -> None:
    """Collect transitions until t_step reaches max_steps (vec_env already reset)."""
    states = np.asarray(initial_states, dtype=np.float32)
    params = params.copy()
    version = params.version
    n = vec_env.n_copies
    try:
        while sharer.t_step < max_steps and not sharer.stop.is_set():
            started = time.perf_counter()
            snap = sharer.fetch_params(version)
            if snap is not None:
                params, version = snap.params, snap.version
            q = net.forward(params, states)
            eps = vem.epsilons(sharer.t_step)
            actions = select_actions(q, eps, rng)
            batch = vec_env.step_batch(actions)
            sharer.buffer.append_batch(states, actions, batch.rewards,
                                       batch.store_states, batch.dones)
            sharer.tfm.record_interaction(time.perf_counter() - started)
            states = batch.states
            sharer.t_step += n
            nap = sharer.tfm.actor_sleep(tfm_cfg)
            if nap > 0:
                time.sleep(nap)
    finally:
        # the actor owns termination: budget spent (or failure) stops both loops
        sharer.stop.set()


def learner_loop(sharer: Sharer, algo, tfm_cfg: TfmConfig, learn_start: int,
                 upload_period: int, rng: np.random.Generator) -> None:
    """Optimize until the actor raises the stop flag.

    algo must expose online (MlpParams) and update(batch) -> stats; updates
    begin only once the buffer holds more than learn_start transitions.
    """
    batch_size = tfm_cfg.batch_size
    while not sharer.stop.is_set():
        if len(sharer.buffer) <= learn_start:
            time.sleep(_IDLE_POLL_S)
            continue
        started = time.perf_counter()
        try:
            batch = sharer.buffer.sample(batch_size, rng)
        except BufferNotReady:
            time.sleep(_IDLE_POLL_S)
            continue
        algo.update(batch)
        sharer.b_step += 1
        if sharer.b_step % upload_period == 0:
            sharer.publish_params(algo.online)
        sharer.tfm.record_optimization(time.perf_counter() - started)
        nap = sharer.tfm.learner_sleep(tfm_cfg)
        if nap > 0:
            time.sleep(nap)


@dataclass
class Session:
    sharer: Sharer
    actor: threading.Thread
    learner: threading.Thread
    max_steps: int

    @property
    def running(self) -> bool:
        return self.actor.is_alive() or self.learner.is_alive()

    def wait(self, timeout: float | None = None) -> None:
        """Join both loops and re-raise the first loop failure, if any."""
        self.actor.join(timeout)
        self.learner.join(timeout)
        self.sharer.raise_if_failed()

    def abort(self) -> None:
        self.sharer.stop.set()


def _guarded(fn, sharer: Sharer, *args) -> None:
    try:
        fn(sharer, *args)
    except BaseException as exc:  # recorded for Session.wait to re-raise
        sharer.record_error(exc)


def start_session(sharer: Sharer, vec_env, initial_states, params: MlpParams,
                  vem: VemSchedule, tfm_cfg: TfmConfig, max_steps: int, algo,
                  learn_start: int, upload_period: int, seed: int) -> Session:
    """Publish the initial model and launch the actor and learner threads."""
    sharer.publish_params(params)
    actor_rng = np.random.default_rng(np.random.SeedSequence((seed, 0xAC)))
    learner_rng = np.random.default_rng(np.random.SeedSequence((seed, 0x1E)))
    actor = threading.Thread(
        target=_guarded,
        args=(actor_loop, sharer, vec_env, initial_states, params, vem, tfm_cfg,
              max_steps, actor_rng),
        name="color-actor", daemon=True)
    learner = threading.Thread(
        target=_guarded,
        args=(learner_loop, sharer, algo, tfm_cfg, learn_start, upload_period,
              learner_rng),
        name="color-learner", daemon=True)
    actor.start()
    learner.start()
    return Session(sharer, actor, learner, max_steps)
