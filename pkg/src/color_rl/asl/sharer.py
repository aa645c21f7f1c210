"""Shared state between the actor and learner threads.

The replay buffer handles its own append/sample atomicity; published model
snapshots are immutable deep copies swapped in whole behind an atomic
reference, so a reader never sees a half-written parameter set.  The step
counters are plain ints, each written by exactly one thread.
"""

from __future__ import annotations

import threading
import zlib
from typing import NamedTuple

from color_rl.asl.tfm import TfmState
from color_rl.net import MlpParams, to_bytes
from color_rl.replay import ReplayBuffer


class PublishedModel(NamedTuple):
    version: int
    params: MlpParams  # treat as immutable
    checksum: int      # crc32 of the serialized parameters


def _checksum(params: MlpParams) -> int:
    return zlib.crc32(to_bytes(params))


def verify_snapshot(snapshot: PublishedModel) -> bool:
    return _checksum(snapshot.params) == snapshot.checksum


class Sharer:
    def __init__(self, buffer: ReplayBuffer, tfm: TfmState | None = None):
        self.buffer = buffer
        self.tfm = tfm or TfmState()
        self.t_step = 0  # written by the actor only
        self.b_step = 0  # written by the learner only
        self.publish_count = 0
        self.stop = threading.Event()
        self._published: PublishedModel | None = None
        self._error: BaseException | None = None

    # -- model exchange ------------------------------------------------------

    def publish_params(self, params: MlpParams) -> PublishedModel:
        snap = PublishedModel(params.version, params.copy(), _checksum(params))
        self._published = snap  # atomic reference swap
        self.publish_count += 1
        return snap

    def fetch_params(self, newer_than: int) -> PublishedModel | None:
        """Latest snapshot if its version exceeds newer_than, else None."""
        snap = self._published
        if snap is not None and snap.version > newer_than:
            return snap
        return None

    @property
    def published_version(self) -> int | None:
        snap = self._published
        return snap.version if snap is not None else None

    # -- progress ------------------------------------------------------------

    def measured_tps(self, batch_size: int) -> float | None:
        t = self.t_step
        if t == 0:
            return None
        return batch_size * self.b_step / t

    # -- failure propagation ---------------------------------------------------

    def record_error(self, exc: BaseException) -> None:
        if self._error is None:
            self._error = exc
        self.stop.set()

    def raise_if_failed(self) -> None:
        if self._error is not None:
            raise self._error

    @property
    def failed(self) -> bool:
        return self._error is not None
