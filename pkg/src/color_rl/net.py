"""Q-network: a fully connected ReLU stack with hand-rolled backprop and Adam.

The production network is [32, 256, 128, 5] in float32, but every function is
shape- and dtype-generic so tests can run tiny instances in float64.
Checkpoints are little-endian binary with a 'COLORNET' magic header.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

Q_NET_SIZES = (32, 256, 128, 5)

CHECKPOINT_MAGIC = b"COLORNET"
CHECKPOINT_FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Malformed, truncated, or shape-incompatible checkpoint data."""


class TrainingDiverged(RuntimeError):
    """A non-finite loss or parameter appeared during optimization."""


@dataclass
class MlpParams:
    weights: list[np.ndarray]  # each (fan_in, fan_out)
    biases: list[np.ndarray]   # each (fan_out,)
    version: int = 0

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights],
                         [b.copy() for b in self.biases], self.version)


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]


def init_params(rng: np.random.Generator, sizes=Q_NET_SIZES,
                dtype=np.float32) -> MlpParams:
    """He-style uniform fan-in init for the weights, zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-bound, bound, (fan_in, fan_out)).astype(dtype))
        biases.append(np.zeros(fan_out, dtype=dtype))
    return MlpParams(weights, biases)


def _forward_cached(params: MlpParams, states: np.ndarray):
    """Forward pass keeping pre-activations for backprop."""
    acts = [np.asarray(states, dtype=params.weights[0].dtype)]
    pre = []
    h = acts[0]
    last = len(params.weights) - 1
    for li, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = h @ w + b
        pre.append(z)
        h = z if li == last else np.maximum(z, 0.0)
        acts.append(h)
    return acts, pre


def forward(params: MlpParams, states: np.ndarray) -> np.ndarray:
    """Batched Q-values, shape (B, n_actions)."""
    acts, _ = _forward_cached(params, states)
    return acts[-1]


def huber(residual: np.ndarray, delta: float = 1.0) -> np.ndarray:
    a = np.abs(residual)
    return np.where(a <= delta, 0.5 * residual * residual, delta * (a - 0.5 * delta))


def backward(params: MlpParams, states: np.ndarray, actions: np.ndarray,
             targets: np.ndarray):
    """Gradients of the mean Huber(delta=1) loss on the chosen-action outputs.

    Returns (Gradients, loss, mean_abs_td).  Only q[i, actions[i]] receives
    gradient; the TD residual is q[i, a_i] - targets[i].
    """
    acts, pre = _forward_cached(params, states)
    q = acts[-1]
    batch = q.shape[0]
    rows = np.arange(batch)
    actions = np.asarray(actions, dtype=np.int64)
    residual = q[rows, actions] - np.asarray(targets, dtype=q.dtype)
    loss = float(huber(residual).mean())
    mean_abs_td = float(np.abs(residual).mean())

    dq = np.zeros_like(q)
    dq[rows, actions] = np.clip(residual, -1.0, 1.0) / batch

    grad_w = [np.empty(0)] * len(params.weights)
    grad_b = [np.empty(0)] * len(params.biases)
    delta = dq
    for li in range(len(params.weights) - 1, -1, -1):
        grad_w[li] = acts[li].T @ delta
        grad_b[li] = delta.sum(axis=0)
        if li > 0:
            delta = (delta @ params.weights[li].T) * (pre[li - 1] > 0)
    return Gradients(grad_w, grad_b), loss, mean_abs_td


@dataclass
class AdamState:
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m_weights: list[np.ndarray] = field(default_factory=list)
    v_weights: list[np.ndarray] = field(default_factory=list)
    m_biases: list[np.ndarray] = field(default_factory=list)
    v_biases: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params: MlpParams, lr: float = 1e-4) -> "AdamState":
        return cls(
            lr=lr,
            m_weights=[np.zeros_like(w) for w in params.weights],
            v_weights=[np.zeros_like(w) for w in params.weights],
            m_biases=[np.zeros_like(b) for b in params.biases],
            v_biases=[np.zeros_like(b) for b in params.biases],
        )


def _adam_update(p, g, m, v, st: AdamState, t: int) -> None:
    m *= st.beta1
    m += (1.0 - st.beta1) * g
    v *= st.beta2
    v += (1.0 - st.beta2) * np.square(g)
    m_hat = m / (1.0 - st.beta1 ** t)
    v_hat = v / (1.0 - st.beta2 ** t)
    p -= st.lr * m_hat / (np.sqrt(v_hat) + st.eps)


def adam_step(params: MlpParams, grads: Gradients, state: AdamState) -> MlpParams:
    """Bias-corrected Adam update in place; bumps the parameter version."""
    state.step += 1
    t = state.step
    for li in range(len(params.weights)):
        _adam_update(params.weights[li], grads.weights[li],
                     state.m_weights[li], state.v_weights[li], state, t)
        _adam_update(params.biases[li], grads.biases[li],
                     state.m_biases[li], state.v_biases[li], state, t)
    params.version += 1
    return params


def sync_target(online: MlpParams, target: MlpParams) -> MlpParams:
    """Hard-copy online into target (shapes must already match)."""
    if online.sizes != target.sizes:
        raise ValueError(f"shape mismatch: {online.sizes} vs {target.sizes}")
    for wt, wo in zip(target.weights, online.weights):
        np.copyto(wt, wo)
    for bt, bo in zip(target.biases, online.biases):
        np.copyto(bt, bo)
    target.version = online.version
    return target


# -- serialization -----------------------------------------------------------

def to_bytes(params: MlpParams) -> bytes:
    buf = io.BytesIO()
    buf.write(CHECKPOINT_MAGIC)
    sizes = params.sizes
    buf.write(struct.pack("<II", CHECKPOINT_FORMAT_VERSION, len(sizes)))
    buf.write(struct.pack(f"<{len(sizes)}I", *sizes))
    for w, b in zip(params.weights, params.biases):
        buf.write(np.ascontiguousarray(w, dtype="<f4").tobytes())
        buf.write(np.ascontiguousarray(b, dtype="<f4").tobytes())
    buf.write(struct.pack("<Q", params.version))
    return buf.getvalue()


def from_bytes(data: bytes, expect_sizes=None) -> MlpParams:
    buf = io.BytesIO(data)

    def read(n: int, what: str) -> bytes:
        chunk = buf.read(n)
        if len(chunk) != n:
            raise CheckpointError(f"truncated checkpoint while reading {what}")
        return chunk

    if read(len(CHECKPOINT_MAGIC), "magic") != CHECKPOINT_MAGIC:
        raise CheckpointError("bad magic bytes; not a COLORNET checkpoint")
    fmt, n_sizes = struct.unpack("<II", read(8, "header"))
    if fmt != CHECKPOINT_FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint format version {fmt}")
    if not 2 <= n_sizes <= 64:
        raise CheckpointError(f"implausible layer count {n_sizes}")
    sizes = struct.unpack(f"<{n_sizes}I", read(4 * n_sizes, "layer sizes"))
    if expect_sizes is not None and tuple(sizes) != tuple(expect_sizes):
        raise CheckpointError(
            f"layer sizes {tuple(sizes)} do not match expected {tuple(expect_sizes)}")
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        w = np.frombuffer(read(4 * fan_in * fan_out, "weights"), dtype="<f4")
        weights.append(w.reshape(fan_in, fan_out).copy())
        b = np.frombuffer(read(4 * fan_out, "biases"), dtype="<f4")
        biases.append(b.copy())
    (version,) = struct.unpack("<Q", read(8, "version"))
    if buf.read(1):
        raise CheckpointError("trailing bytes after checkpoint payload")
    return MlpParams(weights, biases, int(version))


def save_params(params: MlpParams, path) -> None:
    Path(path).write_bytes(to_bytes(params))


def load_params(path, expect_sizes=None) -> MlpParams:
    return from_bytes(Path(path).read_bytes(), expect_sizes=expect_sizes)
