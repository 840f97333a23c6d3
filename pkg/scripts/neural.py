"""Recurrent classifiers in plain numpy: cells, stacking, dense head, BPTT and Adam.

Conventions
-----------
* Batches are ``(B, T, D)`` float64 tensors with a ``(B, T)`` mask; a masked step
  leaves the recurrent state untouched.
* Gate pre-activations use row vectors: ``pre = x @ W.T + h @ U.T + b`` with
  ``W`` of shape ``(G*H, D)``, ``U`` of shape ``(G*H, H)`` and ``b`` of shape ``(G*H,)``.
  Gate blocks are ordered ``z, r, h~`` for GRU and ``i, f, o, g`` for LSTM.
* Parameters live in a flat name -> array mapping (``l0.fwd.W``, ``l1.bwd.b``,
  ``head.w``, ``head.b``) shared by gradients, optimizer moments and checkpoints.
* The classifier feature is the concatenation of the last layer's direction finals
  (forward after t=T-1, backward after t=0). Dropout is inverted and applied to that
  feature during training only; optional ``layer_dropout`` acts between stacked layers.
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

from scripts.errors import ConfigError, DimensionError, NumericError
from scripts.features import SequenceTensor

LOGGER = logging.getLogger(__name__)

PROB_EPS = 1e-7
LSTM_FORGET_BIAS = 1.0

Tensors = Dict[str, np.ndarray]


class CellKind(str, Enum):
    RNN = "rnn"
    GRU = "gru"
    LSTM = "lstm"

    @property
    def gates(self) -> int:
        return {CellKind.RNN: 1, CellKind.GRU: 3, CellKind.LSTM: 4}[self]


@dataclass
class CellParams:
    """One direction of one layer."""

    kind: CellKind
    W: np.ndarray
    U: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        gh = self.U.shape[0]
        if gh % self.kind.gates or self.U.shape != (gh, gh // self.kind.gates):
            raise DimensionError(f"{self.kind.value} U has shape {self.U.shape}")
        if self.W.ndim != 2 or self.W.shape[0] != gh or self.b.shape != (gh,):
            raise DimensionError(
                f"{self.kind.value} W {self.W.shape} / b {self.b.shape} "
                f"do not match U {self.U.shape}"
            )

    @property
    def input_dim(self) -> int:
        return int(self.W.shape[1])

    @property
    def hidden_dim(self) -> int:
        return int(self.U.shape[1])


@dataclass
class ClassifierParams:
    """Architecture description plus every parameter tensor, keyed by name."""

    cell: CellKind
    input_dim: int
    hidden_dim: int
    layers: int
    bidirectional: bool
    tensors: Tensors
    dropout: float = 0.5
    layer_dropout: float = 0.0

    def __post_init__(self):
        if self.layers not in (1, 2):
            raise ConfigError(f"layers must be 1 or 2, got {self.layers}")
        for name, rate in (("dropout", self.dropout), ("layer_dropout", self.layer_dropout)):
            if not 0.0 <= rate < 1.0:
                raise ConfigError(f"{name} must be in [0, 1), got {rate}")
        expected = self.shapes()
        if set(expected) != set(self.tensors):
            missing = sorted(set(expected) - set(self.tensors))
            extra = sorted(set(self.tensors) - set(expected))
            raise DimensionError(f"tensor names mismatch: missing {missing}, unexpected {extra}")
        for name, shape in expected.items():
            if self.tensors[name].shape != shape:
                raise DimensionError(
                    f"{name} has shape {self.tensors[name].shape}, expected {shape}"
                )

    @property
    def directions(self) -> Tuple[str, ...]:
        return ("fwd", "bwd") if self.bidirectional else ("fwd",)

    @property
    def head_width(self) -> int:
        return self.hidden_dim * len(self.directions)

    def shapes(self) -> Dict[str, Tuple[int, ...]]:
        return parameter_shapes(
            self.cell, self.input_dim, self.hidden_dim, self.layers, self.bidirectional
        )

    def cell_params(self, layer: int, direction: str) -> CellParams:
        prefix = f"l{layer}.{direction}"
        return CellParams(
            self.cell,
            self.tensors[f"{prefix}.W"],
            self.tensors[f"{prefix}.U"],
            self.tensors[f"{prefix}.b"],
        )

    def with_tensors(self, tensors: Tensors) -> "ClassifierParams":
        return ClassifierParams(
            self.cell,
            self.input_dim,
            self.hidden_dim,
            self.layers,
            self.bidirectional,
            tensors,
            self.dropout,
            self.layer_dropout,
        )

    def copy(self) -> "ClassifierParams":
        return self.with_tensors({k: v.copy() for k, v in self.tensors.items()})

    def is_finite(self) -> bool:
        return all(np.all(np.isfinite(v)) for v in self.tensors.values())


def parameter_shapes(
    cell: CellKind, input_dim: int, hidden_dim: int, layers: int, bidirectional: bool
) -> Dict[str, Tuple[int, ...]]:
    """Ordered name -> shape table of a classifier."""
    gh = cell.gates * hidden_dim
    directions = ("fwd", "bwd") if bidirectional else ("fwd",)
    shapes: Dict[str, Tuple[int, ...]] = {}
    layer_in = input_dim
    for layer in range(layers):
        for d in directions:
            shapes[f"l{layer}.{d}.W"] = (gh, layer_in)
            shapes[f"l{layer}.{d}.U"] = (gh, hidden_dim)
            shapes[f"l{layer}.{d}.b"] = (gh,)
        layer_in = hidden_dim * len(directions)
    shapes["head.w"] = (layer_in,)
    shapes["head.b"] = (1,)
    return shapes


def _glorot(rng: np.random.Generator, fan_out: int, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def init_params(
    cell: CellKind,
    input_dim: int,
    hidden_dim: int,
    layers: int = 1,
    bidirectional: bool = False,
    dropout: float = 0.5,
    layer_dropout: float = 0.0,
    seed: int = 0,
) -> ClassifierParams:
    """Glorot-uniform gate matrices, zero biases (LSTM forget gate 1.0)."""
    rng = np.random.default_rng(seed)
    tensors: Tensors = {}
    for name, shape in parameter_shapes(cell, input_dim, hidden_dim, layers, bidirectional).items():
        if name == "head.w":
            tensors[name] = _glorot(rng, 1, shape[0]).reshape(shape)
        elif name.endswith(".W") or name.endswith(".U"):
            tensors[name] = np.vstack(
                [_glorot(rng, hidden_dim, shape[1]) for _ in range(cell.gates)]
            )
        else:
            tensors[name] = np.zeros(shape, dtype=np.float64)
            if cell is CellKind.LSTM and name != "head.b":
                tensors[name][hidden_dim : 2 * hidden_dim] = LSTM_FORGET_BIAS
    return ClassifierParams(
        cell, input_dim, hidden_dim, layers, bidirectional, tensors, dropout, layer_dropout
    )


# --- cells ------------------------------------------------------------------------------


def _cell_forward(kind: CellKind, p: CellParams, x: np.ndarray, h: np.ndarray, c: np.ndarray):
    """Returns (h_new, c_new, cache) for a (B, D) input and (B, H) state."""
    H = p.hidden_dim
    if kind is CellKind.RNN:
        h_new = np.tanh(x @ p.W.T + h @ p.U.T + p.b)
        return h_new, c, (h_new,)
    if kind is CellKind.GRU:
        pre_x = x @ p.W.T + p.b
        zr = expit(pre_x[:, : 2 * H] + h @ p.U[: 2 * H].T)
        z, r = zr[:, :H], zr[:, H:]
        n = np.tanh(pre_x[:, 2 * H :] + (r * h) @ p.U[2 * H :].T)
        return (1.0 - z) * h + z * n, c, (z, r, n)
    pre = x @ p.W.T + h @ p.U.T + p.b
    i = expit(pre[:, :H])
    f = expit(pre[:, H : 2 * H])
    o = expit(pre[:, 2 * H : 3 * H])
    g = np.tanh(pre[:, 3 * H :])
    c_new = f * c + i * g
    tc = np.tanh(c_new)
    return o * tc, c_new, (i, f, o, g, tc)


def _cell_backward(
    kind: CellKind,
    p: CellParams,
    x: np.ndarray,
    h: np.ndarray,
    c: np.ndarray,
    cache: tuple,
    dh_new: np.ndarray,
    dc_new: np.ndarray,
    grads: Tensors,
):
    """Accumulates into grads["W"|"U"|"b"]; returns (dx, dh_prev, dc_prev)."""
    H = p.hidden_dim
    if kind is CellKind.RNN:
        (h_new,) = cache
        dpre = dh_new * (1.0 - h_new**2)
        grads["W"] += dpre.T @ x
        grads["U"] += dpre.T @ h
        grads["b"] += dpre.sum(axis=0)
        return dpre @ p.W, dpre @ p.U, dc_new
    if kind is CellKind.GRU:
        z, r, n = cache
        dn_pre = dh_new * z * (1.0 - n**2)
        drh = dn_pre @ p.U[2 * H :]
        dz_pre = dh_new * (n - h) * z * (1.0 - z)
        dr_pre = drh * h * r * (1.0 - r)
        dzr = np.hstack([dz_pre, dr_pre])
        dpre = np.hstack([dzr, dn_pre])
        grads["W"] += dpre.T @ x
        grads["U"][: 2 * H] += dzr.T @ h
        grads["U"][2 * H :] += dn_pre.T @ (r * h)
        grads["b"] += dpre.sum(axis=0)
        dh_prev = dh_new * (1.0 - z) + drh * r + dzr @ p.U[: 2 * H]
        return dpre @ p.W, dh_prev, dc_new
    i, f, o, g, tc = cache
    dc = dc_new + dh_new * o * (1.0 - tc**2)
    dpre = np.hstack(
        [
            dc * g * i * (1.0 - i),
            dc * c * f * (1.0 - f),
            dh_new * tc * o * (1.0 - o),
            dc * i * (1.0 - g**2),
        ]
    )
    grads["W"] += dpre.T @ x
    grads["U"] += dpre.T @ h
    grads["b"] += dpre.sum(axis=0)
    return dpre @ p.W, dpre @ p.U, dc * f


def _check_step(p: CellParams, x: np.ndarray, h: np.ndarray) -> None:
    if x.shape[-1] != p.input_dim or h.shape[-1] != p.hidden_dim:
        raise DimensionError(
            f"x width {x.shape[-1]} / h width {h.shape[-1]} do not match "
            f"cell ({p.input_dim} -> {p.hidden_dim})"
        )


def _step(kind: CellKind, p: CellParams, x, h, c=None):
    x, h = np.asarray(x, dtype=np.float64), np.asarray(h, dtype=np.float64)
    if p.kind is not kind:
        raise DimensionError(f"expected {kind.value} parameters, got {p.kind.value}")
    _check_step(p, x, h)
    single = x.ndim == 1
    x2, h2 = np.atleast_2d(x), np.atleast_2d(h)
    c2 = np.atleast_2d(np.zeros_like(h) if c is None else np.asarray(c, dtype=np.float64))
    h_new, c_new, _ = _cell_forward(kind, p, x2, h2, c2)
    if single:
        return h_new[0], c_new[0]
    return h_new, c_new


def rnn_step(p: CellParams, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    """Elman step: ``tanh(Wx + Uh + b)``."""
    return _step(CellKind.RNN, p, x, h)[0]


def gru_step(p: CellParams, x: np.ndarray, h: np.ndarray) -> np.ndarray:
    return _step(CellKind.GRU, p, x, h)[0]


def lstm_step(
    p: CellParams, x: np.ndarray, state: Tuple[np.ndarray, np.ndarray]
) -> Tuple[np.ndarray, np.ndarray]:
    h, c = state
    return _step(CellKind.LSTM, p, x, h, c)


# --- directions and layers --------------------------------------------------------------


@dataclass
class _DirectionTrace:
    order: List[int]
    inputs: np.ndarray
    mask: np.ndarray
    h_prev: List[np.ndarray] = field(default_factory=list)
    c_prev: List[np.ndarray] = field(default_factory=list)
    caches: List[tuple] = field(default_factory=list)


def _direction_forward(p: CellParams, X: np.ndarray, M: np.ndarray, reverse: bool):
    """Runs one direction; returns (per-step states (B,T,H), final state, trace)."""
    B, T, _ = X.shape
    H = p.hidden_dim
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    order = list(range(T - 1, -1, -1)) if reverse else list(range(T))
    trace = _DirectionTrace(order, X, M)
    outputs = np.zeros((B, T, H))
    for t in order:
        m = M[:, t, None]
        h_new, c_new, cache = _cell_forward(p.kind, p, X[:, t], h, c)
        trace.h_prev.append(h)
        trace.c_prev.append(c)
        trace.caches.append(cache)
        h = m * h_new + (1.0 - m) * h
        c = m * c_new + (1.0 - m) * c
        outputs[:, t] = h
    return outputs, h, trace


def _direction_backward(
    p: CellParams, trace: _DirectionTrace, d_outputs: Optional[np.ndarray], d_final: np.ndarray
):
    """BPTT through one direction; returns (dX, {"W","U","b"} gradients)."""
    grads = {"W": np.zeros_like(p.W), "U": np.zeros_like(p.U), "b": np.zeros_like(p.b)}
    dX = np.zeros_like(trace.inputs)
    dh = d_final.copy()
    dc = np.zeros_like(dh)
    for step in range(len(trace.order) - 1, -1, -1):
        t = trace.order[step]
        m = trace.mask[:, t, None]
        if d_outputs is not None:
            dh = dh + d_outputs[:, t]
        dx, dh_prev, dc_prev = _cell_backward(
            p.kind,
            p,
            trace.inputs[:, t],
            trace.h_prev[step],
            trace.c_prev[step],
            trace.caches[step],
            m * dh,
            m * dc,
            grads,
        )
        dX[:, t] = dx
        dh = dh_prev + (1.0 - m) * dh
        dc = dc_prev + (1.0 - m) * dc
    return dX, grads


def run_direction(cell: CellParams, seq: SequenceTensor, reverse: bool = False) -> np.ndarray:
    """Final hidden state of one direction over a single sequence."""
    if seq.dim != cell.input_dim:
        raise DimensionError(f"sequence width {seq.dim} != cell input {cell.input_dim}")
    X = seq.vectors[None, :, :].astype(np.float64)
    M = seq.mask[None, :].astype(np.float64)
    _, final, _ = _direction_forward(cell, X, M, reverse)
    return final[0]


def pad_batch(sequences: Sequence[SequenceTensor]) -> Tuple[np.ndarray, np.ndarray]:
    """Zero-pad sequences to a common length: (B, T, D) tensor and (B, T) mask."""
    if not sequences:
        raise DimensionError("cannot pad an empty batch")
    dims = {s.dim for s in sequences}
    if len(dims) != 1:
        raise DimensionError(f"sequences have mixed widths {sorted(dims)}")
    T = max(s.length for s in sequences)
    X = np.zeros((len(sequences), T, dims.pop()), dtype=np.float64)
    M = np.zeros((len(sequences), T), dtype=bool)
    for row, s in enumerate(sequences):
        X[row, : s.length] = s.vectors
        M[row, : s.length] = s.mask
    return X, M


# --- classifier -------------------------------------------------------------------------


@dataclass
class _ForwardTrace:
    layer_traces: List[Dict[str, _DirectionTrace]]
    layer_masks: List[Optional[np.ndarray]]
    feature: np.ndarray
    head_mask: Optional[np.ndarray]
    probs: np.ndarray


def dropout_mask(
    width: Union[int, Tuple[int, ...]], rate: float, rng: np.random.Generator
) -> np.ndarray:
    """Inverted dropout mask: 0 with probability ``rate``, else ``1 / (1 - rate)``."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    shape = (width,) if isinstance(width, int) else tuple(width)
    if rate == 0.0:
        return np.ones(shape, dtype=np.float64)
    keep = rng.random(shape) >= rate
    return keep.astype(np.float64) / (1.0 - rate)


def _forward(
    params: ClassifierParams,
    X: np.ndarray,
    M: np.ndarray,
    head_mask: Optional[np.ndarray] = None,
    layer_masks: Optional[Sequence[Optional[np.ndarray]]] = None,
) -> _ForwardTrace:
    if X.ndim != 3 or X.shape[2] != params.input_dim:
        raise DimensionError(f"input batch {X.shape} does not match input_dim {params.input_dim}")
    Mf = M.astype(np.float64)
    inputs = X.astype(np.float64)
    layer_traces: List[Dict[str, _DirectionTrace]] = []
    used_masks: List[Optional[np.ndarray]] = []
    finals: List[np.ndarray] = []
    for layer in range(params.layers):
        outs, finals, traces = [], [], {}
        for d in params.directions:
            out, final, trace = _direction_forward(
                params.cell_params(layer, d), inputs, Mf, reverse=(d == "bwd")
            )
            outs.append(out)
            finals.append(final)
            traces[d] = trace
        layer_traces.append(traces)
        if layer < params.layers - 1:
            lm = layer_masks[layer] if layer_masks else None
            seq_out = np.concatenate(outs, axis=2)
            inputs = seq_out * lm if lm is not None else seq_out
            used_masks.append(lm)
    feature = np.concatenate(finals, axis=1)
    dropped = feature * head_mask if head_mask is not None else feature
    probs = expit(dropped @ params.tensors["head.w"] + params.tensors["head.b"][0])
    return _ForwardTrace(layer_traces, used_masks, feature, head_mask, probs)


def predict_batch(params: ClassifierParams, X: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Inference probabilities for a padded batch (dropout off)."""
    return _forward(params, X, M).probs


def forward(params: ClassifierParams, seq: SequenceTensor) -> float:
    X, M = pad_batch([seq])
    return float(predict_batch(params, X, M)[0])


def bce_loss(p, y):
    """Binary cross-entropy with ``p`` clamped into [1e-7, 1 - 1e-7]; elementwise."""
    p = np.clip(np.asarray(p, dtype=np.float64), PROB_EPS, 1.0 - PROB_EPS)
    y = np.asarray(y, dtype=np.float64)
    loss = -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))
    return float(loss) if loss.ndim == 0 else loss


def sample_masks(
    params: ClassifierParams, batch: int, steps: int, rng: np.random.Generator
) -> Tuple[Optional[np.ndarray], List[Optional[np.ndarray]]]:
    """Training-time dropout masks for the head feature and between layers."""
    head_mask = None
    if params.dropout > 0:
        head_mask = dropout_mask((batch, params.head_width), params.dropout, rng)
    layer_masks: List[Optional[np.ndarray]] = []
    for _ in range(params.layers - 1):
        layer_masks.append(
            dropout_mask((batch, steps, params.head_width), params.layer_dropout, rng)
            if params.layer_dropout > 0
            else None
        )
    return head_mask, layer_masks


def loss_and_grads(
    params: ClassifierParams,
    X: np.ndarray,
    M: np.ndarray,
    y: np.ndarray,
    rng: Optional[np.random.Generator] = None,
    head_mask: Optional[np.ndarray] = None,
    layer_masks: Optional[Sequence[Optional[np.ndarray]]] = None,
) -> Tuple[float, Tensors]:
    """Mean BCE over the batch and its exact gradient for every tensor.

    With ``rng`` given, dropout masks are sampled; explicit masks take precedence.
    """
    y = np.asarray(y, dtype=np.float64)
    B = X.shape[0]
    if y.shape != (B,):
        raise DimensionError(f"{y.shape[0] if y.ndim else 1} labels for a batch of {B}")
    if rng is not None and head_mask is None and layer_masks is None:
        head_mask, layer_masks = sample_masks(params, B, X.shape[1], rng)
    fwd = _forward(params, X, M, head_mask, layer_masks)
    loss = float(np.mean(bce_loss(fwd.probs, y)))
    if not np.isfinite(loss):
        raise NumericError(f"non-finite loss {loss}")

    inside = (fwd.probs > PROB_EPS) & (fwd.probs < 1.0 - PROB_EPS)
    dlogit = np.where(inside, (fwd.probs - y) / B, 0.0)
    dropped = fwd.feature * head_mask if head_mask is not None else fwd.feature
    grads: Tensors = {
        "head.w": dropped.T @ dlogit,
        "head.b": np.array([dlogit.sum()]),
    }
    d_feature = np.outer(dlogit, params.tensors["head.w"])
    if head_mask is not None:
        d_feature = d_feature * head_mask

    H = params.hidden_dim
    d_outputs: Optional[np.ndarray] = None
    for layer in range(params.layers - 1, -1, -1):
        last = layer == params.layers - 1
        dX_total: Optional[np.ndarray] = None
        for k, d in enumerate(params.directions):
            d_final = d_feature[:, k * H : (k + 1) * H] if last else np.zeros((B, H))
            d_out = None if d_outputs is None else d_outputs[:, :, k * H : (k + 1) * H]
            dX, cell_grads = _direction_backward(
                params.cell_params(layer, d), fwd.layer_traces[layer][d], d_out, d_final
            )
            for part, g in cell_grads.items():
                grads[f"l{layer}.{d}.{part}"] = g
            dX_total = dX if dX_total is None else dX_total + dX
        if layer > 0:
            lm = fwd.layer_masks[layer - 1]
            d_outputs = dX_total * lm if lm is not None else dX_total

    for name, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient for {name}")
    return loss, grads


def backward(
    params: ClassifierParams,
    seq: SequenceTensor,
    y: int,
    rng: Optional[np.random.Generator] = None,
    head_mask: Optional[np.ndarray] = None,
) -> Tensors:
    """Gradients of ``bce_loss(forward(params, seq), y)`` for a single sequence."""
    X, M = pad_batch([seq])
    if head_mask is not None:
        head_mask = np.asarray(head_mask, dtype=np.float64).reshape(1, -1)
    return loss_and_grads(params, X, M, np.array([y]), rng=rng, head_mask=head_mask)[1]


# --- optimizer --------------------------------------------------------------------------


@dataclass
class AdamState:
    step: int
    m: Tensors
    v: Tensors
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, params: ClassifierParams, lr: float = 1e-3) -> "AdamState":
        return cls(
            step=0,
            m={k: np.zeros_like(v) for k, v in params.tensors.items()},
            v={k: np.zeros_like(v) for k, v in params.tensors.items()},
            lr=lr,
        )


def adam_step(
    params: ClassifierParams, grads: Tensors, state: AdamState
) -> Tuple[ClassifierParams, AdamState]:
    """One bias-corrected Adam update; inputs are not modified."""
    if set(grads) != set(params.tensors):
        raise DimensionError("gradient names do not match parameter names")
    step = state.step + 1
    new_tensors: Tensors = {}
    new_m: Tensors = {}
    new_v: Tensors = {}
    c1 = 1.0 - state.beta1**step
    c2 = 1.0 - state.beta2**step
    for name, value in params.tensors.items():
        g = grads[name]
        if g.shape != value.shape or state.m[name].shape != value.shape:
            raise DimensionError(f"{name}: gradient {g.shape} vs parameter {value.shape}")
        m = state.beta1 * state.m[name] + (1.0 - state.beta1) * g
        v = state.beta2 * state.v[name] + (1.0 - state.beta2) * g * g
        new_tensors[name] = value - state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
        new_m[name] = m
        new_v[name] = v
    new_state = AdamState(step, new_m, new_v, state.lr, state.beta1, state.beta2, state.eps)
    return params.with_tensors(new_tensors), new_state
