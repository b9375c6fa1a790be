"""Deterministic numpy engine for the stacked-LSTM sequence classifier.

One fixed architecture family: a stack of LSTM layers with decreasing widths
(all but the last returning sequences), a sigmoid dense layer, dropout, and a
softmax output layer, trained with sparse categorical cross-entropy and Adam.
Forward and backward passes are written by hand (full backpropagation through
time); there is no autodiff and no framework dependency.

Arrays are float32 by default. Gradient-check tests run the identical code in
float64 by passing dtype to init_params ("shadow mode").

Gate order inside every stacked LSTM matrix is fixed:
(input, forget, cell-candidate, output).
"""

from dataclasses import dataclass, field

import numpy as np


class NumericsError(RuntimeError):
    """Non-finite values appeared during a forward or training step."""


def sigmoid(z):
    # exp overflow for very negative z yields inf -> 1/inf = 0, which is the
    # correct saturated value; suppress the spurious warning only.
    with np.errstate(over="ignore"):
        return 1.0 / (1.0 + np.exp(-z))


def softmax(z):
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


@dataclass
class ModelConfig:
    """Architecture description; defaults match the reference classifier."""

    input_features: int = 31
    sequence_length: int = 256
    lstm_sizes: tuple = (256, 128, 64, 32, 16)
    return_sequences: tuple = None
    dense_hidden: int = 64
    num_classes: int = 3
    dropout_rate: float = 0.3

    def __post_init__(self):
        self.lstm_sizes = tuple(int(h) for h in self.lstm_sizes)
        if self.return_sequences is None:
            self.return_sequences = (True,) * (len(self.lstm_sizes) - 1) + (False,)
        self.return_sequences = tuple(bool(f) for f in self.return_sequences)
        if not self.lstm_sizes or any(h <= 0 for h in self.lstm_sizes):
            raise ValueError(f"lstm_sizes must be positive, got {self.lstm_sizes}")
        if len(self.return_sequences) != len(self.lstm_sizes):
            raise ValueError("return_sequences must match lstm_sizes in length")
        if self.return_sequences[-1]:
            raise ValueError("last LSTM layer must not return sequences")
        for name in ("input_features", "sequence_length", "dense_hidden", "num_classes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must be in [0, 1), got {self.dropout_rate}")

    def to_dict(self):
        return {
            "input_features": self.input_features,
            "sequence_length": self.sequence_length,
            "lstm_sizes": list(self.lstm_sizes),
            "return_sequences": list(self.return_sequences),
            "dense_hidden": self.dense_hidden,
            "num_classes": self.num_classes,
            "dropout_rate": self.dropout_rate,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass
class LstmLayerParams:
    """Weights of one LSTM layer, gates stacked (i, f, g, o) along rows."""

    w_input: np.ndarray      # [4h, d]
    w_recurrent: np.ndarray  # [4h, h]
    bias: np.ndarray         # [4h]
    hidden_size: int
    input_size: int

    def named_tensors(self):
        return [("w_input", self.w_input), ("w_recurrent", self.w_recurrent),
                ("bias", self.bias)]


@dataclass
class DenseLayerParams:
    weights: np.ndarray  # [out, in]
    bias: np.ndarray     # [out]
    activation: str      # sigmoid | softmax | none

    def named_tensors(self):
        return [("weights", self.weights), ("bias", self.bias)]


@dataclass
class ModelParams:
    """Ordered, named layer parameters plus the config they realize."""

    config: ModelConfig
    layers: list = field(default_factory=list)  # [(name, layer params)]

    def named_tensors(self):
        """Flat [(\"layer/tensor\", array)] list in fixed order."""
        out = []
        for name, layer in self.layers:
            for tname, arr in layer.named_tensors():
                out.append((f"{name}/{tname}", arr))
        return out

    def tensor_dict(self):
        return dict(self.named_tensors())

    @property
    def dtype(self):
        return self.layers[0][1].named_tensors()[0][1].dtype

    def n_params(self):
        return sum(arr.size for _, arr in self.named_tensors())

    def copy(self):
        new_layers = []
        for name, layer in self.layers:
            if isinstance(layer, LstmLayerParams):
                new_layers.append((name, LstmLayerParams(
                    layer.w_input.copy(), layer.w_recurrent.copy(),
                    layer.bias.copy(), layer.hidden_size, layer.input_size)))
            else:
                new_layers.append((name, DenseLayerParams(
                    layer.weights.copy(), layer.bias.copy(), layer.activation)))
        return ModelParams(self.config, new_layers)


def _glorot(rng, shape, fan_in, fan_out, dtype):
    bound = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def init_params(config, rng, dtype=np.float32):
    """Glorot-uniform weights, zero biases except LSTM forget-gate bias = 1.

    Deterministic given rng: tensors are drawn in layer order, w_input before
    w_recurrent within each LSTM layer.
    """
    layers = []
    d = config.input_features
    for idx, h in enumerate(config.lstm_sizes):
        w_in = _glorot(rng, (4 * h, d), d, 4 * h, dtype)
        w_rec = _glorot(rng, (4 * h, h), h, 4 * h, dtype)
        bias = np.zeros(4 * h, dtype=dtype)
        bias[h:2 * h] = 1.0  # forget gate: start remembering
        layers.append((f"lstm_{idx + 1}", LstmLayerParams(w_in, w_rec, bias, h, d)))
        d = h
    w1 = _glorot(rng, (config.dense_hidden, d), d, config.dense_hidden, dtype)
    layers.append(("dense_hidden", DenseLayerParams(
        w1, np.zeros(config.dense_hidden, dtype=dtype), "sigmoid")))
    w2 = _glorot(rng, (config.num_classes, config.dense_hidden),
                 config.dense_hidden, config.num_classes, dtype)
    layers.append(("dense_out", DenseLayerParams(
        w2, np.zeros(config.num_classes, dtype=dtype), "softmax")))
    return ModelParams(config, layers)


def param_count(config):
    """Analytic parameter total: 4h(d+h+1) per LSTM layer, out(in+1) per dense."""
    return sum(n for _, n in param_count_breakdown(config))


def param_count_breakdown(config):
    """Per-layer (name, parameter count) in layer order."""
    rows = []
    d = config.input_features
    for idx, h in enumerate(config.lstm_sizes):
        rows.append((f"lstm_{idx + 1}", 4 * h * (d + h + 1)))
        d = h
    rows.append(("dense_hidden", config.dense_hidden * (d + 1)))
    rows.append(("dense_out", config.num_classes * (config.dense_hidden + 1)))
    return rows


def _check_finite(arr, where):
    if not np.isfinite(arr).all():
        raise NumericsError(f"non-finite values detected after {where}")


def lstm_cell_step(x_t, h_prev, c_prev, p):
    """One LSTM time step.

    Accepts single vectors ([d], [h]) or batches ([B, d], [B, h]). Returns
    (h, c, cache); the cache holds the intermediates the backward pass needs.
    """
    x_t = np.asarray(x_t)
    h_prev = np.asarray(h_prev)
    c_prev = np.asarray(c_prev)
    single = x_t.ndim == 1
    x = np.atleast_2d(x_t)
    h0 = np.atleast_2d(h_prev)
    c0 = np.atleast_2d(c_prev)
    if x.shape[1] != p.input_size or h0.shape[1] != p.hidden_size or c0.shape[1] != p.hidden_size:
        raise ValueError(
            f"shape mismatch: x {x.shape}, h {h0.shape}, c {c0.shape} vs "
            f"layer d={p.input_size}, h={p.hidden_size}")
    z = x @ p.w_input.T + h0 @ p.w_recurrent.T + p.bias
    hs = p.hidden_size
    i = sigmoid(z[:, :hs])
    f = sigmoid(z[:, hs:2 * hs])
    g = np.tanh(z[:, 2 * hs:3 * hs])
    o = sigmoid(z[:, 3 * hs:])
    c = f * c0 + i * g
    h = o * np.tanh(c)
    cache = (x, h0, c0, i, f, g, o, c)
    if single:
        return h[0], c[0], cache
    return h, c, cache


def _lstm_forward(x, p, return_sequences):
    """Full-sequence LSTM forward. x: [B, T, d] -> [B, T, h] or [B, h]."""
    B, T, d = x.shape
    h = p.hidden_size
    dtype = x.dtype
    # Input projection for all timesteps in one GEMM.
    xp = (x.reshape(B * T, d) @ p.w_input.T).reshape(B, T, 4 * h) + p.bias
    gates = np.empty((B, T, 4 * h), dtype=dtype)
    c_seq = np.empty((B, T, h), dtype=dtype)
    tanh_c = np.empty((B, T, h), dtype=dtype)
    h_prev_seq = np.empty((B, T, h), dtype=dtype)
    h_t = np.zeros((B, h), dtype=dtype)
    c_t = np.zeros((B, h), dtype=dtype)
    for t in range(T):
        h_prev_seq[:, t] = h_t
        z = xp[:, t] + h_t @ p.w_recurrent.T
        i = sigmoid(z[:, :h])
        f = sigmoid(z[:, h:2 * h])
        g = np.tanh(z[:, 2 * h:3 * h])
        o = sigmoid(z[:, 3 * h:])
        c_t = f * c_t + i * g
        tc = np.tanh(c_t)
        h_t = o * tc
        gates[:, t, :h] = i
        gates[:, t, h:2 * h] = f
        gates[:, t, 2 * h:3 * h] = g
        gates[:, t, 3 * h:] = o
        c_seq[:, t] = c_t
        tanh_c[:, t] = tc
    if return_sequences:
        out = gates[:, :, 3 * h:] * tanh_c
    else:
        out = h_t.copy()
    cache = {"x": x, "gates": gates, "c": c_seq, "tanh_c": tanh_c,
             "h_prev": h_prev_seq, "p": p}
    return out, cache


def _lstm_backward(dout, cache, return_sequences):
    """BPTT through one LSTM layer. Returns (dx, grads dict)."""
    p = cache["p"]
    x = cache["x"]
    gates = cache["gates"]
    c_seq = cache["c"]
    tanh_c = cache["tanh_c"]
    h_prev_seq = cache["h_prev"]
    B, T, _ = x.shape
    h = p.hidden_size
    dtype = x.dtype

    dz_all = np.empty((B, T, 4 * h), dtype=dtype)
    dh_next = np.zeros((B, h), dtype=dtype)
    dc_next = np.zeros((B, h), dtype=dtype)
    for t in range(T - 1, -1, -1):
        if return_sequences:
            dh = dh_next + dout[:, t]
        elif t == T - 1:
            dh = dh_next + dout
        else:
            dh = dh_next
        i = gates[:, t, :h]
        f = gates[:, t, h:2 * h]
        g = gates[:, t, 2 * h:3 * h]
        o = gates[:, t, 3 * h:]
        tc = tanh_c[:, t]
        dc = dc_next + dh * o * (1.0 - tc * tc)
        c_prev = c_seq[:, t - 1] if t > 0 else np.zeros((B, h), dtype=dtype)
        dz = dz_all[:, t]
        dz[:, :h] = dc * g * i * (1.0 - i)
        dz[:, h:2 * h] = dc * c_prev * f * (1.0 - f)
        dz[:, 2 * h:3 * h] = dc * i * (1.0 - g * g)
        dz[:, 3 * h:] = dh * tc * o * (1.0 - o)
        dh_next = dz @ p.w_recurrent
        dc_next = dc * f

    dz_flat = dz_all.reshape(B * T, 4 * h)
    grads = {
        "w_input": dz_flat.T @ x.reshape(B * T, -1),
        "w_recurrent": dz_flat.T @ h_prev_seq.reshape(B * T, h),
        "bias": dz_flat.sum(axis=0),
    }
    dx = (dz_flat @ p.w_input).reshape(x.shape)
    return dx, grads


def forward(params, batch, training=False, rng=None):
    """Run the full model on batch [B, T, F] -> (probs [B, C], cache).

    Dropout is applied to the sigmoid dense activations, before the output
    layer, only when training=True (inverted scaling 1/(1-rate)); rng is
    required in that case and unused otherwise.
    """
    cfg = params.config
    x = np.asarray(batch)
    if x.ndim != 3 or x.shape[1:] != (cfg.sequence_length, cfg.input_features):
        raise ValueError(
            f"batch shape {x.shape} does not match "
            f"[B, {cfg.sequence_length}, {cfg.input_features}]")
    x = x.astype(params.dtype, copy=False)
    if training and cfg.dropout_rate > 0.0 and rng is None:
        raise ValueError("training forward with dropout requires an rng")

    caches = []
    seq_flags = cfg.return_sequences
    out = x
    for (name, layer), ret_seq in zip(params.layers[:-2], seq_flags):
        out, cache = _lstm_forward(out, layer, ret_seq)
        _check_finite(out, name)
        caches.append((name, cache))

    name, d1 = params.layers[-2]
    a1 = sigmoid(out @ d1.weights.T + d1.bias)
    _check_finite(a1, name)

    if training and cfg.dropout_rate > 0.0:
        keep = 1.0 - cfg.dropout_rate
        mask = (rng.random(a1.shape) < keep).astype(params.dtype) / keep
    else:
        mask = None
    a1d = a1 if mask is None else a1 * mask

    name_out, d2 = params.layers[-1]
    logits = a1d @ d2.weights.T + d2.bias
    _check_finite(logits, name_out)
    probs = softmax(logits)
    cache = {"lstm": caches, "lstm_out": out, "a1": a1, "mask": mask,
             "a1_dropped": a1d, "logits": logits, "probs": probs}
    return probs, cache


def sparse_cross_entropy(logits, labels):
    """Mean -log softmax(logits)[label], computed via log-sum-exp."""
    labels = np.asarray(labels)
    m = logits.max(axis=1)
    lse = m + np.log(np.exp(logits - m[:, None]).sum(axis=1))
    return float(np.mean(lse - logits[np.arange(len(labels)), labels]))


def loss_and_grads(params, batch, labels, rng, return_probs=False):
    """Training-mode forward + full backward pass.

    Returns (loss, grads) where grads is a dict keyed like
    params.named_tensors(), or (loss, grads, probs) with return_probs=True.
    Labels must lie in [0, num_classes).
    """
    cfg = params.config
    labels = np.asarray(labels)
    if labels.ndim != 1 or len(labels) != len(batch) or len(labels) == 0:
        raise ValueError("labels must be a nonempty vector matching the batch size")
    if not np.issubdtype(labels.dtype, np.integer):
        raise ValueError(f"labels must be integers, got dtype {labels.dtype}")
    if labels.min() < 0 or labels.max() >= cfg.num_classes:
        raise ValueError(
            f"label out of range [0, {cfg.num_classes}): "
            f"{labels[(labels < 0) | (labels >= cfg.num_classes)][0]}")

    probs, cache = forward(params, batch, training=True, rng=rng)
    loss = sparse_cross_entropy(cache["logits"], labels)

    B = len(labels)
    dlogits = cache["probs"].astype(params.dtype, copy=True)
    dlogits[np.arange(B), labels] -= 1.0
    dlogits /= B

    grads = {}
    name2, d2 = params.layers[-1]
    grads[f"{name2}/weights"] = dlogits.T @ cache["a1_dropped"]
    grads[f"{name2}/bias"] = dlogits.sum(axis=0)
    da1 = dlogits @ d2.weights
    if cache["mask"] is not None:
        da1 = da1 * cache["mask"]

    name1, d1 = params.layers[-2]
    a1 = cache["a1"]
    dz1 = da1 * a1 * (1.0 - a1)
    grads[f"{name1}/weights"] = dz1.T @ cache["lstm_out"]
    grads[f"{name1}/bias"] = dz1.sum(axis=0)
    dout = dz1 @ d1.weights

    for (name, lcache), ret_seq in zip(reversed(cache["lstm"]),
                                       reversed(cfg.return_sequences)):
        dout, lgrads = _lstm_backward(dout, lcache, ret_seq)
        for tname, arr in lgrads.items():
            grads[f"{name}/{tname}"] = arr
    if return_probs:
        return loss, grads, probs
    return loss, grads


@dataclass
class OptimizerState:
    """Adam moments plus hyperparameters; moments shape-match the params."""

    step: int
    learning_rate: float
    beta1: float
    beta2: float
    epsilon: float
    m: dict
    v: dict


def init_optimizer(params, learning_rate=1e-3, beta1=0.9, beta2=0.999,
                   epsilon=1e-8):
    m = {name: np.zeros_like(arr) for name, arr in params.named_tensors()}
    v = {name: np.zeros_like(arr) for name, arr in params.named_tensors()}
    return OptimizerState(0, learning_rate, beta1, beta2, epsilon, m, v)


def adam_step(params, grads, state):
    """Bias-corrected Adam update, in place. Returns (params, state)."""
    state.step += 1
    t = state.step
    b1, b2 = state.beta1, state.beta2
    lr = state.learning_rate
    bc1 = 1.0 - b1 ** t
    bc2 = 1.0 - b2 ** t
    for name, arr in params.named_tensors():
        g = grads[name]
        m = state.m[name]
        v = state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * (g * g)
        arr -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)
    return params, state


def predict(params, batch_iter):
    """Argmax class indices for an iterable of input batches (inference mode)."""
    preds = []
    for batch in batch_iter:
        probs, _ = forward(params, batch, training=False)
        preds.append(np.argmax(probs, axis=1))
    return np.concatenate(preds) if preds else np.empty(0, dtype=int)
