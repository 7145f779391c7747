"""Residual feed-forward network for tabular data, in plain numpy.

Topology: an input stage (linear -> batch norm -> ReLU -> dropout), a stack
of residual blocks (linear -> BN -> ReLU -> dropout -> linear -> BN, skip
connection added, then ReLU), an optional reduction stage (linear to half
width -> ReLU), and a linear output head.  Forward and backward passes are
written by hand; the optimizer is Adam with decoupled weight decay.

Training minimizes the class-weighted categorical cross-entropy (or the
binary cross-entropy with a single-logit head when requested for two-class
problems), with early stopping on validation weighted F1 and halving of the
learning rate on plateaus.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .evaluation import confusion_matrix, f1_scores
from .losses import bce_from_logits, cce_from_logits, sigmoid, softmax
from .trees import _MODEL_TYPES

__all__ = [
    "ResNetConfig",
    "TrainHistory",
    "TabResNetModel",
    "hidden_dim_bounds",
    "nn_build",
    "nn_fit",
    "gradient_check",
]

_BN_EPS = 1e-5
_BN_MOMENTUM = 0.1


def hidden_dim_bounds(n_features: int) -> tuple:
    """Sensible hidden-width interval for a given input width: half to
    double the feature count, floored at 8."""
    lo = max(8, math.ceil(n_features / 2))
    hi = max(8, 2 * n_features)
    return lo, max(lo, hi)


@dataclass(frozen=True)
class ResNetConfig:
    n_features: int
    n_classes: int
    hidden_dim: int = 64
    n_blocks: int = 2
    dropout: float = 0.1
    use_reduction: bool = False
    binary_mode: bool = False
    learning_rate: float = 1e-3
    weight_decay: float = 1e-4
    batch_size: int = 128
    max_epochs: int = 200
    patience: int = 15
    lr_factor: float = 0.5
    lr_patience: int = 3
    min_improvement: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.n_features < 1 or self.n_classes < 2:
            raise ValueError("need n_features >= 1 and n_classes >= 2")
        if self.hidden_dim < 8:
            raise ValueError("hidden_dim must be >= 8")
        if not (1 <= self.n_blocks):
            raise ValueError("n_blocks must be >= 1")
        if not (0.0 <= self.dropout <= 0.5):
            raise ValueError("dropout must lie in [0, 0.5]")
        if self.binary_mode and self.n_classes != 2:
            raise ValueError("binary_mode requires exactly two classes")
        if self.learning_rate <= 0 or self.weight_decay < 0:
            raise ValueError("learning_rate must be positive, weight_decay non-negative")
        if self.batch_size < 2:
            raise ValueError("batch_size must be >= 2 (batch norm needs it)")
        if self.max_epochs < 1 or self.patience < 1 or self.lr_patience < 1:
            raise ValueError("epoch/patience settings must be >= 1")
        if not (0.0 < self.lr_factor < 1.0):
            raise ValueError("lr_factor must lie in (0, 1)")


@dataclass
class TrainHistory:
    val_f1: list = field(default_factory=list)
    learning_rate: list = field(default_factory=list)
    train_loss: list = field(default_factory=list)
    best_epoch: int = -1
    stopped_early: bool = False

    @property
    def n_epochs(self) -> int:
        return len(self.val_f1)


class _Linear:
    def __init__(self, n_in: int, n_out: int, rng: np.random.Generator):
        bound = 1.0 / math.sqrt(n_in)
        self.w = rng.uniform(-bound, bound, size=(n_in, n_out))
        self.b = rng.uniform(-bound, bound, size=n_out)
        self.gw = np.zeros_like(self.w)
        self.gb = np.zeros_like(self.b)
        self._x = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._x = x
        return x @ self.w + self.b

    def backward(self, g: np.ndarray) -> np.ndarray:
        self.gw = self._x.T @ g
        self.gb = g.sum(axis=0)
        return g @ self.w.T

    @property
    def params(self):
        return [self.w, self.b]

    @property
    def grads(self):
        return [self.gw, self.gb]


class _BatchNorm:
    """1-d batch norm.  Training mode normalizes by biased batch statistics
    and maintains running statistics (unbiased variance); eval and frozen
    modes normalize by the running statistics treated as constants."""

    def __init__(self, width: int):
        self.gamma = np.ones(width)
        self.beta = np.zeros(width)
        self.running_mean = np.zeros(width)
        self.running_var = np.ones(width)
        self.ggamma = np.zeros_like(self.gamma)
        self.gbeta = np.zeros_like(self.beta)
        self._cache = None

    def forward(self, x: np.ndarray, train: bool) -> np.ndarray:
        if train:
            n = x.shape[0]
            mu = x.mean(axis=0)
            var = x.var(axis=0)
            inv_std = 1.0 / np.sqrt(var + _BN_EPS)
            xhat = (x - mu) * inv_std
            unbiased = var * n / (n - 1) if n > 1 else var
            self.running_mean = (1.0 - _BN_MOMENTUM) * self.running_mean + _BN_MOMENTUM * mu
            self.running_var = (1.0 - _BN_MOMENTUM) * self.running_var + _BN_MOMENTUM * unbiased
            self._cache = ("train", xhat, inv_std, x - mu)
        else:
            inv_std = 1.0 / np.sqrt(self.running_var + _BN_EPS)
            xhat = (x - self.running_mean) * inv_std
            self._cache = ("eval", xhat, inv_std, None)
        return self.gamma * xhat + self.beta

    def backward(self, g: np.ndarray) -> np.ndarray:
        mode, xhat, inv_std, centered = self._cache
        self.ggamma = (g * xhat).sum(axis=0)
        self.gbeta = g.sum(axis=0)
        gxhat = g * self.gamma
        if mode == "eval":
            return gxhat * inv_std
        n = g.shape[0]
        # standard train-mode backward through the batch statistics
        gvar = np.sum(gxhat * centered, axis=0) * (-0.5) * inv_std**3
        gmu = -np.sum(gxhat, axis=0) * inv_std + gvar * (-2.0 / n) * centered.sum(axis=0)
        return gxhat * inv_std + gvar * (2.0 / n) * centered + gmu / n

    @property
    def params(self):
        return [self.gamma, self.beta]

    @property
    def grads(self):
        return [self.ggamma, self.gbeta]


class _ReLU:
    def __init__(self):
        self._mask = None

    def forward(self, x: np.ndarray) -> np.ndarray:
        self._mask = x > 0
        return x * self._mask

    def backward(self, g: np.ndarray) -> np.ndarray:
        return g * self._mask


class _Dropout:
    """Inverted dropout: surviving activations are scaled by 1/keep during
    training so the expected value matches eval mode."""

    def __init__(self, rate: float):
        self.rate = rate
        self._mask = None

    def forward(self, x: np.ndarray, train: bool, rng: np.random.Generator | None) -> np.ndarray:
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        keep = 1.0 - self.rate
        self._mask = (rng.random(x.shape) < keep) / keep
        return x * self._mask

    def backward(self, g: np.ndarray) -> np.ndarray:
        if self._mask is None:
            return g
        return g * self._mask


class _ResidualBlock:
    def __init__(self, width: int, dropout: float, rng: np.random.Generator):
        self.lin1 = _Linear(width, width, rng)
        self.bn1 = _BatchNorm(width)
        self.relu1 = _ReLU()
        self.drop = _Dropout(dropout)
        self.lin2 = _Linear(width, width, rng)
        self.bn2 = _BatchNorm(width)
        self.relu_out = _ReLU()

    def forward(self, x: np.ndarray, train: bool, rng) -> np.ndarray:
        h = self.lin1.forward(x)
        h = self.bn1.forward(h, train)
        h = self.relu1.forward(h)
        h = self.drop.forward(h, train, rng)
        h = self.lin2.forward(h)
        h = self.bn2.forward(h, train)
        return self.relu_out.forward(h + x)

    def backward(self, g: np.ndarray) -> np.ndarray:
        g = self.relu_out.backward(g)
        skip = g  # gradient flowing through the identity path
        g = self.bn2.backward(g)
        g = self.lin2.backward(g)
        g = self.drop.backward(g)
        g = self.relu1.backward(g)
        g = self.bn1.backward(g)
        g = self.lin1.backward(g)
        return g + skip

    @property
    def layers(self):
        return [self.lin1, self.bn1, self.lin2, self.bn2]


class _Network:
    """The bare network: parameters, forward, backward."""

    def __init__(self, cfg: ResNetConfig):
        rng = np.random.default_rng(cfg.seed)
        self.cfg = cfg
        h = cfg.hidden_dim
        self.input_lin = _Linear(cfg.n_features, h, rng)
        self.input_bn = _BatchNorm(h)
        self.input_relu = _ReLU()
        self.input_drop = _Dropout(cfg.dropout)
        self.blocks = [_ResidualBlock(h, cfg.dropout, rng) for _ in range(cfg.n_blocks)]
        out_width = 1 if cfg.binary_mode else cfg.n_classes
        if cfg.use_reduction:
            self.reduce_lin = _Linear(h, h // 2, rng)
            self.reduce_relu = _ReLU()
            self.output_lin = _Linear(h // 2, out_width, rng)
        else:
            self.reduce_lin = None
            self.reduce_relu = None
            self.output_lin = _Linear(h, out_width, rng)

    def _layers(self):
        layers = [self.input_lin, self.input_bn]
        for blk in self.blocks:
            layers.extend(blk.layers)
        if self.reduce_lin is not None:
            layers.append(self.reduce_lin)
        layers.append(self.output_lin)
        return layers

    def parameters(self):
        out = []
        for layer in self._layers():
            out.extend(layer.params)
        return out

    def gradients(self):
        out = []
        for layer in self._layers():
            out.extend(layer.grads)
        return out

    def buffers(self):
        out = []
        for layer in self._layers():
            if isinstance(layer, _BatchNorm):
                out.extend([layer.running_mean, layer.running_var])
        return out

    def n_parameters(self) -> int:
        return sum(p.size for p in self.parameters())

    def forward(self, x: np.ndarray, train: bool, rng: np.random.Generator | None = None) -> np.ndarray:
        h = self.input_lin.forward(x)
        h = self.input_bn.forward(h, train)
        h = self.input_relu.forward(h)
        h = self.input_drop.forward(h, train, rng)
        for blk in self.blocks:
            h = blk.forward(h, train, rng)
        if self.reduce_lin is not None:
            h = self.reduce_relu.forward(self.reduce_lin.forward(h))
        return self.output_lin.forward(h)

    def backward(self, g_logits: np.ndarray) -> None:
        g = self.output_lin.backward(g_logits)
        if self.reduce_lin is not None:
            g = self.reduce_lin.backward(self.reduce_relu.backward(g))
        for blk in reversed(self.blocks):
            g = blk.backward(g)
        g = self.input_drop.backward(g)
        g = self.input_relu.backward(g)
        g = self.input_bn.backward(g)
        self.input_lin.backward(g)

    def state(self) -> list:
        return [a.copy() for a in self.parameters() + self.buffers()]

    def load_state(self, state: list) -> None:
        arrays = self.parameters() + self.buffers()
        if len(arrays) != len(state):
            raise ValueError("state length mismatch")
        for dst, src in zip(arrays, state):
            dst[...] = src


class _AdamW:
    """Adam moments with decoupled weight decay; ``lr`` is mutable so the
    plateau schedule can halve it in place."""

    def __init__(self, params: list, lr: float, weight_decay: float, betas=(0.9, 0.999), eps=1e-8):
        self.params = params
        self.lr = lr
        self.weight_decay = weight_decay
        self.b1, self.b2 = betas
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]

    def step(self, grads: list) -> None:
        self.t += 1
        b1t = 1.0 - self.b1**self.t
        b2t = 1.0 - self.b2**self.t
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * ((m / b1t) / (np.sqrt(v / b2t) + self.eps) + self.weight_decay * p)


class TabResNetModel:
    """Fitted network plus its config, history, and timing metadata."""

    family = "tabresnet"

    def __init__(self, net: _Network, cfg: ResNetConfig, history: TrainHistory | None = None, train_seconds: float = 0.0):
        self.net = net
        self.cfg = cfg
        self.params = cfg
        self.history = history or TrainHistory()
        self.train_seconds = train_seconds
        self.n_classes = cfg.n_classes

    def predict_proba(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        logits = self.net.forward(x, train=False)
        if self.cfg.binary_mode:
            p = sigmoid(logits[:, 0])
            return np.column_stack([1.0 - p, p])
        return softmax(logits)

    def predict(self, x: np.ndarray) -> np.ndarray:
        return self.predict_proba(x).argmax(axis=1)

    def to_dict(self) -> dict:
        """JSON-ready dump: config plus every parameter and running buffer
        as (shape, row-major values)."""
        arrays = self.net.parameters() + self.net.buffers()
        return {
            "family": self.family,
            "config": asdict(self.cfg),
            "arrays": [
                {"shape": list(a.shape), "values": [float(v) for v in a.ravel()]} for a in arrays
            ],
        }

    @staticmethod
    def from_dict(obj: dict) -> "TabResNetModel":
        cfg = ResNetConfig(**obj["config"])
        model = TabResNetModel(_Network(cfg), cfg)
        state = [
            np.asarray(a["values"], dtype=np.float64).reshape(a["shape"]) for a in obj["arrays"]
        ]
        model.net.load_state(state)
        return model


def nn_build(cfg: ResNetConfig) -> TabResNetModel:
    """Initialize an untrained network (fan-in-scaled uniform weights)."""
    return TabResNetModel(_Network(cfg), cfg)


def _batch_loss_and_grad(net: _Network, xb, yb, wv, cfg, rng):
    logits = net.forward(xb, train=True, rng=rng)
    if cfg.binary_mode:
        loss, grad = bce_from_logits(yb, logits[:, 0], wv)
        return logits, loss, grad[:, None]
    loss, grad = cce_from_logits(yb, logits, wv)
    return logits, loss, grad


def _weighted_val_f1(model: TabResNetModel, x_val, y_val) -> float:
    pred = model.predict(x_val)
    cm = confusion_matrix(y_val, pred, n_classes=model.cfg.n_classes)
    return f1_scores(cm).weighted


def nn_fit(
    x_train,
    y_train,
    weights,
    cfg: ResNetConfig,
    x_val,
    y_val,
) -> TabResNetModel:
    """Train a TabResNet with minibatch AdamW.

    Early stopping tracks validation weighted F1 with the configured
    patience and restores the best checkpoint; the learning rate halves
    after ``lr_patience`` consecutive non-improving epochs.  Minibatches
    of fewer than 2 samples are dropped (batch norm needs at least 2).
    """
    x_train = np.asarray(x_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.int64)
    x_val = np.asarray(x_val, dtype=np.float64)
    y_val = np.asarray(y_val, dtype=np.int64)
    wv = np.asarray(getattr(weights, "weights", weights), dtype=np.float64)
    if wv.size != cfg.n_classes:
        raise ValueError("expected %d class weights, got %d" % (cfg.n_classes, wv.size))
    if x_train.shape[1] != cfg.n_features:
        raise ValueError("config n_features=%d but data has %d" % (cfg.n_features, x_train.shape[1]))

    t0 = time.perf_counter()
    model = nn_build(cfg)
    net = model.net
    opt = _AdamW(net.parameters(), cfg.learning_rate, cfg.weight_decay)
    data_rng = np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(1)[0])
    history = model.history

    best_f1 = -np.inf
    best_state = net.state()
    bad_for_stop = 0
    bad_for_lr = 0
    n = x_train.shape[0]
    for epoch in range(cfg.max_epochs):
        order = data_rng.permutation(n)
        epoch_loss = 0.0
        n_batches = 0
        for start in range(0, n, cfg.batch_size):
            batch = order[start:start + cfg.batch_size]
            if batch.size < 2:
                continue
            _, loss, grad = _batch_loss_and_grad(net, x_train[batch], y_train[batch], wv, cfg, data_rng)
            if not np.isfinite(loss):
                raise RuntimeError(
                    "non-finite training loss at epoch %d, batch %d (lr=%g)"
                    % (epoch, n_batches, opt.lr)
                )
            net.backward(grad)
            opt.step(net.gradients())
            epoch_loss += loss
            n_batches += 1
        val_f1 = _weighted_val_f1(model, x_val, y_val)
        history.val_f1.append(val_f1)
        history.learning_rate.append(opt.lr)
        history.train_loss.append(epoch_loss / max(n_batches, 1))
        if val_f1 > best_f1 + cfg.min_improvement:
            best_f1 = val_f1
            best_state = net.state()
            history.best_epoch = epoch
            bad_for_stop = 0
            bad_for_lr = 0
        else:
            bad_for_stop += 1
            bad_for_lr += 1
            if bad_for_lr >= cfg.lr_patience:
                opt.lr *= cfg.lr_factor
                bad_for_lr = 0
            if bad_for_stop >= cfg.patience:
                history.stopped_early = True
                break
    net.load_state(best_state)
    model.train_seconds = time.perf_counter() - t0
    return model


def gradient_check(cfg: ResNetConfig, n_samples: int = 8, seed: int = 0, h: float = 1e-5) -> float:
    """Compare analytic parameter gradients against central finite
    differences on a small random problem; returns the maximum relative
    error over every parameter scalar.

    Dropout must be 0 and batch norm runs frozen (running statistics as
    constants) so the loss is smooth in the parameters.
    """
    if cfg.dropout != 0.0:
        raise ValueError("gradient_check requires dropout = 0")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n_samples, cfg.n_features))
    y = rng.integers(0, cfg.n_classes, size=n_samples)
    # ensure both / all classes appear so weighted terms are exercised
    y[: cfg.n_classes] = np.arange(cfg.n_classes)
    wv = rng.uniform(0.5, 3.0, size=cfg.n_classes)

    net = _Network(cfg)
    # one training-mode pass gives the frozen statistics non-trivial values
    net.forward(x, train=True, rng=rng)

    def loss_at() -> float:
        logits = net.forward(x, train=False)
        if cfg.binary_mode:
            loss, _ = bce_from_logits(y, logits[:, 0], wv)
        else:
            loss, _ = cce_from_logits(y, logits, wv)
        return loss

    logits = net.forward(x, train=False)
    if cfg.binary_mode:
        _, grad = bce_from_logits(y, logits[:, 0], wv)
        net.backward(grad[:, None])
    else:
        _, grad = cce_from_logits(y, logits, wv)
        net.backward(grad)
    analytic = [g.copy() for g in net.gradients()]

    max_rel = 0.0
    for p, g in zip(net.parameters(), analytic):
        flat = p.ravel()
        gflat = g.ravel()
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_at()
            flat[i] = orig - h
            down = loss_at()
            flat[i] = orig
            numeric = (up - down) / (2.0 * h)
            denom = max(abs(gflat[i]), abs(numeric), 1e-8)
            max_rel = max(max_rel, abs(gflat[i] - numeric) / denom)
    return max_rel


# make the network loadable through the shared save_model/load_model JSON path
_MODEL_TYPES["tabresnet"] = TabResNetModel
