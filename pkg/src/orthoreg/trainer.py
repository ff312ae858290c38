"""Deterministic desk-scale training harness.

A small feed-forward stack (dense and 2-D convolution layers, ReLU, and a
fused softmax/cross-entropy head) trained by mini-batch SGD with classical
momentum. Each step minimizes

    mean cross-entropy + wd * sum ||W||_F^2 + sum reg(W).value

over the weight tensors (biases excluded from both penalties); the chosen
orthogonality regularizer contributes its analytic gradient directly, with
convolution kernels penalized through their (S*H*C) x M reshape. The
coefficient plans are refreshed from the schedule at every epoch boundary.

Everything is driven by seeded PCG64 streams (init, shuffling, power-
iteration starts), so a run is bit-reproducible for a fixed config; epoch
wall-clock times are kept out of the deterministic record and reported
separately.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analysis import mutual_coherence
from .errors import NonFiniteLoss, ShapeMismatch
from .linalg import as_matrix, frob_norm_sq, gram, reshape_conv, sym_eig_dominant
from .regularizers import RegKind, RegOptions, SripMode, evaluate
from .schedule import ScheduleConfig, lambda_at, weight_decay_at

DEFAULT_LR_PLAN = ((0, 0.05), (120, 0.005))


@dataclass(frozen=True)
class LayerSpec:
    """One layer: dense(in, out), conv2d(s, h, c_in, c_out, stride, pad),
    relu, or softmax_xent."""
    kind: str
    dims: tuple = ()

    @classmethod
    def dense(cls, n_in, n_out):
        return cls("dense", (int(n_in), int(n_out)))

    @classmethod
    def conv2d(cls, s, h, c_in, c_out, stride=1, padding=0):
        return cls("conv2d", (int(s), int(h), int(c_in), int(c_out),
                              int(stride), int(padding)))

    @classmethod
    def relu(cls):
        return cls("relu")

    @classmethod
    def softmax_xent(cls):
        return cls("softmax_xent")


@dataclass(frozen=True)
class TrainConfig:
    layers: tuple
    reg_kind: RegKind = RegKind.NONE
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    epochs: int = 150
    batch_size: int = 32
    seed: int = 0
    momentum: float = 0.9
    lr_plan: tuple = DEFAULT_LR_PLAN
    init: str = "orthogonal"       # or "gaussian"
    init_std: float = 0.1          # gaussian only
    srip_mode: SripMode = SripMode.POWER
    srip_iters: int = 2
    mc_off_diagonal_only: bool = False
    regularize_final: bool = True
    threads: int = 1

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if not self.layers:
            raise ValueError("layer list is empty")
        if self.seed < 0:
            raise ValueError("seed must be >= 0")
        if self.init not in ("orthogonal", "gaussian"):
            raise ValueError(f"unknown init {self.init!r}")
        if not self.lr_plan or self.lr_plan[0][0] != 0:
            raise ValueError("lr_plan must start at epoch 0")
        epochs = [e for e, _ in self.lr_plan]
        if epochs != sorted(set(epochs)):
            raise ValueError("lr_plan epochs must be strictly increasing")
        if any(lr <= 0 for _, lr in self.lr_plan):
            raise ValueError("learning rates must be positive")


def lr_at(plan, epoch):
    value = plan[0][1]
    for bp_epoch, bp_value in plan:
        if epoch >= bp_epoch:
            value = bp_value
        else:
            break
    return value


def _mgs_columns(a, rng):
    """Modified Gram-Schmidt with one re-orthogonalization pass."""
    a = a.copy()
    m, n = a.shape
    for j in range(n):
        v = a[:, j]
        for _ in range(2):
            for i in range(j):
                v -= (a[:, i] @ v) * a[:, i]
        norm = float(np.linalg.norm(v))
        while norm < 1e-12:  # degenerate draw; essentially never happens
            v[:] = rng.standard_normal(m)
            for _ in range(2):
                for i in range(j):
                    v -= (a[:, i] @ v) * a[:, i]
            norm = float(np.linalg.norm(v))
        a[:, j] = v / norm
    return a


def init_orthogonal(shape, seed):
    """Seeded random matrix with orthonormal columns (rows if wide)."""
    m, n = shape
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, n))
    if m >= n:
        return _mgs_columns(a, rng)
    return _mgs_columns(a.T, rng).T


class DenseLayer:
    has_weights = True

    def __init__(self, n_in, n_out):
        self.n_in = n_in
        self.n_out = n_out
        self.weight = np.zeros((n_in, n_out))
        self.bias = np.zeros(n_out)

    def init_params(self, mode, std, rng_seed):
        if mode == "orthogonal":
            self.weight = init_orthogonal((self.n_in, self.n_out), rng_seed)
        else:
            rng = np.random.default_rng(rng_seed)
            self.weight = std * rng.standard_normal((self.n_in, self.n_out))

    def out_dim(self, in_dim):
        if in_dim != self.n_in:
            raise ShapeMismatch(f"dense layer expects {self.n_in} features, "
                                f"gets {in_dim}")
        return self.n_out

    def weight_matrix(self):
        return self.weight

    def add_weight_grad_2d(self, grads, g2d):
        grads["w"] += g2d

    def forward(self, x):
        return x @ self.weight + self.bias, x

    def backward(self, d_out, cache):
        x = cache
        grads = {"w": x.T @ d_out, "b": d_out.sum(axis=0)}
        return d_out @ self.weight.T, grads

    def params(self):
        return {"w": self.weight, "b": self.bias}


class ConvLayer:
    """2-D convolution on square single-image inputs flattened per example.

    The incoming feature vector is interpreted as (c_in, H, H) with H
    inferred; im2col patch rows use the kernel's (width, height, channel)
    index order so the reshaped weight matrix matches ``reshape_conv``.
    """
    has_weights = True

    def __init__(self, s, h, c_in, c_out, stride, padding):
        if stride < 1 or padding < 0:
            raise ShapeMismatch("conv2d needs stride >= 1 and padding >= 0")
        self.s = s
        self.h = h
        self.c_in = c_in
        self.c_out = c_out
        self.stride = stride
        self.padding = padding
        self.kernel = np.zeros((s, h, c_in, c_out))
        self.bias = np.zeros(c_out)
        self.img = None  # input H == W, resolved by out_dim

    def init_params(self, mode, std, rng_seed):
        shape2d = (self.s * self.h * self.c_in, self.c_out)
        if mode == "orthogonal":
            self.kernel = init_orthogonal(shape2d, rng_seed).reshape(
                self.kernel.shape)
        else:
            rng = np.random.default_rng(rng_seed)
            self.kernel = std * rng.standard_normal(self.kernel.shape)

    def out_dim(self, in_dim):
        if in_dim % self.c_in != 0:
            raise ShapeMismatch(
                f"conv2d input {in_dim} not divisible by {self.c_in} channels")
        pixels = in_dim // self.c_in
        side = int(round(pixels ** 0.5))
        if side * side != pixels:
            raise ShapeMismatch(
                f"conv2d needs a square image, got {pixels} pixels")
        self.img = side
        self.h_out = (side + 2 * self.padding - self.h) // self.stride + 1
        self.w_out = (side + 2 * self.padding - self.s) // self.stride + 1
        if self.h_out < 1 or self.w_out < 1:
            raise ShapeMismatch("conv2d kernel larger than padded input")
        return self.c_out * self.h_out * self.w_out

    def weight_matrix(self):
        return reshape_conv(self.kernel)

    def add_weight_grad_2d(self, grads, g2d):
        grads["w"] += g2d.reshape(self.kernel.shape)

    def _im2col(self, x4p, batch):
        ho, wo, st = self.h_out, self.w_out, self.stride
        cols = np.empty((batch, ho, wo, self.s, self.h, self.c_in))
        for si in range(self.s):
            for hi in range(self.h):
                block = x4p[:, :, hi: hi + ho * st: st, si: si + wo * st: st]
                cols[:, :, :, si, hi, :] = block.transpose(0, 2, 3, 1)
        return cols.reshape(batch * ho * wo, self.s * self.h * self.c_in)

    def forward(self, x):
        batch = x.shape[0]
        x4 = x.reshape(batch, self.c_in, self.img, self.img)
        p = self.padding
        x4p = np.pad(x4, ((0, 0), (0, 0), (p, p), (p, p))) if p else x4
        cols = self._im2col(x4p, batch)
        out_cols = cols @ self.weight_matrix() + self.bias
        y4 = out_cols.reshape(batch, self.h_out, self.w_out, self.c_out)
        out = y4.transpose(0, 3, 1, 2).reshape(batch, -1)
        return out, (cols, x4p.shape, batch)

    def backward(self, d_out, cache):
        cols, xp_shape, batch = cache
        ho, wo, st, p = self.h_out, self.w_out, self.stride, self.padding
        d4 = d_out.reshape(batch, self.c_out, ho, wo)
        d_cols = d4.transpose(0, 2, 3, 1).reshape(batch * ho * wo, self.c_out)
        dk2d = cols.T @ d_cols
        grads = {"w": dk2d.reshape(self.kernel.shape),
                 "b": d_cols.sum(axis=0)}
        d_patches = (d_cols @ self.weight_matrix().T).reshape(
            batch, ho, wo, self.s, self.h, self.c_in)
        dxp = np.zeros(xp_shape)
        for si in range(self.s):
            for hi in range(self.h):
                dxp[:, :, hi: hi + ho * st: st, si: si + wo * st: st] += \
                    d_patches[:, :, :, si, hi, :].transpose(0, 3, 1, 2)
        dx4 = dxp[:, :, p:-p, p:-p] if p else dxp
        return dx4.reshape(batch, -1), grads

    def params(self):
        return {"w": self.kernel, "b": self.bias}


class ReluLayer:
    has_weights = False

    def out_dim(self, in_dim):
        return in_dim

    def forward(self, x):
        return np.maximum(x, 0.0), x

    def backward(self, d_out, cache):
        return d_out * (cache > 0.0), {}


class SoftmaxXentLayer:
    """Fused softmax + mean cross-entropy head."""
    has_weights = False

    def out_dim(self, in_dim):
        return in_dim

    def loss(self, logits, labels):
        shifted = logits - logits.max(axis=1, keepdims=True)
        expz = np.exp(shifted)
        probs = expz / expz.sum(axis=1, keepdims=True)
        picked = probs[np.arange(len(labels)), labels]
        loss = float(-np.mean(np.log(np.maximum(picked, 1e-300))))
        return loss, probs

    def backward(self, probs, labels):
        d = probs.copy()
        d[np.arange(len(labels)), labels] -= 1.0
        return d / len(labels)


def _build_layer(spec):
    if spec.kind == "dense":
        return DenseLayer(*spec.dims)
    if spec.kind == "conv2d":
        return ConvLayer(*spec.dims)
    if spec.kind == "relu":
        return ReluLayer()
    if spec.kind == "softmax_xent":
        return SoftmaxXentLayer()
    raise ValueError(f"unknown layer kind {spec.kind!r}")


class Model:
    """A validated layer stack with parameter init and manual backprop."""

    def __init__(self, specs, input_dim, num_classes):
        if specs[-1].kind != "softmax_xent":
            raise ShapeMismatch("last layer must be softmax_xent")
        if any(s.kind == "softmax_xent" for s in specs[:-1]):
            raise ShapeMismatch("softmax_xent must be the final layer")
        self.layers = [_build_layer(s) for s in specs]
        self.input_dim = input_dim
        dim = input_dim
        for layer in self.layers[:-1]:
            dim = layer.out_dim(dim)
        if dim != num_classes:
            raise ShapeMismatch(
                f"head expects {num_classes} logits, model produces {dim}")
        self.head = self.layers[-1]
        self.body = self.layers[:-1]

    def weight_layers(self):
        return [l for l in self.body if l.has_weights]

    def init_params(self, mode, std, seed):
        for li, layer in enumerate(self.body):
            if layer.has_weights:
                layer.init_params(mode, std, (seed, 0xEC5, li))

    def forward(self, x, labels):
        """Data term only: (mean cross-entropy, probs, caches)."""
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ShapeMismatch(
                f"batch has {x.shape[-1] if x.ndim else 0} features, "
                f"model expects {self.input_dim}")
        caches = []
        out = x
        for layer in self.body:
            out, cache = layer.forward(out)
            caches.append(cache)
        loss, probs = self.head.loss(out, labels)
        return loss, probs, caches

    def backward(self, probs, labels, caches):
        """Data-term gradients per layer, as a list aligned with the body."""
        d = self.head.backward(probs, labels)
        grads = [None] * len(self.body)
        for i in range(len(self.body) - 1, -1, -1):
            d, g = self.body[i].backward(d, caches[i])
            grads[i] = g
        return grads


def _reg_outputs(weights, kind, lam, opts_for_layer, pool):
    """Regularizer value and 2-D gradient per weight matrix, in order."""
    if pool is None:
        return [evaluate(kind, w, lam, opts_for_layer(i))
                for i, w in enumerate(weights)]
    futs = [pool.submit(evaluate, kind, w, lam, opts_for_layer(i))
            for i, w in enumerate(weights)]
    return [f.result() for f in futs]


def penalized_loss(model, x, labels, kind, lam, wd, opts=None,
                   regularize_final=True):
    """Full training objective for one batch (value only).

    Mirrors the loss assembled inside ``train`` step for step; finite-
    difference checks differentiate exactly this function.
    """
    data_loss, _, _ = model.forward(x, labels)
    total = data_loss
    opts = opts or RegOptions()
    w_layers = model.weight_layers()
    regularized = w_layers if regularize_final else w_layers[:-1]
    for layer in regularized:
        total += evaluate(kind, layer.weight_matrix(), lam, opts).value
    for layer in w_layers:
        total += wd * frob_norm_sq(layer.weight_matrix())
    return total


@dataclass
class EpochStats:
    epoch: int
    lam: float
    weight_decay: float
    learning_rate: float
    train_loss: float
    train_acc: float
    val_acc: float
    sigmas: list
    coherences: list
    colnorm_means: list
    colnorm_spreads: list
    wall_sec: float


@dataclass
class TrainRecord:
    reg_kind: RegKind
    seed: int
    epochs: list = field(default_factory=list)

    def csv_lines(self):
        """Deterministic per-epoch CSV (wall-clock excluded by design)."""
        if not self.epochs:
            return ["epoch\n"]
        n_layers = len(self.epochs[0].sigmas)
        cols = ["epoch", "lambda", "weight_decay", "learning_rate",
                "train_loss", "train_acc", "val_acc"]
        for i in range(n_layers):
            cols.extend([f"sigma_w{i}", f"coherence_w{i}",
                         f"colnorm_mean_w{i}", f"colnorm_spread_w{i}"])
        lines = [",".join(cols) + "\n"]
        for st in self.epochs:
            cells = [str(st.epoch), repr(st.lam), repr(st.weight_decay),
                     repr(st.learning_rate), repr(st.train_loss),
                     repr(st.train_acc), repr(st.val_acc)]
            for i in range(n_layers):
                cells.extend([repr(st.sigmas[i]), repr(st.coherences[i]),
                              repr(st.colnorm_means[i]),
                              repr(st.colnorm_spreads[i])])
            lines.append(",".join(cells) + "\n")
        return lines

    def timing_lines(self):
        lines = ["epoch,wall_sec\n"]
        lines.extend(f"{st.epoch},{st.wall_sec!r}\n" for st in self.epochs)
        return lines


def _power_seed(seed, epoch, step, layer_idx):
    """Deterministic 64-bit seed for one power-iteration start."""
    ss = np.random.SeedSequence((seed, 0x9E3, epoch, step, layer_idx))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _layer_diagnostics(layer):
    w = layer.weight_matrix()
    sigma = abs(sym_eig_dominant(gram(w) - np.eye(w.shape[1])).value)
    coherence = mutual_coherence(w) if w.shape[1] >= 2 else float("nan")
    norms = np.sqrt(np.sum(w * w, axis=0))
    return (float(sigma), float(coherence), float(np.mean(norms)),
            float(np.max(norms) - np.min(norms)))


def _accuracy(model, x, labels):
    out = x
    for layer in model.body:
        out, _ = layer.forward(out)
    return float(np.mean(np.argmax(out, axis=1) == labels))


def train(config, train_ds, val_ds):
    """Run the configured training loop; returns the per-epoch record.

    Raises NonFiniteLoss (carrying the partial record) the moment the
    objective stops being finite.
    """
    if len(train_ds) == 0:
        raise ValueError("training split is empty")
    if len(val_ds) == 0:
        raise ValueError("validation split is empty")
    x_train = as_matrix(train_ds.features, "train features")
    x_val = as_matrix(val_ds.features, "val features")
    y_train = train_ds.labels
    y_val = val_ds.labels

    model = Model(config.layers, x_train.shape[1], train_ds.num_classes)
    model.init_params(config.init, config.init_std, config.seed)
    kind = RegKind(config.reg_kind)

    velocities = []
    for layer in model.body:
        if layer.has_weights:
            velocities.append({k: np.zeros_like(v)
                               for k, v in layer.params().items()})
        else:
            velocities.append(None)

    shuffle_rng = np.random.default_rng((config.seed, 0x5F0))
    pool = (ThreadPoolExecutor(max_workers=config.threads)
            if config.threads > 1 else None)
    record = TrainRecord(reg_kind=kind, seed=config.seed)
    n = len(train_ds)
    w_layer_ids = [i for i, l in enumerate(model.body) if l.has_weights]
    reg_ids = w_layer_ids if config.regularize_final else w_layer_ids[:-1]

    try:
        for epoch in range(config.epochs):
            tic = time.perf_counter()
            lam = lambda_at(config.schedule, epoch)
            wd = weight_decay_at(config.schedule, kind, epoch)
            lr = lr_at(config.lr_plan, epoch)
            perm = shuffle_rng.permutation(n)
            loss_sum = 0.0
            correct = 0
            for step, lo in enumerate(range(0, n, config.batch_size)):
                idx = perm[lo: lo + config.batch_size]
                xb, yb = x_train[idx], y_train[idx]

                def layer_opts(wi, _e=epoch, _s=step):
                    return RegOptions(
                        srip_mode=config.srip_mode,
                        srip_iters=config.srip_iters,
                        srip_seed=_power_seed(config.seed, _e, _s, wi),
                        mc_off_diagonal_only=config.mc_off_diagonal_only)

                # overflow in an unstable run surfaces either as a
                # non-finite loss or as a validation error on an exploded
                # weight matrix; both abort with the partial record
                try:
                    with np.errstate(over="ignore", invalid="ignore"):
                        data_loss, probs, caches = model.forward(xb, yb)
                        grads = model.backward(probs, yb, caches)
                        reg_weights = [model.body[bi].weight_matrix()
                                       for bi in reg_ids]
                        regs = _reg_outputs(reg_weights, kind, lam,
                                            layer_opts, pool)
                        total_loss = data_loss
                        for bi, reg in zip(reg_ids, regs):
                            total_loss += reg.value
                            model.body[bi].add_weight_grad_2d(grads[bi],
                                                              reg.grad)
                        for bi in w_layer_ids:
                            layer = model.body[bi]
                            total_loss += wd * frob_norm_sq(
                                layer.weight_matrix())
                            grads[bi]["w"] += (2.0 * wd) * layer.params()["w"]
                except ValueError as exc:
                    raise NonFiniteLoss(
                        f"non-finite values at epoch {epoch}, step {step}: "
                        f"{exc}", record=record) from exc
                if not np.isfinite(total_loss):
                    raise NonFiniteLoss(
                        f"non-finite loss at epoch {epoch}, step {step}",
                        record=record)
                loss_sum += total_loss * len(yb)
                correct += int(np.sum(np.argmax(probs, axis=1) == yb))
                for bi in w_layer_ids:
                    layer = model.body[bi]
                    vel = velocities[bi]
                    params = layer.params()
                    for key, g in grads[bi].items():
                        vel[key] *= config.momentum
                        vel[key] += g
                        params[key] -= lr * vel[key]

            diag = [_layer_diagnostics(model.body[bi]) for bi in w_layer_ids]
            record.epochs.append(EpochStats(
                epoch=epoch, lam=lam, weight_decay=wd, learning_rate=lr,
                train_loss=loss_sum / n, train_acc=correct / n,
                val_acc=_accuracy(model, x_val, y_val),
                sigmas=[d[0] for d in diag],
                coherences=[d[1] for d in diag],
                colnorm_means=[d[2] for d in diag],
                colnorm_spreads=[d[3] for d in diag],
                wall_sec=time.perf_counter() - tic))
    finally:
        if pool is not None:
            pool.shutdown()
    return record, model
