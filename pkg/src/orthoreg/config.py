"""Run configuration files: ``key = value`` lines under [section] headers.

Sections: [model] (layer stack and init), [train] (optimizer and
regularizer knobs), [schedule] (coefficient plans), [data] (dataset source).
Unknown sections or keys are rejected by name so typos cannot silently fall
back to defaults. Files are plain text so experiment configs stay diffable
and archivable.
"""

import configparser
import hashlib
from dataclasses import dataclass

from .errors import ConfigError
from .regularizers import RegKind, SripMode
from .schedule import DEFAULT_WD_BREAKPOINTS, ScheduleConfig
from .trainer import DEFAULT_LR_PLAN, LayerSpec, TrainConfig

_ALLOWED = {
    "model": {"layers", "init"},
    "train": {"reg", "epochs", "batch_size", "seed", "momentum", "lr",
              "srip_mode", "srip_iters", "mc_off_diagonal_only",
              "regularize_final", "threads"},
    "schedule": {"lambda_init", "lambda_breakpoints", "wd_init",
                 "wd_breakpoints"},
    "data": {"source", "seed", "n_per_class", "classes", "dims", "spread",
             "val_fraction", "split_seed", "path", "label_column",
             "has_header"},
}


@dataclass(frozen=True)
class DataSpec:
    source: str = "blobs"
    seed: int = 0
    n_per_class: int = 100
    classes: int = 3
    dims: int = 16
    spread: float = 1.0
    val_fraction: float = 0.25
    split_seed: int = 0
    path: str = ""
    label_column: int = -1
    has_header: bool = False


@dataclass(frozen=True)
class RunSpec:
    train: TrainConfig
    data: DataSpec
    config_sha256: str
    raw_text: str


def _parse_sections(text):
    parser = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from exc
    sections = {}
    for name in parser.sections():
        if name not in _ALLOWED:
            raise ConfigError(f"unknown section [{name}]")
        for key in parser[name]:
            if key not in _ALLOWED[name]:
                raise ConfigError(f"unknown key {key!r} in section [{name}]")
        sections[name] = dict(parser[name])
    return sections


def _get(section, key, conv, default):
    if key not in section:
        return default
    raw = section[key].strip()
    try:
        return conv(raw)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"key {key!r}: {exc}") from exc


def _bool(raw):
    low = raw.lower()
    if low in ("true", "1", "yes", "on"):
        return True
    if low in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {raw!r}")


def _breakpoints(raw):
    if not raw.strip():
        return ()
    points = []
    for item in raw.split(","):
        epoch_s, _, value_s = item.partition(":")
        if not value_s:
            raise ValueError(f"breakpoint {item.strip()!r} is not EPOCH:VALUE")
        points.append((int(epoch_s), float(value_s)))
    return tuple(points)


def parse_layers(raw):
    specs = []
    for item in (s.strip() for s in raw.split(",")):
        if not item:
            continue
        name, *args = item.split(":")
        name = name.lower()
        if name == "dense":
            if len(args) != 2:
                raise ValueError(f"dense needs IN:OUT, got {item!r}")
            specs.append(LayerSpec.dense(int(args[0]), int(args[1])))
        elif name == "conv2d":
            if len(args) not in (4, 6):
                raise ValueError(
                    f"conv2d needs S:H:C_IN:C_OUT[:STRIDE:PAD], got {item!r}")
            nums = [int(a) for a in args]
            stride, pad = (nums[4], nums[5]) if len(nums) == 6 else (1, 0)
            specs.append(LayerSpec.conv2d(nums[0], nums[1], nums[2], nums[3],
                                          stride, pad))
        elif name == "relu":
            specs.append(LayerSpec.relu())
        elif name == "softmax_xent":
            specs.append(LayerSpec.softmax_xent())
        else:
            raise ValueError(f"unknown layer kind {name!r}")
    if not specs:
        raise ValueError("layer list is empty")
    return tuple(specs)


def _parse_init(raw):
    name, _, std = raw.partition(":")
    name = name.strip().lower()
    if name == "orthogonal":
        return "orthogonal", 0.1
    if name == "gaussian":
        return "gaussian", float(std) if std else 0.1
    raise ValueError(f"init must be 'orthogonal' or 'gaussian[:STD]', "
                     f"got {raw!r}")


def parse_run_config(text):
    """Parse config text into a RunSpec (training + data + schedule)."""
    sections = _parse_sections(text)
    model = sections.get("model")
    if model is None or "layers" not in model:
        raise ConfigError("section [model] with key 'layers' is required")
    train_sec = sections.get("train", {})
    sched_sec = sections.get("schedule", {})
    data_sec = sections.get("data", {})

    layers = _get(model, "layers", parse_layers, None)
    init, init_std = _get(model, "init", _parse_init, ("orthogonal", 0.1))

    reg = _get(train_sec, "reg", RegKind.from_string, RegKind.NONE)

    wd_points = _get(sched_sec, "wd_breakpoints", _breakpoints, None)
    if wd_points is None:
        wd_map = dict(DEFAULT_WD_BREAKPOINTS)
    else:
        wd_map = {reg: wd_points}
    try:
        sched = ScheduleConfig(
            lambda_init=_get(sched_sec, "lambda_init", float, 0.1),
            lambda_breakpoints=_get(sched_sec, "lambda_breakpoints",
                                    _breakpoints,
                                    ScheduleConfig().lambda_breakpoints),
            wd_init=_get(sched_sec, "wd_init", float, 1e-8),
            wd_breakpoints=wd_map)
        train_cfg = TrainConfig(
            layers=layers,
            reg_kind=reg,
            schedule=sched,
            epochs=_get(train_sec, "epochs", int, 150),
            batch_size=_get(train_sec, "batch_size", int, 32),
            seed=_get(train_sec, "seed", int, 0),
            momentum=_get(train_sec, "momentum", float, 0.9),
            lr_plan=_get(train_sec, "lr", _breakpoints, DEFAULT_LR_PLAN),
            init=init,
            init_std=init_std,
            srip_mode=_get(train_sec, "srip_mode",
                           lambda s: SripMode(s.lower()), SripMode.POWER),
            srip_iters=_get(train_sec, "srip_iters", int, 2),
            mc_off_diagonal_only=_get(train_sec, "mc_off_diagonal_only",
                                      _bool, False),
            regularize_final=_get(train_sec, "regularize_final", _bool, True),
            threads=_get(train_sec, "threads", int, 1))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    source = _get(data_sec, "source", str, "blobs").lower()
    if source not in ("blobs", "csv"):
        raise ConfigError(f"key 'source': must be 'blobs' or 'csv', "
                          f"got {source!r}")
    data_spec = DataSpec(
        source=source,
        seed=_get(data_sec, "seed", int, 0),
        n_per_class=_get(data_sec, "n_per_class", int, 100),
        classes=_get(data_sec, "classes", int, 3),
        dims=_get(data_sec, "dims", int, 16),
        spread=_get(data_sec, "spread", float, 1.0),
        val_fraction=_get(data_sec, "val_fraction", float, 0.25),
        split_seed=_get(data_sec, "split_seed", int, 0),
        path=_get(data_sec, "path", str, ""),
        label_column=_get(data_sec, "label_column", int, -1),
        has_header=_get(data_sec, "has_header", _bool, False))
    if source == "csv" and not data_spec.path:
        raise ConfigError("key 'path' is required when source = csv")

    digest = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return RunSpec(train=train_cfg, data=data_spec, config_sha256=digest,
                   raw_text=text)


def parse_schedule_config(text, default_kind=RegKind.NONE):
    """Parse just the schedule (and regularizer kind) from config text."""
    sections = _parse_sections(text)
    train_sec = sections.get("train", {})
    sched_sec = sections.get("schedule", {})
    reg = _get(train_sec, "reg", RegKind.from_string, default_kind)
    wd_points = _get(sched_sec, "wd_breakpoints", _breakpoints, None)
    wd_map = dict(DEFAULT_WD_BREAKPOINTS) if wd_points is None else {reg: wd_points}
    try:
        sched = ScheduleConfig(
            lambda_init=_get(sched_sec, "lambda_init", float, 0.1),
            lambda_breakpoints=_get(sched_sec, "lambda_breakpoints",
                                    _breakpoints,
                                    ScheduleConfig().lambda_breakpoints),
            wd_init=_get(sched_sec, "wd_init", float, 1e-8),
            wd_breakpoints=wd_map)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return sched, reg


def load_dataset(spec):
    """Materialize (train, val) datasets from a DataSpec."""
    from . import data as data_mod
    if spec.source == "blobs":
        ds = data_mod.gen_blobs(spec.seed, spec.n_per_class, spec.classes,
                                spec.dims, spec.spread)
    else:
        ds = data_mod.load_csv(spec.path, spec.label_column,
                               has_header=spec.has_header)
    return data_mod.split(ds, spec.val_fraction, spec.split_seed)
