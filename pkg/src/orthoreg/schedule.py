"""Epoch-indexed coefficient plans for the regularizer and weight decay.

The default plan starts the orthogonality coefficient at 0.1, steps it down
to 1e-3 / 1e-4 / 1e-6 at epochs 20 / 50 / 70 and to zero at epoch 120
("after E epochs" is read as "effective from 0-indexed epoch E onward").
Weight decay starts at 1e-8 and, for the plain and double soft-orthogonality
penalties only, rises at epoch 20 (to 1e-4 and 5e-4 respectively); the
coherence- and spectrum-based penalties keep the initial value throughout.
"""

from dataclasses import dataclass, field

from .regularizers import RegKind

DEFAULT_LAMBDA_BREAKPOINTS = ((20, 1e-3), (50, 1e-4), (70, 1e-6), (120, 0.0))
DEFAULT_WD_BREAKPOINTS = {
    RegKind.SO: ((20, 1e-4),),
    RegKind.DSO: ((20, 5e-4),),
}


def _check_breakpoints(name, init, points, monotone_decreasing):
    prev_epoch = -1
    prev_value = init
    for epoch, value in points:
        if int(epoch) != epoch or epoch < 0:
            raise ValueError(f"{name}: breakpoint epoch {epoch!r} invalid")
        if epoch <= prev_epoch:
            raise ValueError(f"{name}: breakpoint epochs must be strictly "
                             f"increasing, got {epoch} after {prev_epoch}")
        if value < 0.0:
            raise ValueError(f"{name}: negative coefficient {value}")
        if monotone_decreasing and value > prev_value:
            raise ValueError(f"{name}: plan must be non-increasing, "
                             f"{value} follows {prev_value}")
        prev_epoch = epoch
        prev_value = value


@dataclass(frozen=True)
class ScheduleConfig:
    lambda_init: float = 0.1
    lambda_breakpoints: tuple = DEFAULT_LAMBDA_BREAKPOINTS
    wd_init: float = 1e-8
    wd_breakpoints: dict = field(
        default_factory=lambda: dict(DEFAULT_WD_BREAKPOINTS))

    def __post_init__(self):
        _check_breakpoints("lambda", self.lambda_init,
                           self.lambda_breakpoints, True)
        for kind, points in self.wd_breakpoints.items():
            _check_breakpoints(f"weight decay[{RegKind(kind).value}]",
                               self.wd_init, points, False)


def _piecewise(init, points, epoch):
    value = init
    for bp_epoch, bp_value in points:
        if epoch >= bp_epoch:
            value = bp_value
        else:
            break
    return value


def lambda_at(cfg, epoch):
    """Regularizer coefficient effective at a 0-indexed epoch."""
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    return _piecewise(cfg.lambda_init, cfg.lambda_breakpoints, epoch)


def weight_decay_at(cfg, kind, epoch):
    """Weight-decay coefficient for a regularizer kind at a 0-indexed epoch."""
    if epoch < 0:
        raise ValueError(f"epoch must be >= 0, got {epoch}")
    points = cfg.wd_breakpoints.get(RegKind(kind), ())
    return _piecewise(cfg.wd_init, points, epoch)


def schedule_rows(cfg, kind, epochs):
    """(epoch, lambda, weight-decay) rows for the first ``epochs`` epochs."""
    if epochs < 1:
        raise ValueError(f"epochs must be >= 1, got {epochs}")
    return [(e, lambda_at(cfg, e), weight_decay_at(cfg, kind, e))
            for e in range(epochs)]
