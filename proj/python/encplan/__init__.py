"""Storage investment planning with an emissions-neutrality constraint."""

from ._core import (
    DomainError,
    PowerSystem,
    UsageError,
    cmd_plan,
    cmd_reduce,
    cmd_sweep,
    cmd_verify,
    config_hash,
    config_text,
    load_system,
    plan_outcomes,
    reduce_days,
    wilcoxon_pratt,
)


def _settings(kwargs):
    return {k: ",".join(map(str, v)) if isinstance(v, (list, tuple)) else str(v) for k, v in kwargs.items()}


def reduce(**kwargs):
    return cmd_reduce(_settings(kwargs))


def plan(**kwargs):
    return cmd_plan(_settings(kwargs))


def sweep(**kwargs):
    return cmd_sweep(_settings(kwargs))


def verify(**kwargs):
    return cmd_verify(_settings(kwargs))


__all__ = [
    "DomainError",
    "PowerSystem",
    "UsageError",
    "cmd_plan",
    "cmd_reduce",
    "cmd_sweep",
    "cmd_verify",
    "config_hash",
    "config_text",
    "load_system",
    "plan",
    "plan_outcomes",
    "reduce",
    "reduce_days",
    "sweep",
    "verify",
    "wilcoxon_pratt",
]
