"""Tolerances, resource caps and the library's exception types.

All numerical tolerances live in one :class:`Settings` record.  The active
record is held in a context variable, so overrides made with
:func:`use_settings` are local to the current thread / task.
"""
from __future__ import annotations

import contextlib
import contextvars
import dataclasses
from dataclasses import dataclass


class CatportError(Exception):
    """Base class for all errors raised by the library."""


class PreconditionError(CatportError, ValueError):
    """An argument violates an operation's precondition."""


class DimensionLimitError(CatportError):
    """A construction would exceed the configured total-dimension cap."""


class NumericError(CatportError, ArithmeticError):
    """A numerical routine failed to converge."""


class InfeasibleError(CatportError):
    """A requested transformation is not possible (e.g. majorization fails)."""


class BoundaryError(CatportError):
    """A solution exists only as a limit (e.g. inverse temperature +/- inf)."""

    def __init__(self, message: str, limit: float):
        super().__init__(message)
        self.limit = limit


@dataclass(frozen=True)
class Settings:
    tol_herm: float = 1e-10
    tol_trace: float = 1e-10
    tol_psd: float = 1e-10
    tol_norm: float = 1e-12
    tol_unitary: float = 1e-9
    tol_kraus: float = 1e-10
    tol_majorization: float = 1e-12
    # Schmidt-coefficient transfers below this size are skipped
    transfer_floor: float = 1e-12
    # singular values below this are treated as zero
    tol_rank: float = 1e-12
    bound_slack: float = 1e-8
    max_dim: int = 4096
    # None -> natural log
    entropy_base: float | None = None


_current: contextvars.ContextVar[Settings] = contextvars.ContextVar(
    "catport_settings", default=Settings()
)


def get_settings() -> Settings:
    return _current.get()


@contextlib.contextmanager
def use_settings(settings: Settings | None = None, **overrides):
    """Temporarily replace the active settings.

    >>> with use_settings(max_dim=256):
    ...     get_settings().max_dim
    256
    """
    base = settings if settings is not None else _current.get()
    token = _current.set(dataclasses.replace(base, **overrides))
    try:
        yield _current.get()
    finally:
        _current.reset(token)


def parse_overrides(pairs: dict[str, str]) -> dict:
    """Coerce ``{"tol_herm": "1e-9"}``-style text overrides to field types."""
    fields = {f.name: f for f in dataclasses.fields(Settings)}
    out = {}
    for key, raw in pairs.items():
        if key not in fields:
            raise PreconditionError(f"unknown tolerance/setting {key!r}")
        if key == "max_dim":
            out[key] = int(raw)
        elif key == "entropy_base":
            out[key] = None if str(raw).lower() in ("none", "e", "nat", "nats") else float(raw)
        else:
            out[key] = float(raw)
    return out
