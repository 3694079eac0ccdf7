"""Cooperative wall-clock deadlines for replay, search and translation."""

from __future__ import annotations

import contextlib
import contextvars
import time
from typing import Iterator, Optional


class DeadlineExceeded(Exception):
    pass


_deadline: contextvars.ContextVar[Optional[float]] = contextvars.ContextVar("deadline", default=None)


@contextlib.contextmanager
def deadline(seconds: Optional[float]) -> Iterator[None]:
    if seconds is None:
        yield
        return
    token = _deadline.set(time.monotonic() + seconds)
    try:
        yield
    finally:
        _deadline.reset(token)


def check_deadline() -> None:
    d = _deadline.get()
    if d is not None and time.monotonic() > d:
        raise DeadlineExceeded("per-proof time limit exceeded")
