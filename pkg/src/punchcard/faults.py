"""Crash-injection hooks.

Stateful code paths (wallet store, redemption DB, service handlers) call
``fault_point(name)`` at the boundaries where a crash would be interesting.
In production the hook is None and the call is a single attribute check.
Tests install a hook that raises at the k-th hit to simulate a crash at an
exact point, then re-open the stores and assert the recovery invariants.
"""

from __future__ import annotations

from typing import Callable, Optional

_hook: Optional[Callable[[str], None]] = None


class FaultInjected(BaseException):
    """Raised by test hooks to simulate a crash; deliberately not PunchcardError
    so production error handling never swallows it."""

    def __init__(self, point: str, index: int):
        super().__init__(f"injected fault at {point} (hit #{index})")
        self.point = point
        self.index = index


def fault_point(name: str) -> None:
    if _hook is not None:
        _hook(name)


def install_hook(hook: Optional[Callable[[str], None]]) -> None:
    global _hook
    _hook = hook


class FaultPlan:
    """Hook that records every hit and raises at one chosen index."""

    def __init__(self, fail_at: Optional[int] = None):
        self.fail_at = fail_at
        self.hits: list[str] = []

    def __call__(self, name: str) -> None:
        index = len(self.hits)
        self.hits.append(name)
        if self.fail_at is not None and index == self.fail_at:
            raise FaultInjected(name, index)

    def __enter__(self) -> "FaultPlan":
        install_hook(self)
        return self

    def __exit__(self, *exc) -> None:
        install_hook(None)
