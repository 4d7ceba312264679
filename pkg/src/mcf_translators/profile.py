"""Sampled profile curves ``(s, w(s), f(s))`` with ``w = f'``."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .errors import DomainError


class Causal(enum.Enum):
    SPACELIKE = "SpaceLike"
    TIMELIKE = "TimeLike"


@dataclass(frozen=True, eq=False)
class ProfileCurve:
    """Samples of a profile ``f`` and its slope ``w`` on an increasing ``s`` grid.

    ``kind`` names the family (``"f1"`` .. ``"f8"`` for horosphere profiles,
    ``"Bowl"``, ``"SpaceLikeConeMinus"``, ... for rotational ones).
    ``evaluator`` optionally maps an array of ``s`` to ``(w, f)`` between
    samples.
    """

    s: np.ndarray
    w: np.ndarray
    f: np.ndarray
    kind: str
    causal: Causal
    n: int
    s0: float = 0.0
    f0: float = 0.0
    branch: Any = None
    limit_tag: Optional[int] = None
    evaluator: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        w = np.asarray(self.w, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if not (s.shape == w.shape == f.shape) or s.ndim != 1:
            raise ValueError("s, w and f must be 1-D arrays of equal length")
        if np.any(np.diff(s) <= 0):
            raise ValueError("profile samples must have strictly increasing s")
        finite = np.isfinite(w)
        if self.causal is Causal.SPACELIKE and np.any(np.abs(w[finite]) >= 1.0):
            raise DomainError("space-like profile with |w| >= 1")
        if self.causal is Causal.TIMELIKE and np.any(np.abs(w[finite]) <= 1.0):
            raise DomainError("time-like profile with |w| <= 1")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "f", f)

    def __len__(self):
        return self.s.shape[0]

    def evaluate(self, s):
        """``(w, f)`` at arbitrary ``s`` via the attached evaluator."""
        if self.evaluator is None:
            raise DomainError(f"profile {self.kind!r} has no dense evaluator")
        return self.evaluator(np.asarray(s, dtype=float))

    def columns(self) -> np.ndarray:
        return np.column_stack([self.s, self.w, self.f])
