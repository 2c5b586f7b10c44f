"""Forwarding rules: the probability ``f(a, b)`` that a node of degree ``a``
passes the item to a neighbor of degree ``b``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

RULE_KINDS = ("uninformed", "probabilistic", "heuristic")


@dataclass(frozen=True)
class FloodRule:
    kind: str
    param: float | None = None

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ValueError(f"unknown rule {self.kind!r}; expected one of {RULE_KINDS}")
        if self.kind == "uninformed":
            if self.param is not None:
                raise ValueError("uninformed flooding takes no parameter")
        elif self.param is None:
            raise ValueError(f"{self.kind} rule needs a parameter")
        elif self.kind == "probabilistic" and not 0.0 <= self.param <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.param}")
        elif self.kind == "heuristic" and not 0.0 < self.param < 1.0:
            # alpha = 1 is the uninformed rule; the closed form has a removable singularity there
            raise ValueError(f"alpha must lie in (0, 1), got {self.param}")

    # every shipped rule depends on its arguments only through min(a, b)
    symmetric = True
    depends_on_min = True

    def min_profile(self, m) -> np.ndarray:
        """``f`` as a function of ``m = min(a, b)``, for ``m >= 1``."""
        m = np.asarray(m, dtype=float)
        if self.kind == "uninformed":
            return np.ones_like(m)
        if self.kind == "probabilistic":
            return np.full_like(m, self.param)
        alpha = self.param
        # 1 - (1 - alpha)**(1/m), without cancellation for large m
        h = -np.expm1(np.log1p(-alpha) / m) / alpha
        return np.where(m <= 1, 1.0, np.minimum(h, 1.0))

    def prob(self, a, b) -> np.ndarray:
        return self.min_profile(np.minimum(a, b))

    @property
    def ident(self) -> str:
        return self.kind if self.param is None else f"{self.kind}({self.param:g})"


def uninformed() -> FloodRule:
    return FloodRule("uninformed")


def probabilistic(p: float) -> FloodRule:
    return FloodRule("probabilistic", float(p))


def heuristic(alpha: float) -> FloodRule:
    return FloodRule("heuristic", float(alpha))


def parse_rule(kind: str, param: float | None = None) -> FloodRule:
    if kind == "uninformed":
        return uninformed()
    return FloodRule(kind, None if param is None else float(param))


def forward_probability(rule: FloodRule, a, b):
    """Probability that a degree-``a`` node forwards to a degree-``b`` neighbor.

    Works elementwise on arrays. Degrees must be at least 1: an isolated node
    never forwards, so asking about one is a caller bug.
    """
    a_arr = np.asarray(a)
    b_arr = np.asarray(b)
    if np.any(a_arr < 1) or np.any(b_arr < 1):
        raise ValueError("forwarding probability is only defined for degrees >= 1")
    out = rule.prob(a_arr, b_arr)
    if out.ndim == 0:
        return float(out)
    return out
