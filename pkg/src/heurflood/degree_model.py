"""Truncated node-degree distributions and their generating-function moments.

All degree sums run over ``0..max_degree``; the pmf is renormalized after
truncation, so a power law never needs the zeta function explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

KINDS = ("poisson", "power_law", "empirical")


@dataclass(frozen=True)
class DegreeModel:
    """A degree distribution ``P(0..D)`` truncated at ``max_degree = D``.

    ``param`` is the Poisson mean ``z`` or the power-law exponent ``tau``;
    it is ``None`` for empirical histograms.
    """

    kind: str
    max_degree: int
    pmf: np.ndarray = field(repr=False)
    param: float | None = None

    def __post_init__(self):
        pmf = np.array(self.pmf, dtype=float)
        pmf.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)

    @property
    def degrees(self) -> np.ndarray:
        return np.arange(self.max_degree + 1)

    @property
    def mean(self) -> float:
        """Average degree ``Z_G``."""
        return mean_and_moments(self, 1)

    def g0(self, x: float) -> float:
        """Degree generating function ``sum_a x**a P(a)``."""
        return float(np.sum(self.pmf * np.power(x, self.degrees)))

    def g0_prime(self, x: float) -> float:
        a = self.degrees[1:]
        return float(np.sum(a * self.pmf[1:] * np.power(x, a - 1)))

    def g1(self, x: float) -> float:
        """Excess-degree generating function ``G0'(x) / Z_G``."""
        return self.g0_prime(x) / self.mean

    def label(self) -> str:
        if self.kind == "empirical":
            return f"empirical(D={self.max_degree})"
        name = "z" if self.kind == "poisson" else "tau"
        return f"{self.kind}({name}={self.param:g}, D={self.max_degree})"


def _normalize(weights: np.ndarray) -> np.ndarray:
    total = weights.sum()
    if not np.isfinite(total) or total <= 0:
        raise ValueError("degree weights must have positive finite mass")
    return weights / total


def poisson(z: float, max_degree: int) -> DegreeModel:
    if z <= 0:
        raise ValueError(f"Poisson mean must be positive, got {z}")
    _check_max_degree(max_degree)
    a = np.arange(max_degree + 1)
    # log-space to survive z**a / a! for a in the thousands
    logp = -z + a * np.log(z) - gammaln(a + 1)
    return DegreeModel("poisson", max_degree, _normalize(np.exp(logp)), float(z))


def power_law(tau: float, max_degree: int) -> DegreeModel:
    if tau <= 0:
        raise ValueError(f"power-law exponent must be positive, got {tau}")
    _check_max_degree(max_degree)
    w = np.zeros(max_degree + 1)
    w[1:] = np.arange(1, max_degree + 1, dtype=float) ** (-tau)
    return DegreeModel("power_law", max_degree, _normalize(w), float(tau))


def empirical(counts) -> DegreeModel:
    """Model from a histogram: ``counts[a]`` nodes of degree ``a``."""
    w = np.asarray(counts, dtype=float)
    if w.ndim != 1 or len(w) < 2:
        raise ValueError("histogram must cover at least degrees 0 and 1")
    if np.any(w < 0):
        raise ValueError("histogram counts must be nonnegative")
    return DegreeModel("empirical", len(w) - 1, _normalize(w))


def build_model(kind: str, max_degree: int, *, z: float | None = None,
                tau: float | None = None, counts=None) -> DegreeModel:
    if kind == "poisson":
        if z is None:
            raise ValueError("poisson model needs z")
        return poisson(z, max_degree)
    if kind == "power_law":
        if tau is None:
            raise ValueError("power_law model needs tau")
        return power_law(tau, max_degree)
    if kind == "empirical":
        if counts is None:
            raise ValueError("empirical model needs counts")
        counts = np.asarray(counts, dtype=float)
        if max_degree < len(counts) - 1:
            counts = counts[: max_degree + 1]
        elif max_degree > len(counts) - 1:
            counts = np.concatenate([counts, np.zeros(max_degree + 1 - len(counts))])
        _check_max_degree(max_degree)
        return empirical(counts)
    raise ValueError(f"unknown model kind {kind!r}; expected one of {KINDS}")


def _check_max_degree(max_degree: int) -> None:
    if int(max_degree) != max_degree or max_degree < 1:
        raise ValueError(f"max_degree must be an integer >= 1, got {max_degree}")


def mean_and_moments(model: DegreeModel, s: int) -> float:
    """``s``-th raw moment of the degree, ``sum_a a**s P(a)``."""
    if s < 1:
        raise ValueError("moment order must be >= 1")
    a = model.degrees.astype(float)
    return float(np.sum(a**s * model.pmf))


def edge_end_pmf(model: DegreeModel) -> np.ndarray:
    """Degree distribution at the end of a random edge.

    Entry ``b - 1`` holds ``b P(b) / Z_G`` for ``b = 1..D``.
    """
    z = model.mean
    if z <= 0:
        raise ValueError("edge-end distribution undefined: every node is isolated")
    b = model.degrees[1:]
    return b * model.pmf[1:] / z


def above_phase_transition(model: DegreeModel) -> tuple[bool, float]:
    """Giant-component criterion ``<K^2> / Z_G > 2``; returns (flag, ratio)."""
    z = model.mean
    if z <= 0:
        raise ValueError("phase-transition ratio undefined: every node is isolated")
    ratio = mean_and_moments(model, 2) / z
    return ratio > 2, ratio
