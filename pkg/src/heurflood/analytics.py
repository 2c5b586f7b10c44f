"""Generating-function predictions for flooding on random graphs.

Two layers:

* the undirected graph: giant-component fraction, mean degree and
  2-neighbour count inside it, and expected path lengths;
* the flooding digraph ``F``, where the arc ``u -> v`` of every edge is kept
  with probability ``f(deg u, deg v)``: giant in/out-component fractions,
  mean out-degree inside the giant out-component, and from these the reach,
  message and waiting-time ratios of a flooding rule relative to uninformed
  flooding.

Degree-indexed arrays are 0-based with entry ``b - 1`` for degree ``b``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from heurflood.degree_model import DegreeModel, edge_end_pmf, mean_and_moments

log = logging.getLogger(__name__)

TOL = 1e-12
MAX_ITER = 100_000
STALL_LIMIT = 10
DAMPING = 0.5
_BLOCK = 512


class UnsupportedPrediction(Exception):
    """No analytical prediction exists for this (model, rule) combination."""


class PathLengthUndefined(ValueError):
    """A path-length formula hit a nonpositive logarithm argument."""


class ConvergenceError(RuntimeError):
    pass


# --------------------------------------------------------------------------
# undirected graph


@dataclass(frozen=True)
class GccAnalysis:
    q: float
    theta_g: float
    z_gcc: float
    z2_gcc: float
    l_g: float
    l_gcc: float
    n: int


def _scalar_fixed_point(g1, g1_prime) -> float:
    q = 0.0
    for _ in range(MAX_ITER):
        nxt = g1(q)
        if abs(nxt - q) < TOL:
            return nxt
        q = nxt
    # near the transition plain iteration crawls; finish with Newton, which
    # also climbs monotonically to the smallest root of the convex G1(x) - x
    for _ in range(200):
        step = (g1(q) - q) / (g1_prime(q) - 1.0)
        q -= step
        if abs(step) < TOL:
            return q
    raise ConvergenceError("G1 fixed point did not converge")


def path_length(nodes: float, z1: float, z2: float) -> float:
    """Smallest ``L`` with ``z1 (1 + r + ... + r**(L-1)) = nodes``, ``r = z2 / z1``."""
    if not (z1 > 0 and z2 > 0 and nodes > 0):
        raise PathLengthUndefined(f"nonpositive input (nodes={nodes}, z1={z1}, z2={z2})")
    ratio = z2 / z1
    if ratio == 1.0:
        return nodes / z1
    arg = (nodes / z1) * (ratio - 1.0) + 1.0
    if arg <= 0:
        raise PathLengthUndefined(f"log argument {arg} <= 0")
    return math.log(arg) / math.log(ratio)


def _path_length_or_nan(nodes, z1, z2) -> float:
    try:
        return path_length(nodes, z1, z2)
    except PathLengthUndefined:
        return float("nan")


def gcc_analysis(model: DegreeModel, n: int) -> GccAnalysis:
    z = model.mean
    if z <= 0:
        raise ValueError("giant component undefined: every node is isolated")
    k2 = mean_and_moments(model, 2)
    if k2 / z <= 2:
        q = 1.0  # at or below the transition 1 is the only root in [0, 1]
    else:
        q = _scalar_fixed_point(model.g1, lambda x: _g1_prime(model, x))
    theta = float(1.0 - model.g0(q))
    excess = (k2 - z) / z  # mean number of a neighbour's other neighbours
    l_g = _path_length_or_nan(n - 1, z, z * excess)
    if theta > TOL:
        z_gcc = (z - q * model.g0_prime(q)) / theta
        z2_gcc = z_gcc * excess
        l_gcc = _path_length_or_nan(n * theta - 1, z_gcc, z2_gcc)
    else:
        theta = max(theta, 0.0)
        z_gcc = z2_gcc = l_gcc = float("nan")
    return GccAnalysis(q, theta, z_gcc, z2_gcc, l_g, l_gcc, n)


def _g1_prime(model: DegreeModel, x: float) -> float:
    a = model.degrees[2:]
    return float(np.sum(a * (a - 1) * model.pmf[2:] * np.power(x, a - 2))) / model.mean


# --------------------------------------------------------------------------
# flooding digraph


def kernel_apply(rule, max_degree: int, y: np.ndarray, transpose: bool = False) -> np.ndarray:
    """``S[a] = sum_b f(a, b) y[b]`` over degrees ``1..D`` (``f(b, a)`` if transposed).

    Rules that only look at ``min(a, b)`` take an O(D) prefix-sum route;
    anything else is evaluated densely in row blocks.
    """
    y = np.asarray(y, dtype=float)
    if getattr(rule, "depends_on_min", False):
        g = rule.min_profile(np.arange(1, max_degree + 1))
        below = np.concatenate([[0.0], np.cumsum(g * y)[:-1]])  # sum over b < a of g(b) y(b)
        at_or_above = np.cumsum(y[::-1])[::-1]  # sum over b >= a of y(b)
        return below + g * at_or_above
    return kernel_apply_dense(rule, max_degree, y, transpose)


def kernel_apply_dense(rule, max_degree: int, y: np.ndarray, transpose: bool = False) -> np.ndarray:
    deg = np.arange(1, max_degree + 1)
    out = np.empty(max_degree)
    for start in range(0, max_degree, _BLOCK):
        rows = deg[start:start + _BLOCK, None]
        f = rule.prob(deg[None, :], rows) if transpose else rule.prob(rows, deg[None, :])
        out[start:start + _BLOCK] = np.asarray(f, dtype=float) @ y
    return out


def _transpose_for(direction: str) -> bool:
    if direction not in ("out", "in"):
        raise ValueError(f"direction must be 'out' or 'in', got {direction!r}")
    return direction == "in"


def dead_end_map(model: DegreeModel, rule, direction: str, q: np.ndarray) -> np.ndarray:
    """One application of the dead-end system.

    For ``out``: ``q_b = (sum_c [1 - f(b,c) + f(b,c) q_c] c P(c) / Z)**(b-1)``;
    ``in`` swaps the arguments of ``f``.
    """
    return dead_end_map_fast(edge_end_pmf(model), rule, _transpose_for(direction), q)


def dead_end_map_fast(ends: np.ndarray, rule, transpose: bool, q: np.ndarray) -> np.ndarray:
    D = len(ends)
    s = 1.0 - kernel_apply(rule, D, (1.0 - q) * ends, transpose)
    s = np.clip(s, 0.0, 1.0)
    return np.power(s, np.arange(D))


def _dead_end_sums(ends: np.ndarray, rule, transpose: bool, q: np.ndarray) -> np.ndarray:
    """Probability that a given neighbour of a degree-``a`` node is a dead end."""
    return np.clip(1.0 - kernel_apply(rule, len(ends), (1.0 - q) * ends, transpose), 0.0, 1.0)


def branching_radius(ends: np.ndarray, rule, transpose: bool, max_iter: int = 5000,
                     rtol: float = 1e-10) -> tuple[float, float]:
    """Collatz-Wielandt bounds on the spectral radius of the dead-end system
    linearized at ``q = 1``: ``M[b, c] = (b - 1) f(b, c) c P(c) / Z``.

    Only degrees ``b >= 2`` with edge-end mass take part; the other types
    have no offspring or are never offspring and contribute eigenvalue 0.
    """
    D = len(ends)
    excess = np.arange(D, dtype=float)
    live = (excess > 0) & (ends > 0)
    if not live.any():
        return 0.0, 0.0
    x = np.where(live, 1.0, 0.0)
    lo, hi = 0.0, math.inf
    for _ in range(max_iter):
        mx = excess * kernel_apply(rule, D, ends * x, transpose)
        ratios = mx[live] / x[live]
        lo, hi = float(ratios.min()), float(ratios.max())
        if hi <= 1.0 or lo > 1.0 or hi - lo <= rtol * max(hi, 1e-300):
            break
        norm = mx[live].max()
        if norm == 0:
            return 0.0, 0.0
        x = np.where(live, mx / norm, 0.0)
    return lo, hi


def solve_dead_end_probs(model: DegreeModel, rule, direction: str = "out") -> np.ndarray:
    """Smallest solution in ``[0, 1]^D`` of the dead-end system.

    Returns all ones when the flooding digraph is at or below its transition
    (no giant in/out-component). Otherwise iterates from zero, halving the
    step if the residual stalls for several consecutive rounds.
    """
    if model.mean <= 0:
        raise ValueError("dead-end probabilities undefined: every node is isolated")
    ends = edge_end_pmf(model)
    transpose = _transpose_for(direction)
    return _solve(ends, rule, transpose)


def _solve(ends: np.ndarray, rule, transpose: bool) -> np.ndarray:
    D = len(ends)
    lo, hi = branching_radius(ends, rule, transpose)
    if hi <= 1.0 or (lo <= 1.0 and hi - 1.0 < 1e-9):
        return np.ones(D)
    q = np.zeros(D)
    best = math.inf
    stalled = 0
    damp = 1.0
    for _ in range(MAX_ITER):
        nxt = dead_end_map_fast(ends, rule, transpose, q)
        res = float(np.max(np.abs(nxt - q)))
        if res < TOL:
            return nxt
        if res < best:
            best, stalled = res, 0
        else:
            stalled += 1
            if stalled >= STALL_LIMIT:
                damp = DAMPING
        q = q + damp * (nxt - q)
    raise ConvergenceError(f"dead-end system stuck at residual {best:.3g} after {MAX_ITER} iterations")


def fixed_point_residual(model: DegreeModel, rule, direction: str, q: np.ndarray) -> float:
    return float(np.max(np.abs(dead_end_map(model, rule, direction, q) - q)))


def _giant_fraction(model: DegreeModel, dead: np.ndarray) -> float:
    # node of degree a misses the giant part iff all its a neighbours are dead ends
    a = model.degrees[1:]
    outside = model.pmf[0] + float(np.sum(model.pmf[1:] * np.power(dead, a)))
    return max(0.0, 1.0 - outside)


def giant_fractions(model: DegreeModel, rule) -> tuple[float, float]:
    """Fractions of nodes in the giant in-component and giant out-component of ``F``."""
    ends = edge_end_pmf(model)
    q_out = _solve(ends, rule, False)
    q_in = q_out if _shortcut_symmetric(rule) else _solve(ends, rule, True)
    theta_in = _giant_fraction(model, _dead_end_sums(ends, rule, False, q_out))
    theta_out = _giant_fraction(model, _dead_end_sums(ends, rule, True, q_in))
    return theta_in, theta_out


def _shortcut_symmetric(rule) -> bool:
    return bool(getattr(rule, "symmetric", False))


@dataclass(frozen=True)
class DigraphAnalysis:
    q_out: np.ndarray = field(repr=False)
    q_in: np.ndarray = field(repr=False)
    theta_in: float
    theta_out: float
    h_minus: np.ndarray = field(repr=False)
    z_gout: float
    z2_gout: float
    rho: float | None
    l_gout: float | None
    p_n: float
    p_m: float
    p_t: float | None
    gcc: GccAnalysis
    pt_note: str | None = None


def _pt_route(model: DegreeModel, rule) -> str:
    kind = getattr(rule, "kind", None)
    if kind in ("uninformed", "probabilistic"):
        return "geometric"
    if kind == "heuristic" and model.kind == "poisson":
        return "edge_branching"
    raise UnsupportedPrediction(
        f"no waiting-time prediction for {getattr(rule, 'ident', rule)} on {model.label()}")


def digraph_analysis(model: DegreeModel, rule, n: int) -> DigraphAnalysis:
    """Every flooding-digraph quantity for ``rule`` on ``model`` with ``n`` nodes."""
    gcc = gcc_analysis(model, n)
    if gcc.theta_g <= TOL:
        raise ValueError(f"{model.label()} has no giant component; ratios are undefined")
    ends = edge_end_pmf(model)
    D = model.max_degree
    a = np.arange(1, D + 1)
    pa = model.pmf[1:]

    q_out = _solve(ends, rule, False)
    q_in = q_out if _shortcut_symmetric(rule) else _solve(ends, rule, True)
    dead_out = _dead_end_sums(ends, rule, False, q_out)
    dead_in = _dead_end_sums(ends, rule, True, q_in)
    theta_in = _giant_fraction(model, dead_out)
    theta_out = _giant_fraction(model, dead_in)
    h_minus = kernel_apply(rule, D, ends)

    empty = dict(q_out=q_out, q_in=q_in, theta_in=theta_in, theta_out=theta_out,
                 h_minus=h_minus, gcc=gcc)
    if theta_in <= TOL or theta_out <= TOL:
        return DigraphAnalysis(**empty, z_gout=0.0, z2_gout=0.0, rho=None, l_gout=None,
                               p_n=0.0, p_m=0.0, p_t=None, pt_note="flooding digraph below transition")

    in_gout = (1.0 - np.power(dead_in, a)) * pa / theta_out  # P(a | GOUT)
    z_gout = float(np.sum(a * h_minus * in_gout))
    p_n = float(min(1.0, theta_in * theta_out / gcc.theta_g**2))
    p_m = float(z_gout * p_n / gcc.z_gcc)

    # expected 2-out-neighbours contributed through one neighbour of a degree-a1 node
    through = kernel_apply(rule, D, (a - 1) * h_minus * ends)
    z2_gout = float(np.sum(a * in_gout * through))

    rho = l_gout = p_t = None
    note = None
    try:
        gout_nodes = n * theta_out - 1
        if _pt_route(model, rule) == "geometric":
            l_gout = path_length(gout_nodes, z_gout, z2_gout)
        else:
            # mean out-branching seen when following a random arc of F
            norm = model.mean * float(np.sum(h_minus * a * pa))
            rho = float(np.sum(a * pa * kernel_apply(rule, D, (a - 1) * h_minus * a * pa))) / norm
            l_gout = path_length(gout_nodes, z_gout, z_gout * rho)
        if not math.isfinite(gcc.l_gcc):
            raise PathLengthUndefined("undirected path length undefined")
        p_t = float(theta_in * l_gout / (gcc.theta_g * gcc.l_gcc))
        if model.kind == "power_law":
            note = "power-law second moments do not converge; waiting-time prediction is unreliable"
            log.warning("%s on %s: %s", getattr(rule, "ident", rule), model.label(), note)
    except UnsupportedPrediction as exc:
        note = str(exc)
    except PathLengthUndefined as exc:
        note = f"path length undefined: {exc}"

    return DigraphAnalysis(**empty, z_gout=z_gout, z2_gout=z2_gout, rho=rho, l_gout=l_gout,
                           p_n=p_n, p_m=p_m, p_t=p_t, pt_note=note)


def predict_pn(model: DegreeModel, rule) -> float:
    """Probability that a node of the giant component is reached."""
    theta_g = gcc_analysis(model, model.max_degree + 1).theta_g
    if theta_g <= TOL:
        raise ValueError(f"{model.label()} has no giant component; P_n is undefined")
    theta_in, theta_out = giant_fractions(model, rule)
    if theta_in <= TOL or theta_out <= TOL:
        return 0.0
    return float(min(1.0, theta_in * theta_out / theta_g**2))


def predict_pm(model: DegreeModel, rule) -> float:
    """Messages sent relative to uninformed flooding (0 with no giant out-component)."""
    return digraph_analysis(model, rule, model.max_degree + 1).p_m


def predict_pt(model: DegreeModel, rule, n: int) -> float:
    """Mean waiting time relative to uninformed flooding.

    Raises :class:`UnsupportedPrediction` for heuristic rules on non-Poisson
    models and :class:`PathLengthUndefined` when a logarithm argument is not
    positive.
    """
    _pt_route(model, rule)
    result = digraph_analysis(model, rule, n)
    if result.p_t is None:
        if result.theta_in <= TOL or result.theta_out <= TOL:
            raise PathLengthUndefined("flooding digraph has no giant out-component")
        raise PathLengthUndefined(result.pt_note or "path length undefined")
    return result.p_t
