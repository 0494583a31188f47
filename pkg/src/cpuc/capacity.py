"""Holevo quantities, capacity-cost optimization and capacity per unit cost.

Channel uses are single-shot with product inputs; every quantity is in nats.
"""

from __future__ import annotations

import itertools
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.optimize import brentq, minimize

from .channels import (
    CostFunction,
    KrausChannel,
    ParamStateFamily,
    apply_matrix,
    cost_of,
    grid_axes,
    identity_channel,
)
from .core import (
    EQUAL_TOL,
    SUPPORT_RTOL,
    SUPPORT_WEIGHT_TOL,
    DensityMatrix,
    DomainError,
    NumericalError,
    PreconditionError,
    StateLike,
    ValidationError,
    as_density,
    entropy_of_spectrum,
    relative_entropy,
    von_neumann_entropy,
)

log = logging.getLogger(__name__)

PRIOR_TOL = 1e-12
STOCHASTIC_TOL = 1e-12
ZERO_COST = 1e-14


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    return np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)


def mutual_information(prior, conditional) -> float:
    """I(X;Y) = H(Y) - H(Y|X) for a prior p(x) and a row-stochastic p(y|x)."""
    p = np.asarray(prior, dtype=float)
    w = np.asarray(conditional, dtype=float)
    if w.ndim != 2 or p.shape != (w.shape[0],):
        raise ValidationError("prior length must equal the number of rows of the conditional")
    if np.any(p < 0) or abs(p.sum() - 1) > STOCHASTIC_TOL:
        raise ValidationError("prior is not a probability vector")
    if np.any(w < 0) or np.max(np.abs(w.sum(axis=1) - 1)) > STOCHASTIC_TOL:
        raise ValidationError("conditional is not row-stochastic")
    py = p @ w
    h_y = -float(np.sum(_xlogx(py)))
    h_y_x = -float(np.sum(p[:, None] * _xlogx(w)))
    return max(h_y - h_y_x, 0.0)


@dataclass(frozen=True, eq=False)
class Ensemble:
    """Prior-weighted input states with per-symbol costs."""

    priors: np.ndarray
    states: tuple
    costs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.priors, dtype=float)
        states = tuple(as_density(s) for s in self.states)
        costs = np.zeros(len(states)) if self.costs is None else np.asarray(self.costs, dtype=float)
        if not states or p.shape != (len(states),) or costs.shape != (len(states),):
            raise ValidationError("priors, states and costs must have equal nonzero length")
        if np.any(p < 0) or abs(p.sum() - 1) > PRIOR_TOL:
            raise ValidationError(f"priors must be a probability vector (sum {p.sum()!r})")
        if np.any(costs < 0):
            raise ValidationError("costs must be nonnegative")
        if len({s.dim for s in states}) != 1:
            raise ValidationError("all ensemble states must share one dimension")
        object.__setattr__(self, "priors", p)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "costs", costs)

    @classmethod
    def uniform(cls, states, costs=None) -> "Ensemble":
        n = len(states)
        return cls(np.full(n, 1.0 / n), states, costs)

    @property
    def dim(self) -> int:
        return self.states[0].dim

    def average_state(self) -> DensityMatrix:
        return DensityMatrix(sum(p * s.matrix for p, s in zip(self.priors, self.states)))

    def average_cost(self) -> float:
        return float(self.priors @ self.costs)


def _outputs(ensemble: Ensemble, channel: Optional[KrausChannel]):
    if channel is None:
        return [s.matrix for s in ensemble.states]
    if channel.dim_in != ensemble.dim:
        raise ValidationError(f"ensemble dim {ensemble.dim} does not match channel dim_in {channel.dim_in}")
    return [apply_matrix(channel, s.matrix) for s in ensemble.states]


def holevo_chi_entropy_form(ensemble: Ensemble, channel: Optional[KrausChannel] = None) -> float:
    """chi = S(sum_x p_x L[rho_x]) - sum_x p_x S(L[rho_x])."""
    outs = _outputs(ensemble, channel)
    avg = sum(p * o for p, o in zip(ensemble.priors, outs))
    chi = von_neumann_entropy(avg) - sum(
        p * von_neumann_entropy(o) for p, o in zip(ensemble.priors, outs) if p > 0
    )
    return max(float(chi), 0.0)


def holevo_chi_relent_form(ensemble: Ensemble, channel: Optional[KrausChannel] = None) -> float:
    """chi = sum_x p_x D(L[rho_x] || L[rho_bar])."""
    outs = _outputs(ensemble, channel)
    avg = DensityMatrix(sum(p * o for p, o in zip(ensemble.priors, outs)))
    return float(sum(p * relative_entropy(o, avg) for p, o in zip(ensemble.priors, outs) if p > 0))


class ChiDecomposition(NamedTuple):
    """Holevo information split around a reference output state.

    ``chi == term1 - term2`` whenever both terms are finite.
    """

    term1: float
    term2: float

    @property
    def finite(self) -> bool:
        return math.isfinite(self.term1) and math.isfinite(self.term2)

    @property
    def chi(self) -> float:
        return self.term1 - self.term2 if self.finite else math.nan


def chi_reference_decomposition(
    ensemble: Ensemble, channel: Optional[KrausChannel], reference: StateLike
) -> ChiDecomposition:
    outs = _outputs(ensemble, channel)
    ref = as_density(reference).matrix
    if channel is not None:
        ref = apply_matrix(channel, ref)
    ref = DensityMatrix(ref)
    avg = DensityMatrix(sum(p * o for p, o in zip(ensemble.priors, outs)))
    term1 = 0.0
    for p, o in zip(ensemble.priors, outs):
        if p > 0:
            term1 += p * relative_entropy(o, ref)
    term2 = relative_entropy(avg, ref)
    return ChiDecomposition(float(term1), float(term2))


# -- capacity-cost -------------------------------------------------------------

@dataclass(frozen=True)
class CapacityCostPoint:
    beta: float
    capacity: float
    optimal_prior: np.ndarray
    iterations: int = 0
    converged: bool = True


class _ChiEvaluator:
    """Holevo chi and its prior gradient for a fixed list of output states."""

    def __init__(self, outs):
        self.outs = np.stack([0.5 * (o + o.conj().T) for o in outs])
        self.entropies = np.array([entropy_of_spectrum(np.linalg.eigvalsh(o)) for o in self.outs])

    def divergences(self, prior):
        """D(sigma_x || sigma_bar) for every symbol, plus chi."""
        avg = np.tensordot(prior, self.outs, axes=1)
        w, v = np.linalg.eigh(avg)
        mask = w > SUPPORT_RTOL * w.max()
        logw = np.zeros_like(w)
        logw[mask] = np.log(w[mask])
        # diagonal of v^dagger sigma_x v for every x
        diag = np.real(np.einsum("ji,xjk,ki->xi", v.conj(), self.outs, v))
        cross = diag @ logw
        d = -self.entropies - cross
        outside = diag[:, ~mask].sum(axis=1)
        d = np.where(outside > SUPPORT_WEIGHT_TOL, np.inf, np.maximum(d, 0.0))
        chi = entropy_of_spectrum(w) - float(prior @ self.entropies)
        return d, max(chi, 0.0)


def _tilt_to_budget(logq: np.ndarray, costs: np.ndarray, beta: float, lam0: float = 0.0):
    """KL projection of exp(logq) onto {p : sum p b <= beta}: p ~ q exp(-lam b).

    The average cost decreases in lam, so its root is bracketed (starting
    around the previous multiplier ``lam0``) and found with Brent's method.
    Returns the prior, which meets the budget, and the multiplier.
    """

    def prior(lam):
        z = logq - lam * costs
        e = np.exp(z - z.max())
        return e / e.sum()

    def excess(lam):
        return float(prior(lam) @ costs) - beta

    if excess(0.0) <= 0:
        return prior(0.0), 0.0
    lo, hi = 0.0, 1.0
    if lam0 > 0:
        width = 1e-3 * lam0 + 1e-12
        lo, hi = max(lam0 - width, 0.0), lam0 + width
        if excess(lo) <= 0:
            lo = 0.0
    while excess(hi) > 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise NumericalError("cannot meet the cost budget")
    lam = brentq(excess, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    # step to the feasible side of the root
    step = 1e-15 * max(lam, 1.0)
    while excess(lam) > 0:
        lam += step
        step *= 2.0
    return prior(lam), lam


def capacity_cost(
    states: Sequence[StateLike],
    costs,
    channel: Optional[KrausChannel],
    beta: float,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> CapacityCostPoint:
    """Maximize chi over priors on a fixed state set subject to sum p b <= beta.

    Exponentiated-gradient (mirror) ascent on the concave chi(p); each step
    is projected onto the budget by an exponential tilt whose multiplier is
    found by bisection.  Stops when the prior moves less than ``tol`` in
    total variation or after ``max_iter`` steps.

    Raises
    ------
    DomainError
        If ``beta <= 0`` or no symbol is affordable.
    """
    costs = np.asarray(costs, dtype=float)
    states = [as_density(s) for s in states]
    if len(states) != len(costs) or not states:
        raise ValidationError("need one cost per state")
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    if costs.min() > beta + 1e-12:
        raise DomainError(f"no symbol is affordable at beta={beta} (cheapest costs {costs.min()})")
    if channel is None:
        channel = identity_channel(states[0].dim)
    outs = [apply_matrix(channel, s.matrix) for s in states]

    active = np.ones(len(states), dtype=bool)
    if costs.min() >= beta - 1e-12:
        # budget pins all weight to the cheapest symbols
        active = costs <= costs.min() + 1e-12
    idx = np.flatnonzero(active)
    ev = _ChiEvaluator([outs[i] for i in idx])
    c = costs[idx]
    budget = max(beta, c.min())

    p, lam = _tilt_to_budget(np.zeros(len(idx)), c, budget)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        d, _ = ev.divergences(p)
        logq = np.log(np.maximum(p, 1e-300)) + d
        p_new, lam = _tilt_to_budget(logq, c, budget, lam)
        moved = 0.5 * float(np.abs(p_new - p).sum())
        p = p_new
        if moved < tol:
            converged = True
            break
    if not converged:
        log.warning("capacity_cost: no convergence after %d iterations at beta=%g", max_iter, beta)
    _, chi = ev.divergences(p)
    full = np.zeros(len(states))
    full[idx] = p
    return CapacityCostPoint(float(beta), float(chi), full, it, converged)


# -- capacity per unit cost ------------------------------------------------------

@dataclass(frozen=True)
class CpucResult:
    """Capacity per unit cost with the point that certifies it.

    ``witness`` is ``"support-mismatch"`` (``params`` is a family point whose
    output escapes the support of the free output), ``"zero-cost"`` (a
    distinguishable output at zero cost), ``"maximizer"`` (``params``
    attains ``ratio``) or ``"free-limit"`` (the ratio is largest in the
    limit towards the free point).  ``free_limit`` is the ratio's limit at the free
    point, J/2, reported for one-parameter families with quadratic cost.
    """

    value: float
    witness: str
    params: Optional[np.ndarray]
    ratio: float
    free_limit: Optional[float] = None
    evaluations: int = 0

    @property
    def is_infinite(self) -> bool:
        return math.isinf(self.value)


class _Unbounded(Exception):
    def __init__(self, witness, x):
        super().__init__(witness)
        self.witness = witness
        self.x = x


class _Reference:
    """Cached eigendecomposition of a fixed second argument of D(. || sigma)."""

    def __init__(self, sigma: np.ndarray):
        self.sigma = sigma
        w, v = np.linalg.eigh(0.5 * (sigma + sigma.conj().T))
        self.mask = w > SUPPORT_RTOL * w.max()
        self.logw = np.zeros_like(w)
        self.logw[self.mask] = np.log(w[self.mask])
        self.v = v

    def relent(self, rho: np.ndarray) -> float:
        if float(np.max(np.abs(rho - self.sigma))) <= EQUAL_TOL:
            return 0.0
        diag = np.real(np.einsum("ji,jk,ki->i", self.v.conj(), rho, self.v))
        if float(diag[~self.mask].sum()) > SUPPORT_WEIGHT_TOL:
            return math.inf
        s = entropy_of_spectrum(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))
        return max(-s - float(diag[self.mask] @ self.logw[self.mask]), 0.0)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("CPUC_THREADS", "1")))
    except ValueError:
        return 1


def capacity_per_unit_cost(
    channel: Optional[KrausChannel],
    family: ParamStateFamily,
    cost: CostFunction,
    grid_points: int = 33,
    n_starts: int = 5,
    exclusion: float = 1e-6,
    xatol: float = 1e-8,
    workers: Optional[int] = None,
) -> CpucResult:
    """sup over family states of D(L[rho_x] || L[rho_0]) / b[rho_x].

    The free output L[rho_0] is the reference.  Grid points are first
    screened for support mismatch (which makes the value infinite); the
    ratio is then maximized by Nelder-Mead from the best grid points.

    Raises
    ------
    PreconditionError
        If the family has no free point or the free point has nonzero cost.
    NumericalError
        If a refinement fails to converge.
    """
    if family.free_point is None:
        raise PreconditionError(f"{family.name} has no free point")
    if cost.kind == "lookup":
        raise PreconditionError("lookup costs do not apply to continuous families")
    fam = family if channel is None else family.through(channel)
    free = np.asarray(family.free_point)

    def input_cost(x):
        if cost.kind == "quadratic":
            return cost_of(cost, x)
        return cost_of(cost, family.fn(np.asarray(x, dtype=float)))

    if input_cost(free) > ZERO_COST:
        raise PreconditionError("the free point must have zero cost")
    ref = _Reference(fam.matrix(free))
    lo = np.array([b[0] for b in family.bounds])
    hi = np.array([b[1] for b in family.bounds])
    counter = [0]

    def ratio(x):
        x = np.clip(np.asarray(x, dtype=float), lo, hi)
        if np.linalg.norm(x - free) < exclusion:
            return None
        counter[0] += 1
        b = input_cost(x)
        d = ref.relent(fam.matrix(x))
        if math.isinf(d):
            raise _Unbounded("support-mismatch", x)
        if b <= ZERO_COST:
            if d > 0:
                raise _Unbounded("zero-cost", x)
            return None
        return d / b

    free_limit = None
    if family.nparams == 1 and cost.kind == "quadratic":
        from .fisher import reqfi

        free_limit = 0.5 * reqfi(fam, free)

    axes = grid_axes(family.bounds, grid_points)
    scored = []
    try:
        for pt in itertools.product(*axes):
            r = ratio(pt)
            if r is not None:
                scored.append((r, np.array(pt)))
    except _Unbounded as e:
        return CpucResult(math.inf, e.witness, e.x, math.inf, free_limit, counter[0])

    if not scored:
        value = free_limit if free_limit else 0.0
        return CpucResult(value, "maximizer", None, value, free_limit, counter[0])
    scored.sort(key=lambda t: -t[0])
    best_r, best_x = scored[0]
    starts = []
    for r, pt in scored:
        if len(starts) == n_starts:
            break
        if all(np.linalg.norm(pt - s) > 0 for s in starts):
            starts.append(pt)

    def objective(x):
        r = ratio(x)
        return 0.0 if r is None else -r

    bounds = list(family.bounds)

    def refine(x0):
        res = minimize(
            objective, x0, method="Nelder-Mead", bounds=bounds,
            options={"xatol": xatol, "fatol": np.inf, "maxiter": 4000 * family.nparams,
                     "maxfev": 8000 * family.nparams},
        )
        return res

    n_workers = workers if workers is not None else _workers()
    try:
        if n_workers > 1 and len(starts) > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                results = list(pool.map(refine, starts))
        else:
            results = [refine(s) for s in starts]
    except _Unbounded as e:
        return CpucResult(math.inf, e.witness, e.x, math.inf, free_limit, counter[0])

    for res in results:
        if not res.success:
            raise NumericalError(f"Nelder-Mead did not converge: {res.message}")
        if -res.fun > best_r:
            best_r, best_x = float(-res.fun), np.clip(res.x, lo, hi)
    if free_limit is not None and free_limit > best_r:
        # the supremum is approached at the free point itself
        return CpucResult(float(free_limit), "free-limit", free, float(free_limit), free_limit, counter[0])
    return CpucResult(float(best_r), "maximizer", best_x, float(best_r), free_limit, counter[0])


def binary_encoding_chi(
    channel: Optional[KrausChannel], rho: StateLike, rho0: StateLike, cost: float, beta: float
) -> float:
    """Holevo chi of on-off keying: rho with probability beta/cost, else rho0."""
    if not cost > 0:
        raise DomainError("signal cost must be positive")
    if not 0 < beta <= cost:
        raise DomainError(f"need 0 < beta <= cost, got beta={beta}, cost={cost}")
    p1 = beta / cost
    ens = Ensemble(np.array([1.0 - p1, p1]), (as_density(rho0), as_density(rho)), np.array([0.0, cost]))
    return holevo_chi_entropy_form(ens, channel)
