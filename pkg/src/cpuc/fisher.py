"""Relative-entropy and SLD quantum Fisher information of state families.

Both are evaluated from the family derivative expressed in the eigenbasis
of rho at the evaluation point; the derivative comes from finite
differences, so any user family works.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channels import CostFunction, KrausChannel, ParamStateFamily
from .core import SUPPORT_RTOL, PreconditionError, relative_entropy

# terms with p_n + p_k below this are dropped
PAIR_TOL = 1e-12
# Frobenius weight of d(rho) outside supp(rho) that makes the REQFI infinite
OUTSIDE_TOL = 1e-6


def _prepare(family: ParamStateFamily, phi0, channel: Optional[KrausChannel]):
    if family.nparams != 1:
        raise PreconditionError(f"Fisher information needs a one-parameter family, got {family.nparams}")
    fam = family if channel is None else family.through(channel)
    x = np.atleast_1d(np.asarray(phi0, dtype=float))
    rho = fam.matrix(x)
    rho = 0.5 * (rho + rho.conj().T)
    drho = fam.derivative(x)
    p, v = np.linalg.eigh(rho)
    p = np.where(p > SUPPORT_RTOL * p.max(), p, 0.0)
    dr = v.conj().T @ drho @ v
    return p, dr


def _log_mean_weight(pn, pk):
    """(ln pn - ln pk)/(pn - pk), continuous at pn == pk where it is 1/p."""
    with np.errstate(divide="ignore", invalid="ignore"):
        diff = pn - pk
        close = np.abs(diff) <= 1e-9 * np.maximum(pn, pk)
        exact = (np.log(pn) - np.log(pk)) / np.where(close, 1.0, diff)
        return np.where(close, 2.0 / (pn + pk), exact)


def reqfi(family: ParamStateFamily, phi0, channel: Optional[KrausChannel] = None) -> float:
    """Relative-entropy QFI: D(rho_{phi0+d} || rho_phi0) = d^2 J / 2 + O(d^3).

    In the eigenbasis {p_n, |n>} of rho_phi0 this is
    ``sum_n pdot_n^2 / p_n + 2 sum_{n,k} (p_n - p_k) |<n|kdot>|^2 ln p_n``,
    evaluated here in the equivalent form
    ``sum_{n,k} |<n|rhodot|k>|^2 (ln p_n - ln p_k) / (p_n - p_k)``, which needs
    no eigenvector derivatives.  Returns ``inf`` when rhodot reaches outside
    the support of rho_phi0.
    """
    p, dr = _prepare(family, phi0, channel)
    supp = p > 0
    outside = np.abs(dr[~supp, :]).sum() + np.abs(dr[:, ~supp]).sum()
    if outside > OUTSIDE_TOL:
        return math.inf
    ps = p[supp]
    block = np.abs(dr[np.ix_(supp, supp)]) ** 2
    w = _log_mean_weight(ps[:, None], ps[None, :])
    return float(np.sum(block * w))


def qfi(family: ParamStateFamily, phi0, channel: Optional[KrausChannel] = None) -> float:
    """SLD quantum Fisher information F = Tr(rho L^2) with rhodot = (rho L + L rho)/2.

    ``F = sum_{n,k} 2 |<n|rhodot|k>|^2 / (p_n + p_k)`` over pairs with
    ``p_n + p_k > PAIR_TOL``.
    """
    p, dr = _prepare(family, phi0, channel)
    s = p[:, None] + p[None, :]
    keep = s > PAIR_TOL
    return float(np.sum(2.0 * np.abs(dr[keep]) ** 2 / s[keep]))


def second_order_errors(family: ParamStateFamily, phi0: float, deltas, channel: Optional[KrausChannel] = None):
    """J and the errors ``J - 2 D(rho_{phi0+d} || rho_phi0) / d^2`` for each step d."""
    fam = family if channel is None else family.through(channel)
    j = reqfi(family, phi0, channel)
    rho0 = fam.state([phi0])
    errs = np.array([j - 2.0 * relative_entropy(fam.state([phi0 + d]), rho0) / d**2 for d in deltas])
    return j, errs


def first_order_consistent(j: float, deltas, errs) -> bool:
    """Whether the errors of :func:`second_order_errors` at a coarse and a fine step look O(d).

    The fine error must shrink at least half as fast as the step.  When the
    O(d) coefficient is nearly cancelled the coarse error is already tiny and
    higher orders dominate; the fine error then passes if its size relative
    to J stays below the fine step.
    """
    (dc, df), (ec, ef) = deltas, np.abs(errs)
    return bool(ef <= 2.0 * (df / dc) * ec or ef <= df * abs(j))


@dataclass(frozen=True)
class BoundsReport:
    """Estimation-theoretic bounds at the free point x = 0.

    ``emin_bound_J = 1/J`` and ``emin_bound_F = 1/F`` bound the minimal
    energy per nat (``inf`` when the information vanishes).  ``cpuc`` is
    present when it was computed, and ``chain_holds`` then records
    ``cpuc >= J/2 >= F/2`` up to ``slack``.
    """

    J_half: float
    F_half: float
    emin_bound_J: float
    emin_bound_F: float
    cpuc: Optional[float] = None
    chain_holds: Optional[bool] = None
    slack: float = 1e-8

    @property
    def vacuous(self) -> bool:
        return self.J_half == 0.0 and self.F_half == 0.0


def estimation_bounds_report(
    channel: Optional[KrausChannel],
    family: ParamStateFamily,
    cost: Optional[CostFunction] = None,
    compute_cpuc: bool = True,
    slack: float = 1e-8,
    **cpuc_options,
) -> BoundsReport:
    """J/2, F/2 and the minimal-energy chain E_min <= 1/J <= 1/F.

    Raises
    ------
    PreconditionError
        Unless the cost is quadratic and the family is free at x = 0.
    """
    cost = CostFunction.quadratic() if cost is None else cost
    if cost.kind != "quadratic":
        raise PreconditionError("estimation bounds need the quadratic cost x^2")
    if family.free_point is None or any(v != 0.0 for v in family.free_point):
        raise PreconditionError("estimation bounds need a free point at x = 0")
    j = reqfi(family, 0.0, channel)
    f = qfi(family, 0.0, channel)
    inv = lambda v: math.inf if v == 0 else 1.0 / v  # noqa: E731
    c = None
    holds = None
    if compute_cpuc:
        from .capacity import capacity_per_unit_cost

        c = capacity_per_unit_cost(channel, family, cost, **cpuc_options).value
        holds = c >= j / 2 - slack * max(1.0, j) and j / 2 >= f / 2 - slack * max(1.0, f)
    elif math.isfinite(j):
        holds = j >= f - 2 * slack * max(1.0, f)
    return BoundsReport(j / 2, f / 2, inv(j), inv(f), c, holds, slack)
