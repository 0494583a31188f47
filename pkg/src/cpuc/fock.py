"""Truncated Fock-space construction of one-mode Gaussian states.

Serves as a brute-force check of the phase-space formulas in
:mod:`cpuc.gaussian`.  Quadratures are x = (a + a^dag)/sqrt(2) and
p = (a - a^dag)/(i sqrt(2)), so the vacuum has covariance I/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .channels import ParamStateFamily
from .core import DensityMatrix, NumericalError, ValidationError, relative_entropy
from .gaussian import (
    FiducialChannel,
    GaussianParams,
    apply_fiducial,
    from_params,
    params_from_state,
)

MAX_CUTOFF = 256


@dataclass(frozen=True)
class TruncationConfig:
    """Fock dimension and the largest admissible weight in the top two levels."""

    cutoff: int = 60
    tail_tol: float = 1e-8

    def __post_init__(self):
        if int(self.cutoff) != self.cutoff or self.cutoff < 4:
            raise ValidationError(f"cutoff must be an integer >= 4, got {self.cutoff}")
        if not self.tail_tol > 0:
            raise ValidationError("tail_tol must be positive")

    def padded(self) -> "TruncationConfig":
        """Working space used to build states before truncating to ``cutoff``."""
        return TruncationConfig(self.cutoff + max(20, self.cutoff // 2), self.tail_tol)


@lru_cache(maxsize=32)
def _annihilation(n: int) -> np.ndarray:
    a = np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1).astype(complex)
    a.setflags(write=False)
    return a


def annihilation(cfg: TruncationConfig) -> np.ndarray:
    return _annihilation(cfg.cutoff)


def quadratures(n: int):
    a = _annihilation(n)
    x = (a + a.conj().T) / math.sqrt(2)
    p = (a - a.conj().T) / (1j * math.sqrt(2))
    return x, p


def _expm_skew(gen: np.ndarray) -> np.ndarray:
    """exp(G) for skew-Hermitian G via the spectrum of the Hermitian iG."""
    w, v = np.linalg.eigh(1j * gen)
    return (v * np.exp(-1j * w)) @ v.conj().T


def _top_weight(vec_or_rho: np.ndarray) -> float:
    if vec_or_rho.ndim == 1:
        return float(np.sum(np.abs(vec_or_rho[-2:]) ** 2))
    return float(np.real(np.trace(vec_or_rho[-2:, -2:])))


def displacement_op(alpha: complex, cfg: TruncationConfig) -> np.ndarray:
    """D(alpha) = exp(alpha a^dag - alpha^* a) on the truncated space.

    Raises
    ------
    NumericalError
        If D(alpha)|0> puts more than ``tail_tol`` weight on the top two levels.
    """
    a = _annihilation(cfg.cutoff)
    d = _expm_skew(alpha * a.conj().T - np.conj(alpha) * a)
    leak = _top_weight(d[:, 0])
    if leak > cfg.tail_tol:
        raise NumericalError(f"displacement {alpha} leaks {leak:.3g} past cutoff {cfg.cutoff}")
    return d


def _squeeze_raw(r: float, n: int) -> np.ndarray:
    a = _annihilation(n)
    return _expm_skew(0.5 * r * (a.conj().T @ a.conj().T - a @ a))


@lru_cache(maxsize=1)
def _check_squeeze_convention():
    # x-variance of S(r)|0> must be e^{2r}/2 = 1/(2 omega) with omega = e^{-2r}
    r, n = 0.3, 40
    vac = np.zeros(n, dtype=complex)
    vac[0] = 1.0
    psi = _squeeze_raw(r, n) @ vac
    x, _ = quadratures(n)
    var = float(np.real(psi.conj() @ x @ x @ psi))
    if abs(var - math.exp(2 * r) / 2) > 1e-8:
        raise NumericalError("squeeze operator sign convention is inconsistent with omega = exp(-2 r)")
    return True


def squeeze_op(r: float, cfg: TruncationConfig) -> np.ndarray:
    """S(r) with S(r)|0> having covariance diag(e^{2r}, e^{-2r})/2,
    i.e. diag(1/omega, omega)/2 for omega = e^{-2r}.
    """
    _check_squeeze_convention()
    s = _squeeze_raw(r, cfg.cutoff)
    leak = _top_weight(s[:, 0])
    if leak > cfg.tail_tol:
        raise NumericalError(f"squeezing r={r} leaks {leak:.3g} past cutoff {cfg.cutoff}")
    return s


def _thermal_diag(n_mean: float, dim: int) -> np.ndarray:
    if n_mean == 0:
        p = np.zeros(dim)
        p[0] = 1.0
        return p
    q = n_mean / (n_mean + 1)
    return (1 - q) * q ** np.arange(dim)


def thermal_state(n_mean: float, cfg: TruncationConfig) -> DensityMatrix:
    """Geometric state with mean photon number ``n_mean``, renormalized after truncation."""
    if n_mean < 0:
        raise ValidationError("thermal photon number must be >= 0")
    p = _thermal_diag(n_mean, cfg.cutoff)
    tail = 1.0 - float(np.sum(p[:-2]))
    if tail > cfg.tail_tol:
        raise NumericalError(f"thermal state N={n_mean} has tail weight {tail:.3g} at cutoff {cfg.cutoff}")
    return DensityMatrix(np.diag(p / p.sum()).astype(complex))


def _preparation(p: GaussianParams, n: int) -> np.ndarray:
    """D(alpha) S(r) on an n-level space."""
    u = np.eye(n, dtype=complex)
    if p.omega_in != 1.0:
        _check_squeeze_convention()
        u = _squeeze_raw(p.r, n)
    if p.alpha != 0:
        a = _annihilation(n)
        u = _expm_skew(p.alpha * a.conj().T - np.conj(p.alpha) * a) @ u
    return u


def _truncate(rho: np.ndarray, cfg: TruncationConfig, what) -> np.ndarray:
    tail = float(np.real(np.trace(rho[cfg.cutoff - 2:, cfg.cutoff - 2:])))
    if tail > cfg.tail_tol:
        raise NumericalError(f"{what} has tail weight {tail:.3g} at cutoff {cfg.cutoff}")
    out = rho[:cfg.cutoff, :cfg.cutoff]
    return out / np.trace(out).real


def _gaussian_matrix(p: GaussianParams, cfg: TruncationConfig, frame: Optional[np.ndarray] = None) -> np.ndarray:
    n = cfg.padded().cutoff
    u = _preparation(p, n)
    if frame is not None:
        u = frame.conj().T @ u
    rho = (u * _thermal_diag(p.N_in, n)) @ u.conj().T
    return _truncate(rho, cfg, f"state {p}")


def gaussian_state_fock(p: GaussianParams, cfg: Optional[TruncationConfig] = None, adaptive: bool = False) -> DensityMatrix:
    """D(alpha) S(r) rho_th S(r)^dag D(alpha)^dag with r = -ln(omega_in)/2.

    Built in a padded space and truncated to ``cfg.cutoff``.  With
    ``adaptive`` the cutoff doubles until the tail test passes (cap 256).

    Raises
    ------
    NumericalError
        If more than ``tail_tol`` weight sits at or above level cutoff - 2.
    """
    cfg = cfg or TruncationConfig()
    while True:
        try:
            return DensityMatrix(_gaussian_matrix(p, cfg))
        except NumericalError:
            if not adaptive or cfg.cutoff >= MAX_CUTOFF:
                raise
            cfg = TruncationConfig(min(2 * cfg.cutoff, MAX_CUTOFF), cfg.tail_tol)


def quadrature_moments(rho) -> tuple:
    """Mean vector and symmetrized covariance of (x, p)."""
    m = np.asarray(rho)
    x, p = quadratures(m.shape[0])
    ops = (x, p)
    mean = np.array([np.real(np.trace(m @ o)) for o in ops])
    cov = np.empty((2, 2))
    for i, oi in enumerate(ops):
        for j, oj in enumerate(ops):
            sym = 0.5 * (oi @ oj + oj @ oi)
            cov[i, j] = np.real(np.trace(m @ sym)) - mean[i] * mean[j]
    return mean, cov


def oracle_relative_entropy(p1: GaussianParams, p2: GaussianParams, cfg: Optional[TruncationConfig] = None) -> float:
    """D(rho_1 || rho_2) of the two Fock-space states, by dense diagonalization.

    Both states are conjugated by U_2^dag = (D(alpha_2) S(r_2))^dag, which
    leaves D unchanged and turns rho_2 into the diagonal thermal state.
    Its spectrum is then exact down to tiny eigenvalues, which still carry
    weight of rho_1 when the two states are squeezed or displaced
    differently.
    """
    cfg = cfg or TruncationConfig()
    n = cfg.padded().cutoff
    frame = _preparation(p2, n)
    rho1 = _gaussian_matrix(p1, cfg, frame=frame)
    rho2 = _truncate(np.diag(_thermal_diag(p2.N_in, n)).astype(complex), cfg, f"state {p2}")
    return relative_entropy(DensityMatrix(rho1), DensityMatrix(rho2), support_rtol=0.0)


def channel_output_fock(ch: FiducialChannel, p: GaussianParams, cfg: Optional[TruncationConfig] = None) -> DensityMatrix:
    """Fock state with the output moments of ``ch`` acting on ``p``."""
    return gaussian_state_fock(params_from_state(apply_fiducial(ch, from_params(p))), cfg)


def displacement_family(
    ch: FiducialChannel, cfg: Optional[TruncationConfig] = None, half_width: float = 0.5, phase: float = 0.0
) -> ParamStateFamily:
    """Channel outputs for coherent inputs alpha = x e^{i phase}, free at x = 0.

    The quadratic cost x^2 equals the mean input photon number.
    """
    cfg = cfg or TruncationConfig()
    rot = complex(math.cos(phase), math.sin(phase))

    def fn(v):
        out = apply_fiducial(ch, from_params(GaussianParams.coherent(v[0] * rot)))
        return _gaussian_matrix(params_from_state(out), cfg)

    return ParamStateFamily(fn, cfg.cutoff, [(-half_width, half_width)], (0.0,), "gaussian-displacement")
