"""One-mode Gaussian states and fiducial Gaussian channels.

Phase-space convention: vacuum covariance I/2, mean vector
(sqrt(2) Re alpha, sqrt(2) Im alpha).  A state with thermal photons N and
squeezing parameter omega = exp(-2 r) has covariance
(N + 1/2) diag(1/omega, omega).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.special import xlogy

from .core import DomainError, PreconditionError, ValidationError

UNCERTAINTY_TOL = 1e-12
PURITY_TOL = 1e-12
DIAGONAL_TOL = 1e-12


@dataclass(frozen=True)
class GaussianParams:
    """Input-state parameters: thermal photons, squeezing omega = e^{-2r}, displacement."""

    N_in: float = 0.0
    omega_in: float = 1.0
    alpha: complex = 0j

    def __post_init__(self):
        if self.N_in < 0:
            raise ValidationError(f"thermal photon number must be >= 0, got {self.N_in}")
        if not self.omega_in > 0:
            raise ValidationError(f"squeezing parameter must be > 0, got {self.omega_in}")
        object.__setattr__(self, "alpha", complex(self.alpha))

    @property
    def r(self) -> float:
        return -0.5 * math.log(self.omega_in)

    @classmethod
    def vacuum(cls) -> "GaussianParams":
        return cls()

    @classmethod
    def coherent(cls, alpha: complex) -> "GaussianParams":
        return cls(0.0, 1.0, alpha)

    @classmethod
    def thermal(cls, n: float) -> "GaussianParams":
        return cls(n, 1.0, 0j)


@dataclass(frozen=True, eq=False)
class GaussianState:
    xbar: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        x = np.array(self.xbar, dtype=float).reshape(2)
        s = np.array(self.sigma, dtype=float).reshape(2, 2)
        if abs(s[0, 1] - s[1, 0]) > 1e-12 * max(1.0, np.abs(s).max()):
            raise ValidationError("covariance matrix must be symmetric")
        s = 0.5 * (s + s.T)
        if s[0, 0] <= 0 or np.linalg.det(s) <= 0:
            raise ValidationError("covariance matrix must be positive definite")
        if np.linalg.det(s) < 0.25 - UNCERTAINTY_TOL:
            raise ValidationError(f"covariance violates the uncertainty relation (det {np.linalg.det(s):.6g})")
        x.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "xbar", x)
        object.__setattr__(self, "sigma", s)

    def __eq__(self, other):
        if not isinstance(other, GaussianState):
            return NotImplemented
        return bool(np.allclose(self.xbar, other.xbar, rtol=0, atol=1e-12)
                    and np.allclose(self.sigma, other.sigma, rtol=0, atol=1e-12))

    def __repr__(self):
        return f"GaussianState(xbar={self.xbar.tolist()}, sigma={self.sigma.tolist()})"


VACUUM = GaussianState(np.zeros(2), 0.5 * np.eye(2))


def from_params(p: GaussianParams) -> GaussianState:
    xbar = math.sqrt(2) * np.array([p.alpha.real, p.alpha.imag])
    sigma = (p.N_in + 0.5) * np.diag([1.0 / p.omega_in, p.omega_in])
    return GaussianState(xbar, sigma)


def mean_photon_number(p: GaussianParams) -> float:
    return abs(p.alpha) ** 2 + (p.N_in + 0.5) * (p.omega_in + 1.0 / p.omega_in) / 2 - 0.5


def photon_number_of_state(s: GaussianState) -> float:
    return 0.5 * (np.trace(s.sigma) + s.xbar @ s.xbar) - 0.5


def _photons_from_det(det: float) -> float:
    """sqrt(det) - 1/2 written to avoid cancellation near a pure state."""
    return max((det - 0.25) / (math.sqrt(max(det, 0.0)) + 0.5), 0.0)


def symplectic_eigenvalue(sigma) -> float:
    """sqrt(det sigma) for a one-mode covariance matrix."""
    d = float(np.linalg.det(np.asarray(sigma, dtype=float)))
    if d < 0.25 - UNCERTAINTY_TOL:
        raise ValidationError(f"det(sigma) = {d:.6g} violates the uncertainty relation")
    return max(math.sqrt(max(d, 0.0)), 0.5)


def g_function(x):
    """Entropy of a mode with symplectic eigenvalue x:
    (x + 1/2) ln(x + 1/2) - (x - 1/2) ln(x - 1/2), with g(1/2) = 0.
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0.5 - UNCERTAINTY_TOL):
        raise DomainError(f"g is defined for x >= 1/2, got {x}")
    arr = np.maximum(arr, 0.5)
    out = xlogy(arr + 0.5, arr + 0.5) - xlogy(arr - 0.5, arr - 0.5)
    return float(out) if np.ndim(out) == 0 else out


def thermal_entropy(n):
    """Entropy of a thermal state with mean photon number n, g(n + 1/2)."""
    return g_function(np.asarray(n, dtype=float) + 0.5)


@dataclass(frozen=True)
class FiducialChannel:
    """Fiducial one-mode Gaussian channel.

    ``eta`` is the transmission (0 <= eta <= 1) or gain, ``n_tilde`` the
    environment's thermal photons and ``omega_tilde`` its squeezing.
    """

    eta: float
    n_tilde: float = 0.0
    omega_tilde: float = 1.0

    def __post_init__(self):
        for name in ("eta", "n_tilde", "omega_tilde"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValidationError(f"{name} must be finite")
            object.__setattr__(self, name, float(v))
        if self.n_tilde < 0:
            raise ValidationError(f"n_tilde must be >= 0, got {self.n_tilde}")
        if not self.omega_tilde > 0:
            raise ValidationError(f"omega_tilde must be > 0, got {self.omega_tilde}")
        out = self.noise_matrix() + abs(self.eta) * 0.5 * np.eye(2)
        if np.linalg.det(out) < 0.25 - UNCERTAINTY_TOL:
            raise ValidationError("channel maps the vacuum to an unphysical covariance")

    def noise_matrix(self) -> np.ndarray:
        return abs(1 - self.eta) * (self.n_tilde + 0.5) * np.diag([1 / self.omega_tilde, self.omega_tilde])

    @property
    def phase_insensitive(self) -> bool:
        return self.omega_tilde == 1.0


def apply_fiducial(ch: FiducialChannel, s: GaussianState) -> GaussianState:
    sgn = float(np.sign(ch.eta))
    xbar = math.sqrt(abs(ch.eta)) * np.array([s.xbar[0], sgn * s.xbar[1]])
    sigma = abs(ch.eta) * s.sigma + ch.noise_matrix()
    return GaussianState(xbar, sigma)


@dataclass(frozen=True)
class OutputParams:
    """Output covariance parameters.

    ``omega_out`` is the quotient sqrt(sigma_11 / sigma_22), so the
    covariance reads (N_out + 1/2) diag(omega_out, 1/omega_out).
    """

    N_out: float
    omega_out: float

    def covariance(self) -> np.ndarray:
        return (self.N_out + 0.5) * np.diag([self.omega_out, 1.0 / self.omega_out])


def output_params(sigma_out) -> OutputParams:
    s = np.asarray(sigma_out, dtype=float)
    if abs(s[0, 1]) > DIAGONAL_TOL * max(1.0, abs(s).max()) or abs(s[1, 0]) > DIAGONAL_TOL * max(1.0, abs(s).max()):
        raise PreconditionError("output covariance must be diagonal in the fiducial basis")
    symplectic_eigenvalue(s)  # uncertainty check
    return OutputParams(_photons_from_det(s[0, 0] * s[1, 1]), math.sqrt(s[0, 0] / s[1, 1]))


def general_output_params(ch: FiducialChannel, p: GaussianParams) -> OutputParams:
    """Output (N, omega) of an arbitrary input, written out element by element."""
    a = abs(ch.eta) * (p.N_in + 0.5) / p.omega_in + abs(1 - ch.eta) * (ch.n_tilde + 0.5) / ch.omega_tilde
    b = abs(ch.eta) * (p.N_in + 0.5) * p.omega_in + abs(1 - ch.eta) * (ch.n_tilde + 0.5) * ch.omega_tilde
    return OutputParams(_photons_from_det(a * b), math.sqrt(a / b))


def vacuum_output_params(ch: FiducialChannel) -> OutputParams:
    e, k = abs(ch.eta), abs(1 - ch.eta)
    a = e / 2 + k / ch.omega_tilde * (ch.n_tilde + 0.5)
    b = e / 2 + k * (ch.n_tilde + 0.5) * ch.omega_tilde
    return OutputParams(_photons_from_det(a * b), math.sqrt(a / b))


def params_from_state(s: GaussianState) -> GaussianParams:
    """Inverse of :func:`from_params` for states with diagonal covariance."""
    if abs(s.sigma[0, 1]) > DIAGONAL_TOL * max(1.0, abs(s.sigma).max()):
        raise PreconditionError("covariance must be diagonal")
    symplectic_eigenvalue(s.sigma)
    alpha = complex(s.xbar[0], s.xbar[1]) / math.sqrt(2)
    return GaussianParams(_photons_from_det(s.sigma[0, 0] * s.sigma[1, 1]), math.sqrt(s.sigma[1, 1] / s.sigma[0, 0]), alpha)


def _symplectic_diagonalizer(sigma: np.ndarray, gamma: float) -> np.ndarray:
    """Symmetric S with det S = 1 and sigma = gamma S S^T."""
    w, v = np.linalg.eigh(sigma / gamma)
    return (v * np.sqrt(w)) @ v.T


def gaussian_relative_entropy(s1: GaussianState, s2: GaussianState) -> float:
    """D(rho_1 || rho_2) for one-mode Gaussian states.

    ``-g(gamma_1) + ln Z + Tr(sigma_1 M)/2 + x^T M x / 2`` where rho_2 is
    proportional to exp(-R^T M R / 2) about its mean and x is the mean
    difference.  Infinite when rho_2 is pure and rho_1 differs from it.
    """
    if s1 == s2:
        return 0.0
    g1 = symplectic_eigenvalue(s1.sigma)
    g2 = symplectic_eigenvalue(s2.sigma)
    if g2 - 0.5 <= PURITY_TOL:
        return math.inf
    S = _symplectic_diagonalizer(s2.sigma, g2)
    Sinv = np.linalg.inv(S)
    m_diag = math.log((2 * g2 + 1) / (2 * g2 - 1)) * np.eye(2)
    M = Sinv.T @ m_diag @ Sinv
    ln_z = 0.5 * math.log(g2 * g2 - 0.25)
    x = s1.xbar - s2.xbar
    d = -g_function(g1) + ln_z + 0.5 * np.trace(s1.sigma @ M) + 0.5 * x @ M @ x
    return max(float(d), 0.0)


def _relent_closed_form(eta, n_out, w_out, n0, w0, re_a, im_a):
    """Four-term D(out || vacuum out); broadcasts over numpy arrays.

    Omegas are sqrt(sigma_11/sigma_22) quotients, which is why the real part
    of alpha pairs with 1/w0.
    """
    lg = np.log((n0 + 1) / n0)
    return (
        xlogy(n_out, n_out) - xlogy(n_out + 1, n_out + 1)
        + 0.5 * np.log(n0 * (n0 + 1))
        + (n_out + 0.5) * (w0**2 + w_out**2) / (2 * w0 * w_out) * lg
        + abs(eta) * (re_a**2 / w0 + im_a**2 * w0) * lg
    )


def relent_vs_vacuum_output(ch: FiducialChannel, p: GaussianParams) -> float:
    """D(L[rho_p] || L[|0><0|]) from the closed form in the output parameters."""
    out = general_output_params(ch, p)
    vac = vacuum_output_params(ch)
    same_cov = abs(out.N_out - vac.N_out) <= 1e-14 and abs(out.omega_out - vac.omega_out) <= 1e-14
    if ch.eta == 0 or (same_cov and p.alpha == 0):
        return 0.0
    if vac.N_out <= PURITY_TOL:
        return math.inf
    d = _relent_closed_form(ch.eta, out.N_out, out.omega_out, vac.N_out, vac.omega_out, p.alpha.real, p.alpha.imag)
    return max(float(d), 0.0)


def classify(ch: FiducialChannel) -> str:
    """``"trivial"`` (eta = 0), ``"lossy"`` (vacuum stays pure),
    ``"phase-insensitive"`` or ``"squeezing"``."""
    if ch.eta == 0:
        return "trivial"
    if vacuum_output_params(ch).N_out <= PURITY_TOL:
        return "lossy"
    return "phase-insensitive" if ch.phase_insensitive else "squeezing"


def cpuc_gaussian(ch: FiducialChannel) -> float:
    """Capacity per unit cost in nats per photon (closed form)."""
    kind = classify(ch)
    if kind == "trivial":
        return 0.0
    if kind == "lossy":
        return math.inf
    vac = vacuum_output_params(ch)
    lg = math.log((vac.N_out + 1) / vac.N_out)
    if kind == "phase-insensitive":
        return abs(ch.eta) * lg
    w_max = max(vac.omega_out, 1.0 / vac.omega_out)
    return abs(ch.eta) * w_max * lg


def _ratio_grid(ch: FiducialChannel, n_in, log_w, nbar, phase):
    """Vectorized D/nbar over input parameters; nan where infeasible."""
    w = np.exp(log_w)
    base = (n_in + 0.5) * (w + 1 / w) / 2 - 0.5
    a2 = nbar - base
    e, k = abs(ch.eta), abs(1 - ch.eta)
    a = e * (n_in + 0.5) / w + k * (ch.n_tilde + 0.5) / ch.omega_tilde
    b = e * (n_in + 0.5) * w + k * (ch.n_tilde + 0.5) * ch.omega_tilde
    n_out = np.sqrt(a * b) - 0.5
    w_out = np.sqrt(a / b)
    vac = vacuum_output_params(ch)
    amp = np.sqrt(np.maximum(a2, 0.0))
    d = _relent_closed_form(ch.eta, np.maximum(n_out, 0.0), w_out, vac.N_out, vac.omega_out,
                            amp * np.cos(phase), amp * np.sin(phase))
    return np.where(a2 >= 0, d / nbar, np.nan)


def cpuc_gaussian_numeric(
    ch: FiducialChannel, grid_points: int = 33, n_starts: int = 5, xatol: float = 1e-8
) -> float:
    """Supremum of D/nbar over (N_in, omega_in, |alpha|^2, phase in {0, pi/2}).

    Scans N_in in [0, 2], omega_in in [0.5, 2] and nbar in [1e-6, 1] on a
    grid, then refines the best points with Nelder-Mead.  Used to
    cross-check :func:`cpuc_gaussian`.
    """
    kind = classify(ch)
    if kind == "trivial":
        return 0.0
    if kind == "lossy":
        return math.inf
    bounds = [(0.0, 2.0), (math.log(0.5), math.log(2.0)), (1e-6, 1.0)]
    axes = [np.linspace(lo, hi, grid_points) for lo, hi in bounds]
    best = []
    for phase in (0.0, math.pi / 2):
        n_in, lw, nb = np.meshgrid(*axes, indexing="ij")
        r = _ratio_grid(ch, n_in, lw, nb, phase)
        flat = np.nan_to_num(r.ravel(), nan=-np.inf)
        for i in np.argsort(flat)[::-1][:n_starts]:
            best.append((flat[i], phase, np.array([n_in.ravel()[i], lw.ravel()[i], nb.ravel()[i]])))
    best.sort(key=lambda t: -t[0])
    value = best[0][0]
    for _, phase, x0 in best[:n_starts]:
        def objective(x, phase=phase):
            v = float(_ratio_grid(ch, x[0], x[1], x[2], phase))
            return 0.0 if math.isnan(v) else -v
        res = minimize(objective, x0, method="Nelder-Mead", bounds=bounds,
                       options={"xatol": xatol, "fatol": np.inf, "maxiter": 20000, "maxfev": 40000})
        value = max(value, -res.fun)
    return float(value)


def _xlogx_increment(x, d):
    """(x + d) ln(x + d) - x ln x for x >= 0, d > 0, accurate when d << x."""
    x, d = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(d, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(x > 0, x * np.log1p(d / np.where(x > 0, x, 1.0)), 0.0)
    return d * np.log(x + d) + tail


def thermal_entropy_increment(n0, dn):
    """h(n0 + dn) - h(n0) for the thermal entropy h, without cancellation."""
    n0 = np.asarray(n0, dtype=float)
    return _xlogx_increment(n0 + 1.0, dn) - _xlogx_increment(n0, dn)


def pie_curve(ch: FiducialChannel, nbar_grid) -> list:
    """Photon information efficiency of coherent encoding over a phase-insensitive channel.

    PIE(n) = [h(|eta| n + N0) - h(N0)] / n with h the thermal entropy and N0
    the thermal photons of the vacuum output.  Returns (nbar, PIE) pairs.
    """
    if not ch.phase_insensitive:
        raise PreconditionError("PIE curves are defined here for phase-insensitive channels (omega_tilde = 1)")
    nbar = np.asarray(nbar_grid, dtype=float)
    if np.any(nbar <= 0):
        raise DomainError("nbar grid values must be positive")
    pie = np.atleast_1d(coherent_capacity(ch, nbar)) / nbar
    return list(zip(nbar.tolist(), pie.tolist()))


def coherent_capacity(ch: FiducialChannel, nbar) -> np.ndarray:
    """h(|eta| n + N0) - h(N0), the capacity-cost curve behind :func:`pie_curve`."""
    n0 = vacuum_output_params(ch).N_out
    return thermal_entropy_increment(n0, abs(ch.eta) * np.asarray(nbar, dtype=float))

