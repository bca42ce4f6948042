"""Closed-form Gaussian transition densities for linear-coefficient processes.

Covers the phase-space (position/velocity) process, the plain and augmented
mean-reverting process, free and harmonically bound particles, and the
vorticity of two-dimensional linear flows, with the generic killed-Gaussian
assembly as the common backbone.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from . import odes
from .numerics import exp_integral_e1

__all__ = [
    "GaussianLaw",
    "OUParams",
    "ParticleParams",
    "VorticityParams",
    "A_kappa",
    "B_kappa",
    "Bbar_kappa",
    "gaussian_tpdf",
    "kolmogorov_tpdf",
    "kolmogorov_uncorrected_density",
    "ou_tpdf",
    "augmented_ou_tpdf",
    "particle_tpdf",
    "vorticity_2d",
    "stream_function",
    "stream_function_radial",
]

_T_MIN = 1e-9


def A_kappa(kappa: float, T: float) -> float:
    """exp(-kappa T)."""
    return math.exp(-kappa * T)


def B_kappa(kappa: float, T: float) -> float:
    """(1 - exp(-kappa T)) / kappa, continuous through kappa = 0."""
    x = kappa * T
    if abs(x) < 1e-12:
        return T * (1.0 - 0.5 * x)
    return -math.expm1(-x) / kappa


def Bbar_kappa(kappa: float, T: float) -> float:
    """Equals B_kappa for constant kappa; kept as a named alias for readability."""
    return B_kappa(kappa, T)


@dataclass
class GaussianLaw:
    """Gaussian transition law: density(zbar) = exp(log_prefactor) N(zbar | mean, cov).

    The prefactor is 1 for mass-conserving processes; killed processes carry
    the start-state-dependent factor that removes probability mass.
    """

    mean: np.ndarray
    cov: np.ndarray
    log_prefactor: float = 0.0

    def __post_init__(self):
        self.mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        self.cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if not np.allclose(self.cov, self.cov.T, atol=1e-12):
            raise ValueError("covariance must be symmetric")

    @property
    def dim(self) -> int:
        return len(self.mean)

    def mass(self) -> float:
        return math.exp(self.log_prefactor)

    def log_density(self, zbar) -> float:
        z = np.atleast_1d(np.asarray(zbar, dtype=float)) - self.mean
        chol = np.linalg.cholesky(self.cov)
        sol = np.linalg.solve(chol, z)
        logdet = 2.0 * np.sum(np.log(np.diag(chol)))
        return (self.log_prefactor - 0.5 * (sol @ sol)
                - 0.5 * (self.dim * math.log(2.0 * math.pi) + logdet))

    def density(self, zbar) -> float:
        return math.exp(self.log_density(zbar))

    def density_grid(self, *axes) -> np.ndarray:
        """Density evaluated on a meshgrid of per-coordinate axes."""
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=-1)
        prec = np.linalg.inv(self.cov)
        diff = pts - self.mean
        quad = np.einsum("ni,ij,nj->n", diff, prec, diff)
        norm = math.exp(self.log_prefactor) / math.sqrt(
            (2.0 * math.pi) ** self.dim * np.linalg.det(self.cov))
        return (norm * np.exp(-0.5 * quad)).reshape(grids[0].shape)

    def marginal(self, index: int) -> "GaussianLaw":
        return GaussianLaw(self.mean[index:index + 1],
                           self.cov[index:index + 1, index:index + 1],
                           self.log_prefactor)

    def characteristic_function(self, m) -> complex:
        m = np.atleast_1d(np.asarray(m, dtype=float))
        return cmath.exp(self.log_prefactor + 1j * (m @ self.mean)
                         - 0.5 * (m @ self.cov @ m))


def gaussian_tpdf(gen: odes.AffineGenerator, t: float, z, tbar: float,
                  steps: int = 512) -> GaussianLaw:
    """Transition law of a (possibly killed) Gaussian affine process.

    The killed case uses the start-state form of the prefactor, which is the
    convenient one for taking expectations over the terminal state.
    """
    if tbar - t < _T_MIN:
        raise ValueError("horizon below T_min = 1e-9; the law degenerates to a point mass")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    sol = odes.assemble_gaussian_solution(gen, t, tbar, steps=steps)
    Lt_inv = np.linalg.inv(sol.L.T)
    cov = Lt_inv @ sol.Cinv @ Lt_inv.T
    mean = Lt_inv @ (sol.d + z)
    log_pref = 0.0
    if np.any(sol.e != 0.0) or sol.varsigma1 != 0.0:
        mean = Lt_inv @ (sol.d + z - sol.Cinv @ sol.e)
        log_pref = (-sol.e @ (sol.d + z) + 0.5 * sol.e @ (sol.Cinv @ sol.e)
                    - sol.varsigma1)
    return GaussianLaw(mean, 0.5 * (cov + cov.T), log_pref)


def _phi_psi_moments(b, sigma, t, tbar):
    """phi_i = int (s-t)^i b ds and psi_i = int (s-t)^i sigma^2 ds, i = 0..2."""
    T = tbar - t
    if not callable(b) and not callable(sigma):
        s2 = float(sigma) ** 2
        phi = (b * T, b * T ** 2 / 2.0, b * T ** 3 / 3.0)
        psi = (s2 * T, s2 * T ** 2 / 2.0, s2 * T ** 3 / 3.0)
        return phi, psi
    b_fn = b if callable(b) else (lambda s: b)
    sig_fn = sigma if callable(sigma) else (lambda s: sigma)
    phi, psi = [], []
    for i in range(3):
        phi.append(integrate.quad(lambda s: (s - t) ** i * b_fn(s), t, tbar)[0])
        psi.append(integrate.quad(lambda s: (s - t) ** i * sig_fn(s) ** 2, t, tbar)[0])
    return tuple(phi), tuple(psi)


def kolmogorov_tpdf(b, sigma, t: float, x: float, y: float, tbar: float) -> GaussianLaw:
    """Phase-space law of dx = y dt, dy = b(t) dt + sigma(t) dW, state ordered (x, y)."""
    T = tbar - t
    if T < _T_MIN:
        raise ValueError("horizon below T_min = 1e-9; the law degenerates to a point mass")
    (phi0, phi1, _), (psi0, psi1, psi2) = _phi_psi_moments(b, sigma, t, tbar)
    cov = np.array([
        [psi0 * T ** 2 - 2.0 * psi1 * T + psi2, psi0 * T - psi1],
        [psi0 * T - psi1, psi0],
    ])
    mean = np.array([x + (phi0 + y) * T - phi1, y + phi0])
    return GaussianLaw(mean, cov)


def kolmogorov_uncorrected_density(b, sigma, t, x, y, tbar, xbar, ybar) -> float:
    """Historical (dimensionally inconsistent) phase-space density, negative control only.

    Kept solely so tests can demonstrate that it fails the forward-equation
    residual check; the diffusion constant maps as k = sigma^2 / 2.
    """
    k = sigma ** 2 / 2.0
    T = tbar - t
    pref = 2.0 * math.sqrt(3.0) / (math.pi * k ** 2 * T ** 2)
    expo = (-((ybar - y - b * T) ** 2) / (4.0 * k * T)
            - 3.0 * (xbar - x - 0.5 * (ybar + y) * T) ** 2 / (k ** 3 * T ** 3))
    return pref * math.exp(expo)


@dataclass(frozen=True)
class OUParams:
    """Mean-reverting linear diffusion dy = (chi - kappa y) dt + epsilon dW.

    kappa may be negative (mean repulsion); theta is defined only for kappa != 0.
    """

    chi: float
    kappa: float
    epsilon: float

    @property
    def theta(self) -> float:
        if self.kappa == 0.0:
            raise ValueError("theta undefined for kappa = 0")
        return self.chi / self.kappa


def ou_tpdf(params: OUParams, t: float, y: float, tbar: float) -> GaussianLaw:
    """One-dimensional mean-reverting Gaussian law."""
    T = tbar - t
    k = params.kappa
    mean = params.chi * B_kappa(k, T) + A_kappa(k, T) * y
    var = params.epsilon ** 2 * B_kappa(2.0 * k, T)
    return GaussianLaw(np.array([mean]), np.array([[var]]))


def augmented_ou_tpdf(params: OUParams, t: float, x: float, y: float,
                      tbar: float) -> GaussianLaw:
    """Joint law of the mean-reverting state and its running integral, state (x, y)."""
    T = tbar - t
    if T < _T_MIN:
        raise ValueError("horizon below T_min = 1e-9; the law degenerates to a point mass")
    k, eps = params.kappa, params.epsilon
    Bk, B2k, Ak = B_kappa(k, T), B_kappa(2.0 * k, T), A_kappa(k, T)
    h0 = eps ** 2 / k ** 2 * (T - 2.0 * Bk + B2k) if k != 0.0 else eps ** 2 * T ** 3 / 3.0
    h1 = 0.5 * eps ** 2 * Bk ** 2
    h2 = eps ** 2 * B2k
    cov = np.array([[h0, h1], [h1, h2]])
    if k != 0.0:
        theta = params.theta
        mean = np.array([x + theta * T - Bk * (theta - y),
                         theta - Ak * (theta - y)])
    else:
        mean = np.array([x + y * T + params.chi * T ** 2 / 2.0, y + params.chi * T])
    return GaussianLaw(mean, cov)


@dataclass(frozen=True)
class ParticleParams:
    """Friction kappa, binding frequency omega and noise epsilon of a particle."""

    kappa: float
    omega: float
    epsilon: float

    @property
    def mu(self) -> float:
        return self.kappa / 2.0

    @property
    def zeta(self) -> complex:
        return cmath.sqrt(self.kappa ** 2 - 4.0 * self.omega ** 2) / 2.0


def particle_tpdf(params: ParticleParams, kind: str, t: float, x: float, y: float,
                  tbar: float) -> GaussianLaw:
    """Phase-space law of a free or harmonically bound particle, state (x, y).

    The underdamped/overdamped split is avoided by evaluating the exponentials
    in complex arithmetic and taking real parts at the end.
    """
    if params.kappa <= 0.0:
        raise ValueError("friction kappa must be positive")
    T = tbar - t
    if kind == "free":
        base = augmented_ou_tpdf(OUParams(0.0, params.kappa, params.epsilon), t, x, y, tbar)
        return base
    if kind != "bound":
        raise ValueError("kind must be 'free' or 'bound'")
    kap, om2, eps2 = params.kappa, params.omega ** 2, params.epsilon ** 2
    zeta = params.zeta
    lam_p, lam_m = params.mu + zeta, params.mu - zeta
    E0 = cmath.exp(params.mu * T)
    Ep, Em = cmath.exp(zeta * T), cmath.exp(-zeta * T)
    two_zeta = 2.0 * zeta
    L = (E0 / two_zeta) * np.array([
        [-(lam_m * Ep - lam_p * Em), om2 * (Ep - Em)],
        [-(Ep - Em), lam_p * Ep - lam_m * Em],
    ], dtype=complex)

    def integrand(s):
        u = s - t
        e_p, e_m = cmath.exp(lam_p * u), cmath.exp(lam_m * u)
        f = (e_p - e_m) / two_zeta            # position response
        g = (lam_p * e_p - lam_m * e_m) / two_zeta  # velocity response
        return np.array([[f * f, f * g], [f * g, g * g]], dtype=complex)

    s_nodes, w = odes.gauss_legendre_nodes(t, tbar, 96)
    acc = np.zeros((2, 2), dtype=complex)
    for si, wi in zip(s_nodes, w):
        acc += wi * integrand(si)
    Cinv = eps2 * np.array([[acc[0, 0], -acc[0, 1]], [-acc[0, 1], acc[1, 1]]])
    Lt_inv = np.linalg.inv(L.T)
    cov = (Lt_inv @ Cinv @ Lt_inv.T).real
    mean = (Lt_inv @ np.array([x, y], dtype=complex)).real
    return GaussianLaw(mean, 0.5 * (cov + cov.T))


@dataclass(frozen=True)
class VorticityParams:
    """Strain s, rotation w and viscosity nu of an elliptic planar flow."""

    s: float
    w: float
    nu: float

    def __post_init__(self):
        if not (self.w > self.s >= 0.0):
            raise ValueError("elliptic streamlines require w > s >= 0")
        if self.nu <= 0.0:
            raise ValueError("viscosity must be positive")

    @property
    def abs_zeta(self) -> float:
        return math.sqrt(self.w ** 2 - self.s ** 2) / 2.0


def _vorticity_L(params: VorticityParams, T: float) -> np.ndarray:
    az = params.abs_zeta
    c1, s1 = math.cos(az * T), math.sin(az * T)
    s_, w_ = params.s, params.w
    return np.array([
        [c1 - s_ / (2 * az) * s1, -w_ / (2 * az) * s1],
        [w_ / (2 * az) * s1, c1 + s_ / (2 * az) * s1],
    ])


def vorticity_2d(params: VorticityParams, t: float, x1: float, x2: float, tbar: float):
    """Gaussian vorticity law of a perturbed elliptic linear flow.

    Returns (law, stream) where stream is the perturbation stream function
    (available in closed form only for the purely rotational case s = 0,
    otherwise None).
    """
    T = tbar - t
    if T < _T_MIN:
        raise ValueError("horizon below T_min = 1e-9")
    L = _vorticity_L(params, T)
    s_nodes, wts = odes.gauss_legendre_nodes(t, tbar, 96)
    Cinv = np.zeros((2, 2))
    for si, wi in zip(s_nodes, wts):
        Ls = _vorticity_L(params, si - t)
        Cinv += wi * 2.0 * params.nu * (Ls.T @ Ls)
    Lt_inv = np.linalg.inv(L.T)
    cov = Lt_inv @ Cinv @ Lt_inv.T
    mean = Lt_inv @ np.array([x1, x2])
    law = GaussianLaw(mean, 0.5 * (cov + cov.T))
    stream = None
    if params.s == 0.0:
        stream = stream_function(params, T, x1, x2)
    return law, stream


def stream_function_radial(R: float) -> float:
    """Radial stream-function profile (1/2pi)(log R + E1(R^2/2)/2).

    The integration constant fixes unit circulation at infinity, so the slope
    approaches 1/(2 pi R) for large R.
    """
    if R <= 0.0:
        raise ValueError("stream function is logarithmically singular at the center")
    return (math.log(R) + 0.5 * exp_integral_e1(R * R / 2.0)) / (2.0 * math.pi)


def stream_function(params: VorticityParams, T: float, x1: float, x2: float) -> Callable:
    """Stream function of the rotational (s = 0) vorticity solution.

    The argument is the diffusion-scaled distance from the advected center."""
    az = params.abs_zeta
    c1, s1 = math.cos(az * T), math.sin(az * T)
    center = (c1 * x1 - s1 * x2, s1 * x1 + c1 * x2)
    scale = math.sqrt(2.0 * params.nu * T)

    def psi(z1: float, z2: float) -> float:
        return stream_function_radial(math.hypot(z1 - center[0], z2 - center[1]) / scale)

    return psi
