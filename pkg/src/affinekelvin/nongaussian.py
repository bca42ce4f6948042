"""Non-Gaussian affine transition densities and characteristic functions.

Square-root (Feller-type) processes with both boundary regularizations,
time-dependent and jump extensions, the augmented variants behind stochastic
variance models, moment-explosion diagnostics, and anomalous diffusions.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate, special

from . import odes
from .gaussian import A_kappa, B_kappa, Bbar_kappa
from .numerics import ComplexLogTracker, QuadratureSpec, invert_fourier_1d

__all__ = [
    "FellerParams",
    "RegularizationKind",
    "CharacteristicSlice",
    "ExplosionReport",
    "feller_tpdf",
    "feller_flux",
    "feller_tpdf_timedep",
    "aug_feller_cf",
    "moment_explosion",
    "anomalous_kolmogorov_tpdf",
    "anomalous_nondim_density",
    "anomalous_ou_tpdf",
    "stein_density_cf",
]

TYPE_I = "type_I_reflecting"
TYPE_II = "type_II_absorbing"
RegularizationKind = (TYPE_I, TYPE_II)


@dataclass(frozen=True)
class FellerParams:
    """Square-root diffusion dy = (chi - kappa y) dt + epsilon sqrt(y) dW."""

    chi: float
    kappa: float
    epsilon: float

    def __post_init__(self):
        if self.chi < 0.0 or self.epsilon <= 0.0:
            raise ValueError("require chi >= 0 and epsilon > 0")
        if self.vartheta <= -1.0:
            raise ValueError("vartheta = 2 chi / epsilon^2 - 1 must exceed -1")

    @property
    def vartheta(self) -> float:
        return 2.0 * self.chi / self.epsilon ** 2 - 1.0

    @property
    def theta(self) -> float:
        return self.chi / self.kappa

    def M(self, T: float) -> float:
        return 2.0 / (self.epsilon ** 2 * B_kappa(self.kappa, T))

    def Y(self, T: float, y: float) -> float:
        return A_kappa(self.kappa, T) * y


def _bessel_density(order: float, M: float, Y: float, ybar: float, power: float) -> float:
    """M e^{-M(ybar+Y)} (ybar/Y)^{power/2} I_order(2 M sqrt(ybar Y)), scaled-Bessel form."""
    z = 2.0 * M * math.sqrt(ybar * Y)
    # e^{z - M(ybar+Y)} = e^{-M (sqrt(ybar) - sqrt(Y))^2}
    expo = -M * (math.sqrt(ybar) - math.sqrt(Y)) ** 2
    return M * (ybar / Y) ** (power / 2.0) * float(special.ive(order, z)) * math.exp(expo)


def feller_tpdf(params: FellerParams, reg: str, t: float, y: float, tbar: float,
                ybar: float) -> float:
    """Transition density of the square-root process at terminal value ybar.

    For vartheta >= 0 the boundary is unattainable and both regularizations
    coincide with the classical Bessel-form density. For -1 < vartheta < 0 the
    reflecting (type I) form keeps the Bessel order +vartheta (mass conserving,
    integrable singularity at 0), the absorbing (type II) form flips it to
    -vartheta (bounded at 0 but leaking mass).
    """
    if reg not in RegularizationKind:
        raise ValueError(f"unknown regularization {reg!r}")
    if y <= 0.0 or ybar < 0.0:
        raise ValueError("require y > 0 and ybar >= 0")
    vt = params.vartheta
    order = vt if (vt >= 0.0 or reg == TYPE_I) else -vt
    T = tbar - t
    M, Y = params.M(T), params.Y(T, y)
    if ybar == 0.0:
        if vt > 0.0:
            return 0.0
        if vt == 0.0:
            return M * math.exp(-M * Y)
        if reg == TYPE_I:
            return math.inf
        return M * math.exp(-M * Y) / (special.gamma(1.0 - vt) * (M * Y) ** vt)
    return _bessel_density(order, M, Y, ybar, vt)


def feller_flux(params: FellerParams, reg: str, t: float, y: float, tbar: float,
                ybar: float) -> float:
    """Probability flux -eps^2 (ybar w)_ybar / 2 + (chi - kappa ybar) w in closed form.

    Vanishes at the boundary for the reflecting form; tends to the nonzero
    absorption rate for the type II form with negative vartheta.
    """
    if reg not in RegularizationKind:
        raise ValueError(f"unknown regularization {reg!r}")
    vt = params.vartheta
    T = tbar - t
    M, Y = params.M(T), params.Y(T, y)
    e2 = params.epsilon ** 2
    drift_coef = 0.5 * e2 - params.kappa / M
    if vt >= 0.0 or reg == TYPE_I:
        if ybar == 0.0:
            return 0.0
        w_up = _bessel_density(vt + 1.0, M, Y, ybar, vt + 1.0)
        w = _bessel_density(vt, M, Y, ybar, vt)
        return -0.5 * e2 * M * Y * w_up + drift_coef * M * ybar * w
    if ybar == 0.0:
        return (0.5 * e2 * vt * M * math.exp(-M * Y)
                / (special.gamma(1.0 - vt) * (M * Y) ** vt))
    z = 2.0 * M * math.sqrt(ybar * Y)
    expo = math.exp(-M * (math.sqrt(ybar) - math.sqrt(Y)) ** 2)
    pref = M * (ybar / Y) ** (vt / 2.0) * expo
    return pref * (-0.5 * e2 * M * math.sqrt(ybar * Y) * float(special.ive(1.0 - vt, z))
                   + (0.5 * e2 * vt + drift_coef * M * ybar) * float(special.ive(-vt, z)))


def _cumulative_on_grid(fn, t, tbar, n=4097):
    grid = np.linspace(t, tbar, n)
    vals = np.array([fn(s) for s in grid])
    cum = integrate.cumulative_simpson(vals, x=grid, initial=0.0)
    return grid, cum


def feller_tpdf_timedep(chi_fn: Callable, kappa_fn: Callable, eps_fn: Callable,
                        t: float, y: float, tbar: float, ybar: float,
                        spec: QuadratureSpec | None = None,
                        history_nodes: int = 64) -> float:
    """Density of the square-root process with time-dependent coefficients.

    One inverse Fourier transform of the rescaled mode; the history of the
    dimension ratio 2 chi / eps^2 enters through a Gauss-Legendre integral of
    its derivative against a moving logarithm.
    """
    T = tbar - t
    grid, cum_kappa = _cumulative_on_grid(kappa_fn, t, tbar)
    eta_total = cum_kappa[-1]
    exp_cum = np.exp(cum_kappa - eta_total)       # A_kappa(s, tbar) = e^{-(eta_total - K(s))}
    tail = integrate.cumulative_simpson(exp_cum, x=grid, initial=0.0)
    bbar_from = tail[-1] - tail                    # Bbar_kappa(s, tbar)

    def bbar(s):
        return float(np.interp(s, grid, bbar_from))

    def a_from(s):
        return float(np.interp(s, grid, exp_cum))

    def big_m(s):
        return 2.0 / (eps_fn(s) ** 2 * bbar(s))

    def ratio(s):
        return 2.0 * chi_fn(s) / eps_fn(s) ** 2

    h = 1e-6 * max(T, 1.0)

    def ratio_prime(s):
        return (ratio(s + h) - ratio(s - h)) / (2.0 * h)

    if ratio(tbar) <= 1.0:
        raise ValueError("regularity requires 2 chi / eps^2 > 1 at all times")
    eps_prime_t = (eps_fn(t + h) - eps_fn(t - h)) / (2.0 * h)
    M_t = big_m(t)
    Y = (a_from(t) - 4.0 * eps_prime_t / (eps_fn(t) ** 3 * M_t)) * y
    s_nodes, s_w = odes.gauss_legendre_nodes(t, tbar, history_nodes)
    rp = np.array([ratio_prime(s) for s in s_nodes])
    m_ratio = np.array([M_t / big_m(s) for s in s_nodes])

    def mode(lhat):
        lhat = np.asarray(lhat, dtype=float)
        one = 1.0 - 2j * lhat
        hist = np.zeros_like(lhat, dtype=complex)
        for w_i, rp_i, mr_i in zip(s_w, rp, m_ratio):
            hist += w_i * rp_i * np.log(1.0 - mr_i * 2j * lhat)
        expo = (-ratio(t) * np.log(one) - hist
                + M_t * (Y / one + ybar * one) - M_t * (Y + ybar))
        return 2.0 * M_t * np.exp(expo)

    spec = spec or QuadratureSpec(node_count=8193, abs_tol=1e-8)
    res = invert_fourier_1d(mode, [0.0], spec)
    return float(res.values[0])


@dataclass
class ExplosionReport:
    """Critical exponential-moment exponents and the explosion horizon (if any)."""

    p_hat: float | None = None
    p_plus: float | None = None
    p_minus: float | None = None
    t_star: float | None = None


def moment_explosion(params: FellerParams, rho: float | None, p: float) -> ExplosionReport:
    """Explosion diagnostics for exp(p x) moments of the augmented processes.

    ``rho=None`` treats x as the running integral of the square-root state;
    a correlation treats x as the driftless diffusion it drives. The moment
    with p = -1 (discounting) never explodes.
    """
    kap, eps = params.kappa, params.epsilon
    if rho is None:
        p_hat = kap ** 2 / (2.0 * eps ** 2)
        if p <= p_hat:
            return ExplosionReport(p_hat=p_hat, t_star=None)
        root = math.sqrt(2.0 * eps ** 2 * p - kap ** 2)
        t_star = (math.pi - math.atan(root / kap)) / root
        return ExplosionReport(p_hat=p_hat, t_star=t_star)
    rho_bar2 = 1.0 - rho ** 2
    p_plus = (-rho + 1.0) * kap / (rho_bar2 * eps)
    p_minus = (-rho - 1.0) * kap / (rho_bar2 * eps)
    zeta2 = 0.25 * (kap ** 2 - 2.0 * rho * eps * kap * p - rho_bar2 * eps ** 2 * p ** 2)
    if zeta2 >= 0.0:
        return ExplosionReport(p_plus=p_plus, p_minus=p_minus, t_star=None)
    mu = -0.5 * (kap - rho * eps * p)
    az = math.sqrt(-zeta2)
    if mu > 0.0:
        t_star = math.atan(az / abs(mu)) / az
    elif mu < 0.0:
        t_star = (math.pi - math.atan(az / abs(mu))) / az
    else:
        t_star = 0.5 * math.pi / az
    return ExplosionReport(p_plus=p_plus, p_minus=p_minus, t_star=t_star)


@dataclass
class CharacteristicSlice:
    """One-dimensional characteristic function k -> cf(k), ready for inversion."""

    cf: Callable
    domain_note: str = ""
    params: object = None

    def __call__(self, k):
        return self.cf(k)


def _aug_feller_pieces(params: FellerParams, rho: float | None, k):
    """mu, zeta, product lambda+ lambda- for the augmented square-root family."""
    k = np.asarray(k, dtype=complex)
    kap, eps = params.kappa, params.epsilon
    if rho is None:
        mu = np.full_like(k, -0.5 * kap)
        prod = 0.5j * eps ** 2 * k
    else:
        mu = -0.5 * (kap - 1j * rho * eps * k)
        prod = -0.25 * eps ** 2 * k ** 2
    zeta = np.sqrt(mu * mu - prod)
    zeta = np.where(zeta.real < 0, -zeta, zeta)
    return mu, zeta, prod


def aug_feller_cf(params: FellerParams, rho: float | None, t: float, x: float,
                  y: float, tbar: float) -> CharacteristicSlice:
    """Characteristic function of the terminal x of an augmented square-root process.

    ``rho=None``: x is the running integral of the state (integrated variance).
    ``rho`` given: x is the driftless diffusion whose squared volatility is the
    state, with correlated innovations. cf(0) = 1 exactly; the branch of the
    complex logarithm is kept continuous along each evaluated grid.
    """
    T = tbar - t
    vt1 = params.vartheta + 1.0  # 2 chi / eps^2
    eps2 = params.epsilon ** 2

    def cf(k):
        scalar = np.isscalar(k)
        karr = np.atleast_1d(np.asarray(k, dtype=complex))
        mu, zeta, prod = _aug_feller_pieces(params, rho, karr)
        R = np.exp(-2.0 * zeta * T)
        bracket = 0.5 * (1.0 - mu / zeta) + 0.5 * (1.0 + mu / zeta) * R
        tracker = ComplexLogTracker()
        log_omega = mu * T + zeta * T + tracker.log_array(bracket)
        denom = zeta * (1.0 + R) - mu * (1.0 - R)
        C = 2.0 * (prod / eps2) * (1.0 - R) / denom
        out = np.exp(-vt1 * log_omega + C * y)
        return out[0] if scalar else out

    report = moment_explosion(params, rho, 1.0)
    note = (f"p_hat={report.p_hat}" if rho is None
            else f"p_plus={report.p_plus}, p_minus={report.p_minus}")
    slice_ = CharacteristicSlice(cf, domain_note=note, params=params)
    slice_.mean_x = x + params.theta * T - Bbar_kappa(params.kappa, T) * (params.theta - y)
    slice_.marginal_density = lambda xbars, spec=None: _aug_feller_marginal(
        slice_, x, xbars, spec)
    slice_.density_2d = lambda xbar, ybar, spec=None: _aug_feller_density_2d(
        params, rho, t, x, y, tbar, xbar, ybar, spec)
    return slice_


def _aug_feller_marginal(slice_: CharacteristicSlice, x: float, xbars, spec=None):
    spec = spec or QuadratureSpec(node_count=4097, abs_tol=1e-8)
    pts = np.atleast_1d(np.asarray(xbars, dtype=float)) - x
    res = invert_fourier_1d(lambda k: slice_.cf(k), -pts, spec)
    return res.values


def _aug_feller_density_2d(params, rho, t, x, y, tbar, xbar, ybar, spec=None):
    """Joint density via one k-integral of the closed terminal-state profile."""
    T = tbar - t
    vt = params.vartheta
    eps2 = params.epsilon ** 2
    spec = spec or QuadratureSpec(node_count=4097, abs_tol=1e-8)

    def integrand(k):
        karr = np.atleast_1d(np.asarray(k, dtype=complex))
        mu, zeta, prod = _aug_feller_pieces(params, rho, karr)
        R = np.exp(-2.0 * zeta * T)
        bracket = 0.5 * (1.0 - mu / zeta) + 0.5 * (1.0 + mu / zeta) * R
        tracker = ComplexLogTracker()
        log_omega = mu * T + zeta * T + tracker.log_array(bracket)
        denom = zeta * (1.0 + R) - mu * (1.0 - R)
        C = 2.0 * (prod / eps2) * (1.0 - R) / denom
        M = (2.0 / eps2) * denom / (1.0 - R)
        Y = 4.0 * zeta ** 2 * y * np.exp(-2.0 * zeta * T) / denom ** 2
        z = 2.0 * M * np.sqrt(ybar * Y)
        profile = (M * (ybar / Y) ** (vt / 2.0) * special.ive(vt, z)
                   * np.exp(z.real - M * (ybar + Y)))
        return np.exp(-(vt + 1.0) * log_omega + C * y) * profile

    res = invert_fourier_1d(integrand, [x - xbar], spec)
    return float(res.values[0])


# ---------------------------------------------------------------------------
# anomalous diffusions


def _anomalous_exponent_integral(k, l, T, nu):
    """int_0^T |l - k s|^(2 nu) ds with the kink at s = l/k split out."""
    p = 2.0 * nu

    def seg(u0, u1, kk):
        # integral of |u|^p du / (-kk) over u from u0 to u1 mapped back to s
        F = lambda u: np.sign(u) * np.abs(u) ** (p + 1.0) / (p + 1.0)
        return (F(u0) - F(u1)) / kk

    if k == 0.0:
        return abs(l) ** p * T
    s_star = l / k
    if 0.0 < s_star < T:
        return seg(l, 0.0, k) + seg(0.0, l - k * T, k)
    return seg(l, l - k * T, k)


def anomalous_nondim_density(zeta, eta, fallback_tol: float = 1e-9):
    """Non-dimensional phase-space density of the superdiffusive transport process.

    Closed form for the half-order (Cauchy-generating) case; the logarithmic
    term uses the principal branch checked against the integral representation,
    which replaces it where the branches disagree.
    """
    zeta = np.asarray(zeta, dtype=float)
    eta = np.asarray(eta, dtype=float)
    D = 1.0 + eta ** 2 - 4j * zeta - 2j * eta
    sqrtD = np.sqrt(D)
    A = 2.0 * zeta + eta
    first = (1.0 / (1.0 + eta ** 2)) * (
        (1.0 - 2.0 * eta * (zeta + eta)) / (1.0 + 4.0 * (zeta + eta) ** 2)
        + (1.0 + 2.0 * eta * zeta) / (1.0 + 4.0 * zeta ** 2))
    ratio = (A - sqrtD) / (A + sqrtD)
    middle = (1.0 / D) * (2.0 * (D + 2j * zeta + 1j * eta)
                          / ((1.0 - 2j * zeta) * (1.0 - 2j * zeta - 2j * eta))
                          - (1j / sqrtD) * np.log(ratio))
    closed = (first + middle.real) / math.pi ** 2

    # The log term equals half the chi-integral of the squared partial-fraction
    # kernel; recompute it that way and replace points where the principal
    # branch disagrees (the integral form has no branch ambiguity).
    f_plus = 0.5 * ((1.0 + 1j * eta) + 1j * sqrtD)
    f_minus = 0.5 * ((1.0 + 1j * eta) - 1j * sqrtD)
    nodes, wts = odes.gauss_legendre_nodes(0.0, 1.0, 64)
    j1 = np.zeros(np.broadcast_shapes(np.shape(zeta), np.shape(eta)), dtype=complex)
    for c, w in zip(nodes, wts):
        j1 = j1 + w / ((c - f_plus) * (c - f_minus)) ** 2
    numeric_total = (first + 0.5 * j1.real) / math.pi ** 2
    bad = ~np.isfinite(closed) | (np.abs(closed - numeric_total)
                                  > fallback_tol * (1.0 + np.abs(numeric_total)))
    out = np.where(bad, numeric_total, closed)
    return out if out.shape else float(out)


def anomalous_kolmogorov_tpdf(a: float, b: float, t: float, x: float, y: float,
                              tbar: float, xbar: float, ybar: float,
                              nu: float = 0.5, spec: QuadratureSpec | None = None):
    """Phase-space transition density under half-order superdiffusive forcing.

    nu = 1/2 evaluates the closed form in the non-dimensional variables and
    maps back with the 1/(a^2 T^3) Jacobian; other orders in (0, 1) fall back
    to a two-dimensional Fourier inversion with the kink of the exponent
    integral split out analytically.
    """
    if a <= 0.0:
        raise ValueError("diffusion coefficient a must be positive")
    if not 0.0 < nu < 1.0:
        raise ValueError("order nu must lie in (0, 1)")
    T = tbar - t
    arg1 = xbar - x - ybar * T + b * T ** 2 / 2.0
    arg2 = ybar - y - b * T
    if nu == 0.5:
        zeta = arg1 / (a * T ** 2)
        eta = arg2 / (a * T)
        return anomalous_nondim_density(zeta, eta) / (a ** 2 * T ** 3)
    from .numerics import invert_fourier_2d
    spec = spec or QuadratureSpec(node_count=513, abs_tol=1e-7)

    def cf2(kk, ll):
        out = np.empty(kk.shape, dtype=complex)
        flat_k, flat_l = kk.ravel(), ll.ravel()
        vals = np.array([math.exp(-a * _anomalous_exponent_integral(kv, lv, T, nu))
                         for kv, lv in zip(flat_k, flat_l)])
        out = vals.reshape(kk.shape).astype(complex)
        return out

    return float(invert_fourier_2d(cf2, [(arg1, arg2)], spec)[0])


def anomalous_ou_tpdf(chi: float, kappa: float, a: float, t: float, y: float,
                      tbar: float, ybar) -> float:
    """Mean-reverting process driven by half-order noise: a Cauchy law.

    Center relaxes from y to chi/kappa; half-width grows like the
    mean-reversion-weighted elapsed time.
    """
    if a <= 0.0 or kappa <= 0.0:
        raise ValueError("require a > 0 and kappa > 0")
    T = tbar - t
    width = Bbar_kappa(kappa, T) * a
    center = chi / kappa + A_kappa(kappa, T) * (y - chi / kappa)
    ybar = np.asarray(ybar, dtype=float)
    out = width / (math.pi * (width ** 2 + (ybar - center) ** 2))
    return out if out.shape else float(out)


def stein_density_cf(chi: float, kappa: float, epsilon: float, rho: float | None,
                     t: float, x: float, y: float, tbar: float) -> CharacteristicSlice:
    """Characteristic slice of the augmented OU-squared system in the x direction.

    The exponents come from the explicitly solvable matrix Riccati system;
    cf(m1) is the characteristic function of xbar - x given the start (x, y).
    """
    T = tbar - t

    def cf(m1):
        scalar = np.isscalar(m1)
        arr = np.atleast_1d(np.asarray(m1, dtype=complex))
        out = np.empty_like(arr)
        for i, m in enumerate(arr):
            if m == 0.0:
                out[i] = 1.0
                continue
            coeff = odes.stein_matrix_riccati(chi, kappa, epsilon, rho,
                                              (m, 0.0, 0.0), T)
            out[i] = cmath.exp(coeff.alpha + 1j * coeff.delta2 * y ** 2
                               + 1j * coeff.delta3 * y)
        return out[0] if scalar else out

    return CharacteristicSlice(cf, domain_note="OU-squared augmented system")
