"""Characteristic ODE systems behind the affine ansatz.

Fundamental matrices of the linear wave-vector equations, closed-form scalar
and explicitly solvable matrix Riccati equations, and a generic backward
integrator for affine pseudo-differential generators.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import linalg

__all__ = [
    "AffineGenerator",
    "JumpTerm",
    "FundamentalSolution",
    "RiccatiRoots",
    "RiccatiSolution",
    "KelvinCoefficients",
    "BlowUpError",
    "fundamental_matrix",
    "assemble_gaussian_solution",
    "riccati_closed_form",
    "integrate_characteristics",
    "stein_matrix_riccati",
    "path_dependent_characteristics",
    "gauss_legendre_nodes",
]


class BlowUpError(RuntimeError):
    """Raised when a characteristic ODE explodes inside the integration window."""

    def __init__(self, message: str, blow_up_time: float):
        super().__init__(message)
        self.blow_up_time = blow_up_time


def _as_fn(value, shape=None):
    """Wrap constants as callables of time; pass callables through."""
    if callable(value):
        return value, False
    arr = np.asarray(value, dtype=float) if shape is not None else float(value)
    return (lambda t: arr), True


@dataclass
class JumpTerm:
    """One jump component: intensity lam0 + lam_linear . z, amplitude cf psi."""

    intensity_const: float
    intensity_linear: np.ndarray
    jump_cf: Callable

    def __post_init__(self):
        self.intensity_linear = np.asarray(self.intensity_linear, dtype=float)
        psi0 = complex(self.jump_cf(np.zeros_like(self.intensity_linear))
                       if self.intensity_linear.ndim else self.jump_cf(0.0))
        if abs(psi0 - 1.0) > 1e-12:
            raise ValueError("jump amplitude characteristic function must satisfy psi(0) = 1")


class AffineGenerator:
    """Affine drift/diffusion/kill/jump coefficients of a process.

    Coefficients may be constants or callables of time. ``diff_linear`` is a
    list with one symmetric matrix per state coordinate (the coefficient of
    z_l in the diffusion matrix), or None for a purely Gaussian process.
    """

    def __init__(self, dim, drift_const=None, drift_linear=None, diff_const=None,
                 diff_linear=None, kill_const=0.0, kill_linear=None, jump_terms=()):
        self.dim = int(dim)
        n = self.dim
        zeros_v, zeros_m = np.zeros(n), np.zeros((n, n))
        self.drift_const, c1 = _as_fn(zeros_v if drift_const is None else drift_const, (n,))
        self.drift_linear, c2 = _as_fn(zeros_m if drift_linear is None else drift_linear, (n, n))
        self.diff_const, c3 = _as_fn(zeros_m if diff_const is None else diff_const, (n, n))
        if diff_linear is None:
            self.diff_linear, c4 = None, True
        else:
            fns = [_as_fn(a, (n, n)) for a in diff_linear]
            self.diff_linear = [f for f, _ in fns]
            c4 = all(flag for _, flag in fns)
        self.kill_const, c5 = _as_fn(kill_const)
        self.kill_linear, c6 = _as_fn(zeros_v if kill_linear is None else kill_linear, (n,))
        self.jump_terms = list(jump_terms)
        self.is_constant = c1 and c2 and c3 and c4 and c5 and c6
        a0 = np.asarray(self.diff_const(0.0))
        if np.min(np.linalg.eigvalsh(0.5 * (a0 + a0.T))) < -1e-12:
            raise ValueError("diff_const must be positive semidefinite")

    @property
    def is_gaussian(self) -> bool:
        return self.diff_linear is None and not self.jump_terms

    def symbol(self, level: int, t: float, m: np.ndarray) -> complex:
        """Symbol of the level-th operator slice evaluated at wave vector m.

        level 0 is the state-independent part; level l >= 1 multiplies z_l.
        """
        m = np.asarray(m, dtype=complex)
        if level == 0:
            a = np.asarray(self.diff_const(t))
            b = np.asarray(self.drift_const(t))
            c = self.kill_const(t)
        else:
            idx = level - 1
            a = np.asarray(self.diff_linear[idx](t)) if self.diff_linear else 0.0
            b = np.asarray(self.drift_linear(t))[:, idx]
            c = self.kill_linear(t)[idx]
        val = -m @ (a @ m) if np.ndim(a) else 0.0
        val = val + 1j * (b @ m) - c
        for jt in self.jump_terms:
            lam = jt.intensity_const if level == 0 else jt.intensity_linear[level - 1]
            if lam != 0.0:
                arg = m if len(np.atleast_1d(m)) > 1 else complex(np.atleast_1d(m)[0])
                val = val + lam * (jt.jump_cf(arg) - 1.0)
        return val


@dataclass
class FundamentalSolution:
    """Fundamental matrix of the wave-vector system plus the alpha-integrals.

    All quantities are taken over [t, tbar]: L solves dL/ds + B*(s) L = 0 with
    L(t) = I; Cinv = 2 int L* A L ds; d = int L*(b + 2 A L e) ds;
    e = int L^{-1} c ds; varsigma0 = int tr(B) ds and varsigma1 collects the
    kill contributions.
    """

    L: np.ndarray
    Cinv: np.ndarray
    d: np.ndarray
    varsigma0: float
    varsigma1: float
    e: np.ndarray

    @property
    def varsigma(self) -> float:
        return self.varsigma0 + self.varsigma1


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre_nodes(a: float, b: float, n: int = 96):
    """Gauss-Legendre nodes and weights on [a, b]."""
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    x, w = _GL_CACHE[n]
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def fundamental_matrix(drift_linear, t: float, tbar: float, steps: int = 512) -> np.ndarray:
    """Fundamental solution L(t, tbar) of dL/ds + B*(s) L = 0, L(t, t) = I.

    Constant B uses the matrix exponential; time-dependent B falls back to RK4.
    """
    B_fn, is_const = _as_fn(drift_linear, (1, 1))
    B0 = np.atleast_2d(np.asarray(B_fn(t), dtype=float))
    if is_const:
        return linalg.expm(-B0.T * (tbar - t))
    n = B0.shape[0]
    L = np.eye(n)
    h = (tbar - t) / steps
    rhs = lambda s, M: -np.atleast_2d(np.asarray(B_fn(s), dtype=float)).T @ M
    s = t
    for _ in range(steps):
        k1 = rhs(s, L)
        k2 = rhs(s + 0.5 * h, L + 0.5 * h * k1)
        k3 = rhs(s + 0.5 * h, L + 0.5 * h * k2)
        k4 = rhs(s + h, L + h * k3)
        L = L + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        s += h
    return L


def _expm_with_integral(B: np.ndarray, u: float):
    """exp(B u) and int_0^u exp(B v) dv via one block matrix exponential."""
    n = B.shape[0]
    blk = np.zeros((2 * n, 2 * n))
    blk[:n, :n] = B
    blk[:n, n:] = np.eye(n)
    E = linalg.expm(blk * u)
    return E[:n, :n], E[:n, n:]


def assemble_gaussian_solution(gen: AffineGenerator, t: float, tbar: float,
                               steps: int = 512, nodes: int = 96) -> FundamentalSolution:
    """Closed-form ingredients of the Gaussian (possibly killed) law over [t, tbar].

    Requires a state-independent diffusion (no diff_linear) and affine kill.
    Constant coefficients are integrated by Gauss-Legendre quadrature over
    matrix exponentials; time-dependent ones by a joint RK4 sweep.
    """
    if gen.diff_linear is not None or gen.jump_terms:
        raise ValueError("assemble_gaussian_solution requires a Gaussian generator")
    n = gen.dim
    if gen.is_constant:
        B = np.atleast_2d(np.asarray(gen.drift_linear(t), dtype=float))
        A = np.atleast_2d(np.asarray(gen.diff_const(t), dtype=float))
        b = np.atleast_1d(np.asarray(gen.drift_const(t), dtype=float))
        cvec = np.atleast_1d(np.asarray(gen.kill_linear(t), dtype=float))
        c0 = gen.kill_const(t)
        s, w = gauss_legendre_nodes(t, tbar, nodes)
        Cinv = np.zeros((n, n))
        d = np.zeros(n)
        s1 = 0.0
        for si, wi in zip(s, w):
            u = si - t
            Lt = linalg.expm(-B.T * u)
            Einv, J = _expm_with_integral(B.T, u)
            e_s = J @ cvec
            LAL = Lt.T @ A @ Lt
            Cinv += wi * 2.0 * LAL
            d += wi * (Lt.T @ (b + 2.0 * A @ (Lt @ e_s)))
            s1 += wi * (c0 - e_s @ (LAL @ e_s) - e_s @ (Lt.T @ b))
        L = linalg.expm(-B.T * (tbar - t))
        _, Jfull = _expm_with_integral(B.T, tbar - t)
        e = Jfull @ cvec
        s0 = np.trace(B) * (tbar - t)
        return FundamentalSolution(L, Cinv, d, s0, s1, e)

    # time-dependent coefficients: one joint RK4 sweep
    state = {
        "L": np.eye(n), "M": np.eye(n), "e": np.zeros(n),
        "Cinv": np.zeros((n, n)), "d": np.zeros(n), "s0": 0.0, "s1": 0.0,
    }

    def pack(st):
        return np.concatenate([st["L"].ravel(), st["M"].ravel(), st["e"],
                               st["Cinv"].ravel(), st["d"], [st["s0"], st["s1"]]])

    def unpack(v):
        i = 0
        L = v[i:i + n * n].reshape(n, n); i += n * n
        M = v[i:i + n * n].reshape(n, n); i += n * n
        e = v[i:i + n]; i += n
        Cinv = v[i:i + n * n].reshape(n, n); i += n * n
        d = v[i:i + n]; i += n
        return L, M, e, Cinv, d, v[i], v[i + 1]

    def rhs(s, v):
        L, M, e, _, _, _, _ = unpack(v)
        B = np.atleast_2d(np.asarray(gen.drift_linear(s), dtype=float))
        A = np.atleast_2d(np.asarray(gen.diff_const(s), dtype=float))
        b = np.atleast_1d(np.asarray(gen.drift_const(s), dtype=float))
        cvec = np.atleast_1d(np.asarray(gen.kill_linear(s), dtype=float))
        LAL = L.T @ A @ L
        return np.concatenate([
            (-B.T @ L).ravel(), (M @ B.T).ravel(), M @ cvec,
            (2.0 * LAL).ravel(), L.T @ (b + 2.0 * A @ (L @ e)),
            [np.trace(B), gen.kill_const(s) - e @ (LAL @ e) - e @ (L.T @ b)],
        ])

    v = pack(state)
    h = (tbar - t) / steps
    s = t
    for _ in range(steps):
        k1 = rhs(s, v)
        k2 = rhs(s + 0.5 * h, v + 0.5 * h * k1)
        k3 = rhs(s + 0.5 * h, v + 0.5 * h * k2)
        k4 = rhs(s + h, v + h * k3)
        v = v + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        s += h
    L, M, e, Cinv, d, s0, s1 = unpack(v)
    return FundamentalSolution(L, Cinv, d, s0, s1, e)


@dataclass(frozen=True)
class RiccatiRoots:
    mu: complex
    zeta: complex

    @property
    def lambda_plus(self) -> complex:
        return self.mu + self.zeta

    @property
    def lambda_minus(self) -> complex:
        return self.mu - self.zeta


def _scaled_cosh_shc(zeta: complex, tau: float):
    """cosh(zeta tau) e^{-q} and (sinh(zeta tau)/zeta) e^{-q} with q = max(Re(zeta tau), 0).

    Stable through zeta -> 0 and safe from overflow for large Re(zeta tau).
    """
    z = zeta * tau
    if abs(z) < 1e-4:
        z2 = z * z
        ch = 1.0 + z2 / 2.0 + z2 * z2 / 24.0
        shc = tau * (1.0 + z2 / 6.0 + z2 * z2 / 120.0)
        return ch, shc, 0.0
    q = z.real
    if q >= 0:
        # e^{z-q} = e^{i Im z}, e^{-z-q} = e^{-2q} e^{-i Im z}
        ez = cmath.exp(1j * z.imag)
        emz = cmath.exp(-2.0 * q) / ez
        return 0.5 * (ez + emz), 0.5 * (ez - emz) / zeta, q
    return cmath.cosh(z), cmath.sinh(z) / zeta, 0.0


@dataclass
class RiccatiSolution:
    """Closed-form solution of gamma_tau = a2 gamma^2 + a1 gamma + a0, gamma(0) = terminal.

    tau is time to maturity; Omega is the linearizing function with Omega(0) = 1
    and gamma = -Omega_tau / (a2 Omega). int_0^tau gamma ds = -log(Omega)/a2.
    """

    a2: complex
    a1: complex
    a0: complex
    terminal: complex
    roots: RiccatiRoots

    def _omega_parts(self, tau: float):
        """Omega e^{-mu tau - q} and Omega_tau e^{-mu tau - q}; the shared scale cancels in gamma."""
        mu, zeta = self.roots.mu, self.roots.zeta
        dp0 = -self.a2 * self.terminal  # Omega_tau(0)
        ch, shc, q = _scaled_cosh_shc(zeta, tau)
        om = ch + (dp0 - mu) * shc
        om_tau = dp0 * ch + (mu * dp0 - self.a0 * self.a2) * shc
        return om, om_tau, mu, q

    def omega(self, tau: float) -> complex:
        om, _, mu, q = self._omega_parts(tau)
        return cmath.exp(mu * tau + q) * om

    def gamma(self, tau: float) -> complex:
        om, om_tau, _, _ = self._omega_parts(tau)
        if om == 0.0:
            raise BlowUpError("Riccati solution has a pole at this horizon", tau)
        return -om_tau / (self.a2 * om)

    def log_omega(self, tau: float) -> complex:
        """Principal-branch log of Omega with the exponential prefactor split off."""
        om, _, mu, q = self._omega_parts(tau)
        return mu * tau + q + cmath.log(om)

    def int_gamma(self, tau: float) -> complex:
        return -self.log_omega(tau) / self.a2

    def blow_up_time(self, horizon: float, samples: int = 4096) -> float | None:
        """Smallest tau in (0, horizon] with Omega(tau) = 0, or None."""
        taus = np.linspace(0.0, horizon, samples + 1)
        vals = np.array([self.omega(tt) for tt in taus])
        if np.max(np.abs(vals.imag)) < 1e-9 * np.max(np.abs(vals.real) + 1e-300):
            re = vals.real
            flips = np.nonzero(np.sign(re[1:]) * np.sign(re[:-1]) < 0)[0]
            if len(flips) == 0:
                return None
            lo, hi = taus[flips[0]], taus[flips[0] + 1]
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if np.sign(self.omega(mid).real) == np.sign(self.omega(lo).real):
                    lo = mid
                else:
                    hi = mid
            return 0.5 * (lo + hi)
        mags = np.abs(vals)
        idx = int(np.argmin(mags))
        if mags[idx] < 1e-10 * np.max(mags):
            return float(taus[idx])
        return None


def riccati_closed_form(a2: complex, a1: complex, a0: complex,
                        terminal: complex, T: float) -> RiccatiSolution:
    """Solve the constant-coefficient scalar Riccati equation on [0, T].

    Returns the solution object; a pole of Omega inside (0, T] is reported by
    ``gamma``/``blow_up_time`` rather than eagerly, so callers can still use
    shorter horizons.
    """
    if a2 == 0:
        raise ValueError("a2 must be nonzero; linear case is handled by callers directly")
    mu = a1 / 2.0
    zeta = cmath.sqrt(mu * mu - a0 * a2)
    if zeta.real < 0:
        zeta = -zeta
    return RiccatiSolution(a2, a1, a0, terminal, RiccatiRoots(mu, zeta))


@dataclass
class KelvinCoefficients:
    """Exponent pieces of one Kelvin mode exp(alpha + i delta . z) at wave vector m."""

    alpha: complex
    delta: np.ndarray
    m: np.ndarray
    n_degenerate: int = 0
    blow_up_time: float | None = None

    @property
    def beta(self) -> np.ndarray:
        return self.delta[: self.n_degenerate]

    @property
    def gamma(self) -> np.ndarray:
        return self.delta[self.n_degenerate:]


def integrate_characteristics(gen: AffineGenerator, m, t: float, tbar: float,
                              steps: int = 512, guard: float = 1e12,
                              n_degenerate: int = 0) -> KelvinCoefficients:
    """Backward RK4 integration of the Kelvin-mode exponent ODEs.

    Integrates d delta_l / dtau = -i L^(l)(tbar - tau, delta) and
    d alpha / dtau = L^(0)(tbar - tau, delta) from the terminal data
    delta = m at tau = 0 up to tau = T. Explosions (|delta| > guard) raise
    BlowUpError carrying the blow-up time, located to 1e-6.
    """
    if steps < 64:
        raise ValueError("steps must be >= 64")
    m = np.atleast_1d(np.asarray(m, dtype=complex))
    T = tbar - t

    def rhs(tau, y):
        delta = y[:-1]
        s = tbar - tau
        ddelta = np.array([-1j * gen.symbol(l + 1, s, delta) for l in range(gen.dim)])
        dalpha = gen.symbol(0, s, delta)
        return np.append(ddelta, dalpha)

    def rk4_step(tau, y, h):
        k1 = rhs(tau, y)
        k2 = rhs(tau + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(tau + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(tau + h, y + h * k3)
        return y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)

    y = np.append(m, 0.0 + 0.0j)
    tau = 0.0
    h = T / steps
    h_min = 1e-9 * max(1.0, T)
    total = 0
    while tau < T - 1e-15 * max(1.0, T):
        total += 1
        if total > 4_000_000:
            raise RuntimeError("characteristic integration exceeded the step budget")
        step = min(h, T - tau)
        trial = rk4_step(tau, y, step)
        scale = max(1.0, float(np.max(np.abs(y[:-1]))))
        ok = (np.all(np.isfinite(trial)) and np.max(np.abs(trial[:-1])) < guard
              and np.max(np.abs(trial[:-1] - y[:-1])) < 2.0 * scale)
        if ok:
            y, tau = trial, tau + step
            # recover the nominal step after a transient forced refinements
            h = min(2.0 * h, T / steps)
            continue
        # a pole forces the step to collapse; its location is the explosion time
        h = 0.5 * step
        if h < h_min:
            raise BlowUpError(f"characteristics explode at tau={tau:.6f}", tau)
    return KelvinCoefficients(alpha=y[-1], delta=y[:-1], m=m, n_degenerate=n_degenerate)


@dataclass
class OuQuadraticCoefficients:
    """Closed-form exponents for the OU-with-square augmented systems."""

    alpha: complex
    delta2: complex
    delta3: complex
    log_omega: complex
    roots: RiccatiRoots
    omega_plus: complex
    omega_minus: complex


def _ou2_closed_form(chi: float, epsilon: float, bigK: complex, Q: complex,
                     m2: complex, m3: complex, T: float) -> OuQuadraticCoefficients:
    """Solve the (alpha, delta2, delta3) system for the OU-plus-square ansatz.

    The system (in backward time) is
        i delta2' - 2 eps^2 delta2^2 - 2 i K delta2 - Q = 0,
        i delta3' - 2 eps^2 delta2 delta3 + 2 i chi delta2 - i K delta3 = 0,
        alpha'   - (eps^2/2) delta3^2 + i eps^2 delta2 + i chi delta3 = 0,
    with terminal data (m2, m3, 0). Solved by the exponential ansatz whose
    constants balance the E0, E+ and E- terms.
    """
    mu = -bigK
    zeta = cmath.sqrt(bigK * bigK + 2.0 * epsilon ** 2 * Q)
    if zeta.real < 0:
        zeta = -zeta
    lam_p, lam_m = mu + zeta, mu - zeta
    if abs(zeta) * max(T, 1.0) < 1e-3:
        return _ou2_numeric(chi, epsilon, bigK, Q, m2, m3, T,
                            RiccatiRoots(mu, zeta))
    e2 = epsilon ** 2
    om_p = -(lam_m + 2j * e2 * m2) / (2.0 * zeta)
    om_m = (lam_p + 2j * e2 * m2) / (2.0 * zeta)
    b_p = 1j * lam_p * om_p / (2.0 * e2)
    b_m = 1j * lam_m * om_m / (2.0 * e2)
    c_p = 1j * chi * lam_p * om_p / (e2 * zeta)
    c_m = -1j * chi * lam_m * om_m / (e2 * zeta)
    c_0 = m3 - c_p - c_m
    g = chi ** 2 * lam_p * lam_m / (2.0 * e2 * zeta ** 2)
    a_0 = 1j * chi * mu * c_0 / zeta ** 2
    cross = e2 * c_0 ** 2 / (4.0 * zeta) + chi ** 2 * mu ** 2 * om_p * om_m / (e2 * zeta ** 3)
    a_p = -om_p * a_0 - cross
    a_m = -om_m * a_0 + cross
    R = cmath.exp(-2.0 * zeta * T)
    E_half = cmath.exp(-zeta * T)
    P = om_p + om_m * R
    if P == 0:
        raise BlowUpError("OU-square system explodes at the requested horizon", T)
    log_omega = mu * T + zeta * T + cmath.log(P)
    delta2 = (b_p + b_m * R) / P
    delta3 = (c_0 * E_half + c_p + c_m * R) / P
    alpha = -0.5 * log_omega + (a_0 * E_half + a_p + a_m * R) / P + g * T
    return OuQuadraticCoefficients(alpha, delta2, delta3, log_omega,
                                   RiccatiRoots(mu, zeta), om_p, om_m)


def _ou2_numeric(chi, epsilon, bigK, Q, m2, m3, T, roots, steps=2048):
    """RK4 fallback near the double root where the ansatz constants degenerate."""
    e2 = epsilon ** 2

    def rhs(_, y):
        d2, d3, _a = y
        # tau-derivatives (tau = time to maturity) of the backward system
        dd2 = 1j * (2.0 * e2 * d2 ** 2 + Q) - 2.0 * bigK * d2
        dd3 = 2j * e2 * d2 * d3 + 2.0 * chi * d2 - bigK * d3
        da = -(e2 / 2.0) * d3 ** 2 + 1j * e2 * d2 + 1j * chi * d3
        return np.array([dd2, dd3, da], dtype=complex)

    y = np.array([m2, m3, 0.0], dtype=complex)
    h = T / steps
    tau = 0.0
    for _ in range(steps):
        k1 = rhs(tau, y)
        k2 = rhs(tau + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(tau + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(tau + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        tau += h
    return OuQuadraticCoefficients(y[2], y[0], y[1], complex("nan"), roots,
                                   complex("nan"), complex("nan"))


def stein_matrix_riccati(chi: float, kappa: float, epsilon: float, rho: float | None,
                         m: Sequence[complex], T: float,
                         kill_shift: float = 0.0) -> OuQuadraticCoefficients:
    """Explicit solution of the augmented-OU matrix Riccati system.

    With ``rho`` None the x-coordinate is the running integral of the squared
    OU state (quadratic drift coupling); with a correlation it is the
    OU-driven diffusion coupling of the Stein-Stein type. ``kill_shift`` adds
    the constant 1/4-style term to the m1^2 source used by the covered-call
    transform; in that case kappa must already carry the rho eps / 2 shift.
    """
    m1, m2, m3 = (complex(v) for v in m)
    if rho is None:
        bigK = complex(kappa)
        Q = -1j * m1
    else:
        if not -1.0 <= rho <= 1.0:
            raise ValueError("rho must lie in [-1, 1]")
        bigK = kappa - 1j * rho * epsilon * m1
        Q = 0.5 * (m1 ** 2 + kill_shift)
    return _ou2_closed_form(chi, epsilon, bigK, Q, m2, m3, T)


@dataclass
class PathDependentCoefficients:
    alpha: complex
    beta: complex
    gamma: complex
    log_omega: complex
    riccati: RiccatiSolution


def path_dependent_characteristics(a0: float, a1: float, kappa: float,
                                   k: complex, l: complex, T: float,
                                   kill: bool = False) -> PathDependentCoefficients:
    """Kelvin exponents for the moving-average (path-dependent volatility) process.

    The wave numbers obey the conservation law beta + gamma = k + l, which
    reduces the matrix Riccati system to a scalar one. ``kill=True`` adds the
    gamma^2 + 1/4 covered-call kill adjustment.
    """
    if not (a0 > 0.0 and a1 < 0.0):
        raise ValueError("leverage parameterization requires a0 > 0 and a1 < 0")
    a2c = 0.5j * a1
    a1c = -kappa
    a0c = kappa * (k + l) + (0.125j * a1 if kill else 0.0)
    rs = riccati_closed_form(a2c, a1c, a0c, terminal=l, T=T)
    gamma = rs.gamma(T)
    log_om = rs.log_omega(T)
    beta = -gamma + k + l
    alpha = (1j * (a0 / a1) * (gamma - l)
             - (2.0 * a0 * kappa / a1 ** 2) * log_om
             - 1j * (a0 * kappa * T / a1) * (k + l))
    return PathDependentCoefficients(alpha, beta, gamma, log_om, rs)
