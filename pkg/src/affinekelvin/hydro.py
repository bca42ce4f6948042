"""Wave-triplet dynamics of small perturbations of linear flows.

Evolves the position / wave-vector / amplitude triplet of a single wave mode
in an inviscid or viscous linear background flow and classifies the flow's
stability from the amplitude growth across wave-vector orientations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = ["LinearFlow", "KelvinTriplet", "TripletTrajectory",
           "evolve_triplet", "classify_stability"]


@dataclass(frozen=True)
class LinearFlow:
    """Trace-free velocity-gradient matrix of a linear background flow."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.atleast_2d(np.asarray(self.matrix, dtype=float))
        object.__setattr__(self, "matrix", m)
        if m.shape[0] != m.shape[1] or m.shape[0] not in (2, 3):
            raise ValueError("flow matrix must be 2x2 or 3x3")
        if abs(np.trace(m)) > 1e-12 * (1.0 + np.abs(m).max()):
            raise ValueError("flow matrix must be trace-free (incompressible)")

    @classmethod
    def planar(cls, s: float, w: float, embed_3d: bool = True) -> "LinearFlow":
        """Strain/rotation flow with velocity (s x1 - w x2, w x1 - s x2)/2.

        Elliptic streamlines require s < w; the hyperbolic regime is rejected
        because the stability sweep is meaningless for unbounded streamlines.
        """
        if not 0.0 <= s < w:
            raise ValueError("elliptic flow requires 0 <= s < w")
        core = 0.5 * np.array([[s, -w], [w, -s]])
        if not embed_3d:
            return cls(core)
        m = np.zeros((3, 3))
        m[:2, :2] = core
        return cls(m)


@dataclass
class KelvinTriplet:
    """Position r, wave vector beta and amplitude a of one wave mode."""

    r: np.ndarray
    beta: np.ndarray
    a: np.ndarray
    nu: float = 0.0

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.beta = np.asarray(self.beta, dtype=float)
        self.a = np.asarray(self.a, dtype=float)
        if self.nu < 0.0:
            raise ValueError("viscosity must be nonnegative")
        scale = np.linalg.norm(self.beta) * np.linalg.norm(self.a)
        if scale > 0 and abs(self.beta @ self.a) > 1e-10 * scale:
            raise ValueError("incompressibility requires beta . a = 0 at start")


@dataclass
class TripletTrajectory:
    times: np.ndarray
    r: np.ndarray
    beta: np.ndarray
    a: np.ndarray

    @property
    def growth_ratio(self) -> float:
        norms = np.linalg.norm(self.a, axis=1)
        return float(norms[-1] / norms[0])


def _triplet_rhs(L: np.ndarray, r, beta, a, nu):
    beta_sq = beta @ beta
    La = L @ a
    dr = L @ r
    dbeta = -L.T @ beta
    da = -La + 2.0 * (La @ beta / beta_sq) * beta - nu * beta_sq * a
    return dr, dbeta, da


def evolve_triplet(flow: LinearFlow, init: KelvinTriplet, T: float, dt: float,
                   store_every: int = 1) -> TripletTrajectory:
    """RK4 trajectory of the triplet equations with amplitude re-projection.

    The constraint beta . a = 0 is conserved analytically but drifts
    numerically, so the amplitude is projected back onto the plane orthogonal
    to beta after every step.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    L = flow.matrix
    n_steps = int(round(T / dt))
    r, beta, a = init.r.copy(), init.beta.copy(), init.a.copy()
    times = [0.0]
    rs, betas, amps = [r.copy()], [beta.copy()], [a.copy()]
    for step in range(1, n_steps + 1):
        k1 = _triplet_rhs(L, r, beta, a, init.nu)
        k2 = _triplet_rhs(L, r + 0.5 * dt * k1[0], beta + 0.5 * dt * k1[1],
                          a + 0.5 * dt * k1[2], init.nu)
        k3 = _triplet_rhs(L, r + 0.5 * dt * k2[0], beta + 0.5 * dt * k2[1],
                          a + 0.5 * dt * k2[2], init.nu)
        k4 = _triplet_rhs(L, r + dt * k3[0], beta + dt * k3[1], a + dt * k3[2], init.nu)
        r = r + (dt / 6.0) * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        beta = beta + (dt / 6.0) * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        a = a + (dt / 6.0) * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])
        a = a - (a @ beta / (beta @ beta)) * beta
        if step % store_every == 0 or step == n_steps:
            times.append(step * dt)
            rs.append(r.copy())
            betas.append(beta.copy())
            amps.append(a.copy())
    return TripletTrajectory(np.array(times), np.array(rs), np.array(betas), np.array(amps))


@dataclass
class StabilityRow:
    angle: float
    growth_exponent: float
    bounded: bool


def classify_stability(flow: LinearFlow, orientation_grid: int, T: float, dt: float,
                       nu: float = 0.0, unbounded_ratio: float = 1e3) -> list[StabilityRow]:
    """Amplitude growth exponent log||a(T)||/T per initial wave-vector orientation.

    The wave vector starts at angle theta from the rotation axis in the x-z
    plane with a unit amplitude along y, which satisfies the orthogonality
    constraint for every angle. A mode is flagged unbounded when the terminal
    amplitude exceeds ``unbounded_ratio`` times the initial one.
    """
    if orientation_grid < 8:
        raise ValueError("orientation_grid must be >= 8")
    if flow.matrix.shape[0] != 3:
        raise ValueError("stability sweep expects the 3x3 embedded flow")
    rows = []
    angles = np.linspace(0.0, math.pi / 2.0, orientation_grid + 1)[1:]
    for theta in angles:
        beta0 = np.array([math.sin(theta), 0.0, math.cos(theta)])
        a0 = np.array([0.0, 1.0, 0.0])
        init = KelvinTriplet(np.zeros(3), beta0, a0, nu=nu)
        traj = evolve_triplet(flow, init, T, dt, store_every=max(1, int(round(T / dt)) // 64))
        ratio = traj.growth_ratio
        exponent = math.log(max(ratio, 1e-300)) / T
        rows.append(StabilityRow(float(theta), exponent, ratio <= unbounded_ratio))
    return rows
