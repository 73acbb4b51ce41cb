"""Regime classification, thresholds, standing-wall and stability criteria.

The homogeneous wall family selects a speed s0; comparing s0 with
2*sqrt(-mu)/alpha splits the parameter space into three regimes that control
how many conditions pin the heteroclinic connection:

  * codim-2 (0 <= s0 < 2*sqrt(-mu)/alpha, i.e. beta/alpha <= h < h^*):
    the target equilibrium is an unstable focus inside its chart; both s and
    Omega are selected.
  * center (s0 = 2*sqrt(-mu)/alpha, h = h^*): the target equilibrium is a
    center surrounded by periodic orbits.
  * codim-0 (s0 > 2*sqrt(-mu)/alpha, h > h^*): the target equilibrium is
    attracting inside the chart; connections persist without tuning.

Also provided: the field thresholds h_* and h^*, the standing-wall frequency
conditions, detection of the simultaneous double-center configuration, the
stability curves Gamma+/- of the uniform states +/-e3 in the (h, c_cp) plane,
and the reflection map covering left-moving walls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .charts import PI, ZERO, ChartId, chart_coefficients, \
    homogeneous_speed_frequency
from .errors import CurvePole, OrientationError
from .model import ChartState, MaterialParams, WaveFrame

__all__ = [
    "Regime",
    "StabilityVerdict",
    "ReflectedParams",
    "thresholds",
    "classify_regime",
    "eigenvalues_homogeneous",
    "standing_wall_condition",
    "simultaneous_center",
    "stability_verdict",
    "reflect_parameters",
    "reflect_frame",
    "reflect_profile_state",
]

#: tolerance on s0 - 2*sqrt(-mu)/alpha for the regime boundary tie
REGIME_BOUNDARY_TOL = 1e-10

CODIM2 = "codim2"
CENTER = "center"
CODIM0 = "codim0"


@dataclass(frozen=True)
class Regime:
    """Classification result with the selected (s0, omega0) and thresholds."""

    kind: str
    s0: float
    omega0: float
    h_star_low: float
    h_star_high: float


@dataclass(frozen=True)
class StabilityVerdict:
    """Linear stability of the uniform states +/- e3 and the combined region
    label: 'monostable-', 'bistable', 'monostable+' or 'unstable'."""

    plus_e3: str
    minus_e3: str
    region: str


@dataclass(frozen=True)
class ReflectedParams:
    """Parameters together with a reflection flag.  When ``reflected`` is
    true the problem is treated in the reflected frame: profiles map back via
    xi -> -xi, (p, q) -> (-p, -q), and the wave speed flips sign."""

    mp: MaterialParams
    reflected: bool


def thresholds(alpha: float, beta: float, mu: float):
    """Field thresholds h_* = beta/alpha + (2 mu/alpha^2)(1 + alpha^2) and
    h^* = beta/alpha - (2 mu/alpha^2)(1 + alpha^2); h_* < h^* for mu < 0."""
    if not (alpha > 0 and mu < 0):
        raise ValueError("thresholds require alpha > 0 and mu < 0")
    shift = (2.0 * mu / alpha ** 2) * (1.0 + alpha ** 2)
    return beta / alpha + shift, beta / alpha - shift


def classify_regime(mp: MaterialParams, reflected: bool = False) -> Regime:
    """Classify the regime of the homogeneous family at c_cp = 0, mu < 0.

    Requires the right-moving convention h >= beta/alpha (equivalently
    s0 >= 0); raises ``OrientationError`` otherwise — callers should use
    ``reflect_parameters`` and pass ``reflected=True`` to classify the
    reflected (right-moving) problem.
    """
    if mp.c_cp != 0.0:
        raise ValueError("classification refers to the c_cp = 0 family")
    if not (mp.mu < 0):
        raise ValueError("classification requires mu < 0")
    wf = homogeneous_speed_frequency(mp)
    s0 = -wf.s if reflected else wf.s
    if s0 < 0:
        raise OrientationError(
            "h < beta/alpha describes a left-moving wall; reflect first")
    h_lo, h_hi = thresholds(mp.alpha, mp.beta, mp.mu)
    gap = s0 - 2.0 * math.sqrt(-mp.mu) / mp.alpha
    if abs(gap) <= REGIME_BOUNDARY_TOL:
        kind = CENTER
    elif gap < 0:
        kind = CODIM2
    else:
        kind = CODIM0
    return Regime(kind=kind, s0=s0, omega0=wf.omega,
                  h_star_low=h_lo, h_star_high=h_hi)


def eigenvalues_homogeneous(alpha: float, beta: float, mu: float, h: float):
    """Spatial eigenvalues of the homogeneous-family end states.

    Returns (nu0_1, nu0_2, nu0_3, nupi_1, nupi_2, nupi_3) with

        nu0_k  = -alpha*s0 - 2 sqrt(-mu) - (-1)^k i s0,   nu0_3  =  sqrt(-mu)
        nupi_k = -alpha*s0 + 2 sqrt(-mu) - (-1)^k i s0,   nupi_3 = -sqrt(-mu)
    """
    mp = MaterialParams(alpha=alpha, beta=beta, mu=mu, h=h, c_cp=0.0)
    s0 = homogeneous_speed_frequency(mp).s
    r = math.sqrt(-mu)
    nu0 = (-alpha * s0 - 2.0 * r + 1j * s0,
           -alpha * s0 - 2.0 * r - 1j * s0,
           r)
    nupi = (-alpha * s0 + 2.0 * r + 1j * s0,
            -alpha * s0 + 2.0 * r - 1j * s0,
            -r)
    return nu0 + nupi


def standing_wall_condition(chart: ChartId, mp: MaterialParams,
                            omega: float, tol: float = 1e-12) -> bool:
    """Existence condition for standing (s = 0) walls at the given chart.

    theta = 0: Omega != beta+/alpha, or Omega = beta+/alpha and Omega <= h-mu;
    theta = pi: Omega != beta-/alpha, or Omega = beta-/alpha and Omega >= h+mu.
    """
    if chart.is_zero:
        crit = mp.beta_plus / mp.alpha
        if abs(omega - crit) > tol:
            return True
        return omega <= mp.h - mp.mu
    if chart.is_pi:
        crit = mp.beta_minus / mp.alpha
        if abs(omega - crit) > tol:
            return True
        return omega >= mp.h + mp.mu
    raise ValueError("standing-wall condition refers to the theta=0/pi charts")


def simultaneous_center(mp: MaterialParams, wf: WaveFrame,
                        tol: float = 1e-10) -> bool:
    """True when both chart equilibrium pairs are centers simultaneously:
    gamma^0 and gamma^pi are both real and non-zero (within tol)."""
    g0 = chart_coefficients(ZERO, mp, wf).gamma
    gpi = chart_coefficients(PI, mp, wf).gamma
    for g in (g0, gpi):
        if abs(g.imag) > tol or abs(g) <= tol:
            return False
    return True


def stability_verdict(mp: MaterialParams, tol: float = 1e-12) -> StabilityVerdict:
    """Linear stability of +/- e3 from the curves
    Gamma+ = (beta/alpha)/(h - mu) - 1 and Gamma- = 1 - (beta/alpha)/(h + mu):
    +e3 is stable iff c_cp > Gamma+(h) (stable to the right of Gamma+);
    -e3 is stable iff c_cp > Gamma-(h) (stable to the left of Gamma-, the
    curve being increasing in h), equivalently the torque beta/(1 - c_cp)
    exceeding the damping rate alpha*(h + mu)."""
    if abs(mp.h - mp.mu) < tol or abs(mp.h + mp.mu) < tol:
        raise CurvePole("stability curves have a pole at h = +/- mu")
    ba = mp.beta / mp.alpha
    gamma_plus = ba / (mp.h - mp.mu) - 1.0
    gamma_minus = 1.0 - ba / (mp.h + mp.mu)
    plus = "stable" if mp.c_cp > gamma_plus else "unstable"
    minus = "stable" if mp.c_cp > gamma_minus else "unstable"
    if plus == "stable" and minus == "stable":
        region = "bistable"
    elif plus == "stable":
        region = "monostable+"
    elif minus == "stable":
        region = "monostable-"
    else:
        region = "unstable"
    return StabilityVerdict(plus_e3=plus, minus_e3=minus, region=region)


def reflect_parameters(mp: MaterialParams) -> ReflectedParams:
    """Map a left-moving problem (h < beta/alpha) to the right-moving
    convention.

    The governing system is invariant under the spatial reflection
    (theta, p, q)(xi) -> (theta, -p, -q)(-xi) combined with s -> -s, with all
    material parameters unchanged; the returned flag records whether this
    reflection is active, so profiles and frames can be mapped back.
    Applying the map twice reproduces the original statement (involution).
    """
    return ReflectedParams(mp=mp, reflected=mp.h < mp.beta / mp.alpha)


def reflect_frame(wf: WaveFrame, reflected: bool = True) -> WaveFrame:
    """Frame of the reflected problem: s flips sign, Omega is unchanged."""
    if not reflected:
        return wf
    return WaveFrame(s=-wf.s, omega=wf.omega)


def reflect_profile_state(state: ChartState,
                          reflected: bool = True) -> ChartState:
    """Pointwise state map of the reflection (to be used together with
    xi -> -xi): (theta, p, q) -> (theta, -p, -q)."""
    if not reflected:
        return state
    return ChartState(theta=state.theta, p=-state.p, q=-state.q)
