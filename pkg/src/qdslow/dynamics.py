"""Time-domain integration of the coherence equations.

Serves as an independent check of the stationary solve and supports
time-dependent coefficients (``dressed.time_dependent_provider``).
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy.integrate import solve_ivp

from .dressed import RateSet
from .errors import DivergenceError, DomainError, StiffnessError

DEFAULT_TOL = 1e-9
BLOWUP = 1e6  # |rho| <= 1 physically; far beyond that the run has diverged


@dataclass(frozen=True)
class CoherenceState:
    t: float
    rho12: complex
    rho13: complex


def _rhs(rates, drive, inversion, rho12, rho13):
    sigma = rates.delta_s + rates.delta_p
    half = 0.5j * drive.omega_p
    d13 = -(rates.gamma3.real - 1j * sigma) * rho13 + (rates.nu3 + half) * rho12
    d12 = (-(rates.gamma2.real - 1j * rates.delta_s) * rho12 + (rates.nu2 + half) * rho13
           + 0.5j * drive.omega_s * inversion)
    return d12, d13


def steady_state_residual(state, rates, drive, inversion=1.0):
    """Euclidean norm of the right-hand side at ``state``."""
    d12, d13 = _rhs(rates, drive, inversion, state.rho12, state.rho13)
    return math.hypot(abs(d12), abs(d13))


def default_horizon(rates):
    g = min(rates.gamma2.real, rates.gamma3.real)
    if g <= 0:
        raise DomainError("default horizon needs positive Re gamma")
    return 40.0 / g


def integrate_coherences(initial, coeffs, drive, inversion=1.0, horizon=None,
                         tol=DEFAULT_TOL, t_eval=None):
    """Integrate (rho12, rho13) from ``initial`` over ``horizon``.

    Parameters
    ----------
    initial : CoherenceState or None
        Starting state; None means rho12 = rho13 = 0 at t = 0.
    coeffs : RateSet or callable
        Constant coefficients, or t -> RateSet.
    horizon : float, optional
        Integration length in ps; default 40 / min(Re gamma).
    tol : float
        Per-step relative tolerance of the embedded Runge-Kutta pair.
    t_eval : array_like, optional
        Output times; default is the end point only.

    Returns
    -------
    list of CoherenceState
    """
    if initial is None:
        initial = CoherenceState(0.0, 0j, 0j)
    if not tol > 0:
        raise DomainError("tol must be positive")
    provider = (lambda t: coeffs) if isinstance(coeffs, RateSet) else coeffs
    if horizon is None:
        horizon = default_horizon(provider(math.inf) if not isinstance(coeffs, RateSet) else coeffs)
    if not horizon > 0:
        raise DomainError("horizon must be positive")
    t0, t1 = initial.t, initial.t + horizon
    if t_eval is None:
        t_eval = [t1]

    # absolute tolerance tied to the stationary amplitude Omega_s / Re gamma;
    # time-dependent rates start at zero, so use the end of the horizon
    rates1 = provider(t1)
    rate = max(rates1.gamma2.real, rates1.gamma3.real, abs(rates1.nu2), abs(drive.omega_p))
    amp = abs(drive.omega_s * inversion) / rate if rate > 0 else abs(drive.omega_s * inversion) * horizon
    scale = max(amp, abs(initial.rho12), abs(initial.rho13))
    # without a drive or initial amplitude fall back to the density-matrix scale
    atol = tol * (scale if scale > 0 else 1.0)

    def fun(t, y):
        d12, d13 = _rhs(provider(t), drive, inversion, y[0], y[1])
        return np.array([d12, d13])

    def blowup(t, y):
        return BLOWUP - np.max(np.abs(y))

    blowup.terminal = True

    sol = solve_ivp(fun, (t0, t1), np.array([initial.rho12, initial.rho13], dtype=complex),
                    method="DOP853", rtol=tol, atol=atol, t_eval=np.asarray(t_eval, dtype=float),
                    events=blowup)
    if sol.status == 1 or not np.all(np.isfinite(sol.y)):
        t_hit = sol.t_events[0][0] if sol.status == 1 else t1
        raise DivergenceError(f"coherence state diverged near t={t_hit:g}")
    if sol.status != 0:
        raise StiffnessError(f"integrator stopped: {sol.message}")
    return [CoherenceState(float(t), complex(y12), complex(y13))
            for t, y12, y13 in zip(sol.t, sol.y[0], sol.y[1])]
