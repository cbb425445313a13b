"""Stationary coherences, linear susceptibility, refractive index and the
slow-down factor of the signal field.

Coherence equations (rotating frame, weak signal, rho_23 = 0)::

    d rho13/dt = -[gamma3 - i sigma] rho13 + [nu3 + i Omega_p/2] rho12
    d rho12/dt = -[gamma2 - i delta_s] rho12 + [nu2 + i Omega_p/2] rho13
                 + i Omega_s inv / 2

with sigma = delta_s + delta_p and inv = rho11 - rho22.  The susceptibility
follows from chi - eps_bac = -2 (Phi_1/hbar) conj(rho12) / Omega_s where
Phi_1 is Phi at unit inversion.  For real coefficients this is

    chi - eps_bac = i (Phi/hbar) (gamma3 + i sigma) / (P + i Q)
    P = gamma2 gamma3 + Omega_p^2/4 - nu2 nu3 - sigma delta_s
    Q = gamma2 sigma + gamma3 delta_s + Omega_p (nu2 + nu3)/2

and Xi = P^2 + Q^2.  Rates are in ps^-1 throughout; the expression is
homogeneous of degree -1 in them, so Phi/hbar in ps^-1 plays the role of the
dimensionless A = Phi/(hbar Omega0) when rates are counted in Omega0.
"""

from dataclasses import dataclass
import math

import numpy as np
from scipy import constants as sc

from .errors import DomainError, NumericalError, ShapeError, SingularityError
from .units import OMEGA0, signal_angular_frequency

DEFAULT_STEP = 1e-3 * OMEGA0
MAX_HALVINGS = 6
DERIV_RTOL = 1e-6


@dataclass(frozen=True)
class DotOpticalParams:
    """Optical constants of the dot ensemble.

    Parameters
    ----------
    eps_bac : float
        Background dielectric constant.
    mu12_nm : float
        Transition dipole moment in units of e * nm.
    gamma_conf : float
        Optical confinement factor.
    theta_nm3 : float
        Dot volume in nm^3.
    lambda_s_um : float
        Signal wavelength in um.
    inversion : float
        rho11 - rho22 in the stationary state.
    """

    eps_bac: float = 13.0
    mu12_nm: float = 2.1
    gamma_conf: float = 0.006
    theta_nm3: float = 890.64
    lambda_s_um: float = 1.36
    inversion: float = 1.0

    def __post_init__(self):
        if not self.eps_bac >= 1:
            raise DomainError("eps_bac must be >= 1")
        if not 0 < self.gamma_conf <= 1:
            raise DomainError("gamma_conf must lie in (0, 1]")
        if not self.theta_nm3 > 0:
            raise DomainError("theta_nm3 must be positive")
        if not self.lambda_s_um > 0:
            raise DomainError("lambda_s_um must be positive")
        if not 0 <= self.inversion <= 1:
            raise DomainError("inversion must lie in [0, 1]")
        if self.mu12_nm < 0:
            raise DomainError("mu12_nm must be non-negative")

    @property
    def phi_unit_over_hbar(self):
        """Phi/hbar at unit inversion, in ps^-1."""
        mu = self.mu12_nm * 1e-9 * sc.e
        theta = self.theta_nm3 * 1e-27
        return self.gamma_conf * mu**2 / (sc.epsilon_0 * theta * sc.hbar) * 1e-12

    @property
    def phi_over_hbar(self):
        """Phi/hbar in ps^-1."""
        return self.phi_unit_over_hbar * self.inversion

    @property
    def prefactor(self):
        """Dimensionless A = Phi / (hbar Omega0)."""
        return self.phi_over_hbar / OMEGA0

    @property
    def omega_s(self):
        """Signal carrier angular frequency in ps^-1."""
        return signal_angular_frequency(self.lambda_s_um)

    def without_coupling(self):
        return DotOpticalParams(self.eps_bac, 0.0, self.gamma_conf, self.theta_nm3,
                                self.lambda_s_um, self.inversion)


@dataclass(frozen=True)
class SusceptibilityPoint:
    delta_s: float
    chi_re: float
    chi_im: float
    n: complex
    slowdown: float = math.nan


# --- stationary solve --------------------------------------------------------

def _scale(rates, drive, delta_s):
    return max(abs(rates.gamma2), abs(rates.gamma3), abs(rates.nu2), abs(rates.nu3),
               abs(delta_s), abs(rates.delta_p), abs(drive.omega_p), 1e-300)


def stationary_coherences(rates, drive, inversion=1.0, delta_s=None):
    """(rho12, rho13) solving the stationary coherence equations.

    Complex nu is admitted; the imaginary parts of gamma enter only through
    the modified detunings.  ``delta_s`` overrides the modified signal
    detuning carried by ``rates``.
    """
    ds = rates.delta_s if delta_s is None else float(delta_s)
    return _solve(rates, drive, drive.omega_s, inversion, ds)


def _solve(rates, drive, omega_s, inversion, ds):
    sigma = ds + rates.delta_p
    half = 0.5j * drive.omega_p
    # Im gamma is already carried by the modified detunings
    m = np.array([[rates.gamma2.real - 1j * ds, -(rates.nu2 + half)],
                  [-(rates.nu3 + half), rates.gamma3.real - 1j * sigma]], dtype=complex)
    det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    scale = _scale(rates, drive, ds)
    if abs(det) <= 1e-14 * scale**2:
        raise SingularityError(f"stationary system singular at delta_s={ds:g}, delta_p={rates.delta_p:g}",
                               residual=abs(det))
    rhs = np.array([0.5j * omega_s * inversion, 0.0])
    rho12, rho13 = np.linalg.solve(m, rhs)
    return complex(rho12), complex(rho13)


# --- susceptibility ----------------------------------------------------------

def _real_coefficients(rates):
    if not rates.nu_is_real:
        raise DomainError("closed-form susceptibility needs real nu; use susceptibility_oracle")
    return rates.gamma2.real, rates.gamma3.real, rates.nu2.real, rates.nu3.real


def chi_closed_form(delta_s, rates, drive, optical, printed=False):
    """Complex chi from the closed-form expression.

    ``printed=True`` drops the sigma Omega_p (nu2 + nu3)/2 term from chi'',
    reproducing the literal form of the absorption formula.
    """
    g2, g3, n2, n3 = _real_coefficients(rates)
    op, ds = drive.omega_p, float(delta_s)
    sigma = ds + rates.delta_p
    p = g2 * g3 + op**2 / 4 - n2 * n3 - sigma * ds
    q = g2 * sigma + g3 * ds + op * (n2 + n3) / 2
    xi = p * p + q * q
    scale = _scale(rates, drive, ds)
    if xi <= 1e-28 * scale**4:
        raise SingularityError(f"Xi vanishes at delta_s={ds:g}", residual=xi)
    a = optical.phi_over_hbar
    chi_re = optical.eps_bac + a / xi * (g3 * (g3 * ds + op * (n2 + n3) / 2)
                                         + sigma * (n2 * n3 - op**2 / 4 + sigma * ds))
    chi_im = g3 * (g2 * g3 + op**2 / 4) + g2 * sigma**2 - g3 * n2 * n3
    if not printed:
        chi_im += sigma * op * (n2 + n3) / 2
    return complex(chi_re, a / xi * chi_im)


def chi_oracle(delta_s, rates, drive, optical):
    """Complex chi from the linear solve; admits complex nu."""
    # rho12 is linear in Omega_s, so a unit signal suffices
    rho12, _ = _solve(rates, drive, 1.0, optical.inversion, float(delta_s))
    return complex(optical.eps_bac - 2.0 * optical.phi_unit_over_hbar * np.conj(rho12))


def refractive_index(chi):
    """Principal square root of chi."""
    chi = complex(chi)
    if chi == 0:
        raise DomainError("refractive index undefined for chi = 0")
    return complex(np.sqrt(chi))


def _point(delta_s, chi, slowdown=math.nan):
    return SusceptibilityPoint(float(delta_s), chi.real, chi.imag, refractive_index(chi), slowdown)


def susceptibility(delta_s, rates, drive, optical, printed=False):
    return _point(delta_s, chi_closed_form(delta_s, rates, drive, optical, printed))


def susceptibility_oracle(delta_s, rates, drive, optical):
    return _point(delta_s, chi_oracle(delta_s, rates, drive, optical))


# --- slow-down factor ----------------------------------------------------------

def _as_provider(rates_provider):
    if callable(rates_provider):
        return rates_provider
    return rates_provider.at_signal_detuning


def _chi_at(provider, delta_s, drive, optical, printed):
    rates = provider(delta_s)
    if rates.nu_is_real:
        return chi_closed_form(delta_s, rates, drive, optical, printed)
    return complex(chi_oracle(delta_s, rates, drive, optical))


def _richardson_derivative(f, x, step, scalar=lambda d: d):
    """Central difference with one Richardson step, halving until stable.

    ``scalar`` maps a derivative estimate to the quantity whose relative
    change decides convergence.
    """
    def central(h):
        return (f(x + h) - f(x - h)) / (2 * h)

    def extrapolated(h):
        return (4 * central(h / 2) - central(h)) / 3

    h = step
    prev = extrapolated(h)
    for _ in range(MAX_HALVINGS):
        h /= 2
        cur = extrapolated(h)
        a, b = scalar(prev), scalar(cur)
        if abs(a - b) <= DERIV_RTOL * max(abs(a), abs(b), 1e-300):
            return cur
        prev = cur
    raise NumericalError(f"derivative at {x:g} not stable after {MAX_HALVINGS} halvings",
                         residual=abs(scalar(prev) - scalar(cur)))


def chi_slope(delta_s, rates_provider, drive, optical, step=DEFAULT_STEP, printed=False):
    """d chi / d delta_s (ps), numerically."""
    provider = _as_provider(rates_provider)
    return _richardson_derivative(lambda d: _chi_at(provider, d, drive, optical, printed),
                                  float(delta_s), step, scalar=abs)


def slow_down_factor(delta_s, rates_provider, drive, optical, step=DEFAULT_STEP, printed=False):
    """Upsilon = Re n + omega_s Re(dn/d omega_s), with d/d omega_s = -d/d delta_s.

    ``rates_provider`` is a RateSet (re-evaluated at each delta_s) or a
    callable delta_s -> RateSet.
    """
    provider = _as_provider(rates_provider)
    ds = float(delta_s)
    n0 = refractive_index(_chi_at(provider, ds, drive, optical, printed))
    omega_s = optical.omega_s

    def n_of(d):
        return refractive_index(_chi_at(provider, d, drive, optical, printed))

    def upsilon(dn):
        return n0.real - omega_s * dn.real

    dn = _richardson_derivative(n_of, ds, step, scalar=upsilon)
    return upsilon(dn)


def spectrum(deltas, rates_provider, drive, optical, with_slowdown=False, printed=False):
    """SusceptibilityPoints over a grid of modified signal detunings."""
    provider = _as_provider(rates_provider)
    out = []
    for d in np.asarray(deltas, dtype=float):
        chi = _chi_at(provider, d, drive, optical, printed)
        ups = slow_down_factor(d, provider, drive, optical, printed=printed) if with_slowdown else math.nan
        out.append(_point(d, chi, ups))
    return out


# --- transmission window -------------------------------------------------------

def _crossing(x0, y0, x1, y1, level):
    if y1 == y0:
        return x0
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0)


def transmission_window(points, threshold=0.5):
    """(center, width, depth) of the absorption dip between the two main peaks.

    The window is the contiguous interval around the chi'' minimum between
    the two largest local maxima where chi'' <= min + threshold * (lower
    peak - min); its edges are linearly interpolated.
    """
    if not 0 < threshold <= 1:
        raise DomainError("threshold must lie in (0, 1]")
    x = np.array([p.delta_s for p in points], dtype=float)
    y = np.array([p.chi_im for p in points], dtype=float)
    if x.size < 3:
        raise ShapeError("need at least three spectrum points")
    if np.any(np.diff(x) <= 0):
        raise DomainError("spectrum must be sampled on an increasing grid")
    inner = np.arange(1, x.size - 1)
    peaks = inner[(y[inner] > y[inner - 1]) & (y[inner] >= y[inner + 1])]
    if peaks.size < 2:
        raise ShapeError(f"found {peaks.size} absorption maximum; no transparency doublet")
    top = np.sort(peaks[np.argsort(y[peaks])[-2:]])
    lo, hi = top
    i_min = lo + int(np.argmin(y[lo:hi + 1]))
    depth = float(y[i_min])
    level = depth + threshold * (min(y[lo], y[hi]) - depth)

    left = i_min
    while left > lo and y[left - 1] <= level:
        left -= 1
    right = i_min
    while right < hi and y[right + 1] <= level:
        right += 1
    xl = _crossing(x[left - 1], y[left - 1], x[left], y[left], level) if left > lo else x[lo]
    xr = _crossing(x[right], y[right], x[right + 1], y[right + 1], level) if right < hi else x[hi]
    return 0.5 * (xl + xr), xr - xl, depth
