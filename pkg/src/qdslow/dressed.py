"""Dressed-state population functions and the driving-dependent coefficients
of the coherence equations.

Three routes to the coefficients are provided:

* ``rates_asymptotic`` - long-time (local Markovian) limit, sampling the
  reservoir transforms at 0 and +-Omega_R;
* ``rates_time_dependent`` - the finite-time integrals themselves;
* ``rates_phenomenological`` - the weak non-Markovian polynomial in Omega_p,
  with coefficients either supplied or extracted by ``weak_nm_coefficients``.
"""

from dataclasses import dataclass, replace
import math
import warnings

import numpy as np
from numpy.polynomial import legendre

from . import bath
from .bath import _GL_ORDER, _GL_W, _GL_X, _gauss_legendre, _pair
from .errors import DomainError


class LinearResponseWarning(UserWarning):
    """Signal field not weak compared with the pump."""


@dataclass(frozen=True)
class DriveConfig:
    """Pump and signal parameters (rates in ps^-1)."""

    omega_p: float = 0.0
    delta_p_bare: float = 0.0
    omega_s: float = 0.0
    delta_s_bare: float = 0.0

    def __post_init__(self):
        if self.omega_p > 0 and abs(self.omega_s) > 0.1 * abs(self.omega_p):
            warnings.warn(f"Omega_s={self.omega_s:g} exceeds 0.1 Omega_p={self.omega_p:g}; "
                          "linear response in the signal may not hold",
                          LinearResponseWarning, stacklevel=3)

    @property
    def omega_r(self):
        return math.hypot(self.delta_p_bare, self.omega_p)

    @property
    def c(self):
        r = self.omega_r
        return 1.0 if r == 0 else self.delta_p_bare / r

    @property
    def s(self):
        r = self.omega_r
        return 0.0 if r == 0 else self.omega_p / r


@dataclass(frozen=True)
class RateSet:
    """Coefficients of the coherence equations.

    ``gamma*``/``nu*`` are complex.  ``delta_s``/``delta_p`` are the modified
    detunings: bare detuning plus the imaginary part of the matching gamma.
    The coherence equations use Re gamma together with these detunings, so
    the imaginary part of gamma is counted once.
    """

    gamma2: complex
    gamma3: complex
    nu2: complex
    nu3: complex
    delta_s: float
    delta_p: float

    @classmethod
    def build(cls, gamma2, gamma3, nu2, nu3, drive):
        gamma2, gamma3 = complex(gamma2), complex(gamma3)
        return cls(gamma2, gamma3, complex(nu2), complex(nu3),
                   drive.delta_s_bare + gamma2.imag,
                   drive.delta_p_bare + gamma3.imag)

    @property
    def gamma2_re(self):
        return self.gamma2.real

    @property
    def gamma3_re(self):
        return self.gamma3.real

    @property
    def nu_is_real(self):
        scale = max(abs(self.nu2), abs(self.nu3), 1e-300)
        return max(abs(self.nu2.imag), abs(self.nu3.imag)) <= 1e-10 * scale

    def at_signal_detuning(self, delta_s):
        """Same rates evaluated at another modified signal detuning."""
        return replace(self, delta_s=float(delta_s))


@dataclass(frozen=True)
class WeakNMCoefficients:
    """Coefficients of gamma_k = gamma0_k + g_k Omega_p^2 / 2, nu_k = f_k Omega_p + g_k Delta_p Omega_p.

    gamma0 in ps^-1, f dimensionless, g in ps.
    """

    gamma0_2: complex
    gamma0_3: complex
    f2: complex = 0.0
    f3: complex = 0.0
    g2: complex = 0.0
    g3: complex = 0.0

    def __post_init__(self):
        for name in ("gamma0_2", "gamma0_3", "f2", "f3", "g2", "g3"):
            if not np.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")


# --- dressed populations -----------------------------------------------------

def dressed_populations(t, drive):
    """(S33, S22, S23) at time t; S32 = conj(S23).  Vectorised in t."""
    c, s, wr = drive.c, drive.s, drive.omega_r
    cos = np.cos(wr * np.asarray(t, dtype=float))
    sin = np.sin(wr * np.asarray(t, dtype=float))
    s33 = 0.5 * (1 + c**2 + s**2 * cos)
    s22 = 0.5 * s**2 * (1 - cos)
    s23 = 0.5 * s * (c * (1 - cos) + 1j * sin)
    return s33, s22, s23


# --- asymptotic (local Markovian) rates -----------------------------------------

def _transforms(deltas, baths, xcorr):
    d22 = bath.spectral_transform(deltas, 2, 2, baths, xcorr)
    d33 = bath.spectral_transform(deltas, 3, 3, baths, xcorr)
    d23 = bath.spectral_transform(deltas, 2, 3, baths, xcorr)
    d32 = bath.spectral_transform(deltas, 3, 2, baths, xcorr)
    return d22, d33, d23, d32


def rates_asymptotic(drive, baths, xcorr=None, printed_nu3=False):
    """Long-time coefficients from D^-_kl at 0 and +-Omega_R.

    ``printed_nu3`` uses D^-_32(-Omega_R) in the last bracket of nu_3 instead
    of the symmetric D^-_23(-Omega_R).
    """
    wr, c, s = drive.omega_r, drive.c, drive.s
    d22, d33, d23, d32 = _transforms([0.0, wr, -wr], baths, xcorr)
    z, p, m = 0, 1, 2

    a2 = d32 - d22  # R2 differences
    a3 = d23 - d33
    gamma2 = d22[z] + s**2 / 2 * a2[z] - s**2 / 4 * (a2[p] + a2[m])
    gamma3 = d33[z] + s**2 / 2 * a3[z] - s**2 / 4 * (a3[p] + a3[m])
    nu2 = s * c / 2 * a2[z] - s / 4 * (1 + c) * a2[p] + s / 4 * (1 - c) * a2[m]
    last = (d32 if printed_nu3 else d23)[m]
    nu3 = (s * c / 2 * (d33[z] - d23[z]) + s / 4 * (1 - c) * (d33[p] - d23[p])
           - s / 4 * (1 + c) * (d33[m] - last))
    return RateSet.build(gamma2, gamma3, nu2, nu3, drive)


# --- finite-time rates -----------------------------------------------------------

KERNEL_HORIZON = 60.0  # ps; kernels are negligible beyond this for T > 0


def _all_flat(baths):
    b2, b3 = _pair(baths)
    return b2.shape == "flat" and b3.shape == "flat"


def _u_rule(t_end, baths):
    b2, b3 = _pair(baths)
    w_scale = min(b.w_c if b.shape == "super_ohmic" else b.support / 10.0 for b in (b2, b3))
    h = min(0.5 / w_scale, 0.5)
    n = max(1, int(math.ceil(t_end / h)))
    edges = np.linspace(0.0, t_end, n + 1)
    return edges, _gauss_legendre(edges)


def _integrands(us, drive, baths, xcorr, u_max):
    k22 = bath.kernel_on_grid(us, 2, 2, baths, xcorr, u_max=u_max)
    k33 = bath.kernel_on_grid(us, 3, 3, baths, xcorr, u_max=u_max)
    k23 = bath.kernel_on_grid(us, 2, 3, baths, xcorr, u_max=u_max)
    k32 = k23  # symmetric cross spectrum
    s33, s22, s23 = dressed_populations(us, drive)
    s32 = np.conj(s23)
    return (k22 + s22 * (k32 - k22),
            k33 + (1 - s33) * (k23 - k33),
            s32 * (k32 - k22),
            s23 * (k33 - k23))


def rates_time_dependent(t, drive, baths, xcorr=None, horizon=KERNEL_HORIZON):
    """Coefficients at time t from the finite-time integrals.

    With u = t - tau the integrands depend on u only; e.g.
    gamma_2(t) = int_0^t du {K_22(u) + S_22(u) [K_32(u) - K_22(u)]}.
    Kernels are treated as zero beyond ``horizon``.
    """
    if t < 0:
        raise DomainError("t must be non-negative")
    if _all_flat(baths):
        b2, b3 = _pair(baths)
        if t == 0:
            return RateSet.build(0, 0, 0, 0, drive)
        return RateSet.build(b2.level, b3.level, 0, 0, drive)
    if t == 0:
        return RateSet.build(0, 0, 0, 0, drive)
    t_end = min(float(t), horizon)
    _, (us, wu) = _u_rule(t_end, baths)
    parts = _integrands(us, drive, baths, xcorr, u_max=t_end)
    g2, g3, n2, n3 = (p @ wu for p in parts)
    return RateSet.build(g2, g3, n2, n3, drive)


def _panel_antiderivatives(values):
    """Per-panel Legendre antiderivatives of a function sampled at Gauss nodes.

    ``values`` has shape (panels, order); the result holds, for each panel,
    Legendre coefficients of int_{-1}^{x} f dx' with f the degree order-1
    interpolant through the nodes.
    """
    n = np.arange(_GL_ORDER)
    vander = legendre.legvander(_GL_X, _GL_ORDER - 1)
    proj = (vander * _GL_W[:, None]).T * ((2 * n + 1) / 2)[:, None]
    coeffs = values @ proj.T
    return legendre.legint(coeffs, lbnd=-1, axis=1)


def time_dependent_provider(drive, baths, xcorr=None, horizon=KERNEL_HORIZON):
    """Callable t -> RateSet for the finite-time coefficients.

    The integrands are sampled once on composite Gauss-Legendre panels over
    [0, horizon]; a value at t is the cumulative sum over whole panels plus
    the exact integral of the Legendre interpolant over the partial panel.
    Beyond the horizon the last value is returned.
    """
    if _all_flat(baths):
        return lambda t: rates_time_dependent(t, drive, baths, xcorr)
    edges, (us, _) = _u_rule(horizon, baths)
    parts = _integrands(us, drive, baths, xcorr, u_max=horizon)
    half = 0.5 * (edges[1] - edges[0])
    npanel = edges.size - 1
    anti, cums = [], []
    for p in parts:
        a = _panel_antiderivatives(p.reshape(npanel, _GL_ORDER))
        whole = half * legendre.legval(1.0, a.T)
        anti.append(a)
        cums.append(np.concatenate([[0.0], np.cumsum(whole)]))
    final = [c[-1] for c in cums]

    def provider(t):
        if t <= 0:
            return RateSet.build(0, 0, 0, 0, drive)
        if t >= horizon:
            return RateSet.build(*final, drive)
        i = min(int(t / (2 * half)), npanel - 1)
        x = (t - edges[i]) / half - 1.0
        vals = [c[i] + half * legendre.legval(x, a[i]) for a, c in zip(anti, cums)]
        return RateSet.build(*vals, drive)

    return provider


# --- weak non-Markovian polynomial ----------------------------------------------

def weak_nm_coefficients(baths, xcorr=None):
    """Polynomial coefficients from D^-_kl and its derivatives at zero frequency.

    gamma0_k = D_kk(0); f_2 = (1/2) d/dw [D_22 - D_32]; g_2 = (1/2) d^2/dw^2 [D_22 - D_32]
    and likewise for k = 3 with D_33 - D_23.
    """
    def deriv(k, l, order):
        return bath.spectral_derivatives(k, l, baths, xcorr, order=order)

    d0 = bath.spectral_transform(0.0, 2, 2, baths, xcorr)[0], bath.spectral_transform(0.0, 3, 3, baths, xcorr)[0]
    f2 = 0.5 * (deriv(2, 2, 1) - deriv(3, 2, 1))
    f3 = 0.5 * (deriv(3, 3, 1) - deriv(2, 3, 1))
    g2 = 0.5 * (deriv(2, 2, 2) - deriv(3, 2, 2))
    g3 = 0.5 * (deriv(3, 3, 2) - deriv(2, 3, 2))
    return WeakNMCoefficients(complex(d0[0]), complex(d0[1]), f2, f3, g2, g3)


def rates_phenomenological(drive, coeffs):
    op, dp = drive.omega_p, drive.delta_p_bare
    gamma2 = coeffs.gamma0_2 + coeffs.g2 / 2 * op**2
    gamma3 = coeffs.gamma0_3 + coeffs.g3 / 2 * op**2
    nu2 = coeffs.f2 * op + coeffs.g2 * dp * op
    nu3 = coeffs.f3 * op + coeffs.g3 * dp * op
    return RateSet.build(gamma2, gamma3, nu2, nu3, drive)
