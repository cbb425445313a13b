"""Dephasing reservoirs: spectral densities, correlation functions and the
half-sided Fourier transforms that feed the dephasing rates.

Conventions
-----------
The two-sided effective spectrum of a reservoir is

    S(w) = J(w) [n_T(w) + 1]      for w > 0
    S(w) = J(-w) n_T(-w)          for w < 0

so that the stationary correlation function is K(u) = int S(w) exp(-i w u) dw,
and the half-sided transform used by the rates is

    D(delta) = int_0^inf K(u) exp(i delta u) du
             = pi S(delta) + i PV int S(w) / (delta - w) dw.

Reservoirs are indexed 2 and 3 (the levels they dephase).  The cross spectrum
is S_23 = S_32 = kappa * sqrt(S_22 S_33).

All frequencies are angular frequencies in ps^-1, times in ps.
"""

from dataclasses import dataclass
from functools import lru_cache
import logging
import math

import numpy as np
from scipy import integrate

from .errors import DivergenceError, DomainError, NumericalError
from .units import HBAR_MEV_PS, KB_MEV_PER_K

log = logging.getLogger(__name__)

SHAPES = ("super_ohmic", "flat", "tabulated")
OCCUPATION_MODES = ("bose_einstein", "literal_coth")

_GL_ORDER = 32
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)
_CUTOFF_MULTIPLE = 10.0

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-8


# --- specs -------------------------------------------------------------------

@dataclass(frozen=True)
class BathSpec:
    """Spectral model of one dephasing reservoir.

    ``alpha`` is in ps^2 so that J(w) = alpha w^3 exp(-w^2 / 2 w_c^2) is a rate.
    ``level`` is the constant D0 of a flat (white-noise) reservoir.  For the
    tabulated shape ``grid``/``values`` sample J(w) on a strictly increasing
    grid; J is linearly interpolated and zero outside it.
    """

    shape: str = "super_ohmic"
    alpha: float = 0.0
    w_c: float = 1.0
    temperature: float = 0.0
    occupation_mode: str = "bose_einstein"
    level: float = 0.0
    grid: tuple = ()
    values: tuple = ()

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DomainError(f"unknown bath shape {self.shape!r}; expected one of {SHAPES}")
        if self.occupation_mode not in OCCUPATION_MODES:
            raise DomainError(f"unknown occupation mode {self.occupation_mode!r}")
        if self.alpha < 0:
            raise DomainError("alpha must be non-negative")
        if not self.w_c > 0:
            raise DomainError("w_c must be positive")
        if self.temperature < 0:
            raise DomainError("temperature must be non-negative")
        if self.shape == "flat" and self.level < 0:
            raise DomainError("flat level D0 must be non-negative")
        if self.shape == "tabulated":
            grid = tuple(float(x) for x in self.grid)
            values = tuple(float(x) for x in self.values)
            if len(grid) < 2 or len(grid) != len(values):
                raise DomainError("tabulated bath needs matching grid/values of length >= 2")
            if any(b <= a for a, b in zip(grid, grid[1:])):
                raise DomainError("tabulated grid must be strictly increasing")
            if grid[0] < 0:
                raise DomainError("tabulated grid must be non-negative")
            if any(v < 0 for v in values):
                raise DomainError("tabulated density values must be non-negative")
            object.__setattr__(self, "grid", grid)
            object.__setattr__(self, "values", values)

    @classmethod
    def super_ohmic(cls, alpha, w_c, temperature=0.0, occupation_mode="bose_einstein"):
        return cls("super_ohmic", alpha=alpha, w_c=w_c, temperature=temperature,
                   occupation_mode=occupation_mode)

    @classmethod
    def flat(cls, level):
        return cls("flat", level=level)

    @classmethod
    def tabulated(cls, grid, values, temperature=0.0, occupation_mode="bose_einstein"):
        return cls("tabulated", grid=tuple(grid), values=tuple(values),
                   temperature=temperature, occupation_mode=occupation_mode)

    def with_temperature(self, temperature):
        return BathSpec(self.shape, self.alpha, self.w_c, temperature,
                        self.occupation_mode, self.level, self.grid, self.values)

    @property
    def support(self):
        """Frequency beyond which J is negligible (Gaussian tail) or zero."""
        if self.shape == "tabulated":
            return self.grid[-1]
        return _CUTOFF_MULTIPLE * self.w_c


@dataclass(frozen=True)
class CrossCorrelationSpec:
    """Correlation coefficient between reservoirs R2 and R3."""

    kappa_23: float = 0.0

    def __post_init__(self):
        if not -1.0 <= self.kappa_23 <= 1.0:
            raise DomainError("kappa_23 must lie in [-1, 1]")


@dataclass(frozen=True)
class SpectralTransform:
    delta: float
    value: complex


def _pair(baths):
    """Normalise ``baths`` to a (bath2, bath3) tuple."""
    if isinstance(baths, BathSpec):
        return baths, baths
    if isinstance(baths, dict):
        return baths[2], baths[3]
    b2, b3 = baths
    return b2, b3


def _kappa(xcorr):
    if xcorr is None:
        return 0.0
    if isinstance(xcorr, CrossCorrelationSpec):
        return xcorr.kappa_23
    return CrossCorrelationSpec(float(xcorr)).kappa_23


def _check_index(k, l):
    if k not in (2, 3) or l not in (2, 3):
        raise DomainError(f"reservoir indices must be 2 or 3, got ({k}, {l})")


# --- spectra -----------------------------------------------------------------

def _interp_tabulated(w, spec):
    grid = np.asarray(spec.grid)
    return np.interp(w, grid, np.asarray(spec.values), left=0.0, right=0.0)


def spectral_density(w, spec):
    """J(w) for w >= 0."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        raise DomainError("spectral density is defined for w >= 0 only")
    if spec.shape == "super_ohmic":
        out = spec.alpha * w**3 * np.exp(-w**2 / (2.0 * spec.w_c**2))
    elif spec.shape == "flat":
        out = np.full_like(w, spec.level)
    else:
        out = _interp_tabulated(w, spec)
    return out if out.ndim else float(out)


def thermal_occupation(w, temperature, mode="bose_einstein"):
    """Thermal phonon occupation.

    ``bose_einstein`` gives 1/(exp(hbar w / kT) - 1); ``literal_coth`` gives
    coth(hbar w / 2kT).
    """
    w = np.asarray(w, dtype=float)
    if mode not in OCCUPATION_MODES:
        raise DomainError(f"unknown occupation mode {mode!r}")
    if temperature < 0:
        raise DomainError("temperature must be non-negative")
    if temperature == 0:
        out = np.zeros_like(w) if mode == "bose_einstein" else np.ones_like(w)
        return out if out.ndim else float(out)
    if np.any(w <= 0):
        raise DivergenceError("thermal occupation diverges at w = 0 for T > 0")
    x = HBAR_MEV_PS * w / (KB_MEV_PER_K * temperature)
    if mode == "bose_einstein":
        out = 1.0 / np.expm1(x)
    else:
        out = 1.0 / np.tanh(0.5 * x)
    return out if out.ndim else float(out)


def _x_times_occupation(x, mode):
    """x * n(x) with x = hbar w / kT, finite at x = 0."""
    out = np.empty_like(x)
    small = x < 1e-8
    xs = x[~small]
    if mode == "bose_einstein":
        out[~small] = xs / np.expm1(xs)
        out[small] = 1.0 - 0.5 * x[small]
    else:
        out[~small] = xs / np.tanh(0.5 * xs)
        out[small] = 2.0
    return out


def _thermal_part(wabs, spec, temperature):
    """J(|w|) n(|w|) using the finite w -> 0 limit."""
    if temperature == 0:
        if spec.occupation_mode == "bose_einstein":
            return np.zeros_like(wabs)
        return spectral_density(wabs, spec)
    kt = KB_MEV_PER_K * temperature / HBAR_MEV_PS  # thermal frequency, ps^-1
    x = wabs / kt
    xn = _x_times_occupation(x, spec.occupation_mode)
    if spec.shape == "super_ohmic":
        # J(w) n(w) = alpha w^2 exp(..) * kt * x n(x)
        return spec.alpha * wabs**2 * np.exp(-wabs**2 / (2 * spec.w_c**2)) * kt * xn
    out = np.zeros_like(wabs)
    pos = wabs > 0
    out[pos] = spectral_density(wabs[pos], spec) * xn[pos] / x[pos]
    # tabulated J(0) > 0 would make S diverge at 0; the interpolant is used as is
    return out


def effective_spectrum(w, spec, temperature=None):
    """Two-sided spectrum S(w) of a single reservoir (see module docstring).

    A flat reservoir is white noise with pi * S = D0.
    """
    T = spec.temperature if temperature is None else temperature
    w = np.asarray(w, dtype=float)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    if spec.shape == "flat":
        out = np.full_like(w, spec.level / math.pi)
    else:
        wabs = np.abs(w)
        out = _thermal_part(wabs, spec, T)
        pos = w > 0
        out[pos] += spectral_density(w[pos], spec)
    return float(out[0]) if scalar else out


def cross_spectrum(w, k, l, baths, xcorr=None):
    """S_kl(w); the off-diagonal entry is kappa * sqrt(S_22 S_33)."""
    _check_index(k, l)
    b2, b3 = _pair(baths)
    if k == l:
        return effective_spectrum(w, b2 if k == 2 else b3)
    s2 = effective_spectrum(w, b2)
    s3 = effective_spectrum(w, b3)
    return _kappa(xcorr) * np.sqrt(s2 * s3)


# --- correlation function ----------------------------------------------------

def correlation_function(u, spec, temperature=None, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL):
    """K(u) = int_0^inf J(w) [(n+1) e^{-iwu} + n e^{iwu}] dw by adaptive quadrature."""
    if spec.shape == "flat":
        raise DomainError("a flat reservoir is delta-correlated; K(u) is not a function")
    if not np.isfinite(u):
        raise DomainError("u must be finite")
    T = spec.temperature if temperature is None else temperature
    upper = spec.support

    def s(w):
        return float(effective_spectrum(w, spec, T))

    points = None
    if spec.shape == "tabulated":
        g = np.asarray(spec.grid)
        points = np.unique(np.concatenate([g, -g]))
    pieces = [(-upper, 0.0), (0.0, upper)]
    # natural scale of K: int S dw = K(0)
    norm = sum(integrate.quad(s, a, b, points=None if points is None else
                              [p for p in points if a < p < b], limit=500)[0]
               for a, b in pieces)
    re = im = 0.0
    err = 0.0
    for a, b in pieces:
        pts = None if points is None else [p for p in points if a < p < b]
        if u == 0:
            r, e = integrate.quad(s, a, b, points=pts, epsabs=epsabs, epsrel=epsrel, limit=500)
            re += r
            err += e
            continue
        if pts:
            r, e1 = integrate.quad(lambda w: s(w) * math.cos(w * u), a, b, points=pts,
                                   epsabs=epsabs, epsrel=epsrel, limit=2000)
            i, e2 = integrate.quad(lambda w: s(w) * math.sin(w * u), a, b, points=pts,
                                   epsabs=epsabs, epsrel=epsrel, limit=2000)
        else:
            r, e1 = integrate.quad(s, a, b, weight="cos", wvar=u,
                                   epsabs=epsabs, epsrel=epsrel, limit=2000)
            i, e2 = integrate.quad(s, a, b, weight="sin", wvar=u,
                                   epsabs=epsabs, epsrel=epsrel, limit=2000)
        re += r
        im -= i
        err += e1 + e2
    if err > max(epsabs, 10 * epsrel * norm):
        raise NumericalError(f"correlation quadrature did not converge at u={u}", residual=err)
    return complex(re, im)


# --- frequency quadrature rule -----------------------------------------------

def _thermal_frequency(T):
    return KB_MEV_PER_K * T / HBAR_MEV_PS


def _panel_edges(spec, u_max):
    """Panel edges on [-L, L] for composite Gauss-Legendre.

    Edges always include 0 (the T = 0 kink) and any tabulated nodes.  Panels
    are narrow enough to resolve the thermal poles at +-2 pi i kT / hbar and,
    when ``u_max`` is given, the oscillation exp(-i w u_max).
    """
    L = spec.support
    if spec.shape == "tabulated":
        scale = spec.grid[-1] / 40.0
    else:
        scale = spec.w_c / 4.0
    if u_max:
        scale = min(scale, 8.0 * math.pi / u_max)
    n = int(math.ceil(L / scale))
    edges = [np.linspace(0.0, L, n + 1)]
    if spec.temperature > 0:
        pole = 2.0 * math.pi * _thermal_frequency(spec.temperature)
        fine_width = pole / 2.0
        reach = min(L, 20.0 * _thermal_frequency(spec.temperature))
        if fine_width < scale:
            edges.append(np.arange(0.0, reach, fine_width))
    if spec.shape == "tabulated":
        edges.append(np.asarray(spec.grid))
    pos = np.unique(np.concatenate(edges))
    pos = pos[(pos >= 0) & (pos <= L)]
    return np.unique(np.concatenate([-pos[::-1], pos]))


def _gauss_legendre(edges):
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    mid = 0.5 * (b + a)
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


@dataclass(frozen=True)
class _Rule:
    nodes: np.ndarray
    weights: np.ndarray
    spectrum: np.ndarray
    half_width: float


@lru_cache(maxsize=256)
def _rule(b2, b3, kappa, k, l, u_max):
    lead = b2 if (k, l) == (2, 2) else b3 if (k, l) == (3, 3) else None
    if lead is None:
        e2, e3 = _panel_edges(b2, u_max), _panel_edges(b3, u_max)
        L = min(b2.support, b3.support)
        edges = np.unique(np.concatenate([e2, e3]))
        edges = edges[np.abs(edges) <= L]
    else:
        edges = _panel_edges(lead, u_max)
        L = lead.support
    nodes, weights = _gauss_legendre(edges)
    spec = cross_spectrum(nodes, k, l, (b2, b3), kappa)
    return _Rule(nodes, weights, np.asarray(spec, dtype=float), L)


def _flat_value(k, l, b2, b3, kappa):
    if k == l:
        return (b2 if k == 2 else b3).level
    return kappa * math.sqrt(b2.level * b3.level)


def _flat_status(k, l, b2, b3):
    """True if the (k, l) spectrum is flat; error for mixed flat/structured."""
    involved = [b2 if k == 2 else b3, b2 if l == 2 else b3]
    flat = [b.shape == "flat" for b in involved]
    if all(flat):
        return True
    if any(flat):
        raise DomainError("cross spectra between a flat and a structured reservoir are not supported")
    return False


# --- half-sided transforms ---------------------------------------------------

def spectral_transform(deltas, k, l, baths, xcorr=None):
    """Vectorised D^-_kl(delta) via singularity-subtracted principal value.

    A fixed composite Gauss-Legendre rule is used so that the result is a
    smooth function of delta (finite differences of it are clean).
    """
    _check_index(k, l)
    b2, b3 = _pair(baths)
    kappa = _kappa(xcorr)
    d = np.atleast_1d(np.asarray(deltas, dtype=float))
    if _flat_status(k, l, b2, b3):
        return np.full(d.shape, complex(_flat_value(k, l, b2, b3, kappa)))
    rule = _rule(b2, b3, kappa, k, l, None)
    L = rule.half_width
    s_at = np.asarray(cross_spectrum(d, k, l, (b2, b3), kappa), dtype=float)
    out = np.empty(d.shape, dtype=complex)
    for i, delta in enumerate(d):
        diff = delta - rule.nodes
        if abs(delta) < L:
            num = rule.spectrum - s_at[i]
            with np.errstate(divide="ignore", invalid="ignore"):
                g = num / diff
            hit = np.abs(diff) < 1e-12 * max(1.0, abs(delta))
            if np.any(hit):
                g[hit] = 0.0
            pv = g @ rule.weights + s_at[i] * math.log((L + delta) / (L - delta))
        else:
            pv = (rule.spectrum / diff) @ rule.weights
        out[i] = complex(math.pi * s_at[i], pv)
    return out


def half_fourier_spectral(delta, k, l, baths, xcorr=None):
    """D^-_kl(delta) = pi S_kl(delta) + i PV int S_kl(w)/(delta - w) dw."""
    return SpectralTransform(float(delta), complex(spectral_transform(delta, k, l, baths, xcorr)[0]))


def half_fourier_plus(delta, k, l, baths, xcorr=None):
    """D^+_kl(delta) = conj(D^-_lk(-delta)) for stationary reservoirs."""
    value = spectral_transform(-delta, l, k, baths, xcorr)[0]
    return SpectralTransform(float(delta), complex(np.conj(value)))


def kernel_on_grid(us, k, l, baths, xcorr=None, u_max=None):
    """K_kl(u) on an array of times using a fixed frequency rule.

    The rule resolves exp(-i w u) up to ``u_max`` (defaults to max(us)).
    """
    _check_index(k, l)
    b2, b3 = _pair(baths)
    kappa = _kappa(xcorr)
    if _flat_status(k, l, b2, b3):
        raise DomainError("flat reservoirs are delta-correlated; no kernel grid")
    us = np.asarray(us, dtype=float)
    if u_max is None:
        u_max = float(np.max(np.abs(us))) if us.size else 1.0
    u_max = float(np.ceil(max(u_max, 1.0)))
    rule = _rule(b2, b3, kappa, k, l, u_max)
    sw = rule.spectrum * rule.weights
    out = np.empty(us.shape, dtype=complex)
    flat_u = us.ravel()
    flat_out = out.ravel()
    chunk = max(1, 2_000_000 // max(1, rule.nodes.size))
    for start in range(0, flat_u.size, chunk):
        block = flat_u[start:start + chunk]
        flat_out[start:start + chunk] = np.exp(-1j * np.outer(block, rule.nodes)) @ sw
    return out


def _neville_at_zero(xs, ys):
    """Value at x = 0 of the polynomial interpolating (xs, ys)."""
    p = list(ys)
    n = len(xs)
    for m in range(1, n):
        for i in range(n - m):
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i])
    return p[0]


DEFAULT_DAMPING = (2e-3, 1e-3, 5e-4)


def half_fourier_time(delta, k, l, baths, xcorr=None, damping_sequence=DEFAULT_DAMPING,
                      u_max=60.0):
    """D^-_kl(delta) by direct time integration of the damped kernel.

    Computes F(eta) = int_0^u_max K_kl(u) exp(i delta u - eta u) du for each
    eta in ``damping_sequence`` and extrapolates to eta -> 0 through the last
    three values.  Independent of the principal-value route; it relies on the
    kernel having decayed by ``u_max`` (true for T > 0).
    """
    _check_index(k, l)
    b2, b3 = _pair(baths)
    kappa = _kappa(xcorr)
    etas = [float(e) for e in damping_sequence]
    if len(etas) < 3 or any(e <= 0 for e in etas) or any(b >= a for a, b in zip(etas, etas[1:])):
        raise DomainError("damping_sequence must be a decreasing positive sequence of length >= 3")
    if _flat_status(k, l, b2, b3):
        return SpectralTransform(float(delta), complex(_flat_value(k, l, b2, b3, kappa)))
    us, wu = _time_rule(b2, b3, kappa, k, l, u_max)
    kern = _kernel_cache(b2, b3, kappa, k, l, u_max)
    tail = np.max(np.abs(kern[-_GL_ORDER:]))
    if tail > 1e-8 * np.max(np.abs(kern)):
        log.warning("kernel K_%d%d has not decayed by u_max=%g ps (tail %.2e); "
                    "time-route transform is truncated", k, l, u_max, tail)
    phase = np.exp(1j * delta * us) * kern * wu
    values = [phase @ np.exp(-eta * us) for eta in etas]
    last = values[-3:]
    if abs(last[2] - last[1]) > abs(last[1] - last[0]) * 1.0001 + 1e-15:
        raise DivergenceError("damping extrapolation is not converging",
                              residual=abs(last[2] - last[1]))
    value = _neville_at_zero(etas[-3:], last)
    return SpectralTransform(float(delta), complex(value))


@lru_cache(maxsize=64)
def _time_rule(b2, b3, kappa, k, l, u_max):
    w_scale = min(b.w_c if b.shape == "super_ohmic" else b.support / 10.0 for b in (b2, b3))
    h = min(0.5 / w_scale, 0.5)
    n = int(math.ceil(u_max / h))
    return _gauss_legendre(np.linspace(0.0, u_max, n + 1))


@lru_cache(maxsize=64)
def _kernel_cache(b2, b3, kappa, k, l, u_max):
    us, _ = _time_rule(b2, b3, kappa, k, l, u_max)
    return kernel_on_grid(us, k, l, (b2, b3), kappa, u_max=u_max)


# --- derivatives at zero frequency -------------------------------------------

def spectral_derivatives(k, l, baths, xcorr=None, order=1, rtol=1e-6, max_halvings=12):
    """d^n D^-_kl / d omega^n at omega = 0 (n = 1 or 2).

    Central differences on ``spectral_transform`` with one Richardson step per
    step size; the step starts at 1e-2 w_c and is halved until two successive
    estimates agree to ``rtol``.
    """
    if order not in (1, 2):
        raise DomainError("order must be 1 or 2")
    _check_index(k, l)
    b2, b3 = _pair(baths)
    if _flat_status(k, l, b2, b3):
        return 0j
    w_scale = min(b.w_c if b.shape == "super_ohmic" else b.support / 10.0 for b in (b2, b3))
    h = 1e-2 * w_scale

    def central(step):
        dm, d0, dp = spectral_transform([-step, 0.0, step], k, l, baths, xcorr)
        if order == 1:
            return (dp - dm) / (2 * step)
        return (dp - 2 * d0 + dm) / step**2

    def richardson(step):
        return (4 * central(step / 2) - central(step)) / 3

    scale = abs(spectral_transform(0.0, k, l, baths, xcorr)[0]) / w_scale**order
    prev = richardson(h)
    for _ in range(max_halvings):
        h /= 2
        cur = richardson(h)
        if abs(cur - prev) <= rtol * abs(cur) + 1e-12 * scale:
            return complex(cur)
        prev = cur
    raise NumericalError("finite-difference stencil did not converge", residual=abs(cur - prev))
