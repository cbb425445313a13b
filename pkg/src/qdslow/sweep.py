"""Parameter sweeps over a ScenarioConfig and tabular output."""

from concurrent.futures import ThreadPoolExecutor
import csv
from dataclasses import dataclass, replace
import io
import json
import logging
import math
import warnings

from . import __version__
from . import dressed, response
from .errors import ConfigError, NumericalError, QDSlowError, ShapeError

log = logging.getLogger(__name__)

BASE_COLUMNS = ("branch", "axis_value", "chi_re", "chi_im", "n_re", "n_im", "slowdown")
RATE_COLUMNS = ("gamma2_re", "gamma3_re", "nu2_re", "nu3_re")
WINDOW_COLUMNS = ("window_center", "window_width")
FORMATS = ("csv", "json")


class WindowWarning(UserWarning):
    """No transparency doublet at a sweep point; window columns set to NaN."""


@dataclass(frozen=True)
class SweepResult:
    columns: tuple
    rows: tuple
    metadata: dict


def _columns(config):
    cols = list(BASE_COLUMNS)
    if "rates" in config.outputs:
        cols += RATE_COLUMNS
    if "window" in config.outputs:
        cols += WINDOW_COLUMNS
    return tuple(cols)


def _point_drive(config, value):
    d = config.drive
    if config.axis == "omega_p":
        return dressed.DriveConfig(value, d.delta_p_bare, d.omega_s, d.delta_s_bare)
    return d


def _point_branch(branch, config, value):
    if config.axis == "temperature":
        return replace(branch, bath2=branch.bath2.with_temperature(value),
                       bath3=branch.bath3.with_temperature(value))
    return branch


def point_rates(config, branch, drive):
    if config.mode == "phenomenological":
        return dressed.rates_phenomenological(drive, branch.coeffs)
    return dressed.rates_asymptotic(drive, branch.baths, branch.xcorr, printed_nu3=config.printed_nu3)


def _chi(config, rates, drive, delta_s):
    r = rates.at_signal_detuning(delta_s)
    if r.nu_is_real:
        return response.chi_closed_form(delta_s, r, drive, config.optical, printed=config.printed_chi)
    return response.chi_oracle(delta_s, r, drive, config.optical)


def _window(config, rates, drive, grid):
    pts = [response.SusceptibilityPoint(d, 0.0, _chi(config, rates, drive, d).imag, 0j) for d in grid]
    try:
        center, width, _ = response.transmission_window(pts, config.window_threshold)
    except ShapeError as exc:
        warnings.warn(str(exc), WindowWarning, stacklevel=2)
        return math.nan, math.nan
    return center, width


def _evaluate(config, branch, value, branch_window):
    drive = _point_drive(config, value)
    branch = _point_branch(branch, config, value)
    rates = point_rates(config, branch, drive)
    delta_s = value if config.axis == "delta_s" else drive.delta_s_bare
    row = {"branch": branch.label, "axis_value": value}
    need_chi = {"chi", "n", "slowdown"} & config.outputs
    if need_chi:
        chi = _chi(config, rates, drive, delta_s)
        n = response.refractive_index(chi)
        row.update(chi_re=chi.real, chi_im=chi.imag, n_re=n.real, n_im=n.imag)
    else:
        row.update(chi_re=math.nan, chi_im=math.nan, n_re=math.nan, n_im=math.nan)
    row["slowdown"] = math.nan
    if "slowdown" in config.outputs:
        row["slowdown"] = response.slow_down_factor(delta_s, rates, drive, config.optical,
                                                    printed=config.printed_chi)
    if "rates" in config.outputs:
        row.update(gamma2_re=rates.gamma2.real, gamma3_re=rates.gamma3.real,
                   nu2_re=rates.nu2.real, nu3_re=rates.nu3.real)
    if "window" in config.outputs:
        if config.axis == "delta_s":
            center, width = branch_window
        else:
            center, width = _window(config, rates, drive, config.window_grid)
        row.update(window_center=center, window_width=width)
    return row


def _task(config, branch, value, branch_window):
    try:
        return _evaluate(config, branch, value, branch_window)
    except NumericalError as exc:
        raise type(exc)(f"at branch={branch.label}, {config.axis}={value!r}: {exc}",
                        residual=exc.residual) from exc
    except QDSlowError as exc:
        raise type(exc)(f"at branch={branch.label}, {config.axis}={value!r}: {exc}") from exc


def run_sweep(config):
    """Evaluate every (branch, grid point); rows ordered by branch then axis."""
    columns = _columns(config)
    jobs = []
    for branch in config.branches:
        window = None
        if "window" in config.outputs and config.axis == "delta_s":
            rates = point_rates(config, branch, config.drive)
            window = _window(config, rates, config.drive, config.grid)
        jobs.extend((branch, v, window) for v in config.grid)

    if config.workers > 1:
        with ThreadPoolExecutor(config.workers) as pool:
            rows = list(pool.map(lambda job: _task(config, *job), jobs))
    else:
        rows = [_task(config, *job) for job in jobs]

    metadata = {
        "name": config.name, "mode": config.mode, "axis": config.axis,
        "config_sha256": config.config_hash, "version": __version__,
        "units": {"axis_value": "K" if config.axis == "temperature" else "ps^-1",
                  "rates": "ps^-1", "window": "ps^-1"},
        "branches": [b.label for b in config.branches],
    }
    return SweepResult(columns, tuple(tuple(r[c] for c in columns) for r in rows), metadata)


# --- output ------------------------------------------------------------------

def _fmt(value):
    if isinstance(value, str):
        return value
    return format(float(value), ".17g")


def _json_value(value):
    if isinstance(value, str):
        return value
    value = float(value)
    return value if math.isfinite(value) else None


def render_table(result, fmt="csv"):
    """Serialise a SweepResult to text (LF line endings)."""
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(result.columns)
        for row in result.rows:
            writer.writerow([_fmt(v) for v in row])
        return buf.getvalue()
    if fmt == "json":
        records = [{c: _json_value(v) for c, v in zip(result.columns, row)} for row in result.rows]
        return json.dumps({"metadata": result.metadata, "records": records}, indent=1) + "\n"
    raise ConfigError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def emit_table(result, fmt, destination):
    """Write the table to a path or a text stream."""
    text = render_table(result, fmt)
    if hasattr(destination, "write"):
        destination.write(text)
        return
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
