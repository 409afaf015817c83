"""Least-squares fitting of the transfer/coherence model functions.

Model set:

* rabi:        I(t) = A [sin^2(pi f t) + c] exp(-t / T)        (or cos^2)
* ramsey:      I(t) = A [s cos(2 pi f t - phi) exp(-t / T2s) + c] exp(-t / Ts)
* lorentzian:  I(x) = b + h (w/2)^2 / ((x - x0)^2 + (w/2)^2)
* exponential: I(t) = A exp(-t / T) + c

Fits use a damped (Levenberg-Marquardt) least-squares loop with analytic
Jacobians; decay times are handled internally as rates so that "no decay"
is the well-behaved point r = 0.  A discrete spectral estimate provides
frequency initialisation and an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .trace import Trace

MAX_ITERATIONS = 200
RSS_REL_TOL = 1e-12
STEP_NORM_TOL = 1e-12


class NoOscillationError(ValueError):
    """Raised when no nonzero spectral peak rises above the noise floor."""


class FitInputError(ValueError):
    """Raised for data that does not meet a fit's preconditions."""


@dataclass
class FitResult:
    """Parameter estimates with 1-sigma uncertainties and fit diagnostics."""

    model: str
    params: dict[str, float]
    uncertainties: dict[str, float]
    rss: float
    reduced_chi_square: float
    converged: bool
    n_iterations: int
    covariance: np.ndarray | None = None
    param_order: tuple[str, ...] = field(default=())

    def __getitem__(self, name: str) -> float:
        return self.params[name]


def _trace_xy(trace) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(trace, Trace):
        return trace.sweep_values, trace.observable
    x, y = trace
    return np.asarray(x, dtype=float), np.asarray(y, dtype=float)


def estimate_frequency(trace) -> float:
    """Dominant nonzero frequency of a uniformly sampled trace (Hz).

    Zero-padded discrete transform with parabolic peak interpolation; used
    to seed the oscillatory fits and as an independent cross-check.
    """
    t, y = _trace_xy(trace)
    if t.size < 8:
        raise FitInputError("frequency estimation needs at least 8 samples")
    steps = np.diff(t)
    if steps.min() <= 0 or (steps.max() - steps.min()) > 1e-9 * max(steps.max(), 1e-30):
        raise FitInputError("frequency estimation needs uniform sampling")
    dt = steps.mean()
    centered = y - y.mean()
    if np.ptp(centered) <= 1e-12 * max(1.0, float(np.max(np.abs(y)))):
        raise NoOscillationError("no oscillation detected")
    n_pad = 8 * t.size
    spectrum = np.fft.rfft(centered, n=n_pad)
    power = np.abs(spectrum) ** 2
    freqs = np.fft.rfftfreq(n_pad, dt)
    span = t[-1] - t[0]
    searchable = freqs >= 0.5 / span  # demand at least half a cycle in the window
    if not np.any(searchable):
        raise NoOscillationError("no oscillation detected")
    idx = np.flatnonzero(searchable)
    k = idx[np.argmax(power[idx])]
    floor = np.median(power[idx])
    if power[k] <= 20.0 * max(floor, 1e-300):
        raise NoOscillationError("no oscillation detected")
    # parabolic interpolation on log power around the peak bin
    if 0 < k < power.size - 1 and power[k - 1] > 0 and power[k + 1] > 0:
        la, lb, lc = np.log(power[k - 1]), np.log(power[k]), np.log(power[k + 1])
        denom = la - 2 * lb + lc
        shift = 0.5 * (la - lc) / denom if denom != 0 else 0.0
        shift = np.clip(shift, -0.5, 0.5)
    else:
        shift = 0.0
    return float((k + shift) * freqs[1])


def spectral_bin_width(trace) -> float:
    t, _ = _trace_xy(trace)
    return 1.0 / (t[-1] - t[0])


def _spectral_peak_candidates(t: np.ndarray, y: np.ndarray, k: int = 3) -> list[float]:
    """Up to k local spectral maxima by decreasing power (fit seeds)."""
    steps = np.diff(t)
    if t.size < 8 or steps.min() <= 0 or (steps.max() - steps.min()) > 1e-9 * steps.max():
        return []
    dt = steps.mean()
    n_pad = 8 * t.size
    power = np.abs(np.fft.rfft(y - y.mean(), n_pad)) ** 2
    freqs = np.fft.rfftfreq(n_pad, dt)
    lo = np.searchsorted(freqs, 0.5 / (t[-1] - t[0]))
    peaks = [
        (power[i], freqs[i])
        for i in range(max(lo, 1), power.size - 1)
        if power[i] >= power[i - 1] and power[i] > power[i + 1]
    ]
    peaks.sort(reverse=True)
    out: list[float] = []
    for _, f in peaks:
        if all(abs(f - g) > 0.5 / (t[-1] - t[0]) for g in out):
            out.append(float(f))
        if len(out) == k:
            break
    return out


def levenberg_marquardt(
    model_and_jacobian,
    x: np.ndarray,
    y: np.ndarray,
    p0: np.ndarray,
    lower_bounds: np.ndarray | None = None,
    upper_bounds: np.ndarray | None = None,
    max_iterations: int = MAX_ITERATIONS,
):
    """Damped least squares on y - model(x; p).

    Returns (params, rss, unscaled_covariance, converged, iterations).
    Terminates on relative RSS change < 1e-12, step norm < 1e-12, or the
    iteration cap.  Bounds are enforced by projection.
    """

    def clip(q):
        if lower_bounds is not None:
            q = np.maximum(q, lower_bounds)
        if upper_bounds is not None:
            q = np.minimum(q, upper_bounds)
        return q

    p = clip(np.array(p0, dtype=float))
    model, jac = model_and_jacobian(x, p)
    residual = y - model
    rss = float(residual @ residual)
    lam = 1e-3
    converged = False
    iterations = 0
    while iterations < max_iterations:
        iterations += 1
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        diag[diag <= 0] = 1e-30
        jtr = jac.T @ residual
        try:
            step = np.linalg.solve(jtj + lam * np.diag(diag), jtr)
        except np.linalg.LinAlgError:
            lam *= 10.0
            continue
        p_new = clip(p + step)
        model_new, jac_new = model_and_jacobian(x, p_new)
        residual_new = y - model_new
        rss_new = float(residual_new @ residual_new)
        if rss_new <= rss:
            drop = rss - rss_new
            p, model, jac, residual, rss = p_new, model_new, jac_new, residual_new, rss_new
            lam = max(lam / 9.0, 1e-12)
            if drop <= RSS_REL_TOL * max(rss, 1e-300) or np.linalg.norm(step) < STEP_NORM_TOL:
                converged = True
                break
        else:
            lam *= 10.0
            if lam > 1e12:
                break
    jtj = jac.T @ jac
    try:
        cov = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(jtj)
    return p, rss, cov, converged, iterations


def _finish(
    model_name: str,
    names: tuple[str, ...],
    p: np.ndarray,
    rss: float,
    cov_unscaled: np.ndarray,
    converged: bool,
    iterations: int,
    n_points: int,
    rate_names: dict[str, str],
) -> FitResult:
    """Assemble a FitResult, converting internal rates to reported times."""
    dof = max(n_points - p.size, 1)
    reduced = rss / dof
    cov = cov_unscaled * reduced
    sigma = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    params: dict[str, float] = {}
    uncertainties: dict[str, float] = {}
    order: list[str] = []
    for name, value, err in zip(names, p, sigma):
        if name in rate_names:
            t_name = rate_names[name]
            if value > 0:
                params[t_name] = 1.0 / value
                uncertainties[t_name] = err / value**2
            else:
                params[t_name] = math.inf
                uncertainties[t_name] = math.inf
            order.append(t_name)
        else:
            params[name] = float(value)
            uncertainties[name] = float(err)
            order.append(name)
    return FitResult(
        model=model_name,
        params=params,
        uncertainties=uncertainties,
        rss=rss,
        reduced_chi_square=reduced,
        converged=converged,
        n_iterations=iterations,
        covariance=cov,
        param_order=tuple(order),
    )


def _multi_start(model_and_jacobian, x, y, starts, lower_bounds=None, upper_bounds=None):
    best = None
    for p0 in starts:
        fit = levenberg_marquardt(
            model_and_jacobian, x, y, np.asarray(p0, float), lower_bounds, upper_bounds
        )
        if best is None or fit[1] < best[1]:
            best = fit
    return best


def _nyquist(x: np.ndarray) -> float:
    gaps = np.diff(x)
    return 0.5 / max(gaps.min(), 1e-30)


def _frequency_starts(x, y) -> list[float]:
    span = x[-1] - x[0]
    candidates = _spectral_peak_candidates(x, y)
    if not candidates:
        # slow or truncated oscillation: scan sub-period seeds
        return [0.125 / span, 0.25 / span, 0.5 / span, 1.0 / span]
    return candidates


def _is_flat(y: np.ndarray) -> bool:
    return np.ptp(y) <= 1e-12 * max(1.0, np.max(np.abs(y)))


def fit_rabi(trace, mode: str = "sin2", with_decay: bool = True) -> FitResult:
    """Fit A [sin^2(pi f t) + c] exp(-t/T_Rabi) (or the cos^2 variant)."""
    if mode not in ("sin2", "cos2"):
        raise FitInputError(f"mode must be sin2 or cos2, got {mode!r}")
    t, y = _trace_xy(trace)
    if t.size < 8:
        raise FitInputError("rabi fit needs at least 8 samples")
    sign = 1.0 if mode == "sin2" else -1.0

    if _is_flat(y):
        params = {"amplitude": 0.0, "frequency_hz": 0.0, "offset": float(y.mean())}
        if with_decay:
            params["t_rabi_s"] = math.inf
        zeros = {k: 0.0 for k in params}
        return FitResult(mode, params, zeros, 0.0, 0.0, True, 0, None, tuple(params))

    def model_and_jacobian(x, p):
        if with_decay:
            amp, freq, off, rate = p
        else:
            amp, freq, off = p
            rate = 0.0
        phase = np.pi * freq * x
        osc = np.sin(phase) ** 2 if sign > 0 else np.cos(phase) ** 2
        decay = np.exp(-rate * x)
        model = amp * (osc + off) * decay
        d_osc_df = sign * np.pi * x * np.sin(2 * phase)
        cols = [
            (osc + off) * decay,
            amp * d_osc_df * decay,
            amp * decay,
        ]
        if with_decay:
            cols.append(-x * model)
        return model, np.column_stack(cols)

    amp0 = max(np.ptp(y), 1e-12)
    off0 = max(y.min(), 0.0) / amp0
    span = t[-1] - t[0]
    starts = []
    for f0 in _frequency_starts(t, y):
        if with_decay:
            for r0 in (0.0, 1.0 / span):
                starts.append([amp0, f0, off0, r0])
        else:
            starts.append([amp0, f0, off0])
    lb = np.array([-np.inf, 0.0, -np.inf] + ([0.0] if with_decay else []))
    ub = np.array([np.inf, _nyquist(t), np.inf] + ([np.inf] if with_decay else []))
    p, rss, cov, converged, iters = _multi_start(model_and_jacobian, t, y, starts, lb, ub)
    names = ("amplitude", "frequency_hz", "offset") + (("rate",) if with_decay else ())
    return _finish(mode, names, p, rss, cov, converged, iters, t.size, {"rate": "t_rabi_s"})


def fit_ramsey(trace, sign: int = 1) -> FitResult:
    """Fit A [s cos(2 pi f t - phi) exp(-t/T_2S*) + c] exp(-t/T_S), s = +/-1."""
    if sign not in (1, -1):
        raise FitInputError("sign must be +1 or -1")
    t, y = _trace_xy(trace)
    if t.size < 12:
        raise FitInputError("ramsey fit needs at least 12 samples")

    def model_and_jacobian(x, p):
        amp, freq, phi, off, r2, rs = p
        theta = 2 * np.pi * freq * x - phi
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        d2, ds = np.exp(-r2 * x), np.exp(-rs * x)
        osc = sign * cos_t * d2
        model = amp * (osc + off) * ds
        cols = [
            (osc + off) * ds,
            amp * (-sign * sin_t * 2 * np.pi * x) * d2 * ds,
            amp * (sign * sin_t) * d2 * ds,
            amp * ds,
            amp * (-x) * sign * cos_t * d2 * ds,
            -x * model,
        ]
        return model, np.column_stack(cols)

    amp0 = max(np.ptp(y) / 2.0, 1e-12)
    off0 = y.mean() / amp0
    span = t[-1] - t[0]
    starts = []
    for f0 in _frequency_starts(t, y):
        z = np.sum((y - y.mean()) * np.exp(-2j * np.pi * f0 * t))
        phi0 = float(-np.angle(sign * z))
        for r0 in (0.0, 1.0 / span):
            starts.append([amp0, f0, phi0, off0, r0, r0 / 2.0])
    lb = np.array([-np.inf, 0.0, -np.inf, -np.inf, 0.0, 0.0])
    ub = np.array([np.inf, _nyquist(t), np.inf, np.inf, np.inf, np.inf])
    p, rss, cov, converged, iters = _multi_start(model_and_jacobian, t, y, starts, lb, ub)
    names = ("amplitude", "frequency_hz", "phase_rad", "offset", "rate2", "rate_s")
    return _finish(
        "ramsey", names, p, rss, cov, converged, iters, t.size,
        {"rate2": "t2s_star_s", "rate_s": "t_s_s"},
    )


def fit_lorentzian(trace) -> FitResult:
    """Fit baseline + height (w/2)^2 / ((x - center)^2 + (w/2)^2)."""
    x, y = _trace_xy(trace)
    if x.size < 5:
        raise FitInputError("lorentzian fit needs at least 5 points")

    def model_and_jacobian(xv, p):
        center, fwhm, height, baseline = p
        half = fwhm / 2.0
        g = half**2
        dx = xv - center
        denom = dx**2 + g
        lor = g / denom
        model = baseline + height * lor
        cols = [
            height * g * 2 * dx / denom**2,
            height * half * dx**2 / denom**2,
            lor,
            np.ones_like(xv),
        ]
        return model, np.column_stack(cols)

    base0 = float(np.min(y))
    height0 = max(float(np.max(y) - base0), 1e-12)
    center0 = float(x[np.argmax(y)])
    above = x[y > base0 + height0 / 2.0]
    width0 = float(above.max() - above.min()) if above.size >= 2 else (x[-1] - x[0]) / 4.0
    width0 = max(width0, (x[1] - x[0]))
    p0 = [center0, width0, height0, base0]
    p, rss, cov, converged, iters = _multi_start(
        model_and_jacobian, x, y, [p0], np.array([-np.inf, 0.0, -np.inf, -np.inf])
    )
    names = ("center", "fwhm", "height", "baseline")
    return _finish("lorentzian", names, p, rss, cov, converged, iters, x.size, {})


def fit_exponential(trace) -> FitResult:
    """Fit A exp(-t/T) + c."""
    t, y = _trace_xy(trace)
    if t.size < 5:
        raise FitInputError("exponential fit needs at least 5 samples")

    if _is_flat(y):
        params = {"amplitude": 0.0, "t_s": math.inf, "offset": float(y.mean())}
        zeros = {k: 0.0 for k in params}
        return FitResult("exponential", params, zeros, 0.0, 0.0, True, 0, None, tuple(params))

    def model_and_jacobian(x, p):
        amp, rate, off = p
        decay = np.exp(-rate * x)
        model = amp * decay + off
        return model, np.column_stack([decay, -amp * x * decay, np.ones_like(x)])

    c0 = float(y[-1])
    a0 = float(y[0] - c0)
    span = t[-1] - t[0]
    starts = [[a0, r0, c0] for r0 in (0.5 / span, 2.0 / span, 8.0 / span)]
    # log-linear seed when the signal is one-signed above its tail
    shifted = (y - c0) * np.sign(a0 if a0 != 0 else 1.0)
    good = shifted > 1e-12 * max(abs(a0), 1.0)
    if np.count_nonzero(good) >= 3:
        slope = np.polyfit(t[good], np.log(shifted[good]), 1)[0]
        if slope < 0:
            starts.insert(0, [a0, -slope, c0])
    p, rss, cov, converged, iters = _multi_start(
        model_and_jacobian, t, y, starts, np.array([-np.inf, 0.0, -np.inf])
    )
    names = ("amplitude", "rate", "offset")
    return _finish("exponential", names, p, rss, cov, converged, iters, t.size, {"rate": "t_s"})


MODEL_FITTERS = {
    "rabi": fit_rabi,
    "ramsey": fit_ramsey,
    "lorentzian": fit_lorentzian,
    "exponential": fit_exponential,
}


def evaluate_model(result: FitResult, x: np.ndarray) -> np.ndarray:
    """Evaluate a fitted model on a grid (for fitted-curve output files)."""
    x = np.asarray(x, dtype=float)
    p = result.params
    if result.model in ("sin2", "cos2"):
        rate = 0.0 if "t_rabi_s" not in p or not np.isfinite(p["t_rabi_s"]) else 1.0 / p["t_rabi_s"]
        phase = np.pi * p["frequency_hz"] * x
        osc = np.sin(phase) ** 2 if result.model == "sin2" else np.cos(phase) ** 2
        return p["amplitude"] * (osc + p["offset"]) * np.exp(-rate * x)
    if result.model == "ramsey":
        r2 = 0.0 if not np.isfinite(p["t2s_star_s"]) else 1.0 / p["t2s_star_s"]
        rs = 0.0 if not np.isfinite(p["t_s_s"]) else 1.0 / p["t_s_s"]
        theta = 2 * np.pi * p["frequency_hz"] * x - p["phase_rad"]
        return p["amplitude"] * (np.cos(theta) * np.exp(-r2 * x) + p["offset"]) * np.exp(-rs * x)
    if result.model == "lorentzian":
        g = (p["fwhm"] / 2.0) ** 2
        return p["baseline"] + p["height"] * g / ((x - p["center"]) ** 2 + g)
    if result.model == "exponential":
        rate = 0.0 if not np.isfinite(p["t_s"]) else 1.0 / p["t_s"]
        return p["amplitude"] * np.exp(-rate * x) + p["offset"]
    raise ValueError(f"unknown model {result.model!r}")


def finite_difference_jacobian(model_fn, x: np.ndarray, p: np.ndarray, eps: float = 1e-7):
    """Central-difference Jacobian of model_fn(x, p); test oracle for the analytic ones."""
    p = np.asarray(p, dtype=float)
    cols = []
    for j in range(p.size):
        dp = np.zeros_like(p)
        dp[j] = eps * max(1.0, abs(p[j]))
        cols.append((model_fn(x, p + dp) - model_fn(x, p - dp)) / (2 * dp[j]))
    return np.column_stack(cols)
