"""Parameter extraction from libration records.

Ring-down fitting, averaged power spectral density with a Lorentzian line
fit, ordinary least squares for frequency-versus-field data, and time-lag
estimation between two detector channels. Frequencies inside fit reports
are angular (rad/s); spectra carry ordinary frequency in Hz.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dataclass_field

import numpy as np
from scipy.optimize import least_squares

_MAX_EVALS = 2000
_STEP_TOL = 1e-10


class AnalysisError(RuntimeError):
    """Raised when an extraction cannot produce a trustworthy result."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best  # best-so-far parameters, when available


@dataclass(frozen=True)
class FitReport:
    """Result of a damped-oscillation fit.

    Q = omega / gamma by construction; when the damping is unresolved
    (gamma not significantly above zero) Q is reported as inf.
    """

    omega: float
    gamma: float
    amplitude: float
    phase: float
    offset: float
    residual_norm: float
    stderr: dict = dataclass_field(default_factory=dict)

    @property
    def q(self) -> float:
        gamma_err = self.stderr.get("gamma", 0.0)
        if self.gamma <= 0.0 or self.gamma <= gamma_err:
            return math.inf
        return self.omega / self.gamma

    def to_json(self) -> str:
        payload = {
            "omega_rad_s": self.omega,
            "frequency_hz": self.omega / (2.0 * math.pi),
            "gamma_s": self.gamma,
            "q": None if math.isinf(self.q) else self.q,
            "amplitude": self.amplitude,
            "phase_rad": self.phase,
            "offset": self.offset,
            "residual_norm": self.residual_norm,
            "stderr": self.stderr,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _periodogram_peak(signal: np.ndarray, dt: float) -> float:
    """Initial angular frequency from the rFFT peak, parabolically refined."""
    x = signal - signal.mean()
    spec = np.abs(np.fft.rfft(x * np.hanning(len(x))))
    spec[0] = 0.0
    k = int(np.argmax(spec))
    if 0 < k < len(spec) - 1:
        y0, y1, y2 = spec[k - 1], spec[k], spec[k + 1]
        denom = y0 - 2.0 * y1 + y2
        if denom != 0.0:
            k = k + 0.5 * (y0 - y2) / denom
    return 2.0 * math.pi * k / (len(x) * dt)


def _envelope_decay(signal: np.ndarray, dt: float, omega: float) -> float:
    """Initial Gamma from a log-linear fit of per-period amplitude maxima."""
    x = np.abs(signal - signal.mean())
    period = int(round(2.0 * math.pi / (omega * dt))) or 1
    n_blocks = len(x) // period
    if n_blocks < 3:
        return 0.0
    peaks = x[: n_blocks * period].reshape(n_blocks, period).max(axis=1)
    t = (np.arange(n_blocks) + 0.5) * period * dt
    good = peaks > 1e-3 * peaks.max()
    if good.sum() < 3:
        return 0.0
    slope = np.polyfit(t[good], np.log(peaks[good]), 1)[0]
    return max(0.0, -2.0 * slope)


def fit_ringdown(signal, dt: float) -> FitReport:
    """Fit A exp(-Gamma t / 2) cos(omega t + psi) + C to a ring-down record.

    The record must hold at least 10 oscillation periods. Initial values
    come from the periodogram peak and the log-envelope slope; the model is
    then refined by damped (Levenberg-Marquardt) least squares with bounded
    iterations. Non-convergence raises AnalysisError carrying the
    best-so-far parameters.
    """
    signal = np.asarray(signal, dtype=float)
    t = dt * np.arange(len(signal))

    omega0 = _periodogram_peak(signal, dt)
    if omega0 <= 0.0 or len(signal) * dt * omega0 / (2.0 * math.pi) < 10.0:
        raise AnalysisError("record shorter than 10 oscillation periods")
    gamma0 = _envelope_decay(signal, dt, omega0)
    offset0 = signal.mean()

    # Linear solve for the quadrature amplitudes at (omega0, gamma0).
    env = np.exp(-0.5 * gamma0 * t)
    basis = np.column_stack([env * np.cos(omega0 * t), env * np.sin(omega0 * t)])
    coef, *_ = np.linalg.lstsq(basis, signal - offset0, rcond=None)
    amp0 = float(np.hypot(*coef))
    psi0 = float(math.atan2(-coef[1], coef[0]))

    def model(p, tt):
        a, w, g, psi, c = p
        return a * np.exp(-0.5 * g * tt) * np.cos(w * tt + psi) + c

    def residuals(p):
        return model(p, t) - signal

    p0 = np.array([amp0, omega0, gamma0, psi0, offset0])
    result = least_squares(
        residuals, p0, method="lm", max_nfev=_MAX_EVALS, xtol=_STEP_TOL
    )
    amp, omega, gamma, psi, offset = result.x
    if amp < 0:
        amp, psi = -amp, psi + math.pi
    omega, gamma = abs(omega), abs(gamma)
    psi = math.remainder(psi, 2.0 * math.pi)

    resid_norm = float(np.linalg.norm(result.fun))
    stderr = _stderr_from_jacobian(result, len(signal))
    report = FitReport(
        omega=float(omega),
        gamma=float(gamma),
        amplitude=float(amp),
        phase=float(psi),
        offset=float(offset),
        residual_norm=resid_norm,
        stderr={
            "amplitude": stderr[0],
            "omega": stderr[1],
            "gamma": stderr[2],
            "phase": stderr[3],
            "offset": stderr[4],
        },
    )
    if not result.success:
        raise AnalysisError(
            f"ring-down fit did not converge: {result.message}", best=report
        )
    return report


def _stderr_from_jacobian(result, n_points: int) -> np.ndarray:
    dof = max(1, n_points - len(result.x))
    variance = 2.0 * result.cost / dof
    jtj = result.jac.T @ result.jac
    try:
        cov = np.linalg.inv(jtj) * variance
        return np.sqrt(np.maximum(0.0, np.diag(cov)))
    except np.linalg.LinAlgError:
        return np.full(len(result.x), np.nan)


@dataclass(frozen=True)
class Spectrum:
    """One-sided power spectral density, density-normalized so that
    sum(density) * df equals the signal variance (Parseval)."""

    frequency: np.ndarray  # Hz
    density: np.ndarray  # signal_units^2 / Hz
    n_averages: int

    @property
    def df(self) -> float:
        return float(self.frequency[1] - self.frequency[0])

    def total_power(self) -> float:
        return float(self.density.sum() * self.df)


def psd(signal, dt: float, n_segments: int = 1) -> Spectrum:
    """Averaged one-sided periodogram (Welch, Hann window, 50% overlap).

    The record is cut into ``n_segments`` base segments; half-shifted
    segments are averaged in as well. Each segment has its mean removed and
    a power-corrected Hann window applied, so the integral of the density
    over frequency equals the signal variance.
    """
    signal = np.asarray(signal, dtype=float)
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    seg_len = len(signal) // n_segments
    if seg_len < 2 or len(signal) < 2 * n_segments:
        raise AnalysisError("record too short for the requested segmentation")

    window = np.hanning(seg_len)
    win_power = float(np.dot(window, window))
    fs = 1.0 / dt
    step = max(1, seg_len // 2)
    starts = range(0, len(signal) - seg_len + 1, step)

    acc = np.zeros(seg_len // 2 + 1)
    count = 0
    for s0 in starts:
        seg = signal[s0 : s0 + seg_len]
        seg = seg - seg.mean()
        spec = np.abs(np.fft.rfft(seg * window)) ** 2 / (fs * win_power)
        spec[1:] *= 2.0
        if seg_len % 2 == 0:
            spec[-1] /= 2.0  # Nyquist bin is not duplicated
        acc += spec
        count += 1
    freq = np.fft.rfftfreq(seg_len, dt)
    return Spectrum(frequency=freq, density=acc / count, n_averages=count)


@dataclass(frozen=True)
class LorentzianFit:
    """Lorentzian line parameters in angular frequency.

    density(w) = amplitude / ((w - omega0)^2 + (gamma/2)^2) + offset,
    so gamma is the full width at half maximum and Q = omega0 / gamma.
    ``area`` is the integral of the peak over angular frequency.
    ``secondary_peaks`` lists (frequency_hz, density) of other resolvable
    peaks that were not fitted.
    """

    omega0: float
    gamma: float
    amplitude: float
    offset: float
    area: float
    secondary_peaks: tuple = ()

    @property
    def q(self) -> float:
        return self.omega0 / self.gamma


def fit_lorentzian(spectrum: Spectrum, min_snr: float = 3.0) -> LorentzianFit:
    """Least-squares Lorentzian fit of the dominant spectral peak.

    The peak must stand above the median floor by ``min_snr``; otherwise an
    AnalysisError is raised. The fit runs on a window around the peak
    (amplitude, center, width and offset free; the offset absorbs the
    detector noise floor). Other peaks above threshold are reported, not
    fitted.
    """
    f = spectrum.frequency
    p = spectrum.density
    floor = float(np.median(p))
    skip = max(1, int(0.002 * len(p)))  # leave out the DC end
    k = skip + int(np.argmax(p[skip:]))
    if floor <= 0.0 or p[k] / floor < min_snr:
        raise AnalysisError(
            f"no resolvable peak (SNR {p[k] / floor if floor > 0 else math.inf:.2f} "
            f"< {min_snr})"
        )

    # Half-maximum crossing gives the initial width.
    half = 0.5 * (p[k] + floor)
    left = k
    while left > 0 and p[left] > half:
        left -= 1
    right = k
    while right < len(p) - 1 and p[right] > half:
        right += 1
    hwhm_bins = max(1.0, 0.5 * (right - left))
    df = spectrum.df
    gamma0 = 2.0 * math.pi * 2.0 * hwhm_bins * df
    omega0 = 2.0 * math.pi * f[k]

    span = int(max(20, 15 * hwhm_bins))
    sel = slice(max(1, k - span), min(len(p), k + span + 1))
    w = 2.0 * math.pi * f[sel]
    y = p[sel]

    def residuals(q):
        amp, w0, g, c = q
        return amp / ((w - w0) ** 2 + (0.5 * g) ** 2) + c - y

    p0 = np.array([p[k] * (0.5 * gamma0) ** 2, omega0, gamma0, floor])
    result = least_squares(
        residuals, p0, method="lm", max_nfev=_MAX_EVALS, xtol=_STEP_TOL
    )
    amp, w0, g, c = result.x
    g = abs(g)
    if not result.success or g == 0.0:
        raise AnalysisError(f"Lorentzian fit did not converge: {result.message}")

    # Flag other resolvable peaks (e.g. residual center-of-mass lines).
    secondary = []
    mask = np.abs(2.0 * math.pi * f - w0) > 5.0 * g
    mask[:skip] = False
    if mask.any():
        residual_peak = int(np.argmax(np.where(mask, p, -np.inf)))
        if p[residual_peak] / floor >= min_snr:
            secondary.append((float(f[residual_peak]), float(p[residual_peak])))

    return LorentzianFit(
        omega0=float(w0),
        gamma=float(g),
        amplitude=float(amp),
        offset=float(c),
        area=float(2.0 * math.pi * amp / g),
        secondary_peaks=tuple(secondary),
    )


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r_squared: float
    stderr_slope: float
    stderr_intercept: float


def linear_fit(x_values, y_values) -> LinearFit:
    """Ordinary least squares y = slope * x + intercept with standard errors.

    Requires at least 3 points and a non-degenerate abscissa (the x values
    must not all coincide).
    """
    x = np.asarray(x_values, dtype=float)
    y = np.asarray(y_values, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d arrays of equal length")
    n = len(x)
    if n < 3:
        raise ValueError("linear_fit needs at least 3 points")
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx == 0.0:
        raise AnalysisError("degenerate x values: no spread to fit a slope")
    sxy = float(np.sum((x - x.mean()) * (y - y.mean())))
    slope = sxy / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    ss_res = float(np.sum(resid**2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    sigma2 = ss_res / max(1, n - 2)
    return LinearFit(
        slope=slope,
        intercept=intercept,
        r_squared=r2,
        stderr_slope=math.sqrt(sigma2 / sxx),
        stderr_intercept=math.sqrt(sigma2 * (1.0 / n + x.mean() ** 2 / sxx)),
    )


@dataclass(frozen=True)
class LagEstimate:
    """Delay of signal b relative to signal a.

    ``flagged`` is set when the minimum of the mean squared difference sits
    on the scan boundary or when the MSD curve has no significant structure
    (uncorrelated inputs); the lag value is then not meaningful.
    """

    lag: float
    flagged: bool
    reason: str = ""


def lag_estimate(signal_a, signal_b, dt: float, max_lag: float) -> LagEstimate:
    """Lag minimizing the mean squared difference between two records.

    Both records are standardized (mean removed, unit variance) so channels
    with different gains can be compared; the squared difference is then
    scanned over integer-sample delays in [-max_lag, max_lag] and the
    minimum refined by parabolic interpolation, giving sub-sample
    resolution. A positive result means b lags a.
    """
    a = np.asarray(signal_a, dtype=float)
    b = np.asarray(signal_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("signals must have equal length")
    k_max = int(round(max_lag / dt))
    if k_max < 1:
        raise ValueError("max_lag must cover at least one sample")
    if len(a) <= 2 * k_max + 4:
        raise ValueError("records too short for the requested max_lag")
    if a.std() == 0.0 or b.std() == 0.0:
        return LagEstimate(lag=0.0, flagged=True, reason="no structure")
    a = (a - a.mean()) / a.std()
    b = (b - b.mean()) / b.std()

    lags = np.arange(-k_max, k_max + 1)
    msd = np.empty(len(lags))
    for i, k in enumerate(lags):
        if k >= 0:
            da = a[: len(a) - k] - b[k:]
        else:
            da = a[-k:] - b[: len(b) + k]
        msd[i] = float(np.mean(da * da))

    i_min = int(np.argmin(msd))
    spread = float(msd.mean() - msd[i_min])
    if msd.mean() > 0 and spread / msd.mean() < 0.05:
        return LagEstimate(lag=lags[i_min] * dt, flagged=True, reason="no structure")
    if i_min == 0 or i_min == len(lags) - 1:
        return LagEstimate(lag=lags[i_min] * dt, flagged=True, reason="boundary")

    y0, y1, y2 = msd[i_min - 1 : i_min + 2]
    denom = y0 - 2.0 * y1 + y2
    frac = 0.5 * (y0 - y2) / denom if denom != 0.0 else 0.0
    return LagEstimate(lag=(lags[i_min] + frac) * dt, flagged=False)
