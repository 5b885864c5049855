"""Fourier-Lebesgue and dispersive space-time norms on the circle, the
mass gauge with its renormalized nonlinearity, and small-time scaling
benches for the linear estimates behind them.

Spatial side: FL^r data have coefficients in ell^{r'} after the unitary
normalization sqrt(2 pi) c_n, so r = 2 recovers L^2 exactly.  Space-time
side: X^{s,b}_r norms weight the discrete space-time Fourier transform by
<n>^s <tau + n^2>^b, so free Schrodinger waves sit where the parabolic
weight is small.
"""

from __future__ import annotations

import math

import numpy as np

from .bench import ExperimentReport, fit_loglog
from .solver import Trajectory, mass, simpson_weights
from .torus import (
    SpectralField,
    TorusGeometry,
    cubic_field,
    field_samples,
    l2_norm,
    lp_norm,
    mode_field,
    mollifier_ramp,
    sobolev_norm,
    _freq_sq,
)

__all__ = [
    "SpaceTimeField",
    "fl_norm",
    "xsb_norm",
    "time_cutoff",
    "space_time_from_callable",
    "free_wave",
    "duhamel_wave",
    "gauge_transform",
    "renormalized_nonlinearity",
    "renormalized_duhamel_residual",
    "hausdorff_young_check",
    "bench_linear_homogeneous",
    "bench_linear_inhomogeneous",
    "DEFAULT_WINDOW",
    "DEFAULT_TIME_POINTS",
]

DEFAULT_WINDOW = 4.0
DEFAULT_TIME_POINTS = 1024


def _conjugate_exponent(r):
    if not 1.0 < r <= 2.0:
        raise ValueError("r must lie in (1, 2]")
    return r / (r - 1.0)


def fl_norm(f, r):
    """ell^{r'} norm of the unitary coefficients sqrt(vol) c_n; r = 2 is L^2."""
    rp = _conjugate_exponent(r)
    c = math.sqrt(f.geometry.volume) * np.abs(f.coeffs.ravel())
    return float(np.sum(c ** rp) ** (1.0 / rp))


def hausdorff_young_check(f, r):
    """(ratio, bound) for ||f_hat||_{ell^{r'}} <= (2 pi)^{-(1/r - 1/2)} ||f||_{L^r}.

    Both norms are quadrature norms on the same grid; the bound constant is
    exactly 1 for r = 2 and below 1 for r < 2 in this normalization.
    """
    denom = lp_norm(f, r, pad=2)
    if denom == 0.0:
        raise ValueError("zero field")
    bound = (2.0 * math.pi) ** -(1.0 / r - 0.5)
    return fl_norm(f, r) / denom, bound


class SpaceTimeField:
    """Function on [-T_w, T_w) x circle, stored as spatial coefficients on a
    uniform time grid t_j = -T_w + j * dt, j = 0 .. M_t - 1."""

    def __init__(self, geometry, window, coeffs):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if geometry.d != 1:
            raise ValueError("space-time fields are one-dimensional in space")
        if coeffs.ndim != 2 or coeffs.shape[1] != geometry.grid[0]:
            raise ValueError("coeffs must be (time points, spatial modes)")
        if coeffs.shape[0] % 2:
            raise ValueError("time point count must be even (t = 0 on the grid)")
        self.geometry = geometry
        self.window = float(window)
        self.coeffs = coeffs

    @property
    def ntimes(self):
        return self.coeffs.shape[0]

    @property
    def dt(self):
        return 2.0 * self.window / self.ntimes

    @property
    def times(self):
        return -self.window + self.dt * np.arange(self.ntimes)

    def time_frequencies(self):
        """tau_k = k * pi / T_w in FFT order."""
        return 2.0 * math.pi * np.fft.fftfreq(self.ntimes, d=self.dt)

    def time_transform(self):
        """u_hat(tau_k, n) = (dt / sqrt(2 pi)) sum_j u(t_j, n) e^{-i tau_k t_j}."""
        tau = self.time_frequencies()
        phase = np.exp(1j * tau * self.window)
        return (self.dt / math.sqrt(2.0 * math.pi)) * phase[:, None] * np.fft.fft(
            self.coeffs, axis=0
        )


def xsb_norm(u, s, b, r):
    """X^{s,b}_r norm:

        ( sum_{n,k} <n>^{s r'} <tau_k + n^2>^{b r'}
              |sqrt(2 pi) u_hat(tau_k, n)|^{r'} dtau )^{1/r'}

    with <x> = (1 + x^2)^{1/2}; r = 2, s = b = 0 recovers L^2_t L^2_x.
    """
    rp = _conjugate_exponent(r)
    geom = u.geometry
    n = geom.thetas[0] * np.fft.fftfreq(geom.grid[0], d=1.0 / geom.grid[0])
    tau = u.time_frequencies()
    wn = (1.0 + n ** 2) ** (s * rp / 2.0)
    wtau = (1.0 + (tau[:, None] + n[None, :] ** 2) ** 2) ** (b * rp / 2.0)
    uh = np.abs(math.sqrt(geom.volume) * u.time_transform()) ** rp
    dtau = math.pi / u.window
    return float((dtau * np.sum(wn[None, :] * wtau * uh)) ** (1.0 / rp))


def time_cutoff(t):
    """Smooth even cutoff: 1 on [-1, 1], supported in (-1.9, 1.9)."""
    return mollifier_ramp((1.9 - np.abs(t)) / 0.9)


def space_time_from_callable(geom, window, ntimes, fn):
    """Assemble a SpaceTimeField from fn(t) -> spatial coefficient array."""
    times = -window + (2.0 * window / ntimes) * np.arange(ntimes)
    return SpaceTimeField(geom, window, np.stack([fn(t) for t in times]))


def free_wave(phi0, T, window=DEFAULT_WINDOW, ntimes=DEFAULT_TIME_POINTS):
    """chi(t/T) e^{i t Lap} phi0 as a space-time field."""
    geom = phi0.geometry
    lam = _freq_sq(geom)
    dt = 2.0 * window / ntimes
    times = -window + dt * np.arange(ntimes)
    cut = time_cutoff(times / T)
    coeffs = cut[:, None] * np.exp(-1j * times[:, None] * lam[None, :]) * phi0.coeffs
    return SpaceTimeField(geom, window, coeffs)


def duhamel_wave(forcing, T, window=DEFAULT_WINDOW, ntimes=DEFAULT_TIME_POINTS):
    """chi(t/T) int_0^t e^{i (t - tau) Lap} F(tau) dtau for a space-time
    forcing F, via a cumulative trapezoid from t = 0 (a grid point)."""
    geom = forcing.geometry
    lam = _freq_sq(geom)
    times = forcing.times
    dt = forcing.dt
    # integrand in interaction variables: e^{+i tau lam-phase} F(tau)
    V = np.exp(1j * times[:, None] * lam[None, :]) * forcing.coeffs
    mid = forcing.ntimes // 2  # t = 0
    I = np.zeros_like(V)
    steps = 0.5 * dt * (V[1:] + V[:-1])
    I[mid + 1 :] = np.cumsum(steps[mid:], axis=0)
    I[:mid] = -np.cumsum(steps[:mid][::-1], axis=0)[::-1]
    cut = time_cutoff(times / T)
    coeffs = cut[:, None] * np.exp(-1j * times[:, None] * lam[None, :]) * I
    return SpaceTimeField(geom, forcing.window, coeffs)


# ---------------------------------------------------------------------------
# mass gauge and renormalized nonlinearity


def mean_density(phi):
    """Twice the average of |phi|^2, the gauge frequency per unit coupling."""
    return 2.0 * mass(phi) / phi.geometry.volume


def gauge_transform(traj, sign=1.0):
    """psi(t) = e^{i sign mu m t} phi(t) with m twice the mean density of the
    initial state; sign = -1 undoes the gauge."""
    m = mean_density(traj.states[0])
    states = [
        SpectralField(st.geometry, np.exp(1j * sign * traj.coupling * m * t) * st.coeffs)
        for t, st in zip(traj.times, traj.states)
    ]
    return Trajectory(traj.geometry, traj.times.copy(), states, traj.coupling)


def renormalized_nonlinearity(psi, coupling=1.0):
    """mu (|psi|^2 - m) psi with m twice the mean density, dealiased.

    Plane waves are eigenvectors: for psi = e^{i x} on the standard circle
    the output is -mu e^{i x}.
    """
    m = mean_density(psi)
    g = cubic_field(psi)
    return SpectralField(psi.geometry, coupling * (g.coeffs - m * psi.coeffs))


def renormalized_duhamel_residual(traj, norm="l2"):
    """Max over stored times of the L^2 defect of the gauged trajectory in

        psi(t) = e^{i t Lap} psi0 - i int_0^t e^{i (t-tau) Lap} N(psi(tau)) dtau

    with N the renormalized nonlinearity; converges at O(dt^2)."""
    if len(traj.times) < 3:
        raise ValueError("need at least 3 time points")
    gauged = gauge_transform(traj)
    geom = traj.geometry
    lam = _freq_sq(geom)
    h = gauged.dt
    M = len(gauged.times) - 1
    W = np.empty((M + 1, geom.grid[0]), dtype=np.complex128)
    for j, (t, st) in enumerate(zip(gauged.times, gauged.states)):
        g = renormalized_nonlinearity(st, gauged.coupling)
        W[j] = np.exp(1j * t * lam) * g.coeffs
    c0 = gauged.states[0].coeffs
    worst = 0.0
    for m in range(M + 1):
        t = gauged.times[m]
        fwd = np.exp(-1j * t * lam)
        if m == 0:
            integral = np.zeros(geom.grid[0], dtype=np.complex128)
        else:
            w = simpson_weights(m, h)
            integral = fwd * (w @ W[: m + 1])
        defect = gauged.states[m].coeffs - fwd * c0 + 1j * integral
        if norm == "l2":
            val = l2_norm(SpectralField(geom, defect))
        else:
            val = sobolev_norm(SpectralField(geom, defect), float(norm))
        worst = max(worst, val)
    return worst


# ---------------------------------------------------------------------------
# small-time scaling benches


def _check_refinement(value, refined, name, tol=0.01):
    if abs(refined - value) > tol * abs(value):
        raise RuntimeError(
            "%s not resolved in time: %g vs %g on refinement" % (name, value, refined)
        )


def bench_linear_homogeneous(
    r,
    b,
    T_list,
    mode=3,
    s=0.0,
    window=DEFAULT_WINDOW,
    ntimes=DEFAULT_TIME_POINTS,
):
    """||chi(t/T) e^{i t Lap} phi0||_{X^{s,b}_r} against T for a single-mode
    phi0; the fitted log-log slope tracks 1/r - b as T -> 0."""
    geom = TorusGeometry(1, (1.0,), (64,))
    phi0 = mode_field(geom, (mode,))
    rows = []
    for T in T_list:
        val = xsb_norm(free_wave(phi0, T, window, ntimes), s, b, r)
        ref = xsb_norm(free_wave(phi0, T, window, 2 * ntimes), s, b, r)
        _check_refinement(val, ref, "homogeneous norm at T=%g" % T)
        rows.append((T, val))
    slope, intercept, resid = fit_loglog([T for T, _ in rows], [v for _, v in rows])
    return ExperimentReport(
        name="xsb-homogeneous",
        params={"r": r, "b": b, "s": s, "mode": mode, "window": window, "ntimes": ntimes},
        columns=["T", "norm"],
        rows=rows,
        seed=0,
        trials=len(rows),
        slope=slope,
        intercept=intercept,
        residual=resid,
        footer={"target_slope": 1.0 / r - b},
    )


def bench_linear_inhomogeneous(
    r,
    b,
    beta,
    T_list,
    mode=3,
    s=0.0,
    window=DEFAULT_WINDOW,
    ntimes=DEFAULT_TIME_POINTS,
):
    """Gain of the Duhamel map chi(t/T) int_0^t e^{i(t-tau) Lap} F against T.

    The forcing is a single spatial mode with a time profile of width
    proportional to T, so that ||F||_{X^{s,beta}_r} tracks the small-T
    regime; the fitted slope of the ratio tracks 1 + beta - b.
    """
    geom = TorusGeometry(1, (1.0,), (64,))
    lam = _freq_sq(geom)
    nsq = float(lam[mode % geom.grid[0]])
    rows = []
    for T in T_list:

        def forcing_coeffs(ntp):
            dt = 2.0 * window / ntp
            times = -window + dt * np.arange(ntp)
            # free-wave phase keeps the forcing parabolically concentrated
            prof = time_cutoff(times / T) * np.exp(-1j * times * nsq)
            c = np.zeros((ntp, geom.grid[0]), dtype=np.complex128)
            c[:, mode % geom.grid[0]] = prof
            return SpaceTimeField(geom, window, c)

        def ratio_for(ntp):
            F = forcing_coeffs(ntp)
            num = xsb_norm(duhamel_wave(F, T, window, ntp), s, b, r)
            den = xsb_norm(F, s, beta, r)
            return num / den

        val = ratio_for(ntimes)
        _check_refinement(val, ratio_for(2 * ntimes), "inhomogeneous ratio at T=%g" % T)
        rows.append((T, val))
    slope, intercept, resid = fit_loglog([T for T, _ in rows], [v for _, v in rows])
    return ExperimentReport(
        name="xsb-inhomogeneous",
        params={
            "r": r,
            "b": b,
            "beta": beta,
            "s": s,
            "mode": mode,
            "window": window,
            "ntimes": ntimes,
        },
        columns=["T", "ratio"],
        rows=rows,
        seed=0,
        trials=len(rows),
        slope=slope,
        intercept=intercept,
        residual=resid,
        footer={"target_slope": 1.0 + beta - b},
    )
