"""Averages of reduced maps: over network sites, over time, and over a
staggered-quench ensemble of clusters.

Phase-covariant maps are closed under convex combination, so the entry-wise
mean of transfer matrices is again a valid (and physically meaningful)
channel. Long-time averages of the closed-form families settle on steady
channels whose lambda3/tau3 are polynomials in the elementary symmetric
functions e_k of the environment z values with exact rational coefficients;
those tables live here. Residual oscillations around the steady values decay
like t_J/(N t), and `fluctuations` fits the bounding constant.

Times are absolute throughout; callers divide by network.t_scale(J_perp)
when they want t/t_J units.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .network import NetworkSpec, QuenchSchedule, build_hamiltonian, t_scale
from .qlinalg import HermitianEvolver
from .reduced import transfer_from_unitary

# Default field-to-coupling ratio used when a "generic" (incommensurate)
# uniform field is needed: irrational, so the precession phase never locks
# to the coupling frequencies and the time-averaged lambda1 vanishes.
GENERIC_H_RATIO = (math.sqrt(5.0) - 1.0) / 2.0


def esym(z, k: int):
    """Elementary symmetric polynomial e_k of the values z.

    Stable one-pass recurrence (coefficients of prod(x + z_i)), no subset
    enumeration. e_0 = 1. Exact when fed Fractions or ints; floats stay
    floats.
    """
    vals = tuple(z)
    if not 0 <= k <= len(vals):
        raise ValueError(f"k={k} out of range for {len(vals)} values")
    e = [1] + [0] * k
    for v in vals:
        for j in range(k, 0, -1):
            e[j] = e[j] + v * e[j - 1]
    return e[k]


def network_average(maps) -> np.ndarray:
    """Entry-wise mean of a collection of 4x4 transfer matrices."""
    stack = np.asarray(list(maps), dtype=float)
    if stack.size == 0:
        raise ValueError("need at least one map to average")
    if stack.ndim != 3 or stack.shape[1:] != (4, 4):
        raise ValueError(f"expected shape (m, 4, 4), got {stack.shape}")
    return stack.mean(axis=0)


def time_average(times, transfers) -> np.ndarray:
    """Running trapezoidal mean of a transfer-matrix series.

    times must be a uniform grid starting at 0; entry k of the result is
    (1/t_k) * integral_0^{t_k} of the series. Entry 0 is the series head.
    The averaged transverse block is read off as lambda1_bar =
    hypot(avg[1, 1], avg[2, 1]); averaging never mixes the z sector in.
    """
    t = np.asarray(times, dtype=float)
    y = np.asarray(transfers, dtype=float)
    if t.ndim != 1 or t.size < 2:
        raise ValueError("need a 1-d time grid with at least 2 points")
    if t[0] != 0.0:
        raise ValueError("time grid must start at t = 0")
    dt = np.diff(t)
    if np.any(dt <= 0) or np.max(np.abs(dt - dt[0])) > 1e-9 * dt[0]:
        raise ValueError("time grid must be uniform and increasing")
    if y.shape != (t.size, 4, 4):
        raise ValueError(f"expected transfers of shape ({t.size}, 4, 4), got {y.shape}")
    segments = 0.5 * (y[1:] + y[:-1]) * dt[:, None, None]
    out = np.empty_like(y)
    out[0] = y[0]
    out[1:] = np.cumsum(segments, axis=0) / t[1:, None, None]
    return out


# ---------------------------------------------------------------------------
# Steady channels
# ---------------------------------------------------------------------------

_F = Fraction

# lambda3_inf = a_0 + sum_k a_k e_k / C(N, k) over even k >= 2;
# tau3_inf = (1 - a_0) e_1 / N - sum_k a_k e_{k+1} / C(N, k+1).
_STEADY_COMPLETE = {
    3: {0: _F(5, 9)},
    4: {0: _F(7, 16), 2: _F(3, 16)},
    5: {0: _F(7, 15), 2: _F(16, 75)},
    6: {0: _F(59, 144), 2: _F(5, 12), 4: _F(-5, 48)},
}
_STEADY_RING5 = {0: _F(71, 225), 2: _F(2, 45)}
# Ring N=4 does not fit the pattern: the e_2 term is corrected by the two
# antipodal pairs, and the e_3 term enters with the opposite sign.
_STEADY_RING4 = {0: _F(7, 16), 2: _F(3, 16)}


@dataclass(frozen=True)
class SteadyChannel:
    """Late-time network-and-time-averaged channel: lambda1 -> 0, z sector
    fixed by exact rational polynomials in the environment e_k."""

    n: int
    topology: str
    coeffs: dict
    lambda3: float
    tau3: float
    lambda3_exact: Fraction
    tau3_exact: Fraction
    esym_scaled: tuple

    def constraint_ok(self) -> bool:
        """tau +/- lambda = +/-1 must hold exactly at z_i all +/-1."""
        e1 = self.esym_scaled[1] * self.n
        if e1 == self.n:
            return self.tau3_exact + self.lambda3_exact == 1
        if e1 == -self.n:
            return self.tau3_exact - self.lambda3_exact == -1
        return True


def _general_steady(n: int, coeffs: dict, e):
    lam = coeffs[0]
    tau = (1 - coeffs[0]) * e[1] / n
    for k, a_k in coeffs.items():
        if k == 0:
            continue
        lam = lam + a_k * e[k] / math.comb(n, k)
        tau = tau - a_k * e[k + 1] / math.comb(n, k + 1)
    return lam, tau


def steady_channel(n: int, topology: str, z, coeffs: dict | None = None) -> SteadyChannel:
    """Steady-channel values for the supported (N, topology) table.

    z lists all N site polarizations (absolute site order; for the N=4 ring
    the antipodal pairs are (z[0], z[2]) and (z[1], z[3])). Arithmetic runs
    in exact rationals; pass `coeffs` as {0: a0, 2: a2, ...} to evaluate the
    general even/odd-N form with caller-supplied coefficients instead of the
    built-in tables.
    """
    zf = [Fraction(v) for v in z]
    if len(zf) != n:
        raise ValueError(f"need {n} site values, got {len(zf)}")
    e = [esym(zf, k) for k in range(n + 1)]

    if coeffs is not None:
        coeffs = {int(k): Fraction(v) for k, v in coeffs.items()}
        k_max = n - 2 if n % 2 == 0 else n - 3
        for k in coeffs:
            if k != 0 and (k % 2 != 0 or not 2 <= k <= k_max):
                raise ValueError(f"coefficient index {k} invalid for N={n}")
        if 0 not in coeffs:
            raise ValueError("coefficient dict must include the constant a_0")
        lam, tau = _general_steady(n, coeffs, e)
    elif topology == "complete" and n in _STEADY_COMPLETE:
        coeffs = _STEADY_COMPLETE[n]
        lam, tau = _general_steady(n, coeffs, e)
    elif topology == "ring" and n == 5:
        coeffs = _STEADY_RING5
        lam, tau = _general_steady(n, coeffs, e)
    elif topology == "ring" and n == 4:
        coeffs = _STEADY_RING4
        pair_corr = e[2] - 4 * (zf[0] * zf[2] + zf[1] * zf[3])
        lam = coeffs[0] + coeffs[2] * pair_corr / 6
        tau = (1 - coeffs[0]) * e[1] / 4 + _F(1, 16) * e[3] / 4
    else:
        raise ValueError(
            f"no steady table for N={n} topology={topology!r}; supply coeffs"
        )

    scaled = tuple(e[k] / math.comb(n, k) for k in range(n + 1))
    return SteadyChannel(
        n=n,
        topology=topology,
        coeffs=dict(coeffs),
        lambda3=float(lam),
        tau3=float(tau),
        lambda3_exact=lam,
        tau3_exact=tau,
        esym_scaled=scaled,
    )


# ---------------------------------------------------------------------------
# Fluctuations around the steady channel
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FluctuationSeries:
    """Relative deviations of running averages from their steady values.

    delta's are (avg - steady)/steady when the steady value is nonzero
    (normalized flag True), absolute deviations otherwise. c_* is the
    fitted bounding constant: sup of |delta| * N * t/t_J over the tail
    t > onset * t_J.
    """

    t_over_tj: np.ndarray
    delta_lambda3: np.ndarray
    delta_tau3: np.ndarray
    c_lambda3: float
    c_tau3: float
    lambda3_normalized: bool
    tau3_normalized: bool
    n: int
    onset: float


def fluctuations(times, avg_series, steady: SteadyChannel, t_j: float,
                 onset: float = 20.0) -> FluctuationSeries:
    """Fluctuation series and bounding constants of running averages.

    avg_series is the output of time_average on the same `times` grid.
    The fit needs samples beyond onset * t_J.
    """
    t = np.asarray(times, dtype=float)
    avg = np.asarray(avg_series, dtype=float)
    if avg.shape != (t.size, 4, 4):
        raise ValueError("avg_series must align with times")
    if t_j <= 0:
        raise ValueError("t_j must be positive")
    tt = t / t_j
    tail = tt > onset
    if not np.any(tail):
        raise ValueError(f"series ends before the onset {onset} t_J; extend the grid")

    def deviation(series, steady_exact, steady_float):
        if steady_exact == 0:
            return series.copy(), False
        return (series - steady_float) / steady_float, True

    d_lam, lam_norm = deviation(avg[:, 3, 3], steady.lambda3_exact, steady.lambda3)
    d_tau, tau_norm = deviation(avg[:, 3, 0], steady.tau3_exact, steady.tau3)
    c_lam = float(np.max(np.abs(d_lam[tail]) * steady.n * tt[tail]))
    c_tau = float(np.max(np.abs(d_tau[tail]) * steady.n * tt[tail]))
    return FluctuationSeries(
        t_over_tj=tt,
        delta_lambda3=d_lam,
        delta_tau3=d_tau,
        c_lambda3=c_lam,
        c_tau3=c_tau,
        lambda3_normalized=lam_norm,
        tau3_normalized=tau_norm,
        n=steady.n,
        onset=onset,
    )


# ---------------------------------------------------------------------------
# Staggered-quench ensemble
# ---------------------------------------------------------------------------


def quench_demo(n_cl: int, n: int = 3, schedule=None, t_eval: float | None = None,
                h: float | None = None, j: float = 1.0, env_z=None,
                focal: int = 0) -> np.ndarray:
    """Cluster-averaged reduced map of a staggered-quench ensemble.

    Each of the n_cl identical clusters sits idle until its own switch-on
    time, after which the uniform field h and the isotropic all-to-all
    coupling j act together. Cluster k's map is taken from its switch-on:
    the pre-quench segment only rotates the focal spin about z and leaves
    the diagonal partners untouched, so each cluster contributes the
    always-on map evaluated at its own elapsed time t_eval - t_on. With
    switch-on times spread over a window much longer than t_J, the average
    over clusters reproduces the running time average of a single always-on
    cluster (up to O(t_J/window) discretization); a cluster whose quench
    lies in the future contributes the identity map.

    schedule defaults to n_cl times uniform over [0, 50 t_J]; t_eval
    defaults to the last switch-on time, so elapsed coupled times span the
    whole window. Returns the averaged 4x4 transfer matrix.
    """
    if h is None:
        h = GENERIC_H_RATIO * 2.0 * j
    t_j = t_scale(2.0 * j)  # bond normalization doubles the isotropic coupling
    if schedule is None:
        schedule = np.linspace(0.0, 50.0 * t_j, n_cl) if n_cl > 1 else np.zeros(1)
    schedule = np.asarray(schedule, dtype=float)
    if schedule.shape != (n_cl,):
        raise ValueError("schedule must list one switch-on time per cluster")
    if t_eval is None:
        t_eval = float(schedule.max())
    window = float(schedule.max() - schedule.min())
    if n_cl > 1 and window < t_j:
        warnings.warn(
            "switch-on times span less than one t_J; the cluster average "
            "will not resemble a time average", stacklevel=2)
    if env_z is None:
        env_z = [1.0] * (n - 1)
    env = [(0.0, 0.0, float(v)) for v in env_z]

    spec = NetworkSpec(topology="quench", n=n, h=h, j_perp=j,
                       quench=QuenchSchedule(n_cl=n_cl, t_on=(0.0,) * n_cl))
    full = HermitianEvolver(build_hamiltonian(spec, t=0.0))

    acc = np.zeros((4, 4))
    for t_on in schedule:
        dt = t_eval - t_on
        if dt <= 0.0:
            acc += np.eye(4)  # quench still in the future for this cluster
            continue
        acc += transfer_from_unitary(full.unitary(dt), focal, env)
    return acc / n_cl
