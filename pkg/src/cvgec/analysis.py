"""Sweeps and searches over the protocol: variance, fidelity, entanglement.

The noise axis ``eps`` is always channel 1's excess noise in SNU at the
channel output (see :func:`cvgec.channel.standard_two_channel`).  Sweep
points are independent pure computations; results follow the axis order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import NoiseSource, ChannelModel, standard_two_channel
from .fidelity import fidelity
from .protocol import (
    ProtocolConfig,
    corrected_channel,
    incoherent_strategy,
    optimal_splitting_for,
    uncorrected_channel,
)
from .states import GaussianState, as_snu, displace, duan_simon, vacuum_state
from .transforms import two_mode_squeezed

#: CSV column order shared by both sweep commands.
SWEEP_COLUMNS = (
    "eps_snu",
    "var_x_corr_snu",
    "var_p_corr_snu",
    "var_x_uncorr_snu",
    "var_p_uncorr_snu",
    "fid_corr",
    "fid_uncorr",
    "fid_incoh",
    "insep_corr",
    "insep_uncorr",
)


@dataclass(frozen=True)
class SweepResult:
    """Tabulated curves against the noise axis plus a config echo."""

    axis: np.ndarray
    series: dict
    metadata: dict

    def __post_init__(self):
        axis = np.array(self.axis, dtype=float)
        axis.flags.writeable = False
        object.__setattr__(self, "axis", axis)
        series = {k: np.asarray(v, dtype=float) for k, v in self.series.items()}
        for name, values in series.items():
            if values.shape != axis.shape:
                raise ValueError(f"series {name!r} does not match the axis length")
        for name in ("fid_corr", "fid_uncorr", "fid_incoh"):
            if name in series:
                vals = series[name]
                good = vals[~np.isnan(vals)]
                if np.any(good < 0) or np.any(good > 1):
                    raise ValueError("fidelities must lie in [0, 1]")
        for name in ("insep_corr", "insep_uncorr"):
            if name in series:
                good = series[name][~np.isnan(series[name])]
                if np.any(good < 0):
                    raise ValueError("inseparabilities must be nonnegative")
        object.__setattr__(self, "series", series)


def coherent_sweep(
    g_ratio: float,
    eta: float,
    xi: float,
    amplitude: tuple[float, float],
    eps_grid,
) -> SweepResult:
    """Variance and fidelity curves for a coherent input state.

    For each noise level the corrected (optimal splitting), uncorrected
    (direct channel-1 transmission) and incoherent (measure/feedforward)
    outputs are evaluated.  Fidelities compare against the original input
    with no gain rescaling; displacement-corrected values are stashed in
    the metadata alongside the channel-2 uncorrected alternative.
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    if eps_grid.size == 0:
        raise ValueError("empty noise grid")
    probe = displace(vacuum_state(1), 0, amplitude[0], amplitude[1])
    cols = {name: np.empty(eps_grid.size) for name in SWEEP_COLUMNS[1:]}
    alt = {name: np.empty(eps_grid.size) for name in ("var_x", "var_p", "fid")}
    shifted = {name: np.empty(eps_grid.size) for name in ("fid_corr", "fid_uncorr")}
    for k, eps in enumerate(eps_grid):
        cfg = _two_channel_config(eps, g_ratio, eta, xi)
        corr = corrected_channel(cfg, probe)
        unc = uncorrected_channel(cfg, probe, channel=0)
        unc2 = uncorrected_channel(cfg, probe, channel=1)
        inc = incoherent_strategy(cfg, probe)
        cols["var_x_corr_snu"][k] = as_snu(corr.cov[0, 0])
        cols["var_p_corr_snu"][k] = as_snu(corr.cov[1, 1])
        cols["var_x_uncorr_snu"][k] = as_snu(unc.cov[0, 0])
        cols["var_p_uncorr_snu"][k] = as_snu(unc.cov[1, 1])
        cols["fid_corr"][k] = fidelity(corr, probe)
        cols["fid_uncorr"][k] = fidelity(unc, probe)
        cols["fid_incoh"][k] = fidelity(inc, probe)
        cols["insep_corr"][k] = np.nan
        cols["insep_uncorr"][k] = np.nan
        alt["var_x"][k] = as_snu(unc2.cov[0, 0])
        alt["var_p"][k] = as_snu(unc2.cov[1, 1])
        alt["fid"][k] = fidelity(unc2, probe)
        shifted["fid_corr"][k] = fidelity(GaussianState(probe.mean, corr.cov), probe)
        shifted["fid_uncorr"][k] = fidelity(GaussianState(probe.mean, unc.cov), probe)
    metadata = {
        "sweep": "coherent",
        "g_ratio": g_ratio,
        "eta": eta,
        "xi": xi,
        "amplitude": list(amplitude),
        "uncorrected_channel_2": {k: v.tolist() for k, v in alt.items()},
        "displacement_corrected": {k: v.tolist() for k, v in shifted.items()},
    }
    return SweepResult(eps_grid, cols, metadata)


def entanglement_sweep(
    r: float,
    eta: float,
    xi: float,
    eps_grid,
    g_ratio: float = 1.0,
) -> SweepResult:
    """Inseparability of a two-mode squeezed state, one half transmitted.

    Mode 1 of the entangled pair rides the protocol; mode 0 stays local.
    Variance columns report the transmitted mode.  Fidelity columns are
    NaN (multimode fidelity is out of scope).
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    if eps_grid.size == 0:
        raise ValueError("empty noise grid")
    pair = two_mode_squeezed(r)
    cols = {name: np.empty(eps_grid.size) for name in SWEEP_COLUMNS[1:]}
    for k, eps in enumerate(eps_grid):
        cfg = _two_channel_config(eps, g_ratio, eta, xi)
        corr = corrected_channel(cfg, pair, signal_mode=1)
        unc = uncorrected_channel(cfg, pair, signal_mode=1, channel=0)
        cols["var_x_corr_snu"][k] = as_snu(corr.cov[2, 2])
        cols["var_p_corr_snu"][k] = as_snu(corr.cov[3, 3])
        cols["var_x_uncorr_snu"][k] = as_snu(unc.cov[2, 2])
        cols["var_p_uncorr_snu"][k] = as_snu(unc.cov[3, 3])
        cols["fid_corr"][k] = np.nan
        cols["fid_uncorr"][k] = np.nan
        cols["fid_incoh"][k] = np.nan
        cols["insep_corr"][k] = duan_simon(corr, (0, 1))
        cols["insep_uncorr"][k] = duan_simon(unc, (0, 1))
    metadata = {
        "sweep": "entanglement",
        "r": r,
        "eta": eta,
        "xi": xi,
        "g_ratio": g_ratio,
        "inseparability_threshold": 2.0,
    }
    return SweepResult(eps_grid, cols, metadata)


def inseparability_infimum(
    eps: float,
    g_ratio: float,
    eta: float,
    xi: float,
    strategy: str,
    r_max: float = 10.0,
) -> float:
    """Smallest inseparability over input squeezing r in [0, r_max]."""
    if strategy not in ("corrected", "uncorrected"):
        raise ValueError("strategy must be 'corrected' or 'uncorrected'")
    cfg = _two_channel_config(eps, g_ratio, eta, xi)

    def insep(r):
        pair = two_mode_squeezed(r)
        if strategy == "corrected":
            out = corrected_channel(cfg, pair, signal_mode=1)
        else:
            out = uncorrected_channel(cfg, pair, signal_mode=1, channel=0)
        return duan_simon(out, (0, 1))

    r_opt, value = golden_section(insep, 0.0, r_max, tol=1e-9)
    return min(value, insep(0.0), insep(r_max))


def entanglement_breaking_point(
    g_ratio: float,
    eta: float,
    xi: float,
    strategy: str,
    r_max: float = 10.0,
    tol: float = 1e-6,
    eps_limit: float = 1000.0,
    method: str = "bisect",
) -> float:
    """Smallest noise level at which no input state stays entangled.

    Bisects (or grid-scans with linear interpolation, ``method='scan'``)
    the infimum of the inseparability over input squeezing; returns
    ``math.inf`` if the channel never breaks below ``eps_limit``, which is
    the ideal corrected case.
    """

    def gap(eps):
        return inseparability_infimum(eps, g_ratio, eta, xi, strategy, r_max) - 2.0

    if gap(0.0) >= 0.0:
        return 0.0
    hi = 1.0
    while gap(hi) < 0.0:
        hi *= 2.0
        if hi > eps_limit:
            return math.inf
    if method == "scan":
        grid = np.linspace(0.0, hi, 101)
        values = np.array([gap(e) for e in grid])
        k = int(np.argmax(values >= 0.0))
        # affine between neighbouring grid points
        e0, e1 = grid[k - 1], grid[k]
        v0, v1 = values[k - 1], values[k]
        return float(e0 - v0 * (e1 - e0) / (v1 - v0))
    lo = hi / 2.0 if hi > 1.0 else 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimize_splitting(
    g1: float,
    g2: float,
    xi: float = 0.0,
    eta: float = 1.0,
    objective: str = "variance",
    eps_snu: float = 10.0,
    amplitude: tuple[float, float] = (2.0, 0.0),
    tol: float = 1e-7,
) -> tuple[float, float, float]:
    """Numeric search for the best encoder/decoder transmissivities.

    The output variance does not depend on T_e for vacuum-variance probes
    (the encoder is passive), so ``objective='variance'`` searches T_d
    alone and reports T_e = T_d; this identifies the optimum sharply.
    ``objective='fidelity'`` maximizes the coherent-probe fidelity with a
    nested golden-section search over (T_e, T_d); its T_e direction is
    quartically flat near the optimum (only the mean attenuation depends
    on T_e, through the encoder/decoder overlap), so expect a few 1e-4 of
    slack on that coordinate.  At xi = 0 both recover g2 / (g1 + g2).
    """
    objective_fn = _objective(g1, g2, xi, eta, objective, eps_snu, amplitude)
    if objective == "variance":
        td, value = golden_section(lambda t: objective_fn(t, t), 0.0, 1.0, tol)
        return td, td, value

    def profile(te):
        _, value = golden_section(lambda td: objective_fn(te, td), 0.0, 1.0, tol)
        return value

    te_opt, _ = golden_section(profile, 0.0, 1.0, tol)
    td_opt, value = golden_section(lambda td: objective_fn(te_opt, td), 0.0, 1.0, tol)
    return te_opt, td_opt, value


def grid_scan_splitting(
    g1: float,
    g2: float,
    xi: float = 0.0,
    eta: float = 1.0,
    objective: str = "fidelity",
    eps_snu: float = 10.0,
    amplitude: tuple[float, float] = (2.0, 0.0),
    n: int = 200,
) -> tuple[float, float, float]:
    """Exhaustive n x n scan of the same objective, as an optimizer oracle."""
    objective_fn = _objective(g1, g2, xi, eta, objective, eps_snu, amplitude)
    grid = np.linspace(0.0, 1.0, n)
    best = (math.inf, 0.0, 0.0)
    for te in grid:
        for td in grid:
            value = objective_fn(te, td)
            if value < best[0]:
                best = (value, te, td)
    return best[1], best[2], best[0]


def golden_section(f, a: float, b: float, tol: float = 1e-7) -> tuple[float, float]:
    """Minimize a unimodal function on [a, b]; returns (x, f(x))."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    x1 = b - inv_phi * (b - a)
    x2 = a + inv_phi * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - inv_phi * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + inv_phi * (b - a)
            f2 = f(x2)
    x = 0.5 * (a + b)
    return x, f(x)


def write_sweep_csv(result: SweepResult, stream) -> None:
    """Fixed-column CSV, one row per noise level, full double precision."""
    stream.write(",".join(SWEEP_COLUMNS) + "\n")
    for k, eps in enumerate(result.axis):
        row = [format(eps, ".17g")]
        row += [format(result.series[name][k], ".17g") for name in SWEEP_COLUMNS[1:]]
        stream.write(",".join(row) + "\n")


def _two_channel_config(eps: float, g_ratio: float, eta: float, xi: float) -> ProtocolConfig:
    model = standard_two_channel(eps, g_ratio, eta, xi)
    t = optimal_splitting_for(model)
    return ProtocolConfig(t, t, model)


def _objective(g1, g2, xi, eta, objective, eps_snu, amplitude):
    if objective not in ("fidelity", "variance"):
        raise ValueError("objective must be 'fidelity' or 'variance'")
    if g1 <= 0 or g2 <= 0:
        raise ValueError("noise magnitudes must be positive")
    variance = 0.5 * eps_snu / g1
    source = NoiseSource(np.sqrt([g1, g2]), variance)
    model = ChannelModel(2, eta, 0.0, (source,), xi)
    probe = displace(vacuum_state(1), 0, amplitude[0], amplitude[1])

    def fn(te, td):
        cfg = ProtocolConfig(te, td, model)
        out = corrected_channel(cfg, probe)
        if objective == "fidelity":
            return -fidelity(out, probe)
        return as_snu(0.5 * (out.cov[0, 0] + out.cov[1, 1]) - 0.5)

    return fn
