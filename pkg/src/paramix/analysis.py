"""Sweep metrics, working-point fitting, and readout backaction bookkeeping.

Unit conventions: frequencies GHz, linewidths and dispersive quantities are
cyclic MHz unless a name says otherwise, times us. Angular rates (rad/us)
are formed internally as 2 pi times a cyclic MHz value; decay rates are
1/us throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .errors import (
    NoDipError,
    NonIdentifiableError,
    NumericalError,
    UnbracketedBandwidthError,
)
from .isolator import JisConfig, SweepResult, default_grid, effective_2port_sweep, with_rho
from .mixer import r_on_resonance, t_on_resonance


def to_power_dB(s) -> np.ndarray | float:
    """Power 10 log10 |s|^2 of a complex amplitude; zero maps to -inf."""
    mag2 = np.abs(np.asarray(s)) ** 2
    with np.errstate(divide="ignore"):
        out = 10.0 * np.log10(mag2)
    if np.isscalar(s) or np.ndim(s) == 0:
        return float(out)
    return out


def gamma0(gamma_a_mhz: float, gamma_b_mhz: float) -> float:
    """Zero-depth dip linewidth 2 gamma_a gamma_b / (gamma_a + gamma_b), MHz."""
    if gamma_a_mhz <= 0.0 or gamma_b_mhz <= 0.0:
        raise ValueError("linewidths must be positive")
    return 2.0 * gamma_a_mhz * gamma_b_mhz / (gamma_a_mhz + gamma_b_mhz)


@dataclass(frozen=True)
class BandwidthResult:
    """Dip location, width, and floor of one sweep direction."""

    f_dip_ghz: float
    gamma_mhz: float
    floor: float


def _crossing(f: np.ndarray, y: np.ndarray, i_lo: int, i_hi: int, target: float) -> float:
    """Linear interpolation of the frequency where y crosses target."""
    y0, y1 = y[i_lo], y[i_hi]
    if y1 == y0:
        return float(f[i_lo])
    w = (target - y0) / (y1 - y0)
    return float(f[i_lo] + w * (f[i_hi] - f[i_lo]))


def bandwidth_3dB(sweep: SweepResult, direction: str = "s12") -> BandwidthResult:
    """Width of the isolated-direction dip, 3 dB above its minimum.

    The dip floor L is the minimum of |S|^2 over the grid; the width is the
    distance between the two interpolated crossings of 2 L. Raises
    NoDipError("no dip") when the minimum sits on a grid edge and
    UnbracketedBandwidthError when either crossing lies outside the grid.
    """
    if direction not in ("s11", "s12", "s21", "s22"):
        raise ValueError("direction must be one of s11, s12, s21, s22")
    f = np.asarray(sweep.f_ghz, dtype=float)
    y = np.abs(getattr(sweep, direction)) ** 2
    if f.size < 3:
        raise NoDipError("no dip: grid too short")
    i0 = int(np.argmin(y))
    if i0 == 0 or i0 == f.size - 1:
        raise NoDipError("no dip: minimum sits on the sweep edge")
    floor = float(y[i0])
    target = 2.0 * floor

    left = None
    for j in range(i0 - 1, -1, -1):
        if y[j] >= target:
            left = _crossing(f, y, j, j + 1, target)
            break
    right = None
    for j in range(i0 + 1, f.size):
        if y[j] >= target:
            right = _crossing(f, y, j - 1, j, target)
            break
    if left is None or right is None:
        raise UnbracketedBandwidthError("3 dB points not bracketed by the sweep")
    return BandwidthResult(
        f_dip_ghz=float(f[i0]), gamma_mhz=(right - left) * 1e3, floor=floor
    )


def bandwidth_attenuation_scan(
    config: JisConfig,
    rho_values,
    direction: str = "s12",
    span_mhz: float = 300.0,
    points: int = 2001,
) -> list[tuple[float, float]]:
    """(sqrt(dip floor), dip width in MHz) for each pump strength.

    The extracted width follows gamma = gamma0 sqrt(L): deeper dips are
    narrower. Every rho supplied must produce a dip whose 3 dB points are
    bracketed by the grid (floor below 1/2 of the off-dip level).
    """
    out = []
    for rho in rho_values:
        cfg = with_rho(config, float(rho))
        sweep = effective_2port_sweep(cfg, default_grid(cfg, span_mhz, points))
        bw = bandwidth_3dB(sweep, direction)
        out.append((math.sqrt(bw.floor), bw.gamma_mhz))
    return out


@dataclass(frozen=True)
class FitResult:
    """Working point recovered from an on-resonance transmission pair."""

    rho: float
    alpha_mag: float
    residual: float
    alpha_identifiable: bool


def _refl_conv(rho, alpha):
    """On-resonance reflected and converted amplitudes, both nonnegative."""
    rho = np.asarray(rho, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    t = 2.0 * rho / (1.0 + rho**2)
    r = (1.0 - rho**2) / (1.0 + rho**2)
    conv_num = t**2 * alpha
    loop = 1.0 - (r * alpha) ** 2
    # t = 0 decouples the internal line; the loop denominator then cancels
    # exactly, so guard the removable 0/0 at (rho, alpha) = (0, 1).
    safe = np.where(loop == 0.0, 1.0, loop)
    refl = r - r * alpha * conv_num / safe
    conv = conv_num / safe
    return refl, conv


def _on_resonance_powers(rho, alpha, phi_rad: float):
    """Model (|S21|^2, |S12|^2) on resonance, broadcasting over rho/alpha."""
    refl, conv = _refl_conv(rho, alpha)
    s = np.sin(phi_rad)
    return (refl - conv * s) ** 2, (refl + conv * s) ** 2


def _signed_amplitude_roots(s21_sq: float, s12_sq: float) -> list:
    """Solve for (rho, alpha) matching the amplitude pair under both signs
    of the matched-direction amplitude; the power data cannot tell the two
    apart, so both roots are fed to the final tie-break."""
    u = math.sqrt(max(s21_sq, 0.0))
    v = math.sqrt(max(s12_sq, 0.0))
    roots = []
    coarse = np.linspace(0.0, 1.0, 21)
    cr, ca = np.meshgrid(coarse, coarse, indexing="ij")
    for sign in (1.0, -1.0):
        refl_t = (u + sign * v) / 2.0
        conv_t = (u - sign * v) / 2.0
        if conv_t < -1e-12 or refl_t < -1e-12:
            continue

        def fvec(x, rt=refl_t, ct=conv_t):
            refl, conv = _refl_conv(x[0], x[1])
            return [refl - rt, conv - ct]

        gr, gc = _refl_conv(cr, ca)
        gres = (gr - refl_t) ** 2 + (gc - conv_t) ** 2
        flat_order = np.argsort(gres, axis=None, kind="stable")[:3]
        for idx in flat_order:
            sol = optimize.least_squares(
                fvec,
                x0=[float(cr.flat[idx]), float(ca.flat[idx])],
                bounds=([0.0, 0.0], [1.0, 1.0]),
                xtol=1e-15,
                ftol=1e-15,
                gtol=1e-15,
            )
            if float(sol.fun[0] ** 2 + sol.fun[1] ** 2) < 1e-18:
                roots.append((float(sol.x[0]), float(sol.x[1])))
    return roots


def fit_rho_alpha(
    s21_sq: float,
    s12_sq: float,
    pump_port: str = "P1",
    grid_step: float = 0.005,
    flat_tol: float = 1e-12,
) -> FitResult:
    """Recover (rho, |alpha|) from on-resonance |S21|^2 and |S12|^2.

    Coarse grid search over [0, 1]^2 followed by bounded refinement of the
    summed squared residual. Ties resolve to the smallest rho, then the
    smallest |alpha|. When the residual is flat along |alpha| at the fitted
    rho (e.g. both measurements equal 1, so rho = 0 and the internal line is
    never probed), alpha_identifiable is False and |alpha| is reported as 0.
    """
    for name, val in (("s21_sq", s21_sq), ("s12_sq", s12_sq)):
        if not 0.0 <= val <= 1.0 + 1e-9:
            raise ValueError(f"{name} must lie in [0, 1]")
    if pump_port not in ("P1", "P2"):
        raise ValueError("pump_port must be 'P1' or 'P2'")
    phi = -np.pi / 2.0 if pump_port == "P1" else np.pi / 2.0

    grid = np.arange(0.0, 1.0 + grid_step / 2.0, grid_step)
    rr, aa = np.meshgrid(grid, grid, indexing="ij")
    m21, m12 = _on_resonance_powers(rr, aa, phi)
    res = (m21 - s21_sq) ** 2 + (m12 - s12_sq) ** 2
    if float(res.max() - res.min()) < flat_tol:
        raise NonIdentifiableError("residual surface is flat: working point non-identifiable")

    # the power pair is blind to the sign of the matched-direction amplitude
    # refl - conv, so two separated exact minima can coexist (amplitudes
    # swapped); polish every candidate basin and only then resolve ties
    # toward the smallest rho, then the smallest alpha, so the returned
    # point is deterministic
    res_min = float(res.min())
    cut = max(res_min * 1e6, res_min + 1e-6)
    n0, n1 = res.shape
    padded = np.pad(res, 1, constant_values=np.inf)
    is_min = np.ones_like(res, dtype=bool)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            is_min &= res <= padded[1 + di : 1 + di + n0, 1 + dj : 1 + dj + n1]
    cand_idx = np.flatnonzero(is_min.ravel() & (res.ravel() <= cut))
    cand_idx = cand_idx[np.argsort(res.ravel()[cand_idx], kind="stable")]
    starts = []
    for idx in cand_idx:
        cand = (float(rr.flat[idx]), float(aa.flat[idx]))
        if all((cand[0] - s[0]) ** 2 + (cand[1] - s[1]) ** 2 > 0.02**2 for s in starts):
            starts.append(cand)
        if len(starts) >= 12:
            break
    starts.extend(_signed_amplitude_roots(s21_sq, s12_sq))

    def resid_vec(x):
        p21, p12 = _on_resonance_powers(x[0], x[1], phi)
        return [p21 - s21_sq, p12 - s12_sq]

    polished = []
    for rho0, alpha0 in starts:
        sol = optimize.least_squares(
            resid_vec,
            x0=[rho0, alpha0],
            bounds=([0.0, 0.0], [1.0, 1.0]),
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
        )
        fun = float(sol.fun[0] ** 2 + sol.fun[1] ** 2)
        polished.append((fun, float(sol.x[0]), float(sol.x[1])))
    best = min(p[0] for p in polished)
    tie = best * (1.0 + 1e-6) + 1e-18
    residual, rho_fit, alpha_fit = min(
        (p for p in polished if p[0] <= tie), key=lambda p: (p[1], p[2])
    )

    # flat alpha direction: slide alpha across its full range at fixed rho
    probe21, probe12 = _on_resonance_powers(
        np.full_like(grid, rho_fit), grid, phi
    )
    probe = (probe21 - s21_sq) ** 2 + (probe12 - s12_sq) ** 2
    alpha_identifiable = bool(probe.max() - probe.min() >= flat_tol)
    if not alpha_identifiable:
        alpha_fit = 0.0
    return FitResult(
        rho=rho_fit,
        alpha_mag=alpha_fit,
        residual=residual,
        alpha_identifiable=alpha_identifiable,
    )


def theta_from_chi_kappa(chi_mhz: float, kappa_mhz: float) -> float:
    """Coherent-state separation angle 2 atan(chi / kappa), in degrees."""
    if chi_mhz <= 0.0 or kappa_mhz <= 0.0:
        raise ValueError("chi_mhz and kappa_mhz must be positive")
    return math.degrees(2.0 * math.atan(chi_mhz / kappa_mhz))


def eta_from_separation(
    i_over_sigma: float,
    nbar_m: float,
    kappa_mhz: float,
    t_m_us: float,
    theta_deg: float,
) -> float:
    """Measurement efficiency from the demodulated separation-to-noise ratio.

    eta = (I/sigma)^2 / (2 nbar_m kappa T_m sin^2(theta/2)) with kappa taken
    angular (2 pi x MHz = rad/us) and T_m in us.
    """
    if min(i_over_sigma, nbar_m, kappa_mhz, t_m_us) <= 0.0:
        raise ValueError("all inputs must be positive")
    kappa_ang = 2.0 * np.pi * kappa_mhz
    s = math.sin(math.radians(theta_deg) / 2.0)
    if s == 0.0:
        raise ValueError("separation angle must be nonzero")
    return i_over_sigma**2 / (2.0 * nbar_m * kappa_ang * t_m_us * s**2)


def t_phi(t1_us: float, t2e_us: float) -> float:
    """Pure dephasing time from 1/T_phi = 1/T2E - 1/(2 T1), in us.

    T1 may be inf (energy decay negligible), in which case T_phi = T2E.
    T2E at or above the 2 T1 ceiling leaves no dephasing to resolve.
    """
    if t1_us <= 0.0 or t2e_us <= 0.0:
        raise ValueError("T1 and T2E must be positive")
    if t2e_us >= 2.0 * t1_us:
        raise NumericalError("no measurable dephasing")
    rate = 1.0 / t2e_us - 1.0 / (2.0 * t1_us)
    return 1.0 / rate


def nbar_from_dephasing(t_phi_us: float, kappa_mhz: float, chi_mhz: float) -> float:
    """Resonator occupancy inferred from measurement-induced dephasing.

    Inverts Gamma_phi = nbar kappa chi^2 / (kappa^2 + chi^2) with angular
    kappa and chi; Gamma_phi = 1 / T_phi in 1/us.
    """
    if t_phi_us <= 0.0:
        raise ValueError("t_phi_us must be positive")
    if kappa_mhz <= 0.0 or chi_mhz <= 0.0:
        raise ValueError("kappa_mhz and chi_mhz must be positive")
    kappa_ang = 2.0 * np.pi * kappa_mhz
    chi_ang = 2.0 * np.pi * chi_mhz
    gamma_phi = 0.0 if math.isinf(t_phi_us) else 1.0 / t_phi_us
    return gamma_phi * (kappa_ang**2 + chi_ang**2) / (kappa_ang * chi_ang**2)


def isolation_estimate_dB(nbar_off_isolator: float, nbar_on_isolator: float) -> float:
    """Backaction suppression 10 log10(nbar_off / nbar_on) in dB."""
    if nbar_off_isolator <= 0.0 or nbar_on_isolator <= 0.0:
        raise ValueError("occupancies must be positive")
    return 10.0 * math.log10(nbar_off_isolator / nbar_on_isolator)


@dataclass(frozen=True)
class ReadoutChainRecord:
    """One row of a readout-chain characterization.

    jis/jda mark whether the isolator and the directional amplifier were in
    the chain for this row ("on"/"off"); None means not applicable.
    """

    label: str
    t1_us: float
    t2e_us: float
    kappa_mhz: float
    chi_mhz: float
    jis: str | None = None
    jda: str | None = None
    nbar_m: float | None = None
    t_m_us: float | None = None
    i_over_sigma: float | None = None


@dataclass(frozen=True)
class BackactionRow:
    label: str
    t_phi_us: float
    gamma_phi_per_us: float
    nbar: float
    nbar_ba: float
    jis: str | None
    jda: str | None


@dataclass(frozen=True)
class BackactionReport:
    """Derived dephasing/backaction table. The first record is the baseline:
    its inferred occupancy is the thermal floor subtracted from later rows."""

    rows: tuple[BackactionRow, ...]
    nbar_th: float
    isolation_db: float | None


def backaction_report(records) -> BackactionReport:
    """Backaction pipeline over an ordered record list (first row = baseline).

    Each row gets T_phi from (T1, T2E), the dephasing rate, the inferred
    occupancy, and the excess over the baseline occupancy. isolation_db
    compares the excess occupancies of the first jis="off" and first
    jis="on" rows among those with the amplifier in the chain (jda="on"),
    the matched pair that isolates the isolator's effect.
    """
    records = list(records)
    if not records:
        raise ValueError("need at least one record")
    rows = []
    nbar_th = None
    for rec in records:
        tphi = t_phi(rec.t1_us, rec.t2e_us)
        gamma_phi = 0.0 if math.isinf(tphi) else 1.0 / tphi
        nbar = nbar_from_dephasing(tphi, rec.kappa_mhz, rec.chi_mhz)
        if nbar_th is None:
            nbar_th = nbar
        rows.append(
            BackactionRow(
                label=rec.label,
                t_phi_us=tphi,
                gamma_phi_per_us=gamma_phi,
                nbar=nbar,
                nbar_ba=nbar - nbar_th,
                jis=rec.jis,
                jda=rec.jda,
            )
        )
    off = [r for r in rows if r.jis == "off" and r.jda == "on"]
    on = [r for r in rows if r.jis == "on" and r.jda == "on"]
    isolation = None
    if off and on and off[0].nbar_ba > 0.0 and on[0].nbar_ba > 0.0:
        isolation = isolation_estimate_dB(off[0].nbar_ba, on[0].nbar_ba)
    return BackactionReport(rows=tuple(rows), nbar_th=float(nbar_th), isolation_db=isolation)
