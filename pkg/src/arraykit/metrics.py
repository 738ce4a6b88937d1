"""Array metrics from scattering matrices and excitation plans.

Active reflection and VSWR, orthogonal-port coupling, normalized gain,
ideal embedded-element gain, array-factor patterns, and batched scan
sweeps with stable CSV schemas. All dB outputs substitute a -200 dB floor
for -inf; reported VSWR is capped at 100 while raw gamma is always carried
alongside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C0, DB_FLOOR, VSWR_CAP
from .excitation import ExcitationPlan, ScanSpec, TaperSpec, build_plan, plane_phi
from .lattice import LatticeBasis, aperture_positions, centermost_index
from .snp import NetworkData, PortMap

METRICS = ("vswr", "coupling", "gain")


class MetricError(ValueError):
    """Undefined metric request (zero excitation at the probed port, etc.)."""


@dataclass(frozen=True)
class MetricSweep:
    """One metric vs frequency for one labeled scan direction."""

    metric: str
    label: str
    theta_deg: float
    frequencies: np.ndarray
    values: np.ndarray
    gamma: np.ndarray | None = None


@dataclass(frozen=True)
class Pattern:
    """Realized-gain cut: theta samples on one azimuth plane at one frequency."""

    frequency: float
    label: str
    phi_deg: float
    theta_deg: np.ndarray
    field: np.ndarray
    gain_dbi: np.ndarray


def _floored_log10(x, scale: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.full(x.shape, DB_FLOOR)
    np.log10(x, out=out, where=x > 0)
    return np.maximum(scale * out, DB_FLOOR)


def db10(x) -> np.ndarray:
    """10*log10 with the -200 dB floor."""
    return _floored_log10(x, 10.0)


def db20(x) -> np.ndarray:
    """20*log10 with the -200 dB floor."""
    return _floored_log10(x, 20.0)


def _excite(net: NetworkData, weights: np.ndarray) -> np.ndarray:
    """Outgoing waves b = S a for a single plan or per-frequency weights."""
    w = np.asarray(weights, dtype=complex)
    if w.ndim == 1:
        return net.s @ w
    return np.einsum("fpq,fq->fp", net.s, w)


def active_reflection(net: NetworkData, plan: ExcitationPlan, port: int) -> np.ndarray:
    """Active reflection at a port: (sum_q S_pq a_q) / a_p, per frequency."""
    if not 0 <= port < net.port_count:
        raise MetricError(f"port {port} out of range")
    if len(plan.weights) != net.port_count:
        raise MetricError(f"plan covers {len(plan.weights)} ports, network has {net.port_count}")
    a_p = plan.weights[port]
    if a_p == 0:
        raise MetricError(f"active reflection undefined: zero plan weight at port {port}")
    return _excite(net, plan.weights)[:, port] / a_p


def vswr(gamma) -> np.ndarray:
    """(1 + |g|) / (1 - |g|); |g| >= 1 reports the 100.0 sentinel."""
    mag = np.abs(np.asarray(gamma))
    with np.errstate(divide="ignore"):
        out = np.where(mag < 1.0, (1.0 + mag) / np.where(mag < 1.0, 1.0 - mag, 1.0), VSWR_CAP)
    return out if out.shape else float(out)


def orthogonal_coupling(
    net: NetworkData,
    port_map: PortMap,
    plan: ExcitationPlan,
    element: tuple[int, int],
    excited_pol: str,
) -> np.ndarray:
    """Coupling (dB) into the orthogonal-pol port of one element.

    20*log10 of the outgoing wave at the element's opposite-polarization
    port over the plan's incident wave at the co-located excited-pol port.
    """
    excited_pol = str(excited_pol).lower()
    other = "y" if excited_pol == "x" else "x"
    p_obs = port_map.port_of(element, other)
    p_co = port_map.port_of(element, excited_pol)
    a_co = plan.weights[p_co]
    if a_co == 0:
        raise MetricError(f"zero plan weight at the co-located {excited_pol}-pol port")
    b = _excite(net, plan.weights)[:, p_obs]
    return db20(np.abs(b) / abs(a_co))


def normalized_gain(gamma, efficiency: float = 1.0) -> np.ndarray:
    """(1 - |gamma|^2) * efficiency: fraction of incident power radiated."""
    if not 0.0 < efficiency <= 1.0:
        raise MetricError(f"efficiency must be in (0, 1], got {efficiency}")
    mag2 = np.abs(np.asarray(gamma)) ** 2
    out = np.clip(1.0 - mag2, 0.0, None) * efficiency
    return out if out.shape else float(out)


def ideal_embedded_gain(area: float, frequency: float, theta_deg) -> np.ndarray:
    """Ideal embedded element: 10*log10((4*pi*A/lambda^2) * cos(theta)) dBi.

    theta is measured from broadside, 0 to 90 degrees; the broadside peak is
    the cell-area gain 4*pi*A/lambda^2 and theta = 90 floors at -200 dBi.
    """
    if not (area > 0 and frequency > 0):
        raise MetricError("area and frequency must be positive")
    th = np.asarray(theta_deg, dtype=float)
    if np.any(th < 0) or np.any(th > 90):
        raise MetricError("theta_deg must lie in [0, 90]")
    lam = C0 / frequency
    cos_t = np.cos(np.radians(th))
    cos_t = np.where(cos_t < 1e-12, 0.0, cos_t)  # exact floor at theta = 90
    return db10((4 * math.pi * area / lam**2) * cos_t)


def array_factor(positions: np.ndarray, weights: np.ndarray, frequency: float, theta_deg, phi_deg: float) -> np.ndarray:
    """Complex AF(theta) = sum_n w_n * exp(+1j * k_t(theta, phi) . R_n)."""
    pos = np.atleast_2d(np.asarray(positions, dtype=float))
    w = np.asarray(weights, dtype=complex)
    if pos.shape[0] != w.size or pos.shape[0] == 0:
        raise MetricError("positions and weights must be the same nonzero length")
    k0 = 2 * math.pi * frequency / C0
    th = np.radians(np.asarray(theta_deg, dtype=float))
    phi = math.radians(phi_deg)
    kt = k0 * np.sin(th)[..., None] * np.array([math.cos(phi), math.sin(phi)])
    return np.exp(1j * (kt @ pos.T)) @ w


def array_factor_pattern(
    positions: np.ndarray,
    weights: np.ndarray,
    frequency: float,
    theta_deg,
    phi_deg: float,
    cell_area: float,
    label: str = "",
) -> Pattern:
    """Realized-gain cut: ideal embedded element times the normalized |AF|^2.

    ``gain_dbi = ideal_embedded_gain + 20*log10(|AF| / sum|w_n|)``; a single
    unit-weight element reproduces the ideal element exactly. The theta grid
    spans [-90, 90] on the phi cut; negative theta means the (|theta|,
    phi + 180) direction and the element term uses |theta| (cos is even).
    """
    th = np.asarray(theta_deg, dtype=float)
    if np.any(np.abs(th) > 90):
        raise MetricError("pattern theta grid must lie within [-90, 90]")
    af = array_factor(positions, weights, frequency, th, phi_deg)
    norm = np.abs(np.asarray(weights)).sum()
    element_dbi = ideal_embedded_gain(cell_area, frequency, np.abs(th))
    gain = np.maximum(element_dbi + db20(np.abs(af) / norm), DB_FLOOR)
    return Pattern(float(frequency), label or f"phi{phi_deg:g}", float(phi_deg), th, af, gain)


# --- scan sweeps ---------------------------------------------------------------


def parse_scan_label(label: str, pol: str) -> tuple[str, float, float]:
    """Turn a scan label into (label, theta_deg, phi_deg).

    "broadside" means theta 0; "E60"/"H30"/"D45" combine a principal plane
    letter with the scan angle in degrees; "T<theta>P<phi>" gives both
    angles explicitly.
    """
    text = str(label).strip()
    low = text.lower()
    if low == "broadside":
        return "broadside", 0.0, 0.0
    if low.startswith("t") and "p" in low:
        t_part, p_part = low[1:].split("p", 1)
        return text, float(t_part), float(p_part)
    if low[:1] in ("e", "h", "d") and low[1:]:
        return text, float(low[1:]), plane_phi(low[0], pol)
    raise MetricError(f"cannot parse scan label {label!r}")


def sweep(
    net: NetworkData,
    port_map: PortMap,
    basis: LatticeBasis,
    aperture,
    taper: TaperSpec,
    scans,
    metric: str,
    pol: str = "x",
    element: tuple[int, int] | None = None,
    efficiency: float = 1.0,
) -> list[MetricSweep]:
    """Evaluate one metric over frequency for each labeled scan.

    ``scans`` is a list of labels understood by :func:`parse_scan_label`.
    Plans are rebuilt per frequency (the linear scan phase is frequency
    dependent); the probed port is the centermost element unless given.
    An empty scan list yields an empty result.
    """
    if metric not in METRICS:
        raise MetricError(f"metric must be one of {METRICS}, got {metric!r}")
    aperture = list(aperture)
    if element is None:
        element = centermost_index(basis, aperture)
    pol = str(pol).lower()
    port = port_map.port_of(element, pol)

    out: list[MetricSweep] = []
    for label in scans:
        name, theta, phi = parse_scan_label(label, pol)
        weights = np.empty((net.frequencies.size, len(port_map)), dtype=complex)
        for i, f in enumerate(net.frequencies):
            try:
                plan = build_plan(basis, aperture, port_map, taper, ScanSpec(theta, phi, float(f)), pol)
            except ValueError as exc:
                raise MetricError(f"scan {name!r} at {f:.6g} Hz: {exc}") from exc
            weights[i] = plan.weights
        b = _excite(net, weights)
        gamma = b[:, port] / weights[:, port]
        if metric == "vswr":
            values = np.asarray(vswr(gamma))
        elif metric == "gain":
            values = db10(normalized_gain(gamma, efficiency))
        else:
            other = "y" if pol == "x" else "x"
            p_obs = port_map.port_of(element, other)
            values = db20(np.abs(b[:, p_obs]) / np.abs(weights[:, port]))
        out.append(MetricSweep(metric, name, theta, net.frequencies, values, gamma))
    return out


# --- CSV tables -----------------------------------------------------------------


def vswr_table_rows(sweeps: list[MetricSweep]) -> list[str]:
    """Rows "freq_hz,plane,theta_deg,vswr,gamma_re,gamma_im" (header included)."""
    rows = ["freq_hz,plane,theta_deg,vswr,gamma_re,gamma_im"]
    for sw in sweeps:
        for f, v, g in zip(sw.frequencies, sw.values, sw.gamma):
            capped = min(float(v), VSWR_CAP)
            rows.append(f"{f:.9e},{sw.label},{sw.theta_deg:g},{capped:.9e},{g.real:.12e},{g.imag:.12e}")
    return rows


def coupling_table_rows(sweeps: list[MetricSweep]) -> list[str]:
    """Rows "freq_hz,plane,theta_deg,coupling_db" (header included)."""
    rows = ["freq_hz,plane,theta_deg,coupling_db"]
    for sw in sweeps:
        for f, v in zip(sw.frequencies, sw.values):
            rows.append(f"{f:.9e},{sw.label},{sw.theta_deg:g},{v:.9e}")
    return rows


def gain_table_rows(sweeps: list[MetricSweep]) -> list[str]:
    """Rows "freq_hz,plane,theta_deg,gain_db" (header included)."""
    rows = ["freq_hz,plane,theta_deg,gain_db"]
    for sw in sweeps:
        for f, v in zip(sw.frequencies, sw.values):
            rows.append(f"{f:.9e},{sw.label},{sw.theta_deg:g},{v:.9e}")
    return rows


def pattern_table_rows(patterns: list[Pattern]) -> list[str]:
    """Rows "freq_hz,plane,theta_deg,gain_dbi" (header included)."""
    rows = ["freq_hz,plane,theta_deg,gain_dbi"]
    for pat in patterns:
        for t, g in zip(pat.theta_deg, pat.gain_dbi):
            rows.append(f"{pat.frequency:.9e},{pat.label},{t:g},{g:.9e}")
    return rows
