"""Touchstone v1 S-parameter files and multiport network algebra.

Covers the v1.0/v1.1 dialect only: an option line ``# <unit> S <fmt> R <z>``,
``!`` comments, RI/MA/DB value formats, the 2-port S11 S21 S12 S22 column
order, and row-major matrices with continuation lines for 3+ ports. Files
carrying a v2 ``[Version]`` keyword are rejected. Y/Z/H/G parameter types are
out of scope. Noise-parameter records trailing 2-port data are skipped with
a warning.
"""

from __future__ import annotations

import cmath
import math
import re
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constants import DB_FLOOR

POLS = ("x", "y")

_UNIT_SCALE = {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9}
_FORMATS = ("ri", "ma", "db")
_SNP_EXT = re.compile(r"\.s(\d+)p$", re.IGNORECASE)


class TouchstoneError(ValueError):
    """Malformed or unsupported Touchstone content."""


class NetworkError(ValueError):
    """Inconsistent network data or port bookkeeping."""


@dataclass(frozen=True)
class NetworkData:
    """Frequency-domain scattering matrices for a P-port network.

    ``frequencies`` is a strictly increasing array of Hz; ``s`` has shape
    (F, P, P) with ``s[f, i, j]`` the wave out of port i per unit wave into
    port j; ``z_ref`` is the single real reference impedance.
    """

    frequencies: np.ndarray
    s: np.ndarray
    z_ref: float = 50.0

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        s = np.asarray(self.s, dtype=complex)
        if f.ndim != 1 or f.size == 0:
            raise NetworkError("frequencies must be a non-empty 1-D array")
        if np.any(f <= 0) or np.any(np.diff(f) <= 0):
            raise NetworkError("frequencies must be positive and strictly increasing")
        if s.ndim != 3 or s.shape[0] != f.size or s.shape[1] != s.shape[2] or s.shape[1] < 1:
            raise NetworkError(f"s must have shape (F, P, P) matching {f.size} frequencies, got {s.shape}")
        if not np.all(np.isfinite(s)):
            raise NetworkError("s contains non-finite entries")
        if not self.z_ref > 0:
            raise NetworkError(f"z_ref must be positive, got {self.z_ref}")
        f.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "z_ref", float(self.z_ref))

    @property
    def port_count(self) -> int:
        return self.s.shape[1]


@dataclass(frozen=True)
class PortMap:
    """Bijection between 0-based port indices and (element index, polarization)."""

    entries: tuple[tuple[tuple[int, int], str], ...]

    def __post_init__(self):
        norm = []
        for element, pol in self.entries:
            pol = str(pol).lower()
            if pol not in POLS:
                raise NetworkError(f"polarization must be one of {POLS}, got {pol!r}")
            norm.append(((int(element[0]), int(element[1])), pol))
        if len(set(norm)) != len(norm):
            raise NetworkError("port map entries must be unique")
        object.__setattr__(self, "entries", tuple(norm))

    @classmethod
    def lexicographic(cls, indices, pols=POLS) -> "PortMap":
        """Canonical ordering: sort by (pol, n1, n2) with x before y."""
        idx = sorted((int(i), int(j)) for i, j in indices)
        return cls(tuple((e, p) for p in sorted(str(p).lower() for p in pols) for e in idx))

    def __len__(self) -> int:
        return len(self.entries)

    def port_of(self, element: tuple[int, int], pol: str) -> int:
        key = ((int(element[0]), int(element[1])), str(pol).lower())
        try:
            return self.entries.index(key)
        except ValueError:
            raise NetworkError(f"no port for element {element} pol {pol!r}") from None

    def element_of(self, port: int) -> tuple[tuple[int, int], str]:
        return self.entries[port]

    def without_port(self, port: int) -> "PortMap":
        if not 0 <= port < len(self.entries):
            raise NetworkError(f"port {port} out of range")
        return PortMap(self.entries[:port] + self.entries[port + 1:])

    @property
    def pols(self) -> tuple[str, ...]:
        return tuple(sorted({p for _, p in self.entries}))


# --- Touchstone parsing ------------------------------------------------------


def _parse_option_line(line: str) -> tuple[float, str, float]:
    """Return (frequency scale, value format, z_ref) from a '#' option line."""
    unit_scale, fmt, z_ref = _UNIT_SCALE["ghz"], "ma", 50.0
    tokens = line[1:].lower().split()
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in _UNIT_SCALE:
            unit_scale = _UNIT_SCALE[tok]
        elif tok in _FORMATS:
            fmt = tok
        elif tok == "s":
            pass
        elif tok in ("y", "z", "h", "g"):
            raise TouchstoneError(f"unsupported parameter type {tok.upper()!r}; only S-parameters are handled")
        elif tok == "r":
            if i + 1 >= len(tokens):
                raise TouchstoneError("option line 'R' without an impedance value")
            try:
                z_ref = float(tokens[i + 1])
            except ValueError:
                raise TouchstoneError(f"bad reference impedance {tokens[i + 1]!r}") from None
            i += 1
        else:
            raise TouchstoneError(f"unrecognized option token {tok!r}")
        i += 1
    return unit_scale, fmt, z_ref


def _to_complex(fmt: str, a: float, b: float) -> complex:
    if fmt == "ri":
        return complex(a, b)
    if fmt == "ma":
        return a * cmath.exp(1j * math.radians(b))
    return 10.0 ** (a / 20.0) * cmath.exp(1j * math.radians(b))


def parse_touchstone(text: str, port_count: int) -> NetworkData:
    """Parse Touchstone v1 content into a :class:`NetworkData`.

    Parameters
    ----------
    text : str
        File content. The port count is not inferable from v1 content and
        must be supplied (``.sNp`` naming convention).
    port_count : int
        Number of ports P; each frequency record carries 2*P*P values.

    Raises
    ------
    TouchstoneError
        Missing/malformed option line, v2 keywords, unsupported parameter
        type, non-monotone frequencies, or a value count that does not fill
        whole P x P records.
    """
    if port_count < 1:
        raise TouchstoneError(f"port_count must be >= 1, got {port_count}")
    option = None
    values: list[float] = []
    for raw in text.splitlines():
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            raise TouchstoneError(f"Touchstone v2 keyword {line.split()[0]!r} is not supported (v1 only)")
        if line.startswith("#"):
            if option is not None:
                raise TouchstoneError("multiple option lines")
            option = _parse_option_line(line)
            continue
        if option is None:
            raise TouchstoneError("data encountered before the '#' option line")
        for tok in line.split():
            try:
                values.append(float(tok))
            except ValueError:
                raise TouchstoneError(f"non-numeric data token {tok!r}") from None
    if option is None:
        raise TouchstoneError("missing '#' option line")
    unit_scale, fmt, z_ref = option

    p = port_count
    per_record = 1 + 2 * p * p
    freqs: list[float] = []
    mats: list[np.ndarray] = []
    pos = 0
    while pos < len(values):
        f_raw = values[pos]
        if p == 2 and freqs and f_raw < freqs[-1] / unit_scale:
            # 2-port noise-parameter section: frequency restarts below S data
            warnings.warn("ignoring trailing noise-parameter data in 2-port file", stacklevel=2)
            break
        if pos + per_record > len(values):
            raise TouchstoneError(
                f"frequency record at {f_raw!r} has fewer than {2 * p * p} S values"
            )
        rec = values[pos + 1 : pos + per_record]
        pos += per_record
        s = np.empty((p, p), dtype=complex)
        pairs = [(rec[2 * k], rec[2 * k + 1]) for k in range(p * p)]
        if p == 2:
            order = [(0, 0), (1, 0), (0, 1), (1, 1)]  # the v1 two-port quirk
        else:
            order = [(i, j) for i in range(p) for j in range(p)]
        for (i, j), (a, b) in zip(order, pairs):
            s[i, j] = _to_complex(fmt, a, b)
        f_hz = f_raw * unit_scale
        if freqs and f_hz <= freqs[-1]:
            raise TouchstoneError(f"frequencies not strictly increasing at {f_hz} Hz")
        freqs.append(f_hz)
        mats.append(s)
    if not freqs:
        raise TouchstoneError("no frequency records found")
    return NetworkData(np.array(freqs), np.array(mats), z_ref)


def read_touchstone(path: str | Path) -> NetworkData:
    """Read a ``.sNp`` file; the port count comes from the extension."""
    path = Path(path)
    m = _SNP_EXT.search(path.name)
    if not m:
        raise TouchstoneError(f"cannot infer port count from file name {path.name!r} (expected .sNp)")
    return parse_touchstone(path.read_text(), int(m.group(1)))


def write_touchstone(net: NetworkData, fmt: str = "ri") -> str:
    """Serialize to Touchstone v1 text.

    Values are written with 13 significant digits so that a parse of the
    output reproduces every S entry to better than 1e-9 relative in all
    three formats; frequencies are written exactly (shortest round-trip
    float representation). Rows wrap at four S values per line for 3+ ports.
    """
    fmt = fmt.lower()
    if fmt not in _FORMATS:
        raise TouchstoneError(f"format must be one of {_FORMATS}, got {fmt!r}")

    def pair(v: complex) -> str:
        if fmt == "ri":
            return f"{v.real:.12e} {v.imag:.12e}"
        mag, ang = abs(v), math.degrees(cmath.phase(v))
        if fmt == "ma":
            return f"{mag:.12e} {ang:.12e}"
        db = 20.0 * math.log10(mag) if mag > 0 else -1000.0
        return f"{db:.12e} {ang:.12e}"

    p = net.port_count
    lines = [f"! {p}-port S-parameter data", f"# Hz S {fmt.upper()} R {net.z_ref:.9g}"]
    for f_hz, s in zip(net.frequencies, net.s):
        if p == 1:
            lines.append(f"{float(f_hz)!r} {pair(s[0, 0])}")
        elif p == 2:
            quirk = (s[0, 0], s[1, 0], s[0, 1], s[1, 1])
            lines.append(f"{float(f_hz)!r} " + " ".join(pair(v) for v in quirk))
        else:
            for i in range(p):
                row = [pair(s[i, j]) for j in range(p)]
                for start in range(0, p, 4):
                    chunk = " ".join(row[start : start + 4])
                    prefix = f"{float(f_hz)!r} " if i == 0 and start == 0 else "  "
                    lines.append(prefix + chunk)
    return "\n".join(lines) + "\n"


# --- network algebra ---------------------------------------------------------


def terminate_port(net: NetworkData, k: int, gamma_load: complex) -> NetworkData:
    """Absorb port k into a load with reflection coefficient gamma_load.

    The remaining (P-1)-port scattering matrix is
    ``S'_ij = S_ij + S_ik * G * S_kj / (1 - G * S_kk)``; surviving ports are
    renumbered preserving their order. With a matched load (G = 0) this is
    exactly row/column deletion.
    """
    p = net.port_count
    if not 0 <= k < p:
        raise NetworkError(f"port {k} out of range for {p}-port network")
    if p < 2:
        raise NetworkError("cannot terminate the only port of a 1-port network")
    g = complex(gamma_load)
    s = net.s
    den = 1.0 - g * s[:, k, k]
    bad = np.abs(den) <= 1e-12
    if np.any(bad):
        f_bad = net.frequencies[np.argmax(bad)]
        raise NetworkError(
            f"singular termination at port {k}, {f_bad:.6g} Hz: |1 - gamma*S_kk| <= 1e-12"
        )
    if g == 0:
        s_new = s
    else:
        s_new = s + (g * s[:, :, k][:, :, None] * s[:, k, :][:, None, :]) / den[:, None, None]
    keep = [i for i in range(p) if i != k]
    return NetworkData(net.frequencies, s_new[np.ix_(range(len(net.frequencies)), keep, keep)], net.z_ref)


def permute_ports(net: NetworkData, order) -> NetworkData:
    """Reorder ports so that new port i is old port order[i]."""
    order = list(order)
    if sorted(order) != list(range(net.port_count)):
        raise NetworkError(f"order must be a permutation of 0..{net.port_count - 1}, got {order}")
    s = net.s[:, order, :][:, :, order]
    return NetworkData(net.frequencies, s, net.z_ref)


def reorder_ports(net: NetworkData, port_map: PortMap) -> tuple[NetworkData, PortMap]:
    """Permute ports into the canonical lexicographic (pol, n1, n2) order."""
    if len(port_map) != net.port_count:
        raise NetworkError(
            f"port map covers {len(port_map)} ports but network has {net.port_count}"
        )
    order = sorted(range(net.port_count), key=lambda i: (port_map.entries[i][1], port_map.entries[i][0]))
    return permute_ports(net, order), PortMap(tuple(port_map.entries[i] for i in order))


def sparameter_csv_rows(net: NetworkData) -> list[str]:
    """Rows of the |S| export: header then freq_hz,port_i,port_j,mag_db,phase_deg."""
    rows = ["freq_hz,port_i,port_j,mag_db,phase_deg"]
    for f_hz, s in zip(net.frequencies, net.s):
        for i in range(net.port_count):
            for j in range(net.port_count):
                mag = abs(s[i, j])
                db = max(20.0 * math.log10(mag), DB_FLOOR) if mag > 0 else DB_FLOOR
                ang = math.degrees(cmath.phase(s[i, j]))
                rows.append(f"{f_hz:.9e},{i},{j},{db:.9e},{ang:.9e}")
    return rows
