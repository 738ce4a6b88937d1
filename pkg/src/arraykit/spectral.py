"""Scan-space sampling and the infinite-to-finite array transform.

The active reflection coefficient of an infinite array, sampled on the
reciprocal grid ``k_t = m1*k1 + m2*k2`` with ``m in [-N/2, N/2-1]``, is a
2-D discrete Fourier transform of the coupling coefficients between one
element and the element at the origin:

    gamma(m1, m2)   = sum_n  c(n1, n2) * exp(-2j*pi*(n1*m1 + n2*m2)/N)
    c(n1, n2)       = (1/N^2) * sum_m gamma(m1, m2) * exp(+2j*pi*(n1*m1 + n2*m2)/N)

Finite-array scattering matrices follow from translation invariance: the
entry between elements p and q depends only on the index difference p - q.

Arrays here use centered indexing: array index ``i`` along a grid axis maps
to the signed integer ``i - N/2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .lattice import LatticeBasis, ReciprocalBasis, aperture_positions
from .snp import NetworkData, PortMap

POL_PAIRS = ("xx", "xy", "yx", "yy")


class GridShapeError(ValueError):
    """Grid dimensions inconsistent with the declared scan density."""


class ApertureGridError(ValueError):
    """Aperture spans more than the coupling grid period (would alias)."""


def _check_pair(pol_pair: str) -> str:
    pair = str(pol_pair).lower()
    if pair not in POL_PAIRS:
        raise ValueError(f"pol_pair must be one of {POL_PAIRS}, got {pol_pair!r}")
    return pair


@dataclass(frozen=True)
class ScanGrid:
    """The N x N scan-space sample points m1*k1 + m2*k2 (rad/m)."""

    recip: ReciprocalBasis
    points: np.ndarray  # (N, N, 2), axis index i <-> m = i - N/2

    @property
    def n(self) -> int:
        return self.recip.n_scan

    def point(self, m1: int, m2: int) -> np.ndarray:
        h = self.n // 2
        if not (-h <= m1 < h and -h <= m2 < h):
            raise IndexError(f"scan index ({m1}, {m2}) outside [-{h}, {h - 1}]")
        return self.points[m1 + h, m2 + h]


@dataclass(frozen=True)
class ActiveGammaGrid:
    """Per-frequency N x N active reflection samples for one pol pair.

    ``pol_pair`` is "ab" with a the observed polarization (matrix row) and
    b the excited polarization (matrix column); co-pol pairs are "xx"/"yy".
    """

    frequencies: np.ndarray
    grid: np.ndarray  # (F, N, N) complex, axis index i <-> m = i - N/2
    pol_pair: str

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        g = np.asarray(self.grid, dtype=complex)
        if f.ndim != 1 or g.ndim != 3 or g.shape[0] != f.size or g.shape[1] != g.shape[2]:
            raise GridShapeError(f"grid must be (F, N, N) with F={f.size}, got {g.shape}")
        if not np.all(np.isfinite(g)):
            raise GridShapeError("grid contains non-finite values")
        f.setflags(write=False)
        g.setflags(write=False)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "pol_pair", _check_pair(self.pol_pair))

    @property
    def n(self) -> int:
        return self.grid.shape[1]


@dataclass(frozen=True)
class CouplingSet:
    """Per-frequency element-to-center coupling coefficients for one pol pair."""

    frequencies: np.ndarray
    coeffs: np.ndarray  # (F, N, N) complex, axis index i <-> n = i - N/2
    pol_pair: str

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        c = np.asarray(self.coeffs, dtype=complex)
        if f.ndim != 1 or c.ndim != 3 or c.shape[0] != f.size or c.shape[1] != c.shape[2]:
            raise GridShapeError(f"coeffs must be (F, N, N) with F={f.size}, got {c.shape}")
        f.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "frequencies", f)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "pol_pair", _check_pair(self.pol_pair))

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    def coefficient(self, f_index: int, n1: int, n2: int) -> complex:
        h = self.n // 2
        if not (-h <= n1 < h and -h <= n2 < h):
            raise IndexError(f"coupling index ({n1}, {n2}) outside [-{h}, {h - 1}]")
        return complex(self.coeffs[f_index, n1 + h, n2 + h])


def build_scan_grid(recip: ReciprocalBasis) -> ScanGrid:
    """All N^2 scan points, including those outside visible space."""
    n = recip.n_scan
    m = np.arange(-n // 2, n // 2, dtype=float)
    pts = m[:, None, None] * recip.k1[None, None, :] + m[None, :, None] * recip.k2[None, None, :]
    pts.setflags(write=False)
    return ScanGrid(recip, pts)


def _idft2_centered_fft(grid: np.ndarray) -> np.ndarray:
    """Centered inverse 2-D DFT via the fast transform."""
    shifted = np.fft.ifftshift(grid, axes=(-2, -1))
    return np.fft.fftshift(np.fft.ifft2(shifted, axes=(-2, -1)), axes=(-2, -1))


def _idft2_centered_direct(grid: np.ndarray) -> np.ndarray:
    """Centered inverse 2-D DFT as the literal double sum (oracle path).

    Independent of the FFT route: evaluates
    (1/N^2) * sum_m grid[m1, m2] * exp(2j*pi*(n1*m1 + n2*m2)/N) per output
    index. O(N^4) per frequency; intended for verification, not production.
    """
    n = grid.shape[-1]
    m = np.arange(-(n // 2), n // 2)
    out = np.empty_like(grid, dtype=complex)
    for i1, n1 in enumerate(m):
        phase1 = np.exp(2j * np.pi * n1 * m / n)
        for i2, n2 in enumerate(m):
            kernel = np.outer(phase1, np.exp(2j * np.pi * n2 * m / n))
            out[..., i1, i2] = (grid * kernel).sum(axis=(-2, -1)) / (n * n)
    return out


def gamma_to_coupling(g: ActiveGammaGrid, method: str = "fft") -> CouplingSet:
    """Invert sampled active reflection into coupling coefficients.

    ``method`` selects the fast transform ("fft") or the literal double-sum
    oracle ("direct"); the two agree to better than 1e-10.
    """
    if g.n % 2 != 0:
        raise GridShapeError(f"grid size must be even, got {g.n}")
    if method == "fft":
        coeffs = _idft2_centered_fft(g.grid)
    elif method == "direct":
        coeffs = _idft2_centered_direct(g.grid)
    else:
        raise ValueError(f"method must be 'fft' or 'direct', got {method!r}")
    return CouplingSet(g.frequencies, coeffs, g.pol_pair)


def coupling_to_gamma(c: CouplingSet, k_t, basis: LatticeBasis) -> np.ndarray:
    """Active reflection at an arbitrary transverse wavevector, per frequency.

    Evaluates ``sum_n c(n1, n2) * exp(-1j * k_t . (n1*a1 + n2*a2))``; valid
    anywhere in k-space, not only on grid points.
    """
    k_t = np.asarray(k_t, dtype=float)
    n = c.n
    idx = np.arange(-(n // 2), n // 2, dtype=float)
    # element positions for every (n1, n2): (N, N, 2)
    pos = idx[:, None, None] * basis.a1[None, None, :] + idx[None, :, None] * basis.a2[None, None, :]
    phase = np.exp(-1j * (pos @ k_t))
    return np.einsum("fij,ij->f", c.coeffs, phase)


def reconstruct_gamma_grid(c: CouplingSet, grid: ScanGrid, basis: LatticeBasis) -> ActiveGammaGrid:
    """Evaluate the forward sum on every scan-grid point (round-trip check)."""
    if grid.n != c.n:
        raise GridShapeError(f"scan grid N={grid.n} does not match coupling N={c.n}")
    n = c.n
    idx = np.arange(-(n // 2), n // 2, dtype=float)
    pos = idx[:, None, None] * basis.a1[None, None, :] + idx[None, :, None] * basis.a2[None, None, :]
    # phase[(m1,m2),(n1,n2)] = exp(-1j * k_m . R_n)
    phase = np.exp(-1j * np.tensordot(grid.points, pos, axes=([2], [2])))
    out = np.einsum("fkl,ijkl->fij", c.coeffs, phase)
    return ActiveGammaGrid(c.frequencies, out, c.pol_pair)


def parseval_mismatch(g: ActiveGammaGrid, c: CouplingSet) -> float:
    """|mean |gamma|^2 - sum |c|^2| maximized over frequency (identity check)."""
    lhs = (np.abs(g.grid) ** 2).sum(axis=(1, 2)) / (g.n * g.n)
    rhs = (np.abs(c.coeffs) ** 2).sum(axis=(1, 2))
    return float(np.abs(lhs - rhs).max())


def check_aperture_fits(aperture, n_scan: int) -> None:
    """Reject apertures whose index differences escape [-N/2, N/2-1].

    Differences span +-spread per axis, so the spread must stay <= N/2 - 1;
    the inverse transform is periodic with period N and wrapped coupling
    values would be aliases, not physics.
    """
    n1 = [int(i) for i, _ in aperture]
    n2 = [int(j) for _, j in aperture]
    half = n_scan // 2
    spread1 = max(n1) - min(n1)
    spread2 = max(n2) - min(n2)
    if spread1 > half - 1 or spread2 > half - 1:
        raise ApertureGridError(
            f"aperture index spread ({spread1}, {spread2}) exceeds the coupling grid: "
            f"index differences must stay within [-{half}, {half - 1}] because the "
            f"inverse transform is periodic with period {n_scan}; wrapped values would alias"
        )


def assemble_finite_smatrix(
    sets: Mapping[str, CouplingSet],
    aperture,
    port_map: PortMap | None = None,
    z_ref: float = 50.0,
) -> NetworkData:
    """Build a finite-array scattering matrix from coupling coefficients.

    ``sets`` maps pol-pair keys to CouplingSets: either all four of
    xx/xy/yx/yy for a dual-polarized network, or a single co-pol key for a
    single-polarized one. The S entry between port (p, pol A) and port
    (q, pol B) is the (A, B) coupling coefficient at index difference
    ``(n1p - n1q, n2p - n2q)``.

    Raises :class:`ApertureGridError` when any index difference falls
    outside [-N/2, N/2-1]: the inverse transform is periodic with period N
    and wrapped values would be aliases, not physics.
    """
    keys = {_check_pair(k) for k in sets}
    if keys == {"xx"}:
        pols: tuple[str, ...] = ("x",)
    elif keys == {"yy"}:
        pols = ("y",)
    elif keys == set(POL_PAIRS):
        pols = ("x", "y")
    else:
        raise ValueError(
            f"sets must hold one co-pol pair or all four pol pairs, got {sorted(keys)}"
        )
    sets = {_check_pair(k): v for k, v in sets.items()}
    ref = next(iter(sets.values()))
    n = ref.n
    freqs = ref.frequencies
    for v in sets.values():
        if v.n != n or not np.array_equal(v.frequencies, freqs):
            raise GridShapeError("all coupling sets must share N and frequencies")

    aperture = [(int(i), int(j)) for i, j in aperture]
    if port_map is None:
        port_map = PortMap.lexicographic(aperture, pols=pols)
    if set(port_map.pols) != set(pols) or len(port_map) != len(aperture) * len(pols):
        raise ValueError(
            f"port map ({len(port_map)} ports, pols {port_map.pols}) does not cover "
            f"{len(aperture)} elements x pols {pols}"
        )

    check_aperture_fits(aperture, n)
    n1 = np.array([e[0] for e, _ in port_map.entries])
    n2 = np.array([e[1] for e, _ in port_map.entries])
    pol = np.array([p for _, p in port_map.entries])
    half = n // 2

    p_total = len(port_map)
    s = np.empty((freqs.size, p_total, p_total), dtype=complex)
    for a in pols:
        rows = np.nonzero(pol == a)[0]
        for b in pols:
            cols = np.nonzero(pol == b)[0]
            d1 = n1[rows][:, None] - n1[cols][None, :]
            d2 = n2[rows][:, None] - n2[cols][None, :]
            block = sets[a + b].coeffs[:, d1 + half, d2 + half]
            s[np.ix_(range(freqs.size), rows, cols)] = block
    return NetworkData(freqs, s, z_ref)


# --- CSV serialization --------------------------------------------------------


def gamma_csv_rows(g: ActiveGammaGrid) -> list[str]:
    """Rows "freq_hz,m1,m2,re,im" (header included)."""
    h = g.n // 2
    rows = ["freq_hz,m1,m2,re,im"]
    for f_hz, mat in zip(g.frequencies, g.grid):
        for i1 in range(g.n):
            for i2 in range(g.n):
                v = mat[i1, i2]
                rows.append(f"{f_hz:.9e},{i1 - h},{i2 - h},{v.real:.12e},{v.imag:.12e}")
    return rows


def coupling_csv_rows(c: CouplingSet) -> list[str]:
    """Rows "freq_hz,n1,n2,re,im" (header included)."""
    h = c.n // 2
    rows = ["freq_hz,n1,n2,re,im"]
    for f_hz, mat in zip(c.frequencies, c.coeffs):
        for i1 in range(c.n):
            for i2 in range(c.n):
                v = mat[i1, i2]
                rows.append(f"{f_hz:.9e},{i1 - h},{i2 - h},{v.real:.12e},{v.imag:.12e}")
    return rows
