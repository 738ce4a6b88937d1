"""Planar lattice geometry for phased arrays.

Direct and reciprocal bases for square and triangular grids, element
placement, aperture truncation, and grating-lobe onset prediction.

Vectors are numpy arrays of shape (2,): meters for positions, rad/m for
wavevectors. Element indices are plain ``(n1, n2)`` integer tuples; an
element sits at ``n1*a1 + n2*a2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C0

SQUARE = "square"
TRIANGULAR = "triangular"
LATTICE_KINDS = (SQUARE, TRIANGULAR)

_REL_TOL = 1e-12


class LatticeError(ValueError):
    """Invalid lattice parameters or configuration."""


def _frozen_vec(x: float, y: float) -> np.ndarray:
    v = np.array([x, y], dtype=float)
    if not np.all(np.isfinite(v)):
        raise LatticeError(f"vector components must be finite, got {v}")
    v.setflags(write=False)
    return v


@dataclass(frozen=True)
class LatticeBasis:
    """Direct lattice basis vectors a1, a2 (meters).

    ``lambda_h`` is the free-space wavelength at the highest grating-lobe-free
    frequency; it sets the cell scale for both lattice kinds.  Construct via
    :func:`make_basis`, which fills in the canonical column vectors.
    """

    kind: str
    lambda_h: float
    a1: np.ndarray
    a2: np.ndarray

    def __post_init__(self):
        if self.kind not in LATTICE_KINDS:
            raise LatticeError(f"unknown lattice kind {self.kind!r}")
        if not (self.lambda_h > 0 and math.isfinite(self.lambda_h)):
            raise LatticeError(f"lambda_h must be positive, got {self.lambda_h}")
        n1, n2 = np.linalg.norm(self.a1), np.linalg.norm(self.a2)
        if self.kind == SQUARE:
            edge = self.lambda_h / 2
            ok = (
                abs(n1 - edge) <= _REL_TOL * edge
                and abs(n2 - edge) <= _REL_TOL * edge
                and abs(float(self.a1 @ self.a2)) <= _REL_TOL * edge * edge
            )
        else:
            edge = self.lambda_h / math.sqrt(3)
            cos_angle = float(self.a1 @ self.a2) / (n1 * n2)
            ok = (
                abs(n1 - edge) <= _REL_TOL * edge
                and abs(n2 - edge) <= _REL_TOL * edge
                and abs(cos_angle - 0.5) <= _REL_TOL
            )
        if not ok:
            raise LatticeError(f"basis vectors do not form a canonical {self.kind} lattice")

    @property
    def cell_matrix(self) -> np.ndarray:
        """2x2 matrix with a1 and a2 as columns."""
        return np.column_stack([self.a1, self.a2])


@dataclass(frozen=True)
class ReciprocalBasis:
    """Scan-space basis k1, k2 (rad/m) with sampling density n_scan.

    Satisfies ``[k1; k2] [a1 a2] = (2*pi/n_scan) * I``; the full-period
    reciprocal primitive vectors are ``n_scan*k1`` and ``n_scan*k2``.
    """

    k1: np.ndarray
    k2: np.ndarray
    n_scan: int

    @property
    def row_matrix(self) -> np.ndarray:
        """2x2 matrix with k1 and k2 as rows."""
        return np.vstack([self.k1, self.k2])


def make_basis(kind: str, lambda_h: float) -> LatticeBasis:
    """Build the canonical square or triangular lattice basis.

    Parameters
    ----------
    kind : str
        ``"square"`` or ``"triangular"``.
    lambda_h : float
        Wavelength (m) of the highest grating-lobe-free frequency.

    Returns
    -------
    LatticeBasis
        Square: a1 = (lambda_h/2)*(1, 0), a2 = (lambda_h/2)*(0, 1).
        Triangular: a1 = (lambda_h/sqrt(3))*(-sin(pi/12), cos(pi/12)),
        a2 = (lambda_h/sqrt(3))*(1/sqrt(2), 1/sqrt(2)); the pi/12 rotation
        is part of the canonical definition and is kept verbatim so the
        closed-form reciprocal vectors apply.
    """
    if not (isinstance(lambda_h, (int, float)) and lambda_h > 0 and math.isfinite(lambda_h)):
        raise LatticeError(f"lambda_h must be positive, got {lambda_h!r}")
    if kind == SQUARE:
        h = lambda_h / 2
        return LatticeBasis(SQUARE, float(lambda_h), _frozen_vec(h, 0.0), _frozen_vec(0.0, h))
    if kind == TRIANGULAR:
        e = lambda_h / math.sqrt(3)
        s, c = math.sin(math.pi / 12), math.cos(math.pi / 12)
        r = 1 / math.sqrt(2)
        return LatticeBasis(TRIANGULAR, float(lambda_h), _frozen_vec(-s * e, c * e), _frozen_vec(r * e, r * e))
    raise LatticeError(f"unknown lattice kind {kind!r}")


def unit_cell_area(basis: LatticeBasis) -> float:
    """Unit cell area |a1 x a2| in square meters."""
    return abs(float(basis.a1[0] * basis.a2[1] - basis.a1[1] * basis.a2[0]))


def element_position(basis: LatticeBasis, idx: tuple[int, int]) -> np.ndarray:
    """Position n1*a1 + n2*a2 of element ``idx = (n1, n2)`` in meters."""
    n1, n2 = idx
    return n1 * basis.a1 + n2 * basis.a2


def aperture_positions(basis: LatticeBasis, indices) -> np.ndarray:
    """Stack element positions into an (n, 2) array, preserving order."""
    idx = np.asarray(list(indices), dtype=float)
    if idx.size == 0:
        return np.zeros((0, 2))
    return idx @ np.vstack([basis.a1, basis.a2])


def reciprocal_basis(basis: LatticeBasis, n_scan: int) -> ReciprocalBasis:
    """Reciprocal scan basis ``[k1; k2] = (2*pi/n_scan) * [a1 a2]^-1``.

    ``n_scan`` must be even and >= 2; the scan grid index ranges assume an
    even point count per dimension. Closed forms for the canonical bases:
    square ``(4*pi/(N*lambda_h)) * I``; triangular rows
    ``(4*pi/(N*lambda_h)) * (-1/sqrt(2), 1/sqrt(2))`` and
    ``(4*pi/(N*lambda_h)) * (cos(pi/12), sin(pi/12))``.
    """
    if not isinstance(n_scan, int) or isinstance(n_scan, bool):
        raise LatticeError(f"n_scan must be an integer, got {n_scan!r}")
    if n_scan < 2 or n_scan % 2 != 0:
        raise LatticeError(f"n_scan must be even and >= 2, got {n_scan}")
    cell = basis.cell_matrix
    det = float(np.linalg.det(cell))
    if abs(det) < 1e-18 * float(np.abs(cell).max()) ** 2:
        raise LatticeError("degenerate lattice basis")
    rows = (2 * math.pi / n_scan) * np.linalg.inv(cell)
    scale = 2 * math.pi / n_scan
    err = np.abs(rows @ cell - scale * np.eye(2)).max()
    if err > _REL_TOL * scale:
        raise LatticeError(f"reciprocal basis identity violated by {err:.3e}")
    k1 = _frozen_vec(rows[0, 0], rows[0, 1])
    k2 = _frozen_vec(rows[1, 0], rows[1, 1])
    return ReciprocalBasis(k1, k2, n_scan)


# --- aperture shapes ---------------------------------------------------------


@dataclass(frozen=True)
class RectangleAperture:
    n1_min: int
    n1_max: int
    n2_min: int
    n2_max: int

    def __post_init__(self):
        if self.n1_max < self.n1_min or self.n2_max < self.n2_min:
            raise LatticeError("rectangle aperture has empty index range")


@dataclass(frozen=True)
class HexagonAperture:
    """``rings`` shells of lattice nearest neighbors around the origin."""

    rings: int

    def __post_init__(self):
        if self.rings < 0:
            raise LatticeError("hexagon rings must be >= 0")


@dataclass(frozen=True)
class TriangleAperture:
    """Rows 0..rows-1 of a corner-anchored triangular patch: n1, n2 >= 0, n1+n2 < rows."""

    rows: int

    def __post_init__(self):
        if self.rows < 1:
            raise LatticeError("triangle rows must be >= 1")


@dataclass(frozen=True)
class ExplicitAperture:
    indices: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if len(self.indices) == 0:
            raise LatticeError("explicit aperture is empty")
        if len(set(self.indices)) != len(self.indices):
            raise LatticeError("explicit aperture contains duplicate indices")


ApertureShape = RectangleAperture | HexagonAperture | TriangleAperture | ExplicitAperture


def enumerate_aperture(shape: ApertureShape) -> list[tuple[int, int]]:
    """Element indices of an aperture, sorted lexicographically by (n1, n2).

    A hexagon of r rings holds 1 + 3*r*(r+1) elements; ring membership uses
    the hex distance (|n1| + |n2| + |n1+n2|)/2, whose unit shell is the six
    nearest neighbors of the triangular grid.
    """
    if isinstance(shape, RectangleAperture):
        out = [
            (n1, n2)
            for n1 in range(shape.n1_min, shape.n1_max + 1)
            for n2 in range(shape.n2_min, shape.n2_max + 1)
        ]
    elif isinstance(shape, HexagonAperture):
        r = shape.rings
        out = [
            (n1, n2)
            for n1 in range(-r, r + 1)
            for n2 in range(-r, r + 1)
            if (abs(n1) + abs(n2) + abs(n1 + n2)) // 2 <= r
        ]
    elif isinstance(shape, TriangleAperture):
        out = [
            (n1, n2)
            for n1 in range(shape.rows)
            for n2 in range(shape.rows - n1)
        ]
    elif isinstance(shape, ExplicitAperture):
        out = sorted(shape.indices)
    else:
        raise LatticeError(f"unknown aperture shape {shape!r}")
    if not out:
        raise LatticeError("aperture is empty")
    return sorted(out)


def centroid(positions: np.ndarray) -> np.ndarray:
    """Mean of an (n, 2) position array."""
    return np.asarray(positions, dtype=float).mean(axis=0)


def centermost_index(basis: LatticeBasis, indices) -> tuple[int, int]:
    """Aperture index closest to the aperture centroid (lexicographic tiebreak)."""
    idx = list(indices)
    pos = aperture_positions(basis, idx)
    d2 = ((pos - centroid(pos)) ** 2).sum(axis=1)
    best = min(range(len(idx)), key=lambda i: (d2[i], idx[i]))
    return idx[best]


# --- grating lobes -----------------------------------------------------------


def full_period_reciprocal(basis: LatticeBasis) -> np.ndarray:
    """Rows b1, b2 of the standard reciprocal primitive vectors (b_i . a_j = 2*pi*delta_ij)."""
    return 2 * math.pi * np.linalg.inv(basis.cell_matrix)


def grating_lobe_onset(
    basis: LatticeBasis,
    scan_theta: float,
    *,
    phi_step_deg: float = 0.1,
    rel_tol: float = 1e-7,
) -> float:
    """Lowest frequency (Hz) at which a grating lobe enters visible space.

    A lobe exists when some nonzero reciprocal vector G (integer combination
    of the full-period primitives) satisfies ``|k_t - G| <= k0`` with
    ``|k_t| = k0*sin(theta)``; the azimuth of k_t is swept over a fixed
    phi grid and the worst case taken. The onset frequency is bracketed by
    the aligned-azimuth closed form and refined by bisection.
    """
    if not 0.0 <= scan_theta <= 90.0:
        raise LatticeError(f"scan_theta must be in [0, 90] degrees, got {scan_theta}")
    brows = full_period_reciprocal(basis)
    ij = [(i, j) for i in range(-4, 5) for j in range(-4, 5) if (i, j) != (0, 0)]
    g = np.array(ij, dtype=float) @ brows  # (nG, 2)
    sin_t = math.sin(math.radians(scan_theta))

    phi = np.radians(np.arange(0.0, 360.0, phi_step_deg))
    units = np.column_stack([np.cos(phi), np.sin(phi)])  # (nphi, 2)

    def lobe_visible(f: float) -> bool:
        k0 = 2 * math.pi * f / C0
        kt = (k0 * sin_t) * units
        d2 = ((kt[:, None, :] - g[None, :, :]) ** 2).sum(axis=2)
        return bool((d2 <= k0 * k0).any())

    g_min = float(np.sqrt((g**2).sum(axis=1)).min())
    f_aligned = C0 * g_min / (2 * math.pi * (1 + sin_t))
    lo, hi = 0.5 * f_aligned, 1.5 * f_aligned
    while lobe_visible(lo):
        lo *= 0.5
    while not lobe_visible(hi):
        hi *= 2.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if lobe_visible(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


# --- JSON configuration ------------------------------------------------------


def shape_from_config(d: dict, where: str = "aperture") -> ApertureShape:
    """Parse an aperture block like {"shape": "hexagon", "rings": 2}."""
    if not isinstance(d, dict):
        raise LatticeError(f"{where}: expected an object")
    kind = d.get("shape")
    try:
        if kind == "rectangle":
            (a, b), (c, e) = d["n1"], d["n2"]
            return RectangleAperture(int(a), int(b), int(c), int(e))
        if kind == "hexagon":
            return HexagonAperture(int(d["rings"]))
        if kind == "triangle":
            return TriangleAperture(int(d["rows"]))
        if kind == "explicit":
            return ExplicitAperture(tuple((int(i), int(j)) for i, j in d["indices"]))
    except KeyError as exc:
        raise LatticeError(f"{where}.{exc.args[0]}: required for shape {kind!r}") from None
    except (TypeError, ValueError) as exc:
        raise LatticeError(f"{where}: {exc}") from None
    raise LatticeError(f"{where}.shape: expected rectangle|hexagon|triangle|explicit, got {kind!r}")


def shape_to_config(shape: ApertureShape) -> dict:
    if isinstance(shape, RectangleAperture):
        return {"shape": "rectangle", "n1": [shape.n1_min, shape.n1_max], "n2": [shape.n2_min, shape.n2_max]}
    if isinstance(shape, HexagonAperture):
        return {"shape": "hexagon", "rings": shape.rings}
    if isinstance(shape, TriangleAperture):
        return {"shape": "triangle", "rows": shape.rows}
    return {"shape": "explicit", "indices": [list(i) for i in shape.indices]}


def lattice_from_config(d: dict, where: str = "lattice") -> tuple[LatticeBasis, int, ApertureShape | None]:
    """Parse {"kind", "lambda_h_mm", "n_scan", "aperture"} into lattice objects.

    Returns (basis, n_scan, aperture-or-None). Raises :class:`LatticeError`
    naming the offending field path.
    """
    if not isinstance(d, dict):
        raise LatticeError(f"{where}: expected an object")
    kind = d.get("kind")
    if kind not in LATTICE_KINDS:
        raise LatticeError(f"{where}.kind: expected square|triangular, got {kind!r}")
    if "lambda_h_mm" not in d:
        raise LatticeError(f"{where}.lambda_h_mm: required")
    try:
        lambda_h = float(d["lambda_h_mm"]) * 1e-3
    except (TypeError, ValueError):
        raise LatticeError(f"{where}.lambda_h_mm: expected a number") from None
    n_scan = d.get("n_scan", 24)
    if not isinstance(n_scan, int) or isinstance(n_scan, bool) or n_scan < 2 or n_scan % 2:
        raise LatticeError(f"{where}.n_scan: expected an even integer >= 2, got {n_scan!r}")
    basis = make_basis(kind, lambda_h)
    shape = None
    if "aperture" in d and d["aperture"] is not None:
        shape = shape_from_config(d["aperture"], where=f"{where}.aperture")
    return basis, n_scan, shape


def lattice_to_config(basis: LatticeBasis, n_scan: int, shape: ApertureShape | None = None) -> dict:
    d = {"kind": basis.kind, "lambda_h_mm": basis.lambda_h * 1e3, "n_scan": n_scan}
    if shape is not None:
        d["aperture"] = shape_to_config(shape)
    return d
