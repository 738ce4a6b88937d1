"""Analytic infinite-array active-response models.

Stand-ins for a full-wave unit-cell solver: cheap closed forms defined for
every real transverse wavevector (so invisible-region scan samples are well
defined) and every frequency in a declared band. They feed the spectral
transform in tests, demos, and the CLI.

Pol-pair keys follow the S-matrix row/column convention: "ab" means
observed polarization a, excited polarization b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectral import POL_PAIRS, ActiveGammaGrid, ScanGrid

_PAIR_STREAM = {pair: i for i, pair in enumerate(POL_PAIRS)}


class ModelError(ValueError):
    """Invalid model parameters or out-of-band evaluation."""


def _check_band(band) -> tuple[float, float]:
    lo, hi = float(band[0]), float(band[1])
    if not (0 < lo < hi):
        raise ModelError(f"band must satisfy 0 < f_min < f_max, got {band}")
    return lo, hi


@dataclass(frozen=True)
class ConstantModel:
    """Scan- and frequency-independent co-pol response; cross-pol is zero."""

    gamma0: complex
    band: tuple[float, float] = (1e9, 100e9)

    def __post_init__(self):
        object.__setattr__(self, "gamma0", complex(self.gamma0))
        object.__setattr__(self, "band", _check_band(self.band))


@dataclass(frozen=True)
class ScanPolyModel:
    """Quadratic-in-|k_t| scan response with frequency profiles.

    Co-pol: ``alpha(f) + beta(f) * (|k_t| / k_ref)^2``.
    Cross-pol: ``cross_pol_level * (k_x * k_y / k_ref^2) * beta(f)`` -- zero
    on the principal planes and strongest toward the diagonal.

    ``alpha`` and ``beta`` are tuples of (frequency_hz, complex value) knots;
    values interpolate linearly (real and imaginary parts) between knots and
    must cover the band edges.
    """

    alpha: tuple[tuple[float, complex], ...]
    beta: tuple[tuple[float, complex], ...]
    k_ref: float
    band: tuple[float, float]
    cross_pol_level: float = 0.0

    def __post_init__(self):
        band = _check_band(self.band)
        object.__setattr__(self, "band", band)
        if not self.k_ref > 0:
            raise ModelError(f"k_ref must be positive, got {self.k_ref}")
        if self.cross_pol_level < 0:
            raise ModelError("cross_pol_level must be >= 0")
        for name in ("alpha", "beta"):
            knots = tuple((float(f), complex(v)) for f, v in getattr(self, name))
            if not knots:
                raise ModelError(f"{name} needs at least one knot")
            freqs = [f for f, _ in knots]
            if sorted(freqs) != freqs:
                raise ModelError(f"{name} knots must be sorted by frequency")
            if len(knots) > 1 and (freqs[0] > band[0] or freqs[-1] < band[1]):
                raise ModelError(f"{name} knots must cover the band {band}")
            object.__setattr__(self, name, knots)

    def _profile(self, knots, f):
        fs = np.array([k[0] for k in knots])
        vs = np.array([k[1] for k in knots])
        if len(knots) == 1:
            return np.broadcast_to(vs[0], np.shape(f)) if np.ndim(f) else vs[0]
        re = np.interp(f, fs, vs.real)
        im = np.interp(f, fs, vs.imag)
        return re + 1j * im

    def alpha_at(self, f):
        return self._profile(self.alpha, f)

    def beta_at(self, f):
        return self._profile(self.beta, f)


@dataclass(frozen=True)
class SeededRandomModel:
    """Deterministic band-limited smooth random field.

    A small sum of complex plane-wave terms in (k_t, f); ``smoothness``
    bounds the number of oscillations across a reciprocal period, ``level``
    bounds ``sum |amplitudes|`` so the response stays passive. Identical
    specs produce bit-identical samples.
    """

    seed: int
    smoothness: int
    k_ref: float
    band: tuple[float, float]
    level: float = 0.8
    cross_pol_level: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "band", _check_band(self.band))
        if self.smoothness < 1:
            raise ModelError("smoothness must be >= 1")
        if not self.k_ref > 0:
            raise ModelError(f"k_ref must be positive, got {self.k_ref}")
        if not 0 < self.level <= 1:
            raise ModelError("level must be in (0, 1]")
        if self.cross_pol_level < 0:
            raise ModelError("cross_pol_level must be >= 0")

    def _terms(self, pol_pair: str):
        rng = np.random.default_rng([int(self.seed), _PAIR_STREAM[pol_pair]])
        n = self.smoothness
        amps = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        amps *= self.level / np.abs(amps).sum()
        if pol_pair in ("xy", "yx"):
            amps *= self.cross_pol_level
        # spatial scales of order smoothness periods across a reciprocal cell
        u = rng.uniform(-1.0, 1.0, size=(n, 2)) * (math.pi * n / self.k_ref)
        v = rng.uniform(0.0, float(n), size=n)
        return amps, u, v


ModelSpec = ConstantModel | ScanPolyModel | SeededRandomModel


def _require_in_band(model: ModelSpec, f: float):
    lo, hi = model.band
    if not (lo <= f <= hi):
        raise ModelError(f"frequency {f:.6g} Hz outside model band [{lo:.6g}, {hi:.6g}]")


def eval_gamma(model: ModelSpec, pol_pair: str, k_t, f: float):
    """Model response at transverse wavevector(s) k_t and frequency f.

    ``k_t`` may be a single (2,) vector or any (..., 2) stack; the result
    matches the leading shape.
    """
    pair = str(pol_pair).lower()
    if pair not in POL_PAIRS:
        raise ModelError(f"pol_pair must be one of {POL_PAIRS}, got {pol_pair!r}")
    _require_in_band(model, f)
    kt = np.asarray(k_t, dtype=float)
    scalar = kt.ndim == 1
    kt = np.atleast_2d(kt)

    if isinstance(model, ConstantModel):
        val = model.gamma0 if pair in ("xx", "yy") else 0.0
        out = np.full(kt.shape[:-1], val, dtype=complex)
    elif isinstance(model, ScanPolyModel):
        if pair in ("xx", "yy"):
            q = (kt**2).sum(axis=-1) / model.k_ref**2
            out = model.alpha_at(f) + model.beta_at(f) * q
        else:
            q = kt[..., 0] * kt[..., 1] / model.k_ref**2
            out = model.cross_pol_level * q * model.beta_at(f)
        out = np.asarray(out, dtype=complex)
    elif isinstance(model, SeededRandomModel):
        amps, u, v = model._terms(pair)
        lo, hi = model.band
        tau = (f - lo) / (hi - lo)
        phases = np.tensordot(kt, u.T, axes=([-1], [0])) + 2 * math.pi * v * tau
        out = (amps * np.exp(1j * phases)).sum(axis=-1)
    else:
        raise ModelError(f"unknown model type {type(model).__name__}")
    return out[0] if scalar and out.ndim else out


def sample_grid(model: ModelSpec, grid: ScanGrid, frequencies, pol_pair: str) -> ActiveGammaGrid:
    """Fill every scan-grid point (visible or not) at each frequency."""
    freqs = np.asarray(frequencies, dtype=float)
    out = np.empty((freqs.size, grid.n, grid.n), dtype=complex)
    for i, f in enumerate(freqs):
        out[i] = eval_gamma(model, pol_pair, grid.points, float(f))
    return ActiveGammaGrid(freqs, out, pol_pair)


def demo_model(band: tuple[float, float] = (3e9, 20e9), cross_pol_level: float = 0.5) -> ScanPolyModel:
    """Default demonstration response.

    Broadside VSWR stays under 2:1 from 4 GHz up and rises toward 3:1 at the
    3 GHz band edge; scan mismatch grows quadratically toward 60 degrees and
    cross-pol peaks on the diagonal plane. A demonstration shape only.
    """
    lo, hi = _check_band(band)
    k_ref = 2 * math.pi * hi / 3.0e8
    alpha = ((lo, 0.5 + 0j), (min(lo * 4 / 3, hi), 0.32 + 0j), (hi, 0.10 + 0j))
    beta = ((lo, 0.25 + 0j), (hi, 0.25 + 0j))
    return ScanPolyModel(alpha=alpha, beta=beta, k_ref=k_ref, band=(lo, hi), cross_pol_level=cross_pol_level)


def model_from_config(d: dict, where: str = "model") -> ModelSpec:
    """Parse the JSON model block.

    Kinds: {"kind": "constant", "gamma": [re, im], "band_ghz": [lo, hi]};
    {"kind": "scan_poly", "alpha": [[f_ghz, re, im], ...], "beta": [...],
    "k_ref": rad_per_m, "band_ghz": [...], "cross_pol_level": x};
    {"kind": "seeded_random", "seed": s, "smoothness": m, "k_ref": ...,
    "band_ghz": [...], "level": a, "cross_pol_level": x};
    {"kind": "demo"} with optional "band_ghz"/"cross_pol_level".
    """
    if not isinstance(d, dict):
        raise ModelError(f"{where}: expected an object")
    kind = d.get("kind")
    try:
        band = tuple(1e9 * float(x) for x in d.get("band_ghz", (3.0, 20.0)))
        if kind == "constant":
            re, im = d["gamma"]
            return ConstantModel(complex(float(re), float(im)), band)
        if kind == "scan_poly":
            alpha = tuple((1e9 * float(f), complex(float(re), float(im))) for f, re, im in d["alpha"])
            beta = tuple((1e9 * float(f), complex(float(re), float(im))) for f, re, im in d["beta"])
            k_ref = float(d.get("k_ref", 2 * math.pi * band[1] / 3.0e8))
            return ScanPolyModel(alpha, beta, k_ref, band, float(d.get("cross_pol_level", 0.0)))
        if kind == "seeded_random":
            return SeededRandomModel(
                seed=int(d["seed"]),
                smoothness=int(d.get("smoothness", 3)),
                k_ref=float(d.get("k_ref", 2 * math.pi * band[1] / 3.0e8)),
                band=band,
                level=float(d.get("level", 0.8)),
                cross_pol_level=float(d.get("cross_pol_level", 1.0)),
            )
        if kind == "demo":
            return demo_model(band, float(d.get("cross_pol_level", 0.5)))
    except KeyError as exc:
        raise ModelError(f"{where}.{exc.args[0]}: required for kind {kind!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ModelError):
            raise
        raise ModelError(f"{where}: {exc}") from None
    raise ModelError(f"{where}.kind: expected constant|scan_poly|seeded_random|demo, got {kind!r}")
