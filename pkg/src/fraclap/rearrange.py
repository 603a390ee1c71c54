"""Rearrangement engine.

Functions are carried as measure-weighted cells, so decreasing rearrangement
is exact sorting and equimeasurability holds bit-exactly; profiles are step
functions whose integrals (concentration, Lorentz norms) are evaluated by
closed-form block antiderivatives, never by quadrature.  Rearrangement always
acts on |u|.  All objects are immutable after construction and safe to share
across threads.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .specfun import gamma_fn

__all__ = [
    "SampledFunction",
    "DecreasingProfile",
    "LorentzExponents",
    "RadialProfile",
    "unit_ball_measure",
    "distribution_function",
    "decreasing_rearrangement",
    "schwarz_profile_to_radial",
    "steiner_rearrangement",
    "concentration",
    "maximal_average",
    "lorentz_norm",
    "hardy_littlewood_gap",
    "read_sampled_csv",
    "write_sampled_csv",
    "write_profile_csv",
]

_MEASURE_RTOL = 1e-12


def unit_ball_measure(n_dim: int) -> float:
    """Lebesgue measure of the unit ball in R^N: pi^{N/2} / Gamma(N/2 + 1)."""
    if n_dim < 1:
        raise ValueError("dimension must be >= 1")
    return math.pi ** (n_dim / 2.0) / gamma_fn(n_dim / 2.0 + 1.0)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SampledFunction:
    """A function known through cells of positive measure and one value each."""

    measures: np.ndarray
    values: np.ndarray
    domain_measure: float

    def __post_init__(self):
        object.__setattr__(self, "measures", _readonly(self.measures))
        object.__setattr__(self, "values", _readonly(self.values))
        if self.measures.ndim != 1 or self.measures.shape != self.values.shape:
            raise ValueError("measures and values must be 1-d arrays of equal length")
        if self.measures.size == 0:
            raise ValueError("at least one cell is required")
        if np.any(self.measures <= 0):
            raise ValueError("every cell measure must be positive")
        total = float(np.sum(self.measures))
        if not math.isclose(total, self.domain_measure, rel_tol=_MEASURE_RTOL):
            raise ValueError(
                f"cell measures sum to {total}, domain measure is {self.domain_measure}"
            )

    @classmethod
    def from_cells(cls, cells) -> "SampledFunction":
        """Build from an iterable of (measure, value) pairs."""
        arr = np.asarray(list(cells), dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 2:
            raise ValueError("cells must be (measure, value) pairs")
        return cls(arr[:, 0], arr[:, 1], float(arr[:, 0].sum()))

    def __len__(self) -> int:
        return self.measures.size


@dataclass(frozen=True)
class DecreasingProfile:
    """Nonincreasing step function on (0, |Omega|).

    breakpoints has M+1 strictly increasing entries starting at 0; values has
    M nonincreasing nonnegative entries, values[i] on [breakpoints[i],
    breakpoints[i+1]).
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "breakpoints", _readonly(self.breakpoints))
        object.__setattr__(self, "values", _readonly(self.values))
        b, v = self.breakpoints, self.values
        if b.ndim != 1 or v.ndim != 1 or b.size != v.size + 1:
            raise ValueError("need M+1 breakpoints for M values")
        if b[0] != 0.0 or np.any(np.diff(b) <= 0):
            raise ValueError("breakpoints must start at 0 and strictly increase")
        if np.any(v < 0) or np.any(np.diff(v) > 0):
            raise ValueError("values must be nonnegative and nonincreasing")

    @property
    def total_measure(self) -> float:
        return float(self.breakpoints[-1])

    def value_at(self, s):
        """u*(s); right endpoint returns the last block value, s=0 the sup."""
        s_arr = np.asarray(s, dtype=float)
        if np.any(s_arr < 0) or np.any(s_arr > self.total_measure):
            raise ValueError("s outside [0, |Omega|]")
        idx = np.clip(np.searchsorted(self.breakpoints, s_arr, side="right") - 1,
                      0, self.values.size - 1)
        out = self.values[idx]
        return float(out) if s_arr.ndim == 0 else out

    def sup(self) -> float:
        return float(self.values[0]) if self.values.size else 0.0


@dataclass(frozen=True)
class LorentzExponents:
    """Exponent pair (p, q) with 0 < p, q <= inf."""

    p: float
    q: float

    def __post_init__(self):
        if not (self.p > 0 and self.q > 0):
            raise ValueError("Lorentz exponents must be positive (inf allowed)")


def distribution_function(f: SampledFunction, t: float) -> float:
    """mu_f(t): total measure of cells where |value| > t; t >= 0."""
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    return float(np.sum(f.measures[np.abs(f.values) > t]))


def decreasing_rearrangement(f: SampledFunction) -> DecreasingProfile:
    """Sort |values| descending and accumulate measures into a step profile.

    Stable sort; ties merge into one flat block, so the profile does not
    depend on tie order.
    """
    absvals = np.abs(f.values)
    order = np.argsort(-absvals, kind="stable")
    sorted_vals = absvals[order]
    sorted_meas = f.measures[order]
    # merge adjacent equal values into single blocks
    keep = np.empty(sorted_vals.size, dtype=bool)
    keep[0] = True
    np.not_equal(sorted_vals[1:], sorted_vals[:-1], out=keep[1:])
    block_ids = np.cumsum(keep) - 1
    block_vals = sorted_vals[keep]
    block_meas = np.bincount(block_ids, weights=sorted_meas)
    breakpoints = np.concatenate(([0.0], np.cumsum(block_meas)))
    breakpoints[-1] = f.domain_measure  # absorb summation roundoff at the end
    return DecreasingProfile(breakpoints, block_vals)


@dataclass(frozen=True)
class RadialProfile:
    """Radial view u*(omega_N r^N) of a decreasing profile on the matched ball."""

    profile: DecreasingProfile
    n_dim: int
    radius: float = field(init=False)

    def __post_init__(self):
        omega = unit_ball_measure(self.n_dim)
        object.__setattr__(
            self, "radius", (self.profile.total_measure / omega) ** (1.0 / self.n_dim)
        )

    def __call__(self, r):
        r_arr = np.asarray(r, dtype=float)
        if np.any(r_arr < 0) or np.any(r_arr > self.radius * (1 + 1e-12)):
            raise ValueError("radius outside [0, R]")
        omega = unit_ball_measure(self.n_dim)
        s = np.minimum(omega * np.abs(r_arr) ** self.n_dim, self.profile.total_measure)
        return self.profile.value_at(s)


def schwarz_profile_to_radial(profile: DecreasingProfile, n_dim: int) -> RadialProfile:
    """Radially nonincreasing representative on the measure-matched ball."""
    return RadialProfile(profile, n_dim)


def steiner_rearrangement(field_slices):
    """Per-slice decreasing rearrangement of [(y, SampledFunction), ...].

    Slices must share the domain measure; the y ordering is preserved.
    """
    pairs = list(field_slices)
    if not pairs:
        return []
    ref = pairs[0][1].domain_measure
    for y, sl in pairs:
        if not math.isclose(sl.domain_measure, ref, rel_tol=_MEASURE_RTOL):
            raise ValueError(f"slice at y={y} has measure {sl.domain_measure} != {ref}")
    return [(y, decreasing_rearrangement(sl)) for y, sl in pairs]


def concentration(profile: DecreasingProfile, s):
    """Exact block integral of the profile over (0, s); 0 <= s <= |Omega|."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0) or np.any(s_arr > profile.total_measure * (1 + 1e-12)):
        raise ValueError("s outside [0, |Omega|]")
    s_clip = np.minimum(s_arr, profile.total_measure)
    b, v = profile.breakpoints, profile.values
    cum = np.concatenate(([0.0], np.cumsum(v * np.diff(b))))
    idx = np.clip(np.searchsorted(b, s_clip, side="right") - 1, 0, v.size - 1)
    out = cum[idx] + v[idx] * (s_clip - b[idx])
    return float(out) if s_arr.ndim == 0 else out


def maximal_average(profile: DecreasingProfile, t):
    """u**(t) = concentration(t)/t for t in (0, |Omega|]; dominates u*."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise ValueError("t must be positive")
    out = concentration(profile, t_arr) / t_arr
    return float(out) if t_arr.ndim == 0 else out


def lorentz_norm(profile: DecreasingProfile, exp: LorentzExponents) -> float:
    """Lorentz L^{p,q} functional of a step profile, exact per block.

    q < inf: ( int_0^{|Omega|} [t^{1/p} u*(t)]^q dt/t )^{1/q}.
    q = inf: sup_t t^{1/p} u*(t).
    p = q recovers the L^p norm.  p = inf with q < inf is finite only for the
    zero profile (the dt/t integral diverges otherwise) and returns inf.
    """
    p, q = exp.p, exp.q
    b, v = profile.breakpoints, profile.values
    if np.all(v == 0.0):
        return 0.0
    if math.isinf(q):
        if math.isinf(p):
            return profile.sup()
        # sup of t^{1/p} v_i over each block sits at the right endpoint
        return float(np.max(v * b[1:] ** (1.0 / p)))
    if math.isinf(p):
        return math.inf
    # int t^{q/p - 1} over a block has antiderivative (p/q) t^{q/p}
    e = q / p
    blocks = (b[1:] ** e - b[:-1] ** e) / e
    return float(np.sum(v ** q * blocks) ** (1.0 / q))


def _common_mesh(u: SampledFunction, v: SampledFunction) -> None:
    if len(u) != len(v) or not np.array_equal(u.measures, v.measures):
        raise ValueError("functions must share a common cell mesh")


def _product_integral(pu: DecreasingProfile, pv: DecreasingProfile) -> float:
    # exact integral of the product of two step profiles on a merged grid
    grid = np.union1d(pu.breakpoints, pv.breakpoints)
    mids = 0.5 * (grid[1:] + grid[:-1])
    return float(np.sum(pu.value_at(mids) * pv.value_at(mids) * np.diff(grid)))


def hardy_littlewood_gap(u: SampledFunction, v: SampledFunction) -> float:
    """Slack int u* v* ds - int |u v| dx of the Hardy-Littlewood inequality.

    Nonnegative up to roundoff; cells must align.
    """
    _common_mesh(u, v)
    direct = float(np.sum(u.measures * np.abs(u.values * v.values)))
    sorted_side = _product_integral(
        decreasing_rearrangement(u), decreasing_rearrangement(v)
    )
    return sorted_side - direct


def read_sampled_csv(path) -> SampledFunction:
    """Read cells from CSV with a `measure,value` header."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:2]] != ["measure", "value"]:
            raise ValueError(f"{path}: expected header 'measure,value'")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    return SampledFunction.from_cells(rows)


def write_sampled_csv(f: SampledFunction, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["measure", "value"])
        for m, v in zip(f.measures, f.values):
            writer.writerow([repr(float(m)), repr(float(v))])


def write_profile_csv(profile: DecreasingProfile, path) -> None:
    """Emit `s,value` rows, s being the right endpoint of each block."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["s", "value"])
        for s, v in zip(profile.breakpoints[1:], profile.values):
            writer.writerow([repr(float(s)), repr(float(v))])
