"""Scalar profiles and their spatial and time transforms.

Profiles describe initial data, outer-boundary data and interface traces.
The transforms used everywhere are

    spatial:  f^(k)       = int_lo^hi exp(-i k x) f(x) dx
    time:     F(Omega, t) = int_0^t exp(Omega s) f(s) ds

with ``[lo, hi]`` the region (half-line or finite interval).  A time transform
with purely imaginary ``Omega = i b`` is the interval transform on ``[0, t]``
at ``k = -b``, which is how the closed forms are reused for boundary data.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import wofz

from .errors import ConfigError, NonIntegrable
from .model import Geometry, Region
from .quadrature import adaptive_integrate, composite_rule, panel_edges

SQRT_PI = np.sqrt(np.pi)


def parse_complex(value, field_name="amplitude"):
    """Accept a real number or a ``[re, im]`` pair."""
    if isinstance(value, bool):
        raise ConfigError("expected a number", field=field_name)
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    raise ConfigError(f"expected a number or [re, im], got {value!r}", field=field_name)


def dump_complex(z: complex):
    return z.real if z.imag == 0 else [z.real, z.imag]


class Profile:
    """Base class: a complex-valued function of one real variable."""

    kind = "abstract"

    def __call__(self, x):
        raise NotImplementedError

    @property
    def support(self) -> tuple[float, float]:
        """Interval outside which the profile is negligible."""
        raise NotImplementedError

    @property
    def breakpoints(self) -> tuple:
        """Points where the profile is not smooth."""
        return ()

    @property
    def is_zero(self) -> bool:
        return False

    @property
    def is_real(self) -> bool:
        return True

    def interval_transform(self, k, lo, hi):
        """Closed-form ``int_lo^hi exp(-ikx) f(x) dx`` or None when unavailable."""
        return None

    def kmax_for(self, tol: float) -> Optional[float]:
        """Wavenumber past which the transform envelope times k is below ``tol``."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class ZeroProfile(Profile):
    kind = "zero"

    def __call__(self, x):
        return np.zeros(np.shape(x), dtype=complex)

    @property
    def support(self):
        return (0.0, 0.0)

    @property
    def is_zero(self):
        return True

    def interval_transform(self, k, lo, hi):
        return np.zeros(np.shape(k), dtype=complex)

    def kmax_for(self, tol):
        return 0.0

    def to_dict(self):
        return {"type": self.kind}


def _erfc_shifted(u, kappa):
    """exp(-kappa^2) * erfc(u + i*kappa), evaluated without overflow."""
    u = np.asarray(u, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    phase = np.exp(-u * u - 2j * u * kappa)
    pos = phase * wofz(-kappa + 1j * np.abs(u))
    neg = 2.0 * np.exp(-kappa * kappa) - phase * wofz(kappa + 1j * np.abs(u))
    return np.where(u >= 0, pos, neg)


@dataclass(frozen=True)
class GaussianWindow(Profile):
    """``amplitude * exp(-((x-center)/width)^2)`` on ``|x-center| <= window_radius``, else 0.

    The default radius is six widths, where the truncation jump is about 2e-16.
    """

    center: float
    width: float
    window_radius: Optional[float] = None
    amplitude: complex = 1.0

    kind = "gaussian_window"

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")
        if self.window_radius is None:
            object.__setattr__(self, "window_radius", 6.0 * self.width)
        if not self.window_radius > 0:
            raise ValueError("window_radius must be positive")
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        u = (x - self.center) / self.width
        inside = np.abs(x - self.center) <= self.window_radius
        return np.where(inside, self.amplitude * np.exp(-u * u), 0.0 + 0.0j)

    @property
    def support(self):
        return (self.center - self.window_radius, self.center + self.window_radius)

    @property
    def breakpoints(self):
        return self.support

    @property
    def is_real(self):
        return self.amplitude.imag == 0

    def interval_transform(self, k, lo, hi):
        k = np.asarray(k, dtype=float)
        a = max(lo, self.center - self.window_radius)
        b = min(hi, self.center + self.window_radius)
        if not a < b:
            return np.zeros(k.shape, dtype=complex)
        w = self.width
        kappa = 0.5 * k * w
        ua, ub = (a - self.center) / w, (b - self.center) / w
        diff = _erfc_shifted(ua, kappa) - _erfc_shifted(ub, kappa)
        return self.amplitude * w * 0.5 * SQRT_PI * np.exp(-1j * k * self.center) * diff

    def kmax_for(self, tol):
        # smallest k with |A| w sqrt(pi) k exp(-k^2 w^2 / 4) <= tol, past the peak
        c = abs(self.amplitude) * self.width * SQRT_PI
        if c == 0:
            return 0.0
        k = 2.0 / self.width
        while c * k * np.exp(-(k * self.width) ** 2 / 4) > tol:
            k *= 1.1
        return k

    def to_dict(self):
        return {"type": self.kind, "center": self.center, "width": self.width,
                "window_radius": self.window_radius, "amplitude": dump_complex(self.amplitude)}


@dataclass(frozen=True)
class DecayingExponential(Profile):
    """``amplitude * exp(-rate * |x - center|)``."""

    rate: float
    center: float = 0.0
    amplitude: complex = 1.0

    kind = "decaying_exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise ValueError("rate must be positive")
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return self.amplitude * np.exp(-self.rate * np.abs(x - self.center)) + 0j

    @property
    def support(self):
        r = 40.0 / self.rate
        return (self.center - r, self.center + r)

    @property
    def breakpoints(self):
        return (self.center,)

    @property
    def is_real(self):
        return self.amplitude.imag == 0

    def interval_transform(self, k, lo, hi):
        k = np.asarray(k, dtype=float)
        r, c = self.rate, self.center
        a, b = lo - c, hi - c
        out = np.zeros(k.shape, dtype=complex)
        # left of the peak: int exp((r - ik) u) du
        la, lb = a, min(b, 0.0)
        if la < lb:
            z = r - 1j * k
            out += (np.exp(z * lb) - (0.0 if np.isinf(la) else np.exp(z * la))) / z
        # right of the peak: int exp(-(r + ik) u) du
        ra, rb = max(a, 0.0), b
        if ra < rb:
            z = r + 1j * k
            out += (np.exp(-z * ra) - (0.0 if np.isinf(rb) else np.exp(-z * rb))) / z
        return self.amplitude * np.exp(-1j * k * c) * out

    def to_dict(self):
        return {"type": self.kind, "rate": self.rate, "center": self.center,
                "amplitude": dump_complex(self.amplitude)}


@dataclass(frozen=True, eq=False)
class SampledGrid(Profile):
    """Cubic interpolant of tabulated values; zero outside the node range."""

    nodes: tuple
    values: tuple
    _spline: CubicSpline = field(init=False, repr=False, compare=False)

    kind = "sampled_grid"

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        y = np.asarray(self.values, dtype=complex)
        if x.ndim != 1 or x.size < 4 or x.shape != y.shape:
            raise ValueError("sampled grid needs at least 4 nodes and matching values")
        if np.any(np.diff(x) <= 0):
            raise ValueError("sampled grid nodes must be strictly increasing")
        object.__setattr__(self, "nodes", tuple(x.tolist()))
        object.__setattr__(self, "values", tuple(y.tolist()))
        object.__setattr__(self, "_spline", CubicSpline(x, y))

    def __hash__(self):
        return hash((self.nodes, self.values))

    def __eq__(self, other):
        return isinstance(other, SampledGrid) and (self.nodes, self.values) == (other.nodes, other.values)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= self.nodes[0]) & (x <= self.nodes[-1])
        return np.where(inside, self._spline(np.clip(x, self.nodes[0], self.nodes[-1])), 0.0 + 0.0j)

    @property
    def support(self):
        return (self.nodes[0], self.nodes[-1])

    @property
    def breakpoints(self):
        return self.nodes

    @property
    def is_real(self):
        return all(complex(v).imag == 0 for v in self.values)

    def to_dict(self):
        return {"type": self.kind, "nodes": list(self.nodes),
                "values": [dump_complex(complex(v)) for v in self.values]}


PROFILE_TYPES = {cls.kind: cls for cls in (ZeroProfile, GaussianWindow, DecayingExponential, SampledGrid)}

_PROFILE_FIELDS = {
    "zero": set(),
    "gaussian_window": {"center", "width", "window_radius", "amplitude"},
    "decaying_exponential": {"rate", "center", "amplitude"},
    "sampled_grid": {"nodes", "values"},
}


def profile_from_dict(d, where="profile") -> Profile:
    """Build a profile from its configuration mapping (strict keys)."""
    if not isinstance(d, dict) or "type" not in d:
        raise ConfigError("profile must be an object with a 'type' key", field=where)
    kind = d["type"]
    if kind not in PROFILE_TYPES:
        raise ConfigError(f"unknown profile type {kind!r}", field=f"{where}.type")
    extra = set(d) - {"type"} - _PROFILE_FIELDS[kind]
    if extra:
        raise ConfigError(f"unknown keys {sorted(extra)}", field=where)
    args = {key: val for key, val in d.items() if key != "type"}
    try:
        if "amplitude" in args:
            args["amplitude"] = parse_complex(args["amplitude"], f"{where}.amplitude")
        if kind == "sampled_grid":
            args["values"] = [parse_complex(v, f"{where}.values") for v in args.get("values", [])]
        return PROFILE_TYPES[kind](**args)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc), field=where) from exc


# ---------------------------------------------------------------------------
# transforms

def _clip_to_support(profile, lo, hi):
    s0, s1 = profile.support
    return max(lo, s0), min(hi, s1)


def interval_transform(profile: Profile, k, lo: float, hi: float, rtol=1e-10):
    """``int_lo^hi exp(-ikx) f(x) dx`` for scalar or array ``k``.

    Uses the closed form when the profile has one, else adaptive panel
    quadrature over the clipped support.
    """
    closed = profile.interval_transform(k, lo, hi)
    if closed is not None:
        return closed
    k_arr = np.atleast_1d(np.asarray(k, dtype=float))
    a, b = _clip_to_support(profile, lo, hi)
    out = np.zeros(k_arr.shape, dtype=complex)
    if a < b:
        bps = [a, b] + [p for p in profile.breakpoints if a < p < b]
        for i, kk in enumerate(k_arr):
            width = min(b - a, np.pi / max(abs(kk), 1.0))
            out[i] = adaptive_integrate(lambda x: np.exp(-1j * kk * x) * profile(x), bps,
                                        rtol=rtol, initial_width=width,
                                        name=f"{profile.kind} transform at k={kk}")
    return out if np.ndim(k) else complex(out[0])


def transform_on_grid(profile: Profile, k, lo: float, hi: float, nodes_per_panel=16):
    """Vectorized transform on many k at once (fixed composite rule fallback)."""
    closed = profile.interval_transform(k, lo, hi)
    if closed is not None:
        return closed
    k = np.asarray(k, dtype=float)
    a, b = _clip_to_support(profile, lo, hi)
    if not a < b:
        return np.zeros(k.shape, dtype=complex)
    kmax = max(np.max(np.abs(k)), 1.0)
    bps = [a, b] + [p for p in profile.breakpoints if a < p < b]
    x, w = composite_rule(panel_edges(bps, min(b - a, 2.0 / kmax)), nodes_per_panel)
    fw = profile(x) * w
    out = np.empty(k.shape, dtype=complex)
    flat = k.ravel()
    res = out.reshape(-1)
    for i in range(0, flat.size, 512):
        res[i:i + 512] = np.exp(-1j * np.outer(flat[i:i + 512], x)) @ fw
    return out


def spatial_transform(profile: Profile, region: Region, geometry: Geometry, k):
    """Half-line or finite-interval transform of a region's profile."""
    lo, hi = geometry.region_bounds(region)
    return interval_transform(profile, k, lo, hi)


def time_transform(trace: Profile, omega: complex, t: float, rtol=1e-10):
    """``int_0^t exp(omega s) trace(s) ds``.

    Purely imaginary ``omega`` reuses the closed-form interval transform.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    omega = complex(omega)
    if t == 0 or trace.is_zero:
        return 0j
    if omega.real == 0:
        return complex(interval_transform(trace, -omega.imag, 0.0, t, rtol=rtol))
    bps = [0.0, t] + [p for p in trace.breakpoints if 0 < p < t]
    width = min(t, np.pi / max(abs(omega), 1.0))
    return adaptive_integrate(lambda s: np.exp(omega * s) * trace(s), bps, rtol=rtol,
                              initial_width=width, name=f"time transform of {trace.kind}")


def time_transform_imag(trace: Profile, beta, t: float):
    """Vectorized ``int_0^t exp(i beta s) trace(s) ds`` for real ``beta``."""
    beta = np.asarray(beta, dtype=float)
    if t <= 0 or trace.is_zero:
        return np.zeros(beta.shape, dtype=complex)
    return transform_on_grid(trace, -beta, 0.0, t)


class SpatialTransform:
    """Memoized transform of one profile over one region.

    Calls with array ``k`` are cached by the array contents, so the four
    integrals of a formula sharing one k-grid only pay once.  The cache is
    guarded by a lock and safe to share between threads.
    """

    def __init__(self, profile: Profile, region: Region, geometry: Geometry):
        self.profile = profile
        self.region = region
        self.geometry = geometry
        self._cache = {}
        self._lock = threading.Lock()

    def __call__(self, k):
        k_arr = np.ascontiguousarray(k, dtype=float)
        key = (k_arr.shape, k_arr.tobytes())
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit if k_arr.ndim else complex(hit)
        lo, hi = self.geometry.region_bounds(self.region)
        val = transform_on_grid(self.profile, k_arr, lo, hi) if k_arr.ndim else \
            spatial_transform(self.profile, self.region, self.geometry, float(k_arr))
        val = np.asarray(val, dtype=complex)
        val.flags.writeable = False
        with self._lock:
            self._cache[key] = val
        return val if k_arr.ndim else complex(val)


def reflected_transform(transform: SpatialTransform, k):
    """Transform evaluated at ``-k``."""
    return transform(-np.asarray(k, dtype=float))


__all__ = [
    "Profile", "ZeroProfile", "GaussianWindow", "DecayingExponential", "SampledGrid",
    "profile_from_dict", "interval_transform", "transform_on_grid", "spatial_transform",
    "time_transform", "time_transform_imag", "SpatialTransform", "reflected_transform",
    "NonIntegrable",
]
