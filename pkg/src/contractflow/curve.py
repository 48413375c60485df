"""Curves in R^n: construction, arc-length resampling, generators, regularity.

Every curve in the pipeline is an arc-length parameterized sample set
(params, points, unit tangents) plus, when available, exact evaluators for
the underlying parameterization. All downstream constants assume unit speed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import (
    DegenerateCurve,
    DuplicatePoint,
    InsufficientRegularity,
    OutOfDomain,
    StationaryPoint,
)
from .numint import CumulativeIntegral, invert_monotone

_UNIT_SPEED_TOL = 1e-9


class _ArcLengthMap:
    """Bijection between a raw parameter u in [u0, u1] and arc length s.

    When the input is already unit speed the map is the identity shift;
    otherwise cumulative adaptive-Simpson quadrature of the speed is inverted
    by bracketed Newton.
    """

    def __init__(self, speed, u0: float, u1: float, tol: float = 1e-10):
        self.u0 = float(u0)
        self.u1 = float(u1)
        self.speed = speed
        probe = np.linspace(u0, u1, 257)
        sp = np.array([speed(float(u)) for u in probe])
        self.min_speed = float(sp.min())
        self.unit_speed = bool(np.abs(sp - 1.0).max() <= _UNIT_SPEED_TOL)
        if self.unit_speed:
            self._cum = None
            self.total = self.u1 - self.u0
        else:
            self._cum = CumulativeIntegral(speed, self.u0, self.u1, n_nodes=1025, tol=tol)
            self.total = self._cum.total

    def s_of_u(self, u: float) -> float:
        if self.unit_speed:
            return u - self.u0
        return self._cum(u)

    def u_of_s(self, s: float) -> float:
        if self.unit_speed:
            return self.u0 + s
        if s <= 0.0:
            return self.u0
        if s >= self.total:
            return self.u1
        return self._cum.inverse(s)


@dataclass(frozen=True)
class _Geometry:
    """Exact evaluators in the raw parameter, plus the arc-length map."""

    gamma: object
    dgamma: object
    arcmap: _ArcLengthMap
    d2gamma: object = None
    d3gamma: object = None

    @property
    def unit_speed(self) -> bool:
        return self.arcmap.unit_speed


@dataclass(frozen=True)
class Curve:
    """Arc-length parameterized discrete curve with unit tangents.

    Fields
    ------
    params : (N,) strictly increasing, params[0] = 0, params[-1] = L
    points : (N, dim) samples gamma(t_i)
    tangents : (N, dim) unit tangents gamma'(t_i)
    source : "sampled" or "analytic"
    """

    params: np.ndarray
    points: np.ndarray
    tangents: np.ndarray
    source: str = "sampled"
    geometry: _Geometry | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        params = np.ascontiguousarray(self.params, dtype=float)
        points = np.ascontiguousarray(self.points, dtype=float)
        tangents = np.ascontiguousarray(self.tangents, dtype=float)
        if params.ndim != 1 or points.ndim != 2 or tangents.shape != points.shape:
            raise ValueError("inconsistent curve arrays")
        if len(params) != len(points) or len(params) < 2:
            raise ValueError("need at least 2 samples with matching params")
        if abs(params[0]) > 1e-12:
            raise ValueError("arc-length parameters must start at 0")
        if np.any(np.diff(params) <= 0):
            raise ValueError("arc-length parameters must be strictly increasing")
        norms = np.linalg.norm(tangents, axis=1)
        if np.abs(norms - 1.0).max() > 1e-4:
            raise ValueError("tangents must be unit vectors")
        for arr in (params, points, tangents):
            arr.setflags(write=False)
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "tangents", tangents)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_samples(self) -> int:
        return len(self.params)

    @property
    def length(self) -> float:
        return float(self.params[-1])

    def _geom(self) -> _Geometry:
        if self.geometry is None:
            # direct-constructed curve: fit a spline through the stored samples
            cs = CubicSpline(self.params, self.points, axis=0)
            dcs = cs.derivative()
            speed = lambda u: float(np.linalg.norm(dcs(u)))
            geom = _Geometry(gamma=cs, dgamma=dcs,
                             arcmap=_ArcLengthMap(speed, self.params[0], self.params[-1]))
            object.__setattr__(self, "geometry", geom)
        return self.geometry

    def _clamp(self, t: float) -> float:
        L = self.length
        slack = 1e-12 * max(L, 1.0)
        if t < -slack or t > L + slack:
            raise OutOfDomain(f"t={t} outside [0, {L}]")
        return min(max(t, 0.0), L)

    def point_at(self, t: float) -> np.ndarray:
        t = self._clamp(float(t))
        g = self._geom()
        return np.asarray(g.gamma(g.arcmap.u_of_s(t)), dtype=float)

    def tangent_at(self, t: float) -> np.ndarray:
        t = self._clamp(float(t))
        g = self._geom()
        v = np.asarray(g.dgamma(g.arcmap.u_of_s(t)), dtype=float)
        return v / np.linalg.norm(v)


def point_at(curve: Curve, t: float) -> np.ndarray:
    return curve.point_at(t)


def tangent_at(curve: Curve, t: float) -> np.ndarray:
    """Unit tangent at arc length t (exact for analytic curves)."""
    return curve.tangent_at(t)


@dataclass(frozen=True)
class RegularityEstimate:
    """Hoelder data of the tangent field and the derived Taylor constant.

    c1 = holder_seminorm^2 / (2 (2 alpha + 1)) exactly as stored.
    """

    alpha: float
    holder_seminorm: float
    c1: float
    third_deriv_bound: float | None = None
    safety_factor: float = 1.25

    def with_third_deriv(self, bound: float) -> "RegularityEstimate":
        return replace(self, third_deriv_bound=float(bound))


@dataclass(frozen=True)
class ThirdDerivativeBound:
    """Sup bound on the third arc-length derivative with its running sup."""

    bound: float
    values: np.ndarray
    params: np.ndarray
    safety_factor: float

    @property
    def c1_cubic(self) -> float:
        """Constant of the cubic Taylor lower bound, ||gamma'''|| / 6."""
        return self.bound / 6.0

    def zeta(self, t):
        """Running sup of ||gamma'''|| over [0, t] (nondecreasing)."""
        running = np.maximum.accumulate(self.values)
        return np.interp(t, self.params, running)


def _resample(geom: _Geometry, n: int, source: str) -> Curve:
    L = geom.arcmap.total
    s = np.linspace(0.0, L, n)
    u = np.empty(n)
    u[0], u[-1] = geom.arcmap.u0, geom.arcmap.u1
    for k in range(1, n - 1):
        u[k] = geom.arcmap.u_of_s(s[k])
    pts = np.array([np.asarray(geom.gamma(uk), dtype=float) for uk in u])
    vel = np.array([np.asarray(geom.dgamma(uk), dtype=float) for uk in u])
    tans = vel / np.linalg.norm(vel, axis=1, keepdims=True)
    return Curve(params=s, points=pts, tangents=tans, source=source, geometry=geom)


def from_samples(raw_points, n_resample: int) -> Curve:
    """Arc-length resample a raw point sequence through a cubic interpolant.

    Parameters
    ----------
    raw_points : (M, dim) array-like, M >= 3, consecutive points distinct
    n_resample : number of output samples

    Raises
    ------
    DuplicatePoint : consecutive raw points coincide
    DegenerateCurve : total chordal length below 1e-12
    """
    pts = np.asarray(raw_points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("raw_points must be a 2-D array of points")
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    if np.any(seg == 0.0):
        raise DuplicatePoint("consecutive raw points coincide")
    if len(pts) < 3:
        raise ValueError("need at least 3 distinct points")
    if seg.sum() < 1e-12:
        raise DegenerateCurve("total chordal length below 1e-12")
    if n_resample < 2:
        raise ValueError("n_resample must be at least 2")
    chord = np.concatenate([[0.0], np.cumsum(seg)])
    cs = CubicSpline(chord, pts, axis=0)
    dcs = cs.derivative()
    speed = lambda v: float(np.linalg.norm(dcs(v)))
    geom = _Geometry(gamma=cs, dgamma=dcs, arcmap=_ArcLengthMap(speed, 0.0, chord[-1]))
    return _resample(geom, n_resample, "sampled")


def make_analytic(gamma, gamma_prime, domain, n_samples: int,
                  second_derivative=None, third_derivative=None) -> Curve:
    """Arc-length resampled curve from exact evaluators on ``domain``.

    Raises StationaryPoint if the speed drops below 1e-10 on the probe grid.
    """
    u0, u1 = float(domain[0]), float(domain[1])
    if not u1 > u0:
        raise ValueError("domain must have positive width")
    if n_samples < 2:
        raise ValueError("n_samples must be at least 2")
    g = lambda u: np.asarray(gamma(u), dtype=float)
    dg = lambda u: np.asarray(gamma_prime(u), dtype=float)
    speed = lambda u: float(np.linalg.norm(dg(u)))
    arcmap = _ArcLengthMap(speed, u0, u1)
    if arcmap.min_speed < 1e-10:
        raise StationaryPoint("gamma' vanishes on the sampling grid")
    geom = _Geometry(gamma=g, dgamma=dg, arcmap=arcmap,
                     d2gamma=second_derivative, d3gamma=third_derivative)
    return _resample(geom, n_samples, "analytic")


def resample(curve: Curve, n: int) -> Curve:
    """Resample to n points through the curve's own geometry."""
    if curve.geometry is not None:
        return _resample(curve.geometry, n, curve.source)
    return from_samples(curve.points, n)


def make_segment(p0, p1, n_samples: int = 100) -> Curve:
    p0 = np.asarray(p0, dtype=float)
    p1 = np.asarray(p1, dtype=float)
    L = float(np.linalg.norm(p1 - p0))
    if L < 1e-12:
        raise DegenerateCurve("segment endpoints coincide")
    d = (p1 - p0) / L
    zero = np.zeros_like(d)
    return make_analytic(lambda u: p0 + u * d, lambda u: d, (0.0, L), n_samples,
                         second_derivative=lambda u: zero,
                         third_derivative=lambda u: zero)


def make_circle_arc(angle: float = math.pi / 2, n_samples: int = 200,
                    radius: float = 1.0) -> Curve:
    """Unit-speed circular arc from (radius, 0), counterclockwise."""
    if angle <= 0 or radius <= 0:
        raise ValueError("angle and radius must be positive")
    R = float(radius)
    gamma = lambda u: np.array([R * math.cos(u / R), R * math.sin(u / R)])
    dgamma = lambda u: np.array([-math.sin(u / R), math.cos(u / R)])
    d2 = lambda u: np.array([-math.cos(u / R), -math.sin(u / R)]) / R
    d3 = lambda u: np.array([math.sin(u / R), -math.cos(u / R)]) / R**2
    return make_analytic(gamma, dgamma, (0.0, R * angle), n_samples,
                         second_derivative=d2, third_derivative=d3)


def make_log_spiral(lam: float, t_max: float, n_samples: int) -> Curve:
    """Logarithmic spiral u -> e^{-lam u} (cos u, sin u) on [0, t_max].

    Resampled to arc length; the raw speed is e^{-lam u} sqrt(1 + lam^2), so
    the total length is sqrt(1 + lam^2) (1 - e^{-lam t_max}) / lam.
    """
    if lam <= 0 or t_max <= 0:
        raise ValueError("lam and t_max must be positive")
    if n_samples < 10:
        raise ValueError("n_samples must be at least 10")
    w = 1j - lam

    def deriv(order):
        c = w**order
        return lambda u: np.array([(c * np.exp(w * u)).real, (c * np.exp(w * u)).imag])

    return make_analytic(deriv(0), deriv(1), (0.0, t_max), n_samples,
                         second_derivative=deriv(2), third_derivative=deriv(3))


def log_spiral_arclength(lam: float, t_max: float) -> float:
    """Closed-form arc length of the log spiral on [0, t_max]."""
    return math.sqrt(1.0 + lam * lam) * (1.0 - math.exp(-lam * t_max)) / lam


def log_spiral_critical_lambda(tol: float = 1e-10) -> float:
    """Root of lam = e^{-3 pi lam / 2}, the spiral classification threshold."""
    g = lambda lam: lam - math.exp(-1.5 * math.pi * lam)
    dg = lambda lam: 1.0 + 1.5 * math.pi * math.exp(-1.5 * math.pi * lam)
    root = invert_monotone(g, 0.0, 1e-4, 1.0, deriv=dg, tol=1e-15)
    assert abs(g(root)) < tol
    return root


def make_arc_chain(curvatures, lengths, n_samples: int = 100,
                   start=(0.0, 0.0), heading: float = 0.0) -> Curve:
    """Planar C^1 chain of constant-curvature arcs, exactly unit speed.

    Useful as a closed-form test family: points and tangents carry no
    quadrature error, so chord <= arc holds to machine precision.
    """
    ks = np.asarray(curvatures, dtype=float)
    ls = np.asarray(lengths, dtype=float)
    if ks.shape != ls.shape or ks.ndim != 1 or len(ks) == 0:
        raise ValueError("curvatures and lengths must be matching 1-D sequences")
    if np.any(ls <= 0):
        raise ValueError("arc lengths must be positive")
    breaks = np.concatenate([[0.0], np.cumsum(ls)])
    psis = np.concatenate([[heading], heading + np.cumsum(ks * ls)])

    def arc_step(psi, kap, du):
        # du sinc(kap du / 2) (cos, sin)(psi + kap du / 2): cancellation-free
        # for every curvature, unlike (sin psi2 - sin psi) / kap
        half = 0.5 * kap * du
        s = math.sin(half) / half if half != 0.0 else 1.0
        mid = psi + half
        return du * s * np.array([math.cos(mid), math.sin(mid)])

    starts = [np.asarray(start, dtype=float)]
    for k, (kap, a, b) in enumerate(zip(ks, breaks[:-1], breaks[1:])):
        starts.append(starts[-1] + arc_step(psis[k], kap, b - a))

    def locate(u):
        j = int(np.searchsorted(breaks, u, side="right") - 1)
        return min(max(j, 0), len(ks) - 1)

    def gamma(u):
        j = locate(u)
        return starts[j] + arc_step(psis[j], ks[j], u - breaks[j])

    def dgamma(u):
        j = locate(u)
        psi2 = psis[j] + ks[j] * (u - breaks[j])
        return np.array([math.cos(psi2), math.sin(psi2)])

    return make_analytic(gamma, dgamma, (0.0, breaks[-1]), n_samples)


def holder_seminorm(curve: Curve, alpha: float,
                    safety_factor: float = 1.25) -> RegularityEstimate:
    """Grid estimate of ||gamma'||_{C^{0,alpha}} and the Taylor constant.

    The seminorm is the safety-inflated max over sample pairs of
    ||gamma'(t_i) - gamma'(t_j)|| / (t_j - t_i)^alpha; the Taylor constant is
    c1 = seminorm^2 / (2 (2 alpha + 1)).
    """
    if not 0.5 < alpha <= 1.0:
        raise ValueError("alpha must lie in (1/2, 1]")
    if curve.n_samples < 2:
        raise ValueError("need at least 2 samples")
    t = curve.params
    T = curve.tangents
    iu, ju = np.triu_indices(len(t), k=1)
    gaps = t[ju] - t[iu]
    diffs = np.linalg.norm(T[ju] - T[iu], axis=1)
    sem = safety_factor * float((diffs / gaps**alpha).max())
    c1 = sem * sem / (2.0 * (2.0 * alpha + 1.0))
    return RegularityEstimate(alpha=alpha, holder_seminorm=sem, c1=c1,
                              safety_factor=safety_factor)


def _second_differences(params: np.ndarray, tangents: np.ndarray) -> np.ndarray:
    h0 = params[1:-1] - params[:-2]
    h1 = params[2:] - params[1:-1]
    d2 = 2.0 * ((tangents[2:] - tangents[1:-1]) / h1[:, None]
                - (tangents[1:-1] - tangents[:-2]) / h0[:, None]) / (h0 + h1)[:, None]
    return np.linalg.norm(d2, axis=1)


def third_deriv_bound(curve: Curve, safety_factor: float = 1.25) -> ThirdDerivativeBound:
    """Safety-inflated sup of ||gamma'''|| over the grid, with running sup.

    Uses the exact third-derivative evaluator when the curve is analytic and
    already unit speed; otherwise second differences of the tangents. The
    finite-difference path cross-checks a stride-2 subgrid and raises
    InsufficientRegularity when the estimates diverge (ratio above 2).
    """
    g = curve.geometry
    if g is not None and g.d3gamma is not None and g.unit_speed:
        u = g.arcmap.u0 + curve.params
        vals = np.array([np.linalg.norm(np.asarray(g.d3gamma(uk), dtype=float))
                         for uk in u])
    else:
        if curve.n_samples < 7:
            raise ValueError("finite-difference estimate needs at least 7 samples")
        full = _second_differences(curve.params, curve.tangents)
        coarse = _second_differences(curve.params[::2], curve.tangents[::2])
        if full.max() > 2.0 * coarse.max() + 1e-12:
            raise InsufficientRegularity(
                f"third-derivative estimate diverges under refinement "
                f"({full.max():.3g} vs {coarse.max():.3g} at stride 2)")
        vals = np.concatenate([[full[0]], full, [full[-1]]])
    vals = safety_factor * vals
    return ThirdDerivativeBound(bound=float(vals.max()), values=vals,
                                params=curve.params, safety_factor=safety_factor)


# ---------------------------------------------------------------------------
# import/export

def save_csv(curve: Curve, path) -> None:
    """One row per sample: t, x_1..x_n, tx_1..tx_n."""
    d = curve.dim
    header = ",".join(["t"] + [f"x{k+1}" for k in range(d)] + [f"tx{k+1}" for k in range(d)])
    data = np.column_stack([curve.params, curve.points, curve.tangents])
    np.savetxt(path, data, delimiter=",", header=header, comments="", fmt="%.17g")


def load_csv(path) -> Curve:
    with open(path) as fh:
        first = fh.readline()
    skip = 1 if first.lstrip().startswith("t") else 0
    data = np.loadtxt(path, delimiter=",", skiprows=skip, ndmin=2)
    d = (data.shape[1] - 1) // 2
    return Curve(params=data[:, 0], points=data[:, 1:1 + d],
                 tangents=data[:, 1 + d:1 + 2 * d], source="sampled")


def to_json_dict(curve: Curve, alpha: float | None = None) -> dict:
    return {
        "schema_version": 1,
        "dim": curve.dim,
        "L": curve.length,
        "alpha": alpha,
        "source": curve.source,
        "params": curve.params.tolist(),
        "points": curve.points.tolist(),
        "tangents": curve.tangents.tolist(),
    }


def from_json_dict(doc: dict) -> Curve:
    return Curve(params=np.asarray(doc["params"], dtype=float),
                 points=np.asarray(doc["points"], dtype=float),
                 tangents=np.asarray(doc["tangents"], dtype=float),
                 source=doc.get("source", "sampled"))


def save_json(curve: Curve, path, alpha: float | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(to_json_dict(curve, alpha), fh, sort_keys=True)


def load_json(path) -> Curve:
    with open(path) as fh:
        return from_json_dict(json.load(fh))
