"""Trace jets on the curve and the explicit convex extension.

The jet prescribes values f_i = int_{t_i}^L 1/m and gradients
G_i = -gamma'(t_i) / m(t_i) at the anchors gamma(t_i). After the first-order
convexity condition is verified, the extension is the lower envelope of the
supporting hyperplanes, optionally smoothed by log-sum-exp so that the
gradient field is continuous.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .curve import Curve
from .errors import ConditionCFailed
from .repar import ReparamPlan


@dataclass(frozen=True)
class JetData:
    """Prescribed trace (values, gradients) at anchor points on the curve."""

    anchors: np.ndarray
    values: np.ndarray
    gradients: np.ndarray

    def __post_init__(self):
        a = np.ascontiguousarray(self.anchors, dtype=float)
        v = np.ascontiguousarray(self.values, dtype=float)
        g = np.ascontiguousarray(self.gradients, dtype=float)
        if a.ndim != 2 or g.shape != a.shape or v.shape != (len(a),):
            raise ValueError("inconsistent jet arrays")
        for arr in (a, v, g):
            arr.setflags(write=False)
        object.__setattr__(self, "anchors", a)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "gradients", g)

    @property
    def value_range(self) -> float:
        return float(self.values.max() - self.values.min())


def curve_jet(curve: Curve, plan: ReparamPlan) -> JetData:
    """Jet of the target convex function along the curve.

    values[i] = int_{t_i}^L 1/m (so values[-1] = 0, decreasing in i) and
    gradients[i] = -gamma'(t_i) / m(t_i).
    """
    t = curve.params
    values = np.asarray(plan.inv_m_integral(t, curve.length), dtype=float)
    inv_m = np.asarray(plan.inv_m(t), dtype=float)
    gradients = -curve.tangents * inv_m[:, None]
    return JetData(anchors=curve.points, values=values, gradients=gradients)


@dataclass(frozen=True)
class ConditionCReport:
    passed: bool
    min_slack: float
    step1_min: float  # pairs with x earlier on the curve than y
    step2_min: float  # pairs with x later on the curve than y
    witness: tuple  # (i, j, slack) of the global minimum
    scale: float

    def to_json_dict(self) -> dict:
        return {"passed": self.passed, "min_slack": self.min_slack,
                "step1_min": self.step1_min, "step2_min": self.step2_min,
                "witness": list(self.witness), "scale": self.scale}


def _slack_matrix(jet: JetData) -> np.ndarray:
    # slack[i, j] = f_i - f_j - <G_j, x_i - x_j>
    f, x, g = jet.values, jet.anchors, jet.gradients
    cross = x @ g.T  # cross[i, j] = <x_i, G_j>
    own = np.einsum("id,id->i", x, g)  # <x_j, G_j>
    return f[:, None] - f[None, :] - (cross - own[None, :])


def check_C(jet: JetData, rtol: float = 1e-10) -> ConditionCReport:
    """First-order convexity: f(x) - f(y) >= <G(y), x - y> on all pairs.

    Passes iff the minimum slack is >= -rtol * max|f|. The report separates
    the two index orders (x before y on the curve, and after), which have
    different proof content: the "before" direction holds for any positive
    increasing profile, the "after" direction is exactly the (M)-inequality.
    """
    slack = _slack_matrix(jet)
    n = len(jet.values)
    iu, ju = np.triu_indices(n, k=1)
    step1 = float(slack[iu, ju].min()) if len(iu) else 0.0
    step2 = float(slack[ju, iu].min()) if len(iu) else 0.0
    off = ~np.eye(n, dtype=bool)
    flat = np.where(off, slack, np.inf)
    w = int(np.argmin(flat))
    wi, wj = divmod(w, n)
    scale = float(np.abs(jet.values).max())
    min_slack = float(flat[wi, wj])
    passed = bool(min_slack >= -rtol * scale)
    return ConditionCReport(passed=passed, min_slack=min_slack, step1_min=step1,
                            step2_min=step2, witness=(wi, wj, min_slack),
                            scale=scale)


@dataclass(frozen=True)
class ConditionCW1Report:
    passed: bool
    n_equality_pairs: int
    witness: tuple | None  # (i, j, gradient_gap) of the worst equality pair

    def to_json_dict(self) -> dict:
        return {"passed": self.passed, "n_equality_pairs": self.n_equality_pairs,
                "witness": list(self.witness) if self.witness else None}


def check_CW1(jet: JetData, tol: float = 1e-9) -> ConditionCW1Report:
    """Equality pairs of condition (C) must share their gradient.

    With a strict (M)-margin the nontrivial equality set is empty; exact ties
    (e.g. underflowed far-tail values) pass because their gradients agree.
    """
    slack = _slack_matrix(jet)
    n = len(jet.values)
    scale = max(float(np.abs(jet.values).max()), 1e-300)
    eq = (np.abs(slack) <= tol * scale) & ~np.eye(n, dtype=bool)
    idx = np.argwhere(eq)
    if len(idx) == 0:
        return ConditionCW1Report(passed=True, n_equality_pairs=0, witness=None)
    gaps = np.linalg.norm(jet.gradients[idx[:, 0]] - jet.gradients[idx[:, 1]], axis=1)
    w = int(np.argmax(gaps))
    passed = bool(gaps[w] <= tol)
    return ConditionCW1Report(passed=passed, n_equality_pairs=int(len(idx)),
                              witness=(int(idx[w, 0]), int(idx[w, 1]), float(gaps[w])))


@dataclass(frozen=True)
class ConvexExtension:
    """Max of supporting hyperplanes, log-sum-exp smoothed when eps > 0.

    F_0(x) = max_i [f_i + <G_i, x - x_i>] interpolates the jet values at the
    anchors whenever condition (C) holds; F_eps = eps log sum exp(p_i / eps)
    is convex, smooth, and within eps log N above F_0.
    """

    anchors: np.ndarray
    values: np.ndarray
    gradients: np.ndarray
    smoothing_eps: float
    offsets: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        for name in ("anchors", "values", "gradients"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.offsets is None:
            offs = self.values - np.einsum("id,id->i", self.gradients, self.anchors)
            offs.setflags(write=False)
            object.__setattr__(self, "offsets", offs)

    @property
    def n_pieces(self) -> int:
        return len(self.values)

    def piece_values(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.gradients.T + self.offsets

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "anchors": self.anchors.tolist(),
            "values": self.values.tolist(),
            "gradients": self.gradients.tolist(),
            "eps": self.smoothing_eps,
        }


def extension_from_json_dict(doc: dict) -> ConvexExtension:
    return ConvexExtension(anchors=np.asarray(doc["anchors"], dtype=float),
                           values=np.asarray(doc["values"], dtype=float),
                           gradients=np.asarray(doc["gradients"], dtype=float),
                           smoothing_eps=float(doc["eps"]))


def build_extension(jet: JetData, smoothing_eps: float | None = None,
                    eps_rel: float = 1e-3) -> ConvexExtension:
    """Build the envelope extension after verifying condition (C).

    ``smoothing_eps`` is the absolute log-sum-exp temperature; when None it
    defaults to eps_rel times the jet's value range (0 when the range is 0).
    """
    report = check_C(jet)
    if not report.passed:
        raise ConditionCFailed(
            f"condition (C) fails with slack {report.min_slack:.3g} "
            f"at pair {report.witness[:2]}")
    if smoothing_eps is None:
        smoothing_eps = eps_rel * jet.value_range
    if smoothing_eps < 0.0:
        raise ValueError("smoothing_eps must be nonnegative")
    return ConvexExtension(anchors=jet.anchors, values=jet.values,
                           gradients=jet.gradients, smoothing_eps=float(smoothing_eps))


def eval_f(ext: ConvexExtension, x) -> float | np.ndarray:
    """Extension value at x; x may be a point (d,) or a batch (k, d)."""
    p = ext.piece_values(x)
    eps = ext.smoothing_eps
    if eps == 0.0:
        return p.max(axis=-1)
    m = p.max(axis=-1, keepdims=True)
    out = m[..., 0] + eps * np.log(np.exp((p - m) / eps).sum(axis=-1))
    return out


def eval_grad(ext: ConvexExtension, x) -> np.ndarray:
    """Extension gradient at x (softmax blend; argmax piece when eps = 0).

    Ties at eps = 0 break to the lowest piece index.
    """
    p = ext.piece_values(x)
    eps = ext.smoothing_eps
    if eps == 0.0:
        idx = np.argmax(p, axis=-1)
        return ext.gradients[idx]
    m = p.max(axis=-1, keepdims=True)
    w = np.exp((p - m) / eps)
    w /= w.sum(axis=-1, keepdims=True)
    return w @ ext.gradients
