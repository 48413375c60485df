"""Scalar quadrature and monotone-inversion helpers.

Adaptive Simpson with the classical 15x error rule is the workhorse for every
integral that has no closed form; inversion of increasing functions uses
bisection to bracket and Newton to polish.
"""

from __future__ import annotations

import numpy as np


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-10, max_depth: int = 48) -> float:
    """Integrate a scalar function over [a, b] to absolute tolerance ``tol``."""
    if a == b:
        return 0.0
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_step(f, a, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_step(f, a, b, fa, fm, fb, whole, tol, depth):
    m = 0.5 * (a + b)
    lm, rm = 0.5 * (a + m), 0.5 * (m + b)
    flm, frm = f(lm), f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    err = left + right - whole
    if not (np.isfinite(left) and np.isfinite(right)):
        # a non-finite plateau never refines; only mixed cells are worth splitting
        samples = (fa, flm, fm, frm, fb)
        if depth <= 0 or not any(np.isfinite(v) for v in samples):
            return left + right
    elif depth <= 0 or abs(err) <= 15.0 * tol:
        return left + right + err / 15.0
    half = 0.5 * tol
    return _simpson_step(f, a, m, fa, flm, fm, left, half, depth - 1) + _simpson_step(
        f, m, b, fm, frm, fb, right, half, depth - 1
    )


def invert_monotone(fn, target: float, lo: float, hi: float, deriv=None,
                    tol: float = 1e-12, max_iter: int = 200) -> float:
    """Solve fn(x) = target for increasing fn on [lo, hi].

    Bisection narrows the bracket; once inside, Newton (when ``deriv`` is
    given) converges quadratically. ``tol`` is relative to the bracket width.
    """
    flo = fn(lo) - target
    if flo >= 0.0:
        return lo
    fhi = fn(hi) - target
    if fhi <= 0.0:
        return hi
    scale = max(abs(hi - lo), 1.0)
    a, b = lo, hi
    x = 0.5 * (a + b)
    for _ in range(max_iter):
        fx = fn(x) - target
        if fx > 0.0:
            b = x
        elif fx < 0.0:
            a = x
        else:
            return x
        if b - a <= tol * scale:
            return 0.5 * (a + b)
        step = None
        if deriv is not None:
            d = deriv(x)
            if d > 0.0:
                step = x - fx / d
        if step is not None and a < step < b:
            x = step
        else:
            x = 0.5 * (a + b)
    return 0.5 * (a + b)


class CumulativeIntegral:
    """F(x) = integral of f from ``a`` to x, tabulated on nodes.

    Off-node queries add a locally adapted Simpson correction from the nearest
    lower node, so accuracy is uniform in x.
    """

    def __init__(self, f, a: float, b: float, n_nodes: int = 513, tol: float = 1e-10):
        self.f = f
        self.tol = tol
        self.nodes = np.linspace(a, b, n_nodes)
        inc = [adaptive_simpson(f, x0, x1, tol)
               for x0, x1 in zip(self.nodes[:-1], self.nodes[1:])]
        self.values = np.concatenate([[0.0], np.cumsum(inc)])

    @property
    def total(self) -> float:
        return float(self.values[-1])

    def _one(self, x: float) -> float:
        j = int(np.searchsorted(self.nodes, x, side="right") - 1)
        j = min(max(j, 0), len(self.nodes) - 1)
        base = self.values[j]
        if x == self.nodes[j]:
            return float(base)
        return float(base + adaptive_simpson(self.f, self.nodes[j], x, self.tol))

    def __call__(self, x):
        if np.ndim(x) == 0:
            return self._one(float(x))
        return np.array([self._one(float(v)) for v in np.asarray(x).ravel()]).reshape(np.shape(x))

    def inverse(self, y: float) -> float:
        """x with F(x) = y, using f as the Newton derivative."""
        j = int(np.searchsorted(self.values, y, side="right") - 1)
        j = min(max(j, 0), len(self.nodes) - 2)
        return invert_monotone(self._one, y, self.nodes[j], self.nodes[j + 1], deriv=self.f)


def tail_limit_integral(f, a: float, b: float, rel_tol: float = 1e-9,
                        max_halvings: int = 48):
    """Integral of f over [a, b) with a possible singularity at b.

    Integrates over [a, b - delta_k] for geometrically shrinking delta_k.
    Power-law endpoint singularities give geometric increments, so the tail
    is summed by ratio extrapolation; increments that do not decay
    geometrically (log or worse divergence) never converge. Returns
    ``(value, converged)``.
    """
    delta = 0.5 * (b - a)
    total = adaptive_simpson(f, a, b - delta, rel_tol)
    prev_inc = None
    prev_extrap = None
    for _ in range(max_halvings):
        nd = 0.5 * delta
        if not b - nd < b:  # float resolution at the endpoint exhausted
            break
        inc = adaptive_simpson(f, b - delta, b - nd, rel_tol)
        total += inc
        delta = nd
        if abs(inc) <= rel_tol * max(1.0, abs(total)):
            return total, True
        if prev_inc is not None and abs(prev_inc) > 0.0:
            r = abs(inc) / abs(prev_inc)
            if r < 0.98:
                extrap = total + inc * r / (1.0 - r)
                if (prev_extrap is not None
                        and abs(extrap - prev_extrap) <= rel_tol * max(1.0, abs(extrap))):
                    return extrap, True
                prev_extrap = extrap
            else:
                prev_extrap = None
        prev_inc = inc
    return total, False
