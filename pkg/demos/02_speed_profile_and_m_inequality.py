# Building a speed profile that satisfies the (M)-inequality
# ===========================================================
#
# For an arc-length parameterized, uniformly strongly self-contracted curve
# we need a positive increasing profile m with
#
#     m(t) int_t^s du / m(u)  <  <gamma'(t), gamma(s) - gamma(t)>
#
# for every pair t < s. The left side always behaves like (s - t) near the
# diagonal, with corrections controlled by the growth rate of m; the right
# side behaves like (s - t) - C (s - t)^{2 alpha + 1} with C from the Hoelder
# seminorm of the tangents. A sufficiently fast exponential rate wins.

import numpy as np

import contractflow as cf

circle = cf.make_circle_arc(np.pi / 2, 200)

# Empirical constants: the uniform lower bound c0 (deflated grid minimum of
# the normalized inner products) and the Taylor constant c1.
c0 = cf.estimate_c0(circle)
reg = cf.holder_seminorm(circle, alpha=1.0, safety_factor=1.0)
print(f"quarter circle: c0 = {c0:.4f}, tangent seminorm = "
      f"{reg.holder_seminorm:.6f}, c1 = {reg.c1:.6f}")

# The certified exponential rate b = 3 c1 L^{2 alpha - 1} e^{1 / c0}.
plan = cf.exponential_plan(circle, reg, c0)
print(f"exponential profile: b = {plan.b:.4f}, total flow time T = {plan.T:.1f}")

rep = cf.verify_M(circle, plan)
print(f"(M) verified on all pairs + local refinement: holds = {rep.holds}, "
      f"margin = {rep.margin:.3e}")

# Too small a rate fails: the left side approaches s - t from below slower
# than sin(s - t) falls away, and large gaps break first.
weak = cf.exponential_plan_with_rate(circle, 0.01)
rep_weak = cf.verify_M(circle, weak)
t, s, lhs, rhs = rep_weak.worst_pair
print(f"\nb = 0.01: holds = {rep_weak.holds}; worst pair t = {t:.3f}, "
      f"s = {s:.3f}: lhs = {lhs:.4f} > rhs = {rhs:.4f}")

# Certified-sufficient rates are monotone: every larger rate still works.
for factor in (2, 10):
    bigger = cf.exponential_plan_with_rate(circle, factor * plan.b)
    print(f"b x {factor:>2}: (M) holds = {cf.verify_M(circle, bigger).holds}")

# If the curve is three times differentiable we can instead use the endpoint
# profile m(t) = e^{phi(t)} / (b (L - t)), which blows up at the tip. The
# reparameterized curve then arrives with zero speed and the flow time is
# infinite: the limit point becomes a genuine minimizer.
tdb = cf.third_deriv_bound(circle)
endpoint = cf.endpoint_plan(circle, c0, tdb.c1_cubic)
L = circle.length
print(f"\nendpoint profile: b = {endpoint.b:.4f}, T = {endpoint.T}")
print(f"m(0) = {float(endpoint.m(0.0)):.4f}, m at the second-to-last sample = "
      f"{float(endpoint.m(circle.params[-2])):.1f}")
print(f"(M) holds = {cf.verify_M(circle, endpoint).holds}")

# The time change theta(t) = int_0^t m converts arc length into flow time.
for frac in (0.25, 0.5, 0.9, 0.99):
    print(f"theta({frac:.2f} L) = {float(endpoint.theta(frac * L)):8.3f}")
