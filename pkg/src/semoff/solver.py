"""Per-agent offload subproblem: optimal compression ratio and transmit power.

With the deadline met with equality (any slack would waste transmit energy,
since the required rate and hence power only grows as upload time shrinks),
the offload energy becomes a strictly convex function of the compression
ratio alone. The solver:

1. closes the feasible ratio interval under the deadline and the power cap,
2. locates the interior stationary point by bisection on the sign of the
   energy derivative (scaled by rho, which preserves sign and root),
3. clips to the interval boundary when the derivative never changes sign,
4. recovers the matching transmit power from the inverse rate formula.

Root finding is plain bisection: unconditionally convergent on the concave
deadline-margin function and on the monotone-sign derivative, at the price
of a few dozen iterations per root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import model
from .model import AgentProfile, ModelDomainError, SystemParams

LN2 = math.log(2.0)

BISECT_REL_TOL = 1e-10
BISECT_MAX_ITER = 200


class ConvergenceError(RuntimeError):
    """Bisection failed to converge; signals pathological parameters."""


@dataclass(frozen=True, slots=True)
class FeasibleRegion:
    """Closed interval of compression ratios meeting deadline and power cap.

    ``rho_inf`` is the physical floor (compression alone must fit the
    deadline, clamped by the configured minimum ratio); ``rho_pmax_lo`` and
    ``rho_pmax_hi`` bracket where max-power transmission fits the residual
    deadline, ``None`` when no ratio does. ``lo``/``hi`` are NaN in that
    rootless case.
    """

    lo: float
    hi: float
    empty: bool
    rho_inf: float
    rho_pmax_lo: float | None
    rho_pmax_hi: float | None


@dataclass(frozen=True, slots=True)
class StationarityPoint:
    """Interior zero of the offload-energy derivative.

    ``z`` is the spectral-efficiency operating point (payload bits over
    bandwidth times upload time) at the root; ``residual`` is the derivative
    expression evaluated there (near zero when converged).
    """

    rho_zero: float
    z: float
    residual: float


@dataclass(frozen=True, slots=True)
class AgentSolution:
    """Solver output for one agent.

    When ``bs_feasible`` is false the deadline cannot be met under the power
    cap; ``rho_star``/``p_star`` are ``None`` and the evaluation is the
    stay-local one.
    """

    rho_star: float | None
    p_star: float | None
    evaluation: model.AgentEvaluation
    region: FeasibleRegion
    bs_feasible: bool


def residual_comm_time(params: SystemParams, agent: AgentProfile, rho: float) -> float:
    """Deadline seconds left for transmission after compressing to ``rho``.

    May be <= 0 (compression alone already blows the deadline); callers
    decide what that means.
    """
    return params.deadline_s - model.compression_time(agent, rho)


def deadline_margin(
    params: SystemParams, agent: AgentProfile, rho: float, rate_bps: float
) -> float:
    """Residual transmit budget minus the upload time at ``rate_bps``.

    Nonnegative exactly where ratio ``rho`` fits the deadline at that rate.
    Strictly concave in rho with a unique interior maximizer. Evaluated
    inline (not via the validated model ops) because root bracketing probes
    rho > 1, where the analytic continuation is well defined even though no
    physical decision exists there.
    """
    a_sec = agent.complexity * agent.data_bits / agent.cpu_hz
    return (
        params.deadline_s + a_sec * math.log(rho) - rho * agent.data_bits / rate_bps
    )


def rho_bounds_for_rate(
    params: SystemParams, agent: AgentProfile, rate_bps: float
) -> tuple[float, float] | None:
    """Roots of the deadline margin around its peak, or ``None`` if no
    physically valid ratio (0 < rho <= 1) fits the deadline at that rate.

    The returned pair brackets all deadline-feasible ratios at the given
    rate; the upper root may exceed 1 (callers clamp).
    """
    peak = agent.complexity * rate_bps / agent.cpu_hz
    if deadline_margin(params, agent, min(peak, 1.0), rate_bps) < 0.0:
        # The margin is maximal at the peak (or, when the peak lies beyond
        # rho=1, at rho=1 within the valid domain), so it is negative on all
        # of (0, 1].
        return None

    lower = _bisect_margin_root(params, agent, rate_bps, peak, descending=False)
    upper = _bisect_margin_root(params, agent, rate_bps, peak, descending=True)
    return lower, upper


def _bisect_margin_root(
    params: SystemParams,
    agent: AgentProfile,
    rate_bps: float,
    peak: float,
    descending: bool,
) -> float:
    """Bisect one deadline-margin root on the rising or falling flank."""
    if descending:
        # Falling flank: double outward until the margin goes negative. The
        # linear upload term eventually dominates the log compression term.
        hi = max(peak, 1.0)
        while deadline_margin(params, agent, hi, rate_bps) >= 0.0:
            hi *= 2.0
            if hi > 1e30:
                raise ConvergenceError("no upper deadline-margin root found")
        a, b = peak, hi  # margin(a) >= 0 > margin(b)
    else:
        lo = peak / 2.0
        while deadline_margin(params, agent, lo, rate_bps) >= 0.0:
            lo /= 2.0
            if lo < 1e-300:
                raise ConvergenceError("no lower deadline-margin root found")
        a, b = lo, peak  # margin(a) < 0 <= margin(b)

    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (a + b)
        if b - a <= BISECT_REL_TOL * mid:
            return mid
        # Nonnegative margin means the root lies farther from the peak on a
        # falling flank, closer to it on a rising one.
        if (deadline_margin(params, agent, mid, rate_bps) >= 0.0) == descending:
            a = mid
        else:
            b = mid
    raise ConvergenceError("deadline-margin bisection did not converge")


def feasible_region(params: SystemParams, agent: AgentProfile) -> FeasibleRegion:
    """Close the feasible compression-ratio interval for one agent.

    Empty regions are a valid outcome (the agent cannot meet the deadline
    even at full power) and force the stay-local mode downstream.
    """
    rho_inf = max(
        params.rho_min,
        math.exp(-params.deadline_s * agent.cpu_hz / (agent.complexity * agent.data_bits)),
    )
    r_max = model.achievable_rate(params, agent, params.p_max_w)
    roots = rho_bounds_for_rate(params, agent, r_max)
    if roots is None:
        return FeasibleRegion(
            lo=math.nan,
            hi=math.nan,
            empty=True,
            rho_inf=rho_inf,
            rho_pmax_lo=None,
            rho_pmax_hi=None,
        )
    lo = max(params.rho_min, rho_inf, roots[0])
    hi = min(roots[1], 1.0)
    return FeasibleRegion(
        lo=lo,
        hi=hi,
        empty=lo > hi,
        rho_inf=rho_inf,
        rho_pmax_lo=roots[0],
        rho_pmax_hi=roots[1],
    )


def stationarity_residual(params: SystemParams, agent: AgentProfile, rho: float) -> float:
    """Signed optimality residual at ``rho`` under a tight deadline.

    This is rho times the derivative of the deadline-tight offload energy,
    so its sign and root match the derivative's. Negative left of the
    unconstrained minimizer, positive right of it (strict convexity).
    """
    t_cm = residual_comm_time(params, agent, rho)
    if t_cm <= 0.0:
        raise ModelDomainError(
            f"rho={rho!r} leaves no transmit budget (residual {t_cm!r} s)"
        )
    a_sec = agent.complexity * agent.data_bits / agent.cpu_hz
    z = rho * agent.data_bits / (params.bandwidth_hz * t_cm)
    pow2z = math.exp(z * LN2)
    comm_term = (params.noise_w / agent.channel_gain) * (
        a_sec * (pow2z - 1.0) + z * pow2z * LN2 * (t_cm - a_sec)
    )
    comp_term = params.switched_cap * agent.complexity * agent.data_bits * agent.cpu_hz**2
    return comm_term - comp_term


def deadline_tight_energy(params: SystemParams, agent: AgentProfile, rho: float) -> float:
    """Offload energy at ratio ``rho`` with the deadline met exactly.

    Composes the residual transmit budget with the inverse rate formula;
    used by the derivative cross-check and as the solver's objective.
    """
    t_cm = residual_comm_time(params, agent, rho)
    if t_cm <= 0.0:
        raise ModelDomainError(
            f"rho={rho!r} leaves no transmit budget (residual {t_cm!r} s)"
        )
    power = model.power_for_rate(params, agent, rho * agent.data_bits / t_cm)
    e_comp, e_comm, e_total = model.bs_energy(params, agent, rho, power)
    return e_total


def find_stationary_point(
    params: SystemParams, agent: AgentProfile, region: FeasibleRegion
) -> StationarityPoint | None:
    """Bisect the optimality residual over a nonempty region.

    Returns ``None`` when the residual holds one sign across the interval,
    i.e. the constrained optimum sits on a boundary.
    """
    if region.empty:
        raise ModelDomainError("cannot search an empty feasible region")
    lo, hi = region.lo, region.hi
    if not lo < hi:
        return None
    if stationarity_residual(params, agent, lo) >= 0.0:
        return None
    if stationarity_residual(params, agent, hi) <= 0.0:
        return None

    a, b = lo, hi
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (a + b)
        if b - a <= BISECT_REL_TOL * mid:
            t_cm = residual_comm_time(params, agent, mid)
            z = mid * agent.data_bits / (params.bandwidth_hz * t_cm)
            return StationarityPoint(
                rho_zero=mid,
                z=z,
                residual=stationarity_residual(params, agent, mid),
            )
        if stationarity_residual(params, agent, mid) < 0.0:
            a = mid
        else:
            b = mid
    raise ConvergenceError("stationarity bisection did not converge")


def solve_agent(params: SystemParams, agent: AgentProfile) -> AgentSolution:
    """Solve one agent's offload subproblem to the region's precision.

    The optimum keeps the deadline tight; the returned power is the exact
    requirement of the optimal ratio, clamped to the cap (the clamp only
    absorbs root-finding rounding at a cap-binding boundary).
    """
    region = feasible_region(params, agent)
    if region.empty:
        return AgentSolution(
            rho_star=None,
            p_star=None,
            evaluation=model.evaluate_local(params, agent),
            region=region,
            bs_feasible=False,
        )

    if not region.lo < region.hi:
        rho_star = region.lo
    else:
        point = find_stationary_point(params, agent, region)
        if point is not None:
            rho_star = point.rho_zero
        elif stationarity_residual(params, agent, region.lo) >= 0.0:
            rho_star = region.lo  # energy rising across the region
        else:
            rho_star = region.hi  # energy falling across the region

    t_cm = residual_comm_time(params, agent, rho_star)
    p_star = model.power_for_rate(params, agent, rho_star * agent.data_bits / t_cm)
    if p_star > params.p_max_w:
        p_star = params.p_max_w
    return AgentSolution(
        rho_star=rho_star,
        p_star=p_star,
        evaluation=model.evaluate_bs(params, agent, rho_star, p_star),
        region=region,
        bs_feasible=True,
    )


def delta_save(params: SystemParams, agent: AgentProfile, sol: AgentSolution) -> float:
    """Energy saved by offloading at the optimum versus staying local.

    Only defined for feasible solutions; may be negative (offloading can
    cost more than local processing on a weak link).
    """
    if not sol.bs_feasible:
        raise ModelDomainError("delta_save is undefined for an infeasible agent")
    return sol.evaluation.delta_save
