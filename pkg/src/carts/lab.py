"""Convergence lab: the refinement-round bound and its Monte-Carlo checks.

Models the refinement loop as a reliability process: while coverage is
below the optimum, each round independently gains exactly one item with
probability p = beta * gamma (the worst case the guarantees are stated
for). The lab computes the round budget that makes the coverage target
hold with high probability, the bound on the expected rounds to reach the
optimum, and verifies both empirically against exact oracles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidTheoryParams

HITTING_CAP = 10_000_000  # per-trial step cap for hitting-time runs
EXACT_TAIL_MAX_GAP = 60  # compute the exact binomial tail up to this gap


def _validate(alpha: float, beta: float, gamma: float, opt: int, c0: int, epsilon: float) -> float:
    if not 0.0 < alpha <= 1.0:
        raise InvalidTheoryParams(f"alpha must be in (0, 1], got {alpha}")
    if not 0.0 < beta <= 1.0:
        raise InvalidTheoryParams(f"beta must be in (0, 1], got {beta}")
    if not 0.0 < gamma <= 1.0:
        raise InvalidTheoryParams(f"gamma must be in (0, 1], got {gamma}")
    if not 0.0 < epsilon < 1.0:
        raise InvalidTheoryParams(f"epsilon must be in (0, 1), got {epsilon}")
    if opt < 0:
        raise InvalidTheoryParams(f"opt must be >= 0, got {opt}")
    if not 0 <= c0 <= opt:
        raise InvalidTheoryParams(f"c0 must be in [0, opt], got {c0}")
    return beta * gamma


def iteration_bound(
    alpha: float, beta: float, gamma: float, opt: int, c0: int, epsilon: float
) -> int:
    """Rounds that guarantee coverage >= alpha * opt with prob >= 1 - epsilon.

    ceil(max(0, alpha*opt - c0)/p + 2*ln(1/epsilon)/p) with p = beta*gamma.
    Values within 1e-9 of an integer are treated as that integer before
    taking the ceiling, so float noise cannot inflate the budget.
    """
    p = _validate(alpha, beta, gamma, opt, c0, epsilon)
    gap = max(0.0, alpha * opt - c0)
    value = gap / p + 2.0 * math.log(1.0 / epsilon) / p
    nearest = round(value)
    if abs(value - nearest) < 1e-9:
        return int(nearest)
    return math.ceil(value)


def expected_iterations_bound(opt: int, c0: int, beta: float, gamma: float) -> float:
    """Upper bound on the mean rounds to reach full coverage: (opt-c0)/p + 2/p."""
    p = _validate(1.0, beta, gamma, opt, c0, 0.5)
    return (opt - c0) / p + 2.0 / p


@dataclass(frozen=True)
class SimParams:
    """Parameters of the simulated feedback/generator reliability model."""

    beta: float
    gamma: float
    opt: int
    c0: int = 0
    alpha: float = 1.0
    epsilon: float = 0.05
    trials: int = 10_000
    seed: int = 0
    generous: bool = False  # gains Uniform{1..3} per success instead of 1

    def __post_init__(self) -> None:
        _validate(self.alpha, self.beta, self.gamma, self.opt, self.c0, self.epsilon)
        if self.trials < 1:
            raise InvalidTheoryParams(f"trials must be >= 1, got {self.trials}")

    @property
    def p(self) -> float:
        return self.beta * self.gamma


@dataclass(frozen=True)
class SimReport:
    """Outcome of one verification run; fields unused by the mode are None."""

    kind: str  # "theorem" | "corollary"
    params: SimParams
    rounds: int | None = None  # budget the trials were measured at
    empirical_success: float | None = None
    success_oracle: float | None = None  # exact binomial tail, if computed
    target_success: float | None = None  # 1 - epsilon
    meets_target: bool | None = None  # empirical_success >= target
    mean_hitting_time: float | None = None
    hitting_se: float | None = None  # standard error of the mean
    hitting_oracle: float | None = None  # (opt - c0) / p
    corollary_bound: float | None = None
    within_bound: bool | None = None
    cap_exceeded: int = 0
    traces: tuple[tuple[int, ...], ...] = field(default=(), repr=False)

    def to_record(self) -> dict:
        p = self.params
        record: dict = {
            "kind": self.kind,
            "beta": p.beta,
            "gamma": p.gamma,
            "p": p.p,
            "opt": p.opt,
            "c0": p.c0,
            "alpha": p.alpha,
            "epsilon": p.epsilon,
            "trials": p.trials,
            "seed": p.seed,
            "generous": p.generous,
            "rounds": self.rounds,
            "empirical_success": self.empirical_success,
            "success_oracle": self.success_oracle,
            "target_success": self.target_success,
            "meets_target": self.meets_target,
            "mean_hitting_time": self.mean_hitting_time,
            "hitting_se": self.hitting_se,
            "hitting_oracle": self.hitting_oracle,
            "corollary_bound": self.corollary_bound,
            "within_bound": self.within_bound,
            "cap_exceeded": self.cap_exceeded,
        }
        return record


def _trial_rng(params: SimParams, trial_index: int) -> np.random.Generator:
    # (seed, trial_index) keys an independent, reproducible stream per trial
    return np.random.default_rng((params.seed, trial_index))


def simulate_trial(params: SimParams, t_max: int, trial_index: int = 0) -> list[int]:
    """Coverage trace of length t_max + 1, starting at c0, capped at opt.

    While coverage is short of opt, each round gains with probability p;
    a gain is +1 (or Uniform{1..3} in generous mode, still capped).
    """
    if t_max < 0:
        raise ValueError("t_max must be >= 0")
    rng = _trial_rng(params, trial_index)
    trace = [params.c0]
    c = params.c0
    for _ in range(t_max):
        if c < params.opt and rng.random() < params.p:
            gain = int(rng.integers(1, 4)) if params.generous else 1
            c = min(params.opt, c + gain)
        trace.append(c)
    return trace


def required_successes(params: SimParams) -> int:
    """Gains needed so that coverage reaches alpha * opt (never above opt)."""
    target = params.alpha * params.opt
    nearest = round(target)
    needed = nearest if abs(target - nearest) < 1e-9 else math.ceil(target)
    return max(0, needed - params.c0)


def binomial_tail(n: int, p: float, j: int) -> float:
    """Closed-form Pr[Binomial(n, p) >= j], stable for large n.

    First term via log-gamma, then the multiplicative pmf recurrence; no
    sampling anywhere, accurate to double precision.
    """
    if j <= 0:
        return 1.0
    if j > n:
        return 0.0
    if p >= 1.0:
        return 1.0
    if p <= 0.0:
        return 0.0
    q = 1.0 - p
    log_term = (
        math.lgamma(n + 1)
        - math.lgamma(j + 1)
        - math.lgamma(n - j + 1)
        + j * math.log(p)
        + (n - j) * math.log(q)
    )
    term = math.exp(log_term)
    total = term
    ratio = p / q
    for i in range(j, n):
        term *= (n - i) / (i + 1) * ratio
        total += term
    return min(1.0, total)


def verify_theorem(params: SimParams, keep_traces: bool = False) -> SimReport:
    """Run trials at the derived round budget and compare the success rate.

    The exact binomial tail is reported alongside the empirical rate
    whenever opt - c0 is small enough to compute it, and the report flags
    whether the 1 - epsilon target was met.
    """
    rounds = iteration_bound(
        params.alpha, params.beta, params.gamma, params.opt, params.c0, params.epsilon
    )
    needed = required_successes(params)
    hits = 0
    traces: list[tuple[int, ...]] = []
    for i in range(params.trials):
        if params.generous or keep_traces:
            trace = simulate_trial(params, rounds, trial_index=i)
            final = trace[-1]
            if keep_traces:
                traces.append(tuple(trace))
        else:
            rng = _trial_rng(params, i)
            gains = int((rng.random(rounds) < params.p).sum()) if rounds else 0
            final = min(params.opt, params.c0 + gains)
        if final >= params.c0 + needed:
            hits += 1
    empirical = hits / params.trials
    oracle = None
    if not params.generous and params.opt - params.c0 <= EXACT_TAIL_MAX_GAP:
        oracle = binomial_tail(rounds, params.p, needed)
    target = 1.0 - params.epsilon
    return SimReport(
        kind="theorem",
        params=params,
        rounds=rounds,
        empirical_success=empirical,
        success_oracle=oracle,
        target_success=target,
        meets_target=empirical >= target,
        traces=tuple(traces),
    )


def _hitting_time(params: SimParams, trial_index: int) -> int | None:
    """Rounds until coverage first equals opt; None when the cap is hit."""
    gap = params.opt - params.c0
    if gap <= 0:
        return 0
    rng = _trial_rng(params, trial_index)
    remaining = gap
    steps = 0
    while steps < HITTING_CAP:
        chunk = min(4096, HITTING_CAP - steps)
        draws = rng.random(chunk) < params.p
        if params.generous:
            for success in draws:
                steps += 1
                if success:
                    remaining -= int(rng.integers(1, 4))
                    if remaining <= 0:
                        return steps
        else:
            gains = int(draws.sum())
            if gains >= remaining:
                # position of the `remaining`-th success inside this chunk
                positions = np.flatnonzero(draws)
                return steps + int(positions[remaining - 1]) + 1
            remaining -= gains
            steps += chunk
    return None


def verify_corollary(params: SimParams) -> SimReport:
    """Measure mean hitting time of full coverage against the bound.

    The exact oracle for the mean is (opt - c0) / p. Trials that exceed
    the step cap are counted in cap_exceeded and excluded from the mean.
    """
    if params.p <= 0:
        raise InvalidTheoryParams("p must be > 0")
    times: list[int] = []
    capped = 0
    for i in range(params.trials):
        t = _hitting_time(params, i)
        if t is None:
            capped += 1
        else:
            times.append(t)
    gap = params.opt - params.c0
    oracle = gap / params.p
    bound = expected_iterations_bound(params.opt, params.c0, params.beta, params.gamma)
    mean = float(np.mean(times)) if times else float("nan")
    se = float(np.std(times, ddof=1) / math.sqrt(len(times))) if len(times) > 1 else 0.0
    return SimReport(
        kind="corollary",
        params=params,
        mean_hitting_time=mean,
        hitting_se=se,
        hitting_oracle=oracle,
        corollary_bound=bound,
        within_bound=bool(mean <= bound) if times else None,
        cap_exceeded=capped,
    )
