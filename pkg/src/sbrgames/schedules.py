"""Stepsize schedules, prescribed parameters and predicted iteration counts."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

KINDS = ("constant", "inverse_linear", "inverse_polynomial")
MAX_K = 2 ** 63 - 1
# Largest double below one; inverse-linear steps beta/k exceed 1 for k < beta.
BETA_CAP = math.nextafter(1.0, 0.0)


class ScheduleError(ValueError):
    pass


class IterationOverflow(OverflowError):
    """A predicted iteration count does not fit in a signed 64-bit integer."""


def min_offset(beta: float, eta: float) -> float:
    """Smallest admissible offset k0 = (2 eta / beta)^(1 / (1 - eta))."""
    return (2 * eta / beta) ** (1 / (1 - eta))


@dataclass(frozen=True)
class StepsizeSchedule:
    """beta_k for one of the three analysed regimes.

    ``strict=False`` skips the offset condition on k0 for inverse-polynomial
    schedules, for empirical runs outside the decay analysis.
    """

    kind: str
    beta: float
    eta: float | None = None
    k0: int | None = None
    strict: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ScheduleError(f"unknown schedule kind {self.kind!r}")
        b = self.beta
        if not isinstance(b, (int, float)) or not math.isfinite(b):
            raise ScheduleError("beta must be a finite number")
        if self.kind == "constant":
            if not 0 < b < 1:
                raise ScheduleError(f"constant schedule needs beta in (0,1), got {b}")
        elif self.kind == "inverse_linear":
            if not 1 < b <= 2:
                raise ScheduleError(f"inverse-linear schedule needs beta in (1,2], got {b}")
        else:
            if not 0 < b < 1:
                raise ScheduleError(f"inverse-polynomial schedule needs beta in (0,1), got {b}")
            if self.eta is None or not 0 < self.eta < 1:
                raise ScheduleError(f"inverse-polynomial schedule needs eta in (0,1), got {self.eta}")
            if self.k0 is None or self.k0 < 0 or int(self.k0) != self.k0:
                raise ScheduleError(f"offset k0 must be a nonnegative integer, got {self.k0}")
            if self.strict and self.k0 < min_offset(b, self.eta):
                raise ScheduleError(
                    f"k0={self.k0} below required offset {min_offset(b, self.eta):.6g}")

    @classmethod
    def constant(cls, beta):
        return cls("constant", beta)

    @classmethod
    def inverse_linear(cls, beta):
        return cls("inverse_linear", beta)

    @classmethod
    def inverse_polynomial(cls, beta, eta, k0=None, strict=True):
        if k0 is None:
            k0 = math.ceil(min_offset(beta, eta))
        return cls("inverse_polynomial", beta, eta, int(k0), strict)

    def beta_at(self, k: int) -> float:
        if k < 1:
            raise ScheduleError(f"iteration index must be >= 1, got {k}")
        if self.kind == "constant":
            return self.beta
        if self.kind == "inverse_linear":
            return min(self.beta / k, BETA_CAP)
        return self.beta / (k + self.k0) ** self.eta

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "beta": self.beta}
        if self.kind == "inverse_polynomial":
            out.update(eta=self.eta, k0=self.k0)
            if not self.strict:
                out["strict"] = False
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "StepsizeSchedule":
        allowed = {"kind", "beta", "eta", "k0", "strict"}
        extra = set(data) - allowed
        if extra:
            raise ScheduleError(f"unknown schedule fields: {sorted(extra)}")
        if "kind" not in data or "beta" not in data:
            raise ScheduleError("schedule needs 'kind' and 'beta'")
        if data["kind"] == "inverse_polynomial":
            return cls.inverse_polynomial(data["beta"], data.get("eta"), data.get("k0"),
                                          data.get("strict", True))
        if set(data) - {"kind", "beta"}:
            raise ScheduleError(f"{data['kind']} schedule takes only 'kind' and 'beta'")
        return cls(data["kind"], data["beta"])


def beta_at(schedule: StepsizeSchedule, k: int) -> float:
    return schedule.beta_at(k)


def _as_k(x: float) -> int:
    if not math.isfinite(x) or x > MAX_K:
        raise IterationOverflow(f"iteration count {x!r} exceeds 64-bit range")
    return max(0, int(x))


def _ceil_k(x: float) -> int:
    if not math.isfinite(x) or x > MAX_K:
        raise IterationOverflow(f"iteration count {x!r} exceeds 64-bit range")
    return max(0, math.ceil(x))


# --- full information -------------------------------------------------------

@dataclass(frozen=True)
class FullInfoParams:
    tau: float
    schedule: StepsizeSchedule
    k_predicted: int


def full_info_params(epsilon, a_max, regime="constant", v1=None, beta=None, eta=None,
                     k0=None, tau=None) -> FullInfoParams:
    """Temperature, schedule and predicted iteration count for target ``epsilon``.

    Constant regime: beta = eps^2 / (16 A^3), tau = sqrt(A beta) and
    K = ceil(16 A^3 / eps^2 * log(V1 / eps)), the log clamped at zero.
    The decaying regimes take beta (and eta, k0) and tau from the caller.
    """
    if not 0 < epsilon < 1:
        raise ScheduleError(f"epsilon must lie in (0,1), got {epsilon}")
    scale = 16 * a_max ** 3 / epsilon ** 2
    if regime == "constant":
        if v1 is None:
            raise ScheduleError("constant regime needs the initial Lyapunov value v1")
        b = epsilon ** 2 / (16 * a_max ** 3)
        t = math.sqrt(a_max * b)
        k = _ceil_k(scale * max(0.0, math.log(v1 / epsilon)))
        return FullInfoParams(t, StepsizeSchedule.constant(b), k)
    if tau is None or beta is None:
        raise ScheduleError(f"{regime} regime needs caller-supplied tau and beta")
    if regime == "inverse_linear":
        return FullInfoParams(tau, StepsizeSchedule.inverse_linear(beta), _ceil_k(1 + scale))
    if regime == "inverse_polynomial":
        sched = StepsizeSchedule.inverse_polynomial(beta, eta, k0)
        return FullInfoParams(tau, sched, _ceil_k(1 + (scale * beta) ** (1 / eta)))
    raise ScheduleError(f"unknown regime {regime!r}")


def full_info_bound(schedule: StepsizeSchedule, K: int, v1: float, tau: float, a_max: int) -> float:
    """Upper bound on the Nash gap after K full-information steps."""
    log_a = math.log(a_max)
    b = schedule.beta
    if schedule.kind == "constant":
        return (1 - b) ** K * v1 + 2 * a_max ** 2 * b / tau + 2 * tau * log_a
    if schedule.kind == "inverse_linear":
        return (v1 / (K + 1) ** b + 8 * a_max ** 2 * b ** 2 / (tau * (b - 1) * K)
                + 4 * tau * 2 ** b * log_a)
    eta, k0 = schedule.eta, schedule.k0
    decay = math.exp(-b / (1 - eta) * ((K + k0 + 1) ** (1 - eta) - (1 + k0) ** (1 - eta)))
    return decay * v1 + 4 * b * a_max ** 2 / (tau * (K + k0) ** eta) + 2 * tau * log_a


# --- minimal information ----------------------------------------------------

@dataclass(frozen=True)
class MinimalInfoParams:
    epsilon: float
    nu: float
    r: float
    delta: float
    tau: float
    c_sep: float
    beta: float
    xi: float
    kind: str = "constant"
    eta: float | None = None
    k0: int | None = None

    def schedule(self) -> StepsizeSchedule:
        if self.kind == "constant":
            return StepsizeSchedule.constant(self.beta)
        return StepsizeSchedule.inverse_polynomial(self.beta, self.eta, self.k0)

    def alpha_at(self, k: int) -> float:
        return self.schedule().beta_at(k) / self.c_sep

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MinimalInfoParams":
        return cls(**data)


def timescale_params(epsilon, r, delta, a_max) -> tuple[float, float, float]:
    """(tau, c_sep, beta) as functions of the accuracy, r and the boundary distance."""
    log_a = math.log(a_max)
    tau = (1 - 2 * r) * epsilon / (12 * log_a)
    c_sep = r * tau ** 3 / (6 * a_max ** 2)
    beta = (1 - 2 * r) * c_sep ** 2 * delta * epsilon / (30 * a_max ** 2)
    return tau, c_sep, beta


def boundary_delta(epsilon, nu, a_max, total_lyap_init, kind="constant") -> float:
    """Boundary distance, capped at 1/A_max (no strategy can do better).

    The cap only binds when the initial Lyapunov value is already below
    epsilon / 3, where zero iterations are required anyway.
    """
    base = (epsilon / (3 * total_lyap_init)) ** (1 + nu) / a_max
    if kind != "constant":
        base *= math.e
    return min(base, 1.0 / a_max)


def xi_min(beta_1: float) -> float:
    """Smallest xi with log(1 - beta_1) >= -xi * beta_1."""
    return -math.log1p(-beta_1) / beta_1


def _poly_offset(beta, eta):
    return math.ceil(min_offset(beta, eta))


def _bisect_boundary(feasible, lo=0.0, hi=0.5, width=1e-12):
    """Largest r in (lo, hi) with feasible(r), assuming a single crossing."""
    probe = width
    if not feasible(probe):
        raise ScheduleError("no admissible r in (0, 0.5); nu too small for the slack factor")
    lo = probe
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def minimal_info_params(epsilon, nu, a_max, total_lyap_init, kind="constant", eta=None,
                        r=None) -> MinimalInfoParams:
    """Prescribed parameters for the minimal-information dynamics.

    ``r`` is found by bisection on the feasibility condition tying the
    delta-good horizon to the required horizon, unless given explicitly.
    """
    if not 0 < epsilon < 1:
        raise ScheduleError(f"epsilon must lie in (0,1), got {epsilon}")
    if not nu > 0:
        raise ScheduleError(f"nu must be positive, got {nu}")
    if a_max < 2:
        raise ScheduleError("temperature formula needs at least two actions (log A_max > 0)")
    if kind not in ("constant", "inverse_polynomial"):
        raise ScheduleError(f"unsupported kind {kind!r}")
    delta = boundary_delta(epsilon, nu, a_max, total_lyap_init, kind)

    if kind == "constant":
        xi = math.sqrt(1 + nu)

        def feasible(rr):
            _, _, b = timescale_params(epsilon, rr, delta, a_max)
            return math.log1p(-b) / math.log1p(-b * (1 - 2 * rr)) <= (1 + nu) / xi
    else:
        if eta is None or not 0 < eta < 1:
            raise ScheduleError("inverse-polynomial parameters need eta in (0,1)")

        def poly_xi(rr):
            _, _, b = timescale_params(epsilon, rr, delta, a_max)
            return xi_min(b / (1 + _poly_offset(b, eta)) ** eta)

        def feasible(rr):
            return 1 + nu >= poly_xi(rr) ** 2 / (1 - 2 * rr)

    if r is None:
        r = _bisect_boundary(feasible)
    elif not 0 < r < 0.5:
        raise ScheduleError(f"r must lie in (0, 0.5), got {r}")
    tau, c_sep, beta = timescale_params(epsilon, r, delta, a_max)
    if kind == "constant":
        return MinimalInfoParams(epsilon, nu, r, delta, tau, c_sep, beta, xi)
    k0 = _poly_offset(beta, eta)
    xi = xi_min(beta / (1 + k0) ** eta)
    return MinimalInfoParams(epsilon, nu, r, delta, tau, c_sep, beta, xi,
                             "inverse_polynomial", eta, k0)


def k_required_value(params: MinimalInfoParams, total_lyap_init: float) -> float:
    """Real-valued iteration count before rounding; may exceed any integer type."""
    eps, r, b = params.epsilon, params.r, params.beta
    if total_lyap_init <= eps / 3:
        return 0.0
    if params.kind == "constant":
        return math.log(eps / (3 * total_lyap_init)) / math.log1p(-b * (1 - 2 * r))
    eta, k0 = params.eta, params.k0
    inner = ((1 - eta) / ((1 - 2 * r) * b) * math.log(3 * total_lyap_init / eps)
             + (1 + k0) ** (1 - eta))
    return inner ** (1 / (1 - eta)) - k0 - 1


def k_required_minimal(params: MinimalInfoParams, total_lyap_init: float) -> int:
    """Iterations after which the expected Nash gap is at most epsilon,
    provided the iterates stay delta-good that long."""
    return _ceil_k(k_required_value(params, total_lyap_init))


def k_good_value(schedule: StepsizeSchedule, delta: float, a_max: int) -> float:
    if not 0 < delta <= 1 / a_max:
        raise ScheduleError(f"delta must lie in (0, 1/A_max], got {delta}")
    if schedule.kind == "constant":
        return math.log(a_max * delta) / math.log1p(-schedule.beta)
    if schedule.kind != "inverse_polynomial":
        raise ScheduleError("boundary bound covers constant and inverse-polynomial schedules")
    b, eta, k0 = schedule.beta, schedule.eta, schedule.k0
    xi = xi_min(schedule.beta_at(1))
    rhs = (1 - eta) / (xi * b) * math.log(math.e / (a_max * delta)) + (1 + k0) ** (1 - eta)
    return rhs ** (1 / (1 - eta)) - k0


def k_good_lower_bound(schedule: StepsizeSchedule, delta: float, a_max: int) -> int:
    """Guaranteed number of steps from uniform init before any probability can drop below delta."""
    value = k_good_value(schedule, delta, a_max)
    if not math.isfinite(value) or value > MAX_K:
        raise IterationOverflow(f"iteration count {value!r} exceeds 64-bit range")
    return _as_k(math.floor(value))


def envelope_k_good(schedule: StepsizeSchedule, delta: float, a_max: int, limit: int = 10 ** 8) -> int:
    """Largest K with (1/A_max) prod_{j<=K} (1 - beta_j) >= delta, by direct iteration."""
    env = 1.0 / a_max
    k = 0
    while k < limit:
        nxt = env * (1 - schedule.beta_at(k + 1))
        if nxt < delta:
            return k
        env = nxt
        k += 1
    raise IterationOverflow(f"envelope stays above delta beyond {limit} steps")
