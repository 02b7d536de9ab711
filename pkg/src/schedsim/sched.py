"""Per-slot scheduling policies.

Five policies share one interface: ``step(rates, snrs)`` picks exactly one
user for the slot and applies the policy's state updates.

* ``pfa``   - proportional fair: argmax r_k / R_k, with R_k the EWMA of the
  served rate.
* ``dpfa``  - proportional fair with per-user exponents: argmax
  r_k^alpha / R_k^beta_k, beta_k driven by cell-edge/cell-center residence
  timers so that long-time center users are de-prioritized.
* ``maxci`` - argmax r_k (pure opportunism).
* ``rr``    - cyclic round robin.
* ``vpfa``  - proportional fair until the fairness index stops moving, then
  greedy equalization of cumulative delivered bits (or, in ``series`` mode,
  argmax of the sliding-window variance of per-slot deliveries).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .metrics import fi_stability_update

# Cold-start floor for the average-throughput denominator, in bits/slot.
# R_k starts here so the first slots degenerate to max-C/I instead of 0/0.
EPS_RATE = 1.0

POLICIES = ("pfa", "dpfa", "maxci", "rr", "vpfa")
VARIANCE_MODES = ("deficit", "series")


# ---------------------------------------------------------------------------
# Priority and state-update primitives
# ---------------------------------------------------------------------------

def pfa_priority(r: float, avg: float) -> float:
    """Proportional-fair metric r / R with the cold-start floor on R."""
    if r < 0 or avg < 0:
        raise ValueError("rates must be non-negative")
    return r / max(avg, EPS_RATE)


def update_avg_throughput(avg_prev: float, r: float, scheduled: bool, t_c: float) -> float:
    """EWMA average-throughput update, applied to every user every slot.

    Scheduled user:   (1 - 1/T_c) * R + (1/T_c) * r
    Everyone else:    (1 - 1/T_c) * R
    """
    if t_c < 1:
        raise ConfigError("T_c must be >= 1")
    decayed = (1.0 - 1.0 / t_c) * avg_prev
    return decayed + r / t_c if scheduled else decayed


def dpfa_priority(r: float, avg: float, alpha: float, beta: float) -> float:
    """Generalized PF metric r^alpha / R^beta (alpha=beta=1 reduces to PF)."""
    return r**alpha / max(avg, EPS_RATE) ** beta


def update_timers(
    a_prev: int, b_prev: int, gamma: float, delta: float, literal: bool = False
) -> tuple[int, int]:
    """Cell-edge (A) and cell-center (B) residence timers for one user.

    Default semantics: SNR below the threshold counts consecutive edge slots
    and zeroes the center timer; at or above the threshold the reverse.  The
    ``literal`` mode keeps the published piecewise form instead, under which
    B counts gamma <= delta slots (so both timers can run together below the
    threshold).
    """
    if a_prev < 0 or b_prev < 0:
        raise ValueError("timers must be non-negative")
    if delta <= 0:
        raise ConfigError("delta must be > 0")
    if literal:
        a_next = 0 if gamma >= delta else a_prev + 1
        b_next = 0 if gamma > delta else b_prev + 1
        return a_next, b_next
    if gamma < delta:
        return a_prev + 1, 0
    return 0, b_prev + 1


@dataclass
class DpfaParams:
    """Knobs for the timer-driven PF variant.

    ``delta`` is the linear SNR threshold splitting edge from center (None
    means: resolve from the link budget at 60% of the cell radius when the
    simulation starts).  ``theta`` is the residence-time threshold in slots,
    ``b`` the floor for the denominator exponent.  ``beta_override`` pins
    beta for every user, bypassing the timer logic; with 1.0 the policy is
    plain PF, with 0.0 it is max-C/I.
    """

    alpha: float = 1.0
    delta: float | None = None
    theta: int = 20
    b: float = 0.5
    beta_override: float | None = None
    literal_timers: bool = False

    def validate(self) -> None:
        if self.alpha < 0:
            raise ConfigError("dpfa_alpha must be >= 0")
        if self.delta is not None and self.delta <= 0:
            raise ConfigError("dpfa_delta must be > 0")
        if self.theta < 1:
            raise ConfigError("dpfa_theta must be >= 1")
        if not 0 < self.b <= 1:
            raise ConfigError("dpfa_b must be in (0, 1]")


def update_beta(a: int, b_timer: int, gamma: float, params: DpfaParams) -> float:
    """Per-user denominator exponent.

    The neutral branch (beta = 1) wins whenever the user has been at the
    edge at least theta slots or at the center no more than theta slots;
    only a long-time center user is re-weighted to max(gamma/delta, b).
    """
    if a >= params.theta or b_timer <= params.theta:
        return 1.0
    return max(gamma / params.delta, params.b)


@dataclass
class SchedulerDecision:
    """Chosen user plus the per-user selection metric that produced it."""

    chosen_user: int
    priorities: np.ndarray


def select(priorities) -> SchedulerDecision:
    """Argmax over the per-user metric; ties go to the lowest user index."""
    arr = np.asarray(priorities, dtype=float)
    if arr.size == 0:
        raise ValueError("empty priority list")
    if not np.all(np.isfinite(arr)):
        raise ValueError("non-finite priority; upstream state is corrupt")
    return SchedulerDecision(int(np.argmax(arr)), arr)


# ---------------------------------------------------------------------------
# Policy state containers
# ---------------------------------------------------------------------------

@dataclass
class PfaState:
    """EWMA averages plus the time-constant bookkeeping shared by the PF family."""

    n_users: int
    time_constant_mode: str = "fixed"  # fixed | growing
    tc_slots: float = 1000.0
    avg_throughput: np.ndarray = field(init=False)
    slots_elapsed: int = 0

    def __post_init__(self):
        if self.time_constant_mode not in ("fixed", "growing"):
            raise ConfigError("tc_mode must be 'fixed' or 'growing'")
        if self.time_constant_mode == "fixed" and self.tc_slots < 1:
            raise ConfigError("tc_slots must be >= 1")
        self.avg_throughput = np.full(self.n_users, EPS_RATE)

    @property
    def t_c(self) -> float:
        # growing mode: the count starts at 0 and ticks every slot, so the
        # update at elapsed-count k uses T_c = k + 1 (full replacement on
        # the very first slot).
        if self.time_constant_mode == "growing":
            return float(self.slots_elapsed + 1)
        return self.tc_slots

    def apply_rate_update(self, rates: np.ndarray, chosen: int) -> None:
        t_c = self.t_c
        self.avg_throughput *= 1.0 - 1.0 / t_c
        self.avg_throughput[chosen] += rates[chosen] / t_c
        self.slots_elapsed += 1


@dataclass
class DpfaState:
    pfa: PfaState
    edge_slots: np.ndarray = field(init=False)    # A_k
    center_slots: np.ndarray = field(init=False)  # B_k
    beta: np.ndarray = field(init=False)

    def __post_init__(self):
        n = self.pfa.n_users
        self.edge_slots = np.zeros(n, dtype=np.int64)
        self.center_slots = np.zeros(n, dtype=np.int64)
        self.beta = np.ones(n)


@dataclass
class VpfaParams:
    """Phase-machine constants for the variance policy.

    ``s_fi`` slots between fairness-index evaluations, ``l_sc`` the
    stability-counter target that flips the policy out of its PF phase.
    """

    s_fi: int = 100
    l_sc: int = 5
    variance_mode: str = "deficit"
    window: int = 500
    signed_stability: bool = False

    def validate(self) -> None:
        if self.s_fi < 1:
            raise ConfigError("vpfa_s_fi must be >= 1")
        if self.l_sc < 1:
            raise ConfigError("vpfa_l_sc must be >= 1")
        if self.variance_mode not in VARIANCE_MODES:
            raise ConfigError("vpfa_variance_mode must be one of %s" % (VARIANCE_MODES,))
        if self.window < 1:
            raise ConfigError("vpfa_window must be >= 1")


@dataclass
class VpfaState:
    pfa: PfaState
    variance_mode: str = "deficit"
    window_len: int = 500
    phase: str = "pf_warmup"  # pf_warmup | variance
    c_s: int = 0
    last_fi: float | None = None
    delivered_bits: np.ndarray = field(init=False)
    window: np.ndarray | None = field(init=False)
    _window_pos: int = 0
    _window_count: int = 0

    def __post_init__(self):
        n = self.pfa.n_users
        self.delivered_bits = np.zeros(n)
        self.window = (
            np.zeros((self.window_len, n)) if self.variance_mode == "series" else None
        )


def vpfa_score(state: VpfaState, user: int) -> float:
    """Variance-phase selection metric for one user.

    Deficit mode scores the shortfall of the user's cumulative bits below
    the population mean (serving the top scorer is the greedy spread
    reducer).  Series mode scores the variance of the user's per-slot
    delivered bits over the sliding window.
    """
    if state.variance_mode == "deficit":
        return float(state.delivered_bits.mean() - state.delivered_bits[user])
    filled = state.window if state._window_count >= state.window_len else state.window[: state._window_count]
    if filled.shape[0] == 0:
        return 0.0
    return float(filled[:, user].var())


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------

class PfaScheduler:
    name = "pfa"

    def __init__(self, n_users: int, tc_mode: str = "fixed", tc_slots: float = 1000.0):
        self.state = PfaState(n_users, tc_mode, tc_slots)

    def step(self, rates, snrs) -> SchedulerDecision:
        rates = np.asarray(rates, dtype=float)
        _check_lengths(rates, snrs, self.state.n_users)
        decision = select(rates / np.maximum(self.state.avg_throughput, EPS_RATE))
        self.state.apply_rate_update(rates, decision.chosen_user)
        return decision


class DpfaScheduler:
    name = "dpfa"

    def __init__(
        self,
        n_users: int,
        params: DpfaParams,
        tc_mode: str = "fixed",
        tc_slots: float = 1000.0,
    ):
        params.validate()
        if params.delta is None:
            raise ConfigError("dpfa_delta must be resolved before scheduling")
        self.params = params
        self.state = DpfaState(PfaState(n_users, tc_mode, tc_slots))

    def step(self, rates, snrs) -> SchedulerDecision:
        rates = np.asarray(rates, dtype=float)
        snrs = np.asarray(snrs, dtype=float)
        _check_lengths(rates, snrs, self.state.pfa.n_users)
        p = self.params
        st = self.state

        edge = snrs < p.delta
        if p.literal_timers:
            st.edge_slots = np.where(snrs >= p.delta, 0, st.edge_slots + 1)
            st.center_slots = np.where(snrs > p.delta, 0, st.center_slots + 1)
        else:
            st.edge_slots = np.where(edge, st.edge_slots + 1, 0)
            st.center_slots = np.where(edge, 0, st.center_slots + 1)

        if p.beta_override is not None:
            st.beta = np.full_like(st.beta, p.beta_override)
        else:
            neutral = (st.edge_slots >= p.theta) | (st.center_slots <= p.theta)
            st.beta = np.where(neutral, 1.0, np.maximum(snrs / p.delta, p.b))

        denom = np.maximum(st.pfa.avg_throughput, EPS_RATE)
        # beta can be large for strong center users; the overflowing
        # denominator just drives the priority to 0, which is the intent.
        with np.errstate(over="ignore"):
            priorities = np.power(rates, p.alpha) / np.power(denom, st.beta)
        decision = select(priorities)
        st.pfa.apply_rate_update(rates, decision.chosen_user)
        return decision


class MaxCiScheduler:
    name = "maxci"

    def __init__(self, n_users: int):
        self.n_users = n_users

    def step(self, rates, snrs) -> SchedulerDecision:
        rates = np.asarray(rates, dtype=float)
        _check_lengths(rates, snrs, self.n_users)
        return select(rates)


class RoundRobinScheduler:
    """Cyclic service: slot t goes to user t mod N, regardless of channel."""

    name = "rr"

    def __init__(self, n_users: int):
        self.n_users = n_users
        self.slots_elapsed = 0

    def step(self, rates, snrs) -> SchedulerDecision:
        rates = np.asarray(rates, dtype=float)
        _check_lengths(rates, snrs, self.n_users)
        chosen = self.slots_elapsed % self.n_users
        self.slots_elapsed += 1
        one_hot = np.zeros(self.n_users)
        one_hot[chosen] = 1.0
        return SchedulerDecision(chosen, one_hot)


class VpfaScheduler:
    """PF warm-up, then variance-driven equalization once the FI settles.

    The driving loop evaluates the fairness index every ``s_fi`` slots and
    feeds it to :meth:`observe_fi`; when the stability counter reaches
    ``l_sc`` the policy leaves the PF phase for good.
    """

    name = "vpfa"

    def __init__(
        self,
        n_users: int,
        params: VpfaParams,
        tc_mode: str = "fixed",
        tc_slots: float = 1000.0,
    ):
        params.validate()
        self.params = params
        self.state = VpfaState(
            PfaState(n_users, tc_mode, tc_slots),
            variance_mode=params.variance_mode,
            window_len=params.window,
        )

    def step(self, rates, snrs) -> SchedulerDecision:
        rates = np.asarray(rates, dtype=float)
        _check_lengths(rates, snrs, self.state.pfa.n_users)
        st = self.state
        if st.phase == "pf_warmup":
            decision = select(rates / np.maximum(st.pfa.avg_throughput, EPS_RATE))
            st.pfa.apply_rate_update(rates, decision.chosen_user)
        else:
            if st.variance_mode == "deficit":
                scores = st.delivered_bits.mean() - st.delivered_bits
            else:
                filled = (
                    st.window
                    if st._window_count >= st.window_len
                    else st.window[: st._window_count]
                )
                scores = (
                    filled.var(axis=0) if filled.shape[0] else np.zeros(st.pfa.n_users)
                )
            decision = select(scores)
            st.pfa.slots_elapsed += 1

        delivered = rates[decision.chosen_user]
        st.delivered_bits[decision.chosen_user] += delivered
        if st.window is not None:
            row = np.zeros(st.pfa.n_users)
            row[decision.chosen_user] = delivered
            st.window[st._window_pos] = row
            st._window_pos = (st._window_pos + 1) % st.window_len
            st._window_count += 1
        return decision

    def observe_fi(self, fi: float) -> bool:
        """Feed one fairness-index evaluation; True when this one fires the phase switch."""
        st = self.state
        if st.phase != "pf_warmup":
            return False
        st.c_s, st.last_fi = fi_stability_update(
            st.c_s, st.last_fi, fi, signed=self.params.signed_stability
        )
        if st.c_s >= self.params.l_sc:
            st.phase = "variance"
            return True
        return False


def _check_lengths(rates, snrs, n_users: int) -> None:
    if len(rates) != n_users or len(snrs) != n_users:
        raise ValueError(
            "rates/snrs length mismatch: got %d/%d, expected %d"
            % (len(rates), len(snrs), n_users)
        )


def make_scheduler(
    policy: str,
    n_users: int,
    dpfa: DpfaParams | None = None,
    vpfa: VpfaParams | None = None,
    tc_mode: str = "fixed",
    tc_slots: float = 1000.0,
):
    if policy == "pfa":
        return PfaScheduler(n_users, tc_mode, tc_slots)
    if policy == "dpfa":
        return DpfaScheduler(n_users, dpfa or DpfaParams(), tc_mode, tc_slots)
    if policy == "maxci":
        return MaxCiScheduler(n_users)
    if policy == "rr":
        return RoundRobinScheduler(n_users)
    if policy == "vpfa":
        return VpfaScheduler(n_users, vpfa or VpfaParams(), tc_mode, tc_slots)
    raise ConfigError("policy must be one of %s" % (POLICIES,))
