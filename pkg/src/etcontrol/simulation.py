"""Closed-loop simulation under periodic or event-triggered transmission.

The controller side holds the most recently transmitted state and applies
u = K x_held between transmissions (zero-order hold). A periodic policy
transmits every step; an event policy transmits when the squared holding
error reaches a fraction mu of the squared state norm. Parameter
trajectories describe how the uncertain plant parameters evolve over the
horizon and are always realized once, so that policy comparisons see the
exact same plant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, require_square, symmetrize
from .synthesis import UncertaintyModel

DIVERGENCE_NORM = 1e12

POLICY_PERIODIC = "periodic"
POLICY_EVENT = "event"

TRAJ_CONSTANT = "constant"
TRAJ_RAMP = "ramp"
TRAJ_SEQUENCE = "sequence"
TRAJ_RANDOM = "random"


@dataclass(frozen=True)
class TriggerPolicy:
    """Transmission policy: kind is "periodic" or "event".

    mu is the relative threshold coefficient and must be present (and
    positive) exactly when kind is "event".
    """

    kind: str
    mu: float | None = None

    def __post_init__(self):
        if self.kind not in (POLICY_PERIODIC, POLICY_EVENT):
            raise ValueError(f"unknown policy kind {self.kind!r}")
        if self.kind == POLICY_EVENT:
            if self.mu is None:
                raise ValueError("event policy requires a threshold coefficient mu")
            object.__setattr__(self, "mu", float(self.mu))
            if self.mu <= 0.0:
                raise ValueError("mu must be positive")
        elif self.mu is not None:
            raise ValueError("periodic policy takes no threshold coefficient")

    @classmethod
    def periodic(cls) -> "TriggerPolicy":
        return cls(kind=POLICY_PERIODIC)

    @classmethod
    def event(cls, mu: float) -> "TriggerPolicy":
        return cls(kind=POLICY_EVENT, mu=mu)


@dataclass(frozen=True)
class ParamTrajectory:
    """How the plant parameters evolve over the simulation horizon.

    kind is one of "constant", "ramp", "sequence", or "random". constant
    holds value; ramp interpolates linearly from start to end across the
    horizon; sequence plays back given rows; random draws each step
    uniformly from the parameter box using the given seed. Values outside
    the box are clamped with a warning when realized.
    """

    kind: str
    value: np.ndarray | None = None
    start: np.ndarray | None = None
    end: np.ndarray | None = None
    values: np.ndarray | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in (TRAJ_CONSTANT, TRAJ_RAMP, TRAJ_SEQUENCE, TRAJ_RANDOM):
            raise ValueError(f"unknown trajectory kind {self.kind!r}")
        for name in ("value", "start", "end"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.atleast_1d(np.asarray(v, dtype=float)))
        if self.values is not None:
            object.__setattr__(self, "values", np.atleast_2d(np.asarray(self.values, dtype=float)))
        object.__setattr__(self, "seed", int(self.seed))
        if self.kind == TRAJ_CONSTANT and self.value is None:
            raise ValueError("constant trajectory requires a value")
        if self.kind == TRAJ_RAMP and (self.start is None or self.end is None):
            raise ValueError("ramp trajectory requires start and end")
        if self.kind == TRAJ_SEQUENCE and self.values is None:
            raise ValueError("sequence trajectory requires values")

    @classmethod
    def constant(cls, value) -> "ParamTrajectory":
        return cls(kind=TRAJ_CONSTANT, value=value)

    @classmethod
    def ramp(cls, start, end) -> "ParamTrajectory":
        return cls(kind=TRAJ_RAMP, start=start, end=end)

    @classmethod
    def sequence(cls, values) -> "ParamTrajectory":
        return cls(kind=TRAJ_SEQUENCE, values=values)

    @classmethod
    def random(cls, seed: int = 0) -> "ParamTrajectory":
        return cls(kind=TRAJ_RANDOM, seed=seed)

    def realize(self, n_steps: int, model: UncertaintyModel):
        """Materialize n_steps + 1 parameter rows, clamped into the box.

        Returns (rows, clamped_count) where clamped_count is the number of
        rows that had to be clipped; a warning is emitted when nonzero.
        """
        d = model.dimension
        rows = None
        if self.kind == TRAJ_CONSTANT:
            if self.value.shape != (d,):
                raise ValueError(f"value has shape {self.value.shape}, expected ({d},)")
            rows = np.tile(self.value, (n_steps + 1, 1))
        elif self.kind == TRAJ_RAMP:
            if self.start.shape != (d,) or self.end.shape != (d,):
                raise ValueError(f"start and end must have shape ({d},)")
            if n_steps == 0:
                rows = self.start[None, :].copy()
            else:
                fractions = np.arange(n_steps + 1) / n_steps
                rows = self.start[None, :] + fractions[:, None] * (self.end - self.start)[None, :]
        elif self.kind == TRAJ_SEQUENCE:
            if self.values.shape[1] != d:
                raise ValueError(
                    f"sequence rows have length {self.values.shape[1]}, expected {d}"
                )
            if self.values.shape[0] < n_steps + 1:
                raise ValueError(
                    f"sequence provides {self.values.shape[0]} rows, "
                    f"needs at least {n_steps + 1}"
                )
            rows = self.values[: n_steps + 1].copy()
        elif self.kind == TRAJ_RANDOM:
            rng = np.random.default_rng(self.seed)
            rows = rng.uniform(model.p_lo, model.p_hi, size=(n_steps + 1, d))
        clipped = np.clip(rows, model.p_lo, model.p_hi)
        clamped = int(np.sum(np.any(clipped != rows, axis=1)))
        if clamped:
            warnings.warn(
                f"{clamped} parameter rows fell outside the box and were clamped",
                stacklevel=2,
            )
        return clipped, clamped


def should_trigger(x, x_held, mu: float) -> bool:
    """Relative threshold rule: transmit when ||x_held - x||^2 >= mu ||x||^2.

    The boundary counts as a transmission. The corner case of a zero state
    with zero holding error does not retransmit, because the controller
    already holds the exact state.
    """
    x = np.asarray(x, dtype=float)
    e = np.asarray(x_held, dtype=float) - x
    e_sq = float(e @ e)
    x_sq = float(x @ x)
    if e_sq == 0.0 and x_sq == 0.0:
        return False
    return e_sq >= float(mu) * x_sq


@dataclass
class SimTrace:
    """Row-per-step record of one closed-loop run.

    Row k (for k = 0 .. n_steps - 1) describes the state at time k, the
    transmission decision taken there, and the input applied while moving
    to k + 1. The final row records the terminal state; no decision happens
    there, so its triggered flag is always False and its input is the held
    value. errors holds the post-decision holding error (zero right after a
    transmission); monitored_sq holds the squared error the trigger rule
    examined before deciding, which is what the trace file exports.
    """

    states: np.ndarray
    inputs: np.ndarray
    errors: np.ndarray
    monitored_sq: np.ndarray
    thresholds: np.ndarray
    triggered: np.ndarray
    p: np.ndarray
    V: np.ndarray
    transmissions: int
    diverged: bool
    clamped_steps: int
    policy: TriggerPolicy

    @property
    def n_steps(self) -> int:
        return self.states.shape[0] - 1

    @property
    def trigger_indices(self) -> np.ndarray:
        return np.flatnonzero(self.triggered)

    @property
    def inter_event_gaps(self) -> np.ndarray:
        return np.diff(self.trigger_indices)


@dataclass
class PolicyComparison:
    """Paired periodic and event runs over one realized parameter path."""

    periodic: SimTrace
    event: SimTrace
    savings_ratio: float
    min_gap: float | None
    mean_gap: float | None
    max_gap: float | None


def _simulate_realized(A, B, model, K, policy, p_rows, x0, n_steps, P, clamped_steps):
    n = A.shape[0]
    m = B.shape[1]
    states = np.zeros((n_steps + 1, n))
    inputs = np.zeros((n_steps + 1, m))
    errors = np.zeros((n_steps + 1, n))
    monitored = np.zeros(n_steps + 1)
    thresholds = np.zeros(n_steps + 1)
    fired = np.zeros(n_steps + 1, dtype=bool)
    values = np.zeros(n_steps + 1)

    is_event = policy.kind == POLICY_EVENT
    x = np.asarray(x0, dtype=float).copy()
    held = None
    u = np.zeros(m)
    transmissions = 0
    diverged = False
    last = n_steps

    for k in range(n_steps):
        if held is None:
            monitored[k] = 0.0
            fire = True
        else:
            e_pre = held - x
            monitored[k] = float(e_pre @ e_pre)
            fire = True if not is_event else should_trigger(x, held, policy.mu)
        thresholds[k] = policy.mu * float(x @ x) if is_event else 0.0
        if fire:
            held = x.copy()
            u = K @ held
            transmissions += 1
        states[k] = x
        inputs[k] = u
        errors[k] = held - x
        fired[k] = fire
        values[k] = float(x @ P @ x)
        x = (A + model.matrix_at(p_rows[k])) @ x + B @ u
        if not np.all(np.isfinite(x)) or float(np.linalg.norm(x)) > DIVERGENCE_NORM:
            diverged = True
            last = k + 1
            break

    states[last] = x
    inputs[last] = u
    errors[last] = held - x
    e_sq = float(errors[last] @ errors[last])
    monitored[last] = e_sq
    thresholds[last] = policy.mu * float(x @ x) if is_event else 0.0
    fired[last] = False
    values[last] = float(x @ P @ x)
    end = last + 1

    return SimTrace(
        states=states[:end],
        inputs=inputs[:end],
        errors=errors[:end],
        monitored_sq=monitored[:end],
        thresholds=thresholds[:end],
        triggered=fired[:end],
        p=p_rows[:end].copy(),
        V=values[:end],
        transmissions=transmissions,
        diverged=diverged,
        clamped_steps=clamped_steps,
        policy=policy,
    )


def simulate(
    A,
    B,
    model: UncertaintyModel,
    K,
    policy: TriggerPolicy,
    trajectory: ParamTrajectory,
    x0,
    n_steps: int,
    P,
) -> SimTrace:
    """Run one closed loop for n_steps plant steps.

    The trace has n_steps + 1 rows unless the state norm exceeds the
    divergence limit, in which case the run stops early with the diverged
    flag set. P supplies the Lyapunov value column V = x' P x.
    """
    A = require_square(A, "A")
    B = as_matrix(B, "B")
    K = as_matrix(K, "K")
    P = symmetrize(P, "P")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n_steps = int(n_steps)
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    if x0.shape != (A.shape[0],):
        raise ValueError(f"x0 has shape {x0.shape}, expected ({A.shape[0]},)")
    if K.shape != (B.shape[1], A.shape[0]):
        raise ValueError(f"K has shape {K.shape}, expected {(B.shape[1], A.shape[0])}")
    p_rows, clamped = trajectory.realize(n_steps, model)
    return _simulate_realized(A, B, model, K, policy, p_rows, x0, n_steps, P, clamped)


def compare_policies(
    A,
    B,
    model: UncertaintyModel,
    K,
    mu: float,
    trajectory: ParamTrajectory,
    x0,
    n_steps: int,
    P,
) -> PolicyComparison:
    """Run periodic and event policies against one shared plant realization.

    The parameter path is realized once and reused, so the two traces
    differ only through the transmission policy. savings_ratio is
    1 - event transmissions / periodic transmissions.
    """
    A = require_square(A, "A")
    B = as_matrix(B, "B")
    K = as_matrix(K, "K")
    P = symmetrize(P, "P")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    n_steps = int(n_steps)
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    p_rows, clamped = trajectory.realize(n_steps, model)
    periodic = _simulate_realized(
        A, B, model, K, TriggerPolicy.periodic(), p_rows, x0, n_steps, P, clamped
    )
    event = _simulate_realized(
        A, B, model, K, TriggerPolicy.event(mu), p_rows, x0, n_steps, P, clamped
    )
    savings = 1.0 - event.transmissions / periodic.transmissions
    gaps = event.inter_event_gaps
    if gaps.size:
        min_gap = float(gaps.min())
        mean_gap = float(gaps.mean())
        max_gap = float(gaps.max())
    else:
        min_gap = mean_gap = max_gap = None
    return PolicyComparison(
        periodic=periodic,
        event=event,
        savings_ratio=float(savings),
        min_gap=min_gap,
        mean_gap=mean_gap,
        max_gap=max_gap,
    )
