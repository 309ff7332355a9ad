"""Robust state-feedback synthesis for uncertain discrete-time linear systems.

The plant is x(k+1) = (A + dA(p)) x(k) + B u(k), where the perturbation
dA(p) = sum_i p_i E_i ranges over a box of parameters p and need not lie in
the range of B (mismatched uncertainty). The design solves a modified
discrete Riccati equation whose solution P yields a stabilizing feedback
gain, a companion gain on the uncontrolled subspace, and the weighting
matrices behind a relative event-trigger threshold.

A scalar epsilon governs the design window: the trigger derivation requires
(1/epsilon) I - P to be positive definite, and the admissible parameter box
must respect two induced bounds on dA. ``synthesize`` never hides
infeasibility. It completes whenever the quantities are computable and
attaches a FeasibilityReport listing each design condition with a verdict,
a margin, and (for parameter-dependent conditions) a worst-case witness.
"""

from __future__ import annotations

import dataclasses
import itertools
from dataclasses import dataclass

import numpy as np

from .errors import (
    FeasibilityError,
    NumericalError,
    RiccatiConvergenceError,
    TriggerUndefinedError,
)
from .linalg import (
    as_matrix,
    inverse,
    is_positive_definite,
    is_positive_semidefinite,
    pseudo_inverse,
    require_square,
    spectral_norm,
    sym_eigvals,
    symmetrize,
)

RICCATI_STEP_TOL = 1e-12
RICCATI_MAX_ITER = 10000
RICCATI_RESIDUAL_TOL = 1e-9
DIVERGENCE_LIMIT = 1e14

HOLD_TOL = 1e-9
MARGINAL_BAND = 1e-6
DEFAULT_GRID_POINTS = 101

HOLDS = "holds"
MARGINAL = "marginal"
FAILS = "fails"

COND_EPS_WINDOW = "epsilon_window"
COND_UNC_SCALED = "uncertainty_bound_scaled"
COND_PERIODIC_DECAY = "periodic_decay"
COND_WEIGHT_PD = "error_weight_pd"
COND_UNC_WEIGHTED = "uncertainty_bound_weighted"
COND_DECAY_PSD = "decay_matrix_psd"
COND_UNC_MATCHED = "uncertainty_bound_matched"
COND_MATCHED_DECAY = "matched_decay"


@dataclass(frozen=True)
class SynthesisParams:
    """Design weights and scalars for one synthesis run.

    Q penalizes the state, R1 the physical input, and R2 the virtual input
    acting on the uncontrolled subspace. alpha scales the virtual channel,
    beta adds a uniform robustness floor, epsilon sets the design window,
    and sigma in (0, 1) is the decay fraction retained by the trigger.
    """

    Q: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    alpha: float
    beta: float
    epsilon: float
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "Q", symmetrize(self.Q, "Q"))
        object.__setattr__(self, "R1", symmetrize(self.R1, "R1"))
        object.__setattr__(self, "R2", symmetrize(self.R2, "R2"))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "epsilon", float(self.epsilon))
        object.__setattr__(self, "sigma", float(self.sigma))
        if not is_positive_semidefinite(self.Q):
            raise ValueError("Q must be positive semidefinite")
        if not is_positive_definite(self.R1):
            raise ValueError("R1 must be positive definite")
        if not is_positive_definite(self.R2):
            raise ValueError("R2 must be positive definite")
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")
        if self.beta < 0.0:
            raise ValueError("beta must be nonnegative")
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if not 0.0 < self.sigma < 1.0:
            raise ValueError("sigma must lie strictly between 0 and 1")


@dataclass(frozen=True)
class UncertaintyModel:
    """Affine parametric uncertainty dA(p) = sum_i p_i E_i over a box.

    F is a symmetric positive semidefinite matrix bounding the uncertainty
    inside the Riccati equation; the feasibility report checks whether the
    box actually respects that bound.
    """

    basis: tuple
    p_lo: np.ndarray
    p_hi: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        basis = tuple(require_square(e, f"basis[{i}]") for i, e in enumerate(self.basis))
        object.__setattr__(self, "basis", basis)
        lo = np.atleast_1d(np.asarray(self.p_lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.p_hi, dtype=float))
        object.__setattr__(self, "p_lo", lo)
        object.__setattr__(self, "p_hi", hi)
        object.__setattr__(self, "F", symmetrize(self.F, "F"))
        if lo.ndim != 1 or hi.ndim != 1:
            raise ValueError("p_lo and p_hi must be 1-D")
        if len(basis) != lo.size or lo.size != hi.size:
            raise ValueError(
                f"dimension mismatch: {len(basis)} basis directions, "
                f"{lo.size} lower bounds, {hi.size} upper bounds"
            )
        if np.any(lo > hi):
            raise ValueError("p_lo must not exceed p_hi componentwise")
        n = self.F.shape[0]
        for i, e in enumerate(basis):
            if e.shape != (n, n):
                raise ValueError(f"basis[{i}] has shape {e.shape}, expected {(n, n)}")
        if not is_positive_semidefinite(self.F):
            raise ValueError("F must be positive semidefinite")

    @property
    def dimension(self) -> int:
        return len(self.basis)

    @property
    def state_dim(self) -> int:
        return self.F.shape[0]

    def matrix_at(self, p) -> np.ndarray:
        """The perturbation dA at parameter p (no box check here)."""
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if p.shape != (self.dimension,):
            raise ValueError(f"p has shape {p.shape}, expected ({self.dimension},)")
        out = np.zeros((self.state_dim, self.state_dim))
        for coeff, e in zip(p, self.basis):
            out += coeff * e
        return out

    def contains(self, p) -> bool:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        return bool(np.all(p >= self.p_lo) and np.all(p <= self.p_hi))

    def clip(self, p) -> np.ndarray:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        return np.clip(p, self.p_lo, self.p_hi)

    def vertices(self):
        """Iterate over the corners of the parameter box."""
        if self.dimension == 0:
            yield np.zeros(0)
            return
        for combo in itertools.product(*zip(self.p_lo, self.p_hi)):
            yield np.asarray(combo, dtype=float)

    def grid(self, points_per_axis: int):
        """Iterate over a regular grid covering the box, endpoints included."""
        if self.dimension == 0:
            yield np.zeros(0)
            return
        axes = [
            np.linspace(lo, hi, points_per_axis)
            for lo, hi in zip(self.p_lo, self.p_hi)
        ]
        for combo in itertools.product(*axes):
            yield np.asarray(combo, dtype=float)


@dataclass(frozen=True)
class MatchedModel:
    """Uncertainty factored through the input channel: dA(p) = B phi(p).

    phi(p) = sum_i p_i phi_i with each phi_i of shape m x n. Use
    ``as_matched_model`` to derive one from an UncertaintyModel whose basis
    directions all lie in the range of B.
    """

    phi_basis: tuple
    p_lo: np.ndarray
    p_hi: np.ndarray
    F: np.ndarray

    def __post_init__(self):
        basis = tuple(as_matrix(ph, f"phi_basis[{i}]") for i, ph in enumerate(self.phi_basis))
        object.__setattr__(self, "phi_basis", basis)
        lo = np.atleast_1d(np.asarray(self.p_lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.p_hi, dtype=float))
        object.__setattr__(self, "p_lo", lo)
        object.__setattr__(self, "p_hi", hi)
        object.__setattr__(self, "F", symmetrize(self.F, "F"))
        if len(basis) != lo.size or lo.size != hi.size:
            raise ValueError("phi_basis, p_lo, and p_hi must agree in length")
        if np.any(lo > hi):
            raise ValueError("p_lo must not exceed p_hi componentwise")
        if not is_positive_semidefinite(self.F):
            raise ValueError("F must be positive semidefinite")

    @property
    def dimension(self) -> int:
        return len(self.phi_basis)

    def phi_at(self, p) -> np.ndarray:
        p = np.atleast_1d(np.asarray(p, dtype=float))
        if p.shape != (self.dimension,):
            raise ValueError(f"p has shape {p.shape}, expected ({self.dimension},)")
        n = self.F.shape[0]
        m = self.phi_basis[0].shape[0] if self.phi_basis else 0
        out = np.zeros((m, n)) if self.phi_basis else np.zeros((0, n))
        for coeff, ph in zip(p, self.phi_basis):
            out += coeff * ph
        return out

    def vertices(self):
        if self.dimension == 0:
            yield np.zeros(0)
            return
        for combo in itertools.product(*zip(self.p_lo, self.p_hi)):
            yield np.asarray(combo, dtype=float)

    def grid(self, points_per_axis: int):
        if self.dimension == 0:
            yield np.zeros(0)
            return
        axes = [
            np.linspace(lo, hi, points_per_axis)
            for lo, hi in zip(self.p_lo, self.p_hi)
        ]
        for combo in itertools.product(*axes):
            yield np.asarray(combo, dtype=float)


@dataclass(frozen=True)
class ConditionCheck:
    """One design condition: a verdict plus the margin that produced it.

    margin is the smallest eigenvalue of the slack matrix (nonnegative means
    the condition holds); witness_p is the worst parameter vector for
    box-scanned conditions and None otherwise. margin is None when the
    condition could not be evaluated at all.
    """

    condition: str
    verdict: str
    margin: float | None
    witness_p: tuple | None
    description: str


@dataclass(frozen=True)
class FeasibilityReport:
    checks: tuple

    @property
    def all_hold(self) -> bool:
        return all(c.verdict == HOLDS for c in self.checks)

    def failed(self):
        return [c for c in self.checks if c.verdict != HOLDS]

    def get(self, condition: str) -> ConditionCheck:
        for c in self.checks:
            if c.condition == condition:
                return c
        raise KeyError(condition)


@dataclass(frozen=True)
class SynthesisOutcome:
    """Everything produced by one synthesis run.

    P is the Riccati solution (the Lyapunov weight), K the state-feedback
    gain, L the gain on the uncontrolled subspace, Z the error weighting
    matrix of the trigger analysis, Q1 the guaranteed-decay matrix, and mu
    the relative trigger threshold coefficient. mode is "mismatched" or
    "matched" depending on which pipeline produced the outcome.
    """

    P: np.ndarray
    K: np.ndarray
    L: np.ndarray
    Z: np.ndarray
    Q1: np.ndarray
    mu: float
    A_closed: np.ndarray
    report: FeasibilityReport
    mode: str
    iterations: int
    residual: float


def projector_complement(B) -> np.ndarray:
    """Orthogonal projector onto the complement of the range of B.

    Requires B to have full column rank; the result is symmetric and
    idempotent, and annihilates every column of B.
    """
    B = as_matrix(B, "B")
    return np.eye(B.shape[0]) - B @ pseudo_inverse(B, "B")


def _input_weight(B: np.ndarray, params: SynthesisParams) -> np.ndarray:
    """The combined input weighting W = B R1^-1 B' + alpha^2 Pi R2^-1 Pi'."""
    W = B @ np.linalg.solve(params.R1, B.T)
    if params.alpha != 0.0:
        Pi = projector_complement(B)
        W = W + params.alpha**2 * (Pi @ np.linalg.solve(params.R2, Pi.T))
    return 0.5 * (W + W.T)


def _riccati_iteration(A, B, params, F, step_tol, max_iter):
    """Fixed-point iteration P -> A' (P^-1 + W)^-1 A + Q + F + beta^2 I.

    The update is evaluated as A' (I + P W)^-1 P A, which never inverts the
    iterate and stays well defined for semidefinite P. Returns the solution
    together with the iteration count, the verified residual, and W.
    """
    n = A.shape[0]
    W = _input_weight(B, params)
    Qbar = symmetrize(params.Q + F + params.beta**2 * np.eye(n), "effective state weight")
    eye = np.eye(n)
    P = Qbar.copy()
    for iteration in range(1, max_iter + 1):
        X = np.linalg.solve(eye + P @ W, P)
        P_next = A.T @ X @ A + Qbar
        P_next = 0.5 * (P_next + P_next.T)
        if not np.all(np.isfinite(P_next)) or np.max(np.abs(P_next)) > DIVERGENCE_LIMIT:
            raise RiccatiConvergenceError(
                f"iteration diverged after {iteration} steps; "
                "the pair (A, B) may not admit a stabilizing solution",
                iterations=iteration,
            )
        step = float(np.max(np.abs(P_next - P)))
        P = P_next
        if step <= step_tol:
            X = np.linalg.solve(eye + P @ W, P)
            residual = float(np.max(np.abs(A.T @ X @ A + Qbar - P)))
            return P, iteration, residual, W
    raise RiccatiConvergenceError(
        f"no convergence within {max_iter} iterations (last step {step:.3e})",
        iterations=max_iter,
        last_step=step,
    )


def _validated_riccati(A, B, params, F, step_tol, max_iter):
    A = require_square(A, "A")
    B = as_matrix(B, "B")
    if B.shape[0] != A.shape[0]:
        raise ValueError(f"B has {B.shape[0]} rows but A is {A.shape[0]} x {A.shape[0]}")
    F = symmetrize(F, "F")
    if F.shape != A.shape:
        raise ValueError(f"F has shape {F.shape}, expected {A.shape}")
    if not is_positive_semidefinite(F):
        raise ValueError("F must be positive semidefinite")
    P, iterations, residual, W = _riccati_iteration(A, B, params, F, step_tol, max_iter)
    if residual > RICCATI_RESIDUAL_TOL:
        raise RiccatiConvergenceError(
            f"converged point has residual {residual:.3e} above tolerance "
            f"{RICCATI_RESIDUAL_TOL:.1e}",
            iterations=iterations,
        )
    if not is_positive_definite(P):
        raise NumericalError("Riccati solution is not positive definite")
    return P, iterations, residual, W


def solve_modified_dare(
    A,
    B,
    params: SynthesisParams,
    F,
    step_tol: float = RICCATI_STEP_TOL,
    max_iter: int = RICCATI_MAX_ITER,
) -> np.ndarray:
    """Solve the modified discrete Riccati equation for the uncertain plant.

    Finds the symmetric positive definite P with
    A' (P^-1 + W)^-1 A - P + Q + F + beta^2 I = 0, where W combines the
    physical input weighting with the virtual channel on the complement of
    the range of B. Raises RiccatiConvergenceError when the iteration
    diverges, stalls, or lands on a point whose residual exceeds tolerance.
    """
    P, _, _, _ = _validated_riccati(A, B, params, F, step_tol, max_iter)
    return P


def feedback_gain(A, B, P, params: SynthesisParams) -> np.ndarray:
    """State-feedback gain K = -R1^-1 B' (P^-1 + W)^-1 A."""
    A = require_square(A, "A")
    B = as_matrix(B, "B")
    P = symmetrize(P, "P")
    W = _input_weight(B, params)
    S_inv = np.linalg.solve(np.eye(A.shape[0]) + P @ W, P)
    return -np.linalg.solve(params.R1, B.T @ S_inv @ A)


def virtual_gain(A, B, P, params: SynthesisParams) -> np.ndarray:
    """Gain of the virtual input on the uncontrolled subspace.

    L = -alpha R2^-1 Pi (P^-1 + W)^-1 A, identically zero when alpha is 0.
    """
    A = require_square(A, "A")
    B = as_matrix(B, "B")
    P = symmetrize(P, "P")
    if params.alpha == 0.0:
        return np.zeros((A.shape[0], A.shape[0]))
    Pi = projector_complement(B)
    W = _input_weight(B, params)
    S_inv = np.linalg.solve(np.eye(A.shape[0]) + P @ W, P)
    return -params.alpha * np.linalg.solve(params.R2, Pi @ S_inv @ A)


def error_weight(P, epsilon: float, require_window: bool = True) -> np.ndarray:
    """Error weighting matrix of the trigger analysis.

    Z = (1/epsilon) I + P ((1/epsilon) I - P)^-1 P. The derivation is valid
    only inside the design window where (1/epsilon) I - P is positive
    definite. With require_window=False the matrix is still computed when
    the gap matrix is merely invertible, so that audit paths can report the
    window violation instead of dying on it.
    """
    P = symmetrize(P, "P")
    epsilon = float(epsilon)
    if epsilon <= 0.0:
        raise ValueError("epsilon must be positive")
    n = P.shape[0]
    eye = np.eye(n)
    gap = (1.0 / epsilon) * eye - P
    if require_window and not is_positive_definite(gap):
        raise FeasibilityError(
            "design window violated: (1/epsilon) I - P is not positive definite "
            f"(smallest eigenvalue {sym_eigvals(gap)[0]:.6g})",
            condition=COND_EPS_WINDOW,
        )
    Z = (1.0 / epsilon) * eye + P @ inverse(gap, "design window gap") @ P
    Z = 0.5 * (Z + Z.T)
    if require_window and not is_positive_definite(Z):
        raise FeasibilityError(
            "error weighting matrix is not positive definite",
            condition=COND_WEIGHT_PD,
        )
    return Z


def decay_matrix(A, B, K, L, Z, params: SynthesisParams) -> np.ndarray:
    """Guaranteed-decay matrix of the triggered loop.

    Q1 = beta^2 I + K' R1 K + L' R2 L - (A + B K)' Z (A + B K).
    """
    A = require_square(A, "A")
    B = as_matrix(B, "B")
    K = as_matrix(K, "K")
    L = as_matrix(L, "L")
    Z = symmetrize(Z, "Z")
    n = A.shape[0]
    A_fb = A + B @ K
    Q1 = (
        params.beta**2 * np.eye(n)
        + K.T @ params.R1 @ K
        + L.T @ params.R2 @ L
        - A_fb.T @ Z @ A_fb
    )
    return 0.5 * (Q1 + Q1.T)


def trigger_coefficient(K, B, Z, Q1, sigma: float) -> float:
    """Relative event-trigger threshold coefficient.

    mu = sigma * lambda_min(Q1) / ||K' B' Z B K||. Requires Q1 to be
    positive definite; a nonpositive smallest eigenvalue means the triggered
    loop has no guaranteed decay and the threshold is undefined.
    """
    sigma = float(sigma)
    if not 0.0 < sigma < 1.0:
        raise ValueError("sigma must lie strictly between 0 and 1")
    K = as_matrix(K, "K")
    B = as_matrix(B, "B")
    Z = symmetrize(Z, "Z")
    eigs = sym_eigvals(Q1, "Q1")
    if eigs[0] <= 0.0:
        raise TriggerUndefinedError(
            "decay matrix is not positive definite "
            f"(smallest eigenvalue {eigs[0]:.6g}); the trigger threshold is undefined"
        )
    denom = spectral_norm(K.T @ B.T @ Z @ B @ K)
    if denom == 0.0:
        raise TriggerUndefinedError(
            "error weight vanishes on the feedback channel; "
            "every step would transmit"
        )
    return float(sigma * eigs[0] / denom)


def _verdict(margin: float, scale: float, band: float) -> str:
    hold_tol = HOLD_TOL * max(1.0, scale)
    if margin >= -hold_tol:
        return HOLDS
    if margin >= -band:
        return MARGINAL
    return FAILS


def _box_worst(model, slack_fn, points_per_axis: int):
    """Worst slack eigenvalue over box vertices plus a regular grid."""
    worst_margin = np.inf
    worst_p = None
    seen_any = False
    for p in itertools.chain(model.vertices(), model.grid(points_per_axis)):
        seen_any = True
        margin = float(np.linalg.eigvalsh(slack_fn(p))[0])
        if margin < worst_margin:
            worst_margin = margin
            worst_p = p
    if not seen_any:
        raise ValueError("uncertainty model produced no evaluation points")
    return worst_margin, tuple(float(v) for v in worst_p)


def _box_check(condition, description, model, slack_fn, points_per_axis, band_scale):
    margin, witness = _box_worst(model, slack_fn, points_per_axis)
    band = MARGINAL_BAND * band_scale
    return ConditionCheck(
        condition=condition,
        verdict=_verdict(margin, band_scale, band),
        margin=margin,
        witness_p=witness,
        description=description,
    )


def _matrix_check(condition, description, slack, scale):
    margin = float(sym_eigvals(slack, condition)[0])
    band = MARGINAL_BAND * max(1.0, scale)
    return ConditionCheck(
        condition=condition,
        verdict=_verdict(margin, scale, band),
        margin=margin,
        witness_p=None,
        description=description,
    )


def feasibility_report(
    A,
    B,
    model: UncertaintyModel,
    params: SynthesisParams,
    P,
    K,
    L,
    Z,
    Q1,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> FeasibilityReport:
    """Evaluate every design condition for a mismatched synthesis.

    Box-scanned conditions are checked at all vertices of the parameter box
    plus a regular grid with grid_points samples per coordinate; the margin
    reported is the worst slack eigenvalue found and witness_p the parameter
    at which it occurred. Verdicts use a relative hold tolerance and a
    marginal band proportional to the scale of the condition.
    """
    A = require_square(A, "A")
    n = A.shape[0]
    eye = np.eye(n)
    inv_eps = 1.0 / params.epsilon
    F = model.F
    F_scale = max(1.0, spectral_norm(F))
    checks = []

    gap = inv_eps * eye - P
    checks.append(
        _matrix_check(
            COND_EPS_WINDOW,
            "design window: (1/epsilon) I - P is positive definite",
            gap,
            max(1.0, inv_eps),
        )
    )

    checks.append(
        _box_check(
            COND_UNC_SCALED,
            "scaled uncertainty bound: (1/epsilon) dA' dA <= F over the box",
            model,
            lambda p: F - inv_eps * (model.matrix_at(p).T @ model.matrix_at(p)),
            grid_points,
            F_scale,
        )
    )

    A_fb = A + B @ K
    try:
        inner = P @ inverse(eye - params.epsilon * P, "inner window gap")
        slack = (
            params.beta**2 * eye
            + K.T @ params.R1 @ K
            + L.T @ params.R2 @ L
            - A_fb.T @ inner @ A_fb
        )
        checks.append(
            _matrix_check(
                COND_PERIODIC_DECAY,
                "periodic transmission decay margin is nonnegative",
                0.5 * (slack + slack.T),
                max(1.0, spectral_norm(P)),
            )
        )
    except NumericalError:
        checks.append(
            ConditionCheck(
                condition=COND_PERIODIC_DECAY,
                verdict=FAILS,
                margin=None,
                witness_p=None,
                description="periodic transmission decay margin is nonnegative "
                "(not evaluable: inner window gap is singular)",
            )
        )

    checks.append(
        _matrix_check(
            COND_WEIGHT_PD,
            "trigger error weight is positive definite",
            Z,
            max(1.0, inv_eps),
        )
    )

    checks.append(
        _box_check(
            COND_UNC_WEIGHTED,
            "weighted uncertainty bound: dA' Z dA <= F over the box",
            model,
            lambda p: F - model.matrix_at(p).T @ Z @ model.matrix_at(p),
            grid_points,
            F_scale,
        )
    )

    checks.append(
        _matrix_check(
            COND_DECAY_PSD,
            "guaranteed-decay matrix is positive semidefinite",
            Q1,
            max(1.0, spectral_norm(Q1)),
        )
    )

    return FeasibilityReport(checks=tuple(checks))


def synthesize(
    A,
    B,
    model: UncertaintyModel,
    params: SynthesisParams,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> SynthesisOutcome:
    """Full mismatched synthesis: Riccati solve, gains, trigger, report.

    Completes whenever every quantity is computable, even if design
    conditions fail; consult outcome.report before trusting the trigger.
    Raises TriggerUndefinedError when the decay matrix is not positive
    definite, and RiccatiConvergenceError when no solution exists.
    """
    A = require_square(A, "A")
    B = as_matrix(B, "B")
    if model.state_dim != A.shape[0]:
        raise ValueError(
            f"uncertainty model is for state dimension {model.state_dim}, "
            f"but A is {A.shape[0]} x {A.shape[0]}"
        )
    P, iterations, residual, _ = _validated_riccati(
        A, B, params, model.F, RICCATI_STEP_TOL, RICCATI_MAX_ITER
    )
    K = feedback_gain(A, B, P, params)
    L = virtual_gain(A, B, P, params)
    Z = error_weight(P, params.epsilon, require_window=False)
    Q1 = decay_matrix(A, B, K, L, Z, params)
    report = feasibility_report(A, B, model, params, P, K, L, Z, Q1, grid_points)
    mu = trigger_coefficient(K, B, Z, Q1, params.sigma)
    return SynthesisOutcome(
        P=P,
        K=K,
        L=L,
        Z=Z,
        Q1=Q1,
        mu=mu,
        A_closed=A + B @ K,
        report=report,
        mode="mismatched",
        iterations=iterations,
        residual=residual,
    )


def as_matched_model(B, model: UncertaintyModel, tol: float = 1e-12) -> MatchedModel:
    """Factor an uncertainty model through the input channel.

    Each basis direction E_i must satisfy E_i = B phi_i exactly (up to tol,
    relative to the magnitude of E_i); otherwise the model is genuinely
    mismatched and a ValueError explains which direction leaks outside the
    range of B.
    """
    B = as_matrix(B, "B")
    B_pinv = pseudo_inverse(B, "B")
    phis = []
    for i, e in enumerate(model.basis):
        phi = B_pinv @ e
        defect = float(np.max(np.abs(B @ phi - e)))
        if defect > tol * max(1.0, float(np.max(np.abs(e)))):
            raise ValueError(
                f"basis[{i}] is not matched: its residual outside the range of B "
                f"has magnitude {defect:.3e}"
            )
        phis.append(phi)
    return MatchedModel(
        phi_basis=tuple(phis), p_lo=model.p_lo, p_hi=model.p_hi, F=model.F
    )


def _matched_feasibility_report(A, B, matched, params, P, K, grid_points):
    n = A.shape[0]
    eye = np.eye(n)
    inv_eps = 1.0 / params.epsilon
    F = matched.F
    F_scale = max(1.0, spectral_norm(F))
    checks = []

    checks.append(
        _matrix_check(
            COND_EPS_WINDOW,
            "design window: (1/epsilon) I - P is positive definite",
            inv_eps * eye - P,
            max(1.0, inv_eps),
        )
    )

    BtB = B.T @ B

    def matched_slack(p):
        phi = matched.phi_at(p)
        return F - (2.0 * inv_eps) * (phi.T @ BtB @ phi)

    checks.append(
        _box_check(
            COND_UNC_MATCHED,
            "matched uncertainty bound: (2/epsilon) phi' B' B phi <= F over the box",
            matched,
            matched_slack,
            grid_points,
            F_scale,
        )
    )

    A_fb = A + B @ K
    slack = params.beta**2 * eye + K.T @ params.R1 @ K - (2.0 * inv_eps) * (A_fb.T @ A_fb)
    checks.append(
        _matrix_check(
            COND_MATCHED_DECAY,
            "matched decay condition on the nominal closed loop",
            0.5 * (slack + slack.T),
            max(1.0, spectral_norm(A_fb) ** 2 * 2.0 * inv_eps),
        )
    )

    return FeasibilityReport(checks=tuple(checks))


def synthesize_matched(
    A,
    B,
    matched: MatchedModel,
    params: SynthesisParams,
    grid_points: int = DEFAULT_GRID_POINTS,
) -> SynthesisOutcome:
    """Synthesis specialized to matched uncertainty.

    The virtual channel is absent (alpha is forced to zero), so the Riccati
    weighting reduces to the physical input alone, and the trigger
    coefficient uses the effective state weight Q + F + beta^2 I together
    with the inner window matrix (P^-1 - epsilon I)^-1 instead of the
    mismatched pair (Q1, Z).
    """
    A = require_square(A, "A")
    B = as_matrix(B, "B")
    if matched.F.shape[0] != A.shape[0]:
        raise ValueError(
            f"matched model is for state dimension {matched.F.shape[0]}, "
            f"but A is {A.shape[0]} x {A.shape[0]}"
        )
    params0 = dataclasses.replace(params, alpha=0.0)
    n = A.shape[0]
    P, iterations, residual, _ = _validated_riccati(
        A, B, params0, matched.F, RICCATI_STEP_TOL, RICCATI_MAX_ITER
    )
    K = feedback_gain(A, B, P, params0)
    L = np.zeros((n, n))
    Z = error_weight(P, params0.epsilon, require_window=False)
    report = _matched_feasibility_report(A, B, matched, params0, P, K, grid_points)

    Q_eff = symmetrize(
        params0.Q + matched.F + params0.beta**2 * np.eye(n), "effective state weight"
    )
    eigs = sym_eigvals(Q_eff, "effective state weight")
    if eigs[0] <= 0.0:
        raise TriggerUndefinedError(
            "effective state weight is not positive definite "
            f"(smallest eigenvalue {eigs[0]:.6g}); the trigger threshold is undefined"
        )
    inner = P @ inverse(np.eye(n) - params0.epsilon * P, "inner window gap")
    denom = spectral_norm(K.T @ B.T @ inner @ B @ K)
    if denom == 0.0:
        raise TriggerUndefinedError(
            "inner window weight vanishes on the feedback channel; "
            "every step would transmit"
        )
    mu = float(params0.sigma * eigs[0] / denom)

    return SynthesisOutcome(
        P=P,
        K=K,
        L=L,
        Z=Z,
        Q1=Q_eff,
        mu=mu,
        A_closed=A + B @ K,
        report=report,
        mode="matched",
        iterations=iterations,
        residual=residual,
    )


def sweep_epsilon(
    A,
    B,
    model: UncertaintyModel,
    params: SynthesisParams,
    epsilons,
    grid_points: int = 21,
) -> list:
    """Feasibility report for each candidate epsilon.

    The Riccati solution does not depend on epsilon, so it is solved once;
    only the window-dependent quantities are recomputed per candidate.
    Returns a list of (epsilon, FeasibilityReport) pairs. Candidates whose
    window gap is exactly singular get a report whose window check carries
    margin None.
    """
    A = require_square(A, "A")
    B = as_matrix(B, "B")
    P, _, _, _ = _validated_riccati(A, B, params, model.F, RICCATI_STEP_TOL, RICCATI_MAX_ITER)
    K = feedback_gain(A, B, P, params)
    L = virtual_gain(A, B, P, params)
    results = []
    for eps in epsilons:
        eps = float(eps)
        params_eps = dataclasses.replace(params, epsilon=eps)
        try:
            Z = error_weight(P, eps, require_window=False)
            Q1 = decay_matrix(A, B, K, L, Z, params_eps)
            report = feasibility_report(
                A, B, model, params_eps, P, K, L, Z, Q1, grid_points
            )
        except NumericalError:
            report = FeasibilityReport(
                checks=(
                    ConditionCheck(
                        condition=COND_EPS_WINDOW,
                        verdict=FAILS,
                        margin=None,
                        witness_p=None,
                        description="design window gap is singular at this epsilon",
                    ),
                )
            )
        results.append((eps, report))
    return results
