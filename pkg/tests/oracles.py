"""Independent reference computations used to pin expected test values.

These deliberately avoid the package's own code paths. The scalar Riccati
solution comes from the quadratic formula, the LQR oracle from plain value
iteration on the textbook recursion, and the residual evaluators use
explicit matrix inverses instead of the solver's factored update.
"""

import numpy as np


def scalar_riccati_root(a: float, w: float, q_bar: float) -> float:
    """Positive root of w P^2 + (1 - q_bar w - a^2) P - q_bar = 0.

    This quadratic is the scalar fixed point of P = a^2 P / (1 + w P) + q_bar
    after clearing the denominator, so its positive root is the scalar
    solution of the modified Riccati equation.
    """
    b = 1.0 - q_bar * w - a * a
    disc = b * b + 4.0 * w * q_bar
    return (-b + np.sqrt(disc)) / (2.0 * w)


def lqr_value_iteration(A, B, Q, R, iters: int = 100000, tol: float = 1e-14):
    """Standard discrete LQR cost matrix via value iteration."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    Q = np.asarray(Q, dtype=float)
    R = np.asarray(R, dtype=float)
    P = Q.copy()
    for _ in range(iters):
        BtP = B.T @ P
        P_next = Q + A.T @ P @ A - A.T @ P @ B @ np.linalg.solve(R + BtP @ B, BtP @ A)
        P_next = 0.5 * (P_next + P_next.T)
        if np.max(np.abs(P_next - P)) <= tol:
            return P_next
        P = P_next
    raise RuntimeError("LQR value iteration did not converge")


def lqr_gain(A, B, P, R):
    """Standard discrete LQR feedback gain for a given cost matrix."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    R = np.asarray(R, dtype=float)
    return -np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)


def riccati_residual_explicit(A, B, P, Q, R1, R2, alpha, beta, F) -> float:
    """Worst entrywise residual of the modified equation, via explicit inverses.

    Evaluates A' (P^-1 + W)^-1 A - P + Q + F + beta^2 I directly, where
    W = B R1^-1 B' + alpha^2 Pi R2^-1 Pi' and Pi is the orthogonal projector
    onto the complement of the range of B (computed here from the SVD-based
    numpy pseudo-inverse, not the package's normal-equations route).
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    P = np.asarray(P, dtype=float)
    n = A.shape[0]
    Pi = np.eye(n) - B @ np.linalg.pinv(B)
    W = B @ np.linalg.inv(np.asarray(R1, dtype=float)) @ B.T
    W = W + alpha**2 * (Pi @ np.linalg.inv(np.asarray(R2, dtype=float)) @ Pi.T)
    S_inv = np.linalg.inv(np.linalg.inv(P) + W)
    residual = A.T @ S_inv @ A - P + np.asarray(Q, dtype=float) + np.asarray(F, dtype=float)
    residual = residual + beta**2 * np.eye(n)
    return float(np.max(np.abs(residual)))


def controllable(A, B) -> bool:
    """Kalman rank test."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    n = A.shape[0]
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return np.linalg.matrix_rank(np.hstack(blocks)) == n


def random_instance(rng, max_dim: int = 5, spectral_lo: float = 0.3, spectral_hi: float = 0.95):
    """Random well-posed synthesis instance for residual campaigns."""
    n = int(rng.integers(1, max_dim + 1))
    m = int(rng.integers(1, n + 1))
    A = rng.normal(size=(n, n))
    radius = max(np.abs(np.linalg.eigvals(A)))
    if radius > 0:
        A = A * (rng.uniform(spectral_lo, spectral_hi) / radius)
    B = rng.normal(size=(n, m))
    G = rng.normal(size=(n, n))
    Q = G @ G.T / n + 0.1 * np.eye(n)
    H = rng.normal(size=(m, m))
    R1 = H @ H.T / m + 0.1 * np.eye(m)
    G2 = rng.normal(size=(n, n))
    R2 = G2 @ G2.T / n + 0.1 * np.eye(n)
    G3 = rng.normal(size=(n, n))
    F = G3 @ G3.T / n * rng.uniform(0.0, 0.5)
    alpha = float(rng.uniform(0.0, 2.0))
    beta = float(rng.uniform(0.0, 1.0))
    return A, B, Q, R1, R2, F, alpha, beta
