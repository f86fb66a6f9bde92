"""Second-order certification, Nash equilibrium, and social-cost baselines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import QuadraticGame, eval_cost, stacked_m1, stacked_m2
from .errors import DimensionMismatch, SingularNashSystem, SingularSocialSystem

# Minimum-eigenvalue threshold for positive definiteness of the effective
# Hessians (absolute; games are expected to be O(1)-scaled).
SECOND_ORDER_EIG_MIN = 1e-10
_COND_MAX = 1e14


@dataclass(frozen=True)
class SecondOrderReport:
    """Effective per-player Hessians at a conjecture pair and their definiteness."""

    S1: np.ndarray
    S2: np.ndarray
    min_eig_1: float
    min_eig_2: float
    pass_: bool
    # Informational only: M_i > 0 is sufficient but far from necessary.
    m1_posdef: bool
    m2_posdef: bool


def effective_hessian(game: QuadraticGame, i: int, L_i):
    """sym(A_i + L^T B_i + B_i^T L + L^T D_i L) for player i at slope L."""
    p = game.player(i)
    L = np.asarray(L_i, dtype=float)
    S = p.A + L.T @ p.B + p.B.T @ L + L.T @ p.D @ L
    return 0.5 * (S + S.T)


def second_order_check(game: QuadraticGame, L1, L2) -> SecondOrderReport:
    """Check strong convexity of each player's conjectured problem."""
    L1 = np.asarray(L1, dtype=float)
    L2 = np.asarray(L2, dtype=float)
    if L1.shape != (game.dims.d2, game.dims.d1):
        raise DimensionMismatch(f"L1 has shape {L1.shape}")
    if L2.shape != (game.dims.d1, game.dims.d2):
        raise DimensionMismatch(f"L2 has shape {L2.shape}")
    S1 = effective_hessian(game, 1, L1)
    S2 = effective_hessian(game, 2, L2)
    e1 = float(np.linalg.eigvalsh(S1).min())
    e2 = float(np.linalg.eigvalsh(S2).min())
    m1_pd = bool(np.linalg.eigvalsh(0.5 * (stacked_m1(game) + stacked_m1(game).T)).min() > 0)
    m2_pd = bool(np.linalg.eigvalsh(0.5 * (stacked_m2(game) + stacked_m2(game).T)).min() > 0)
    return SecondOrderReport(
        S1=S1, S2=S2, min_eig_1=e1, min_eig_2=e2,
        pass_=(e1 > SECOND_ORDER_EIG_MIN and e2 > SECOND_ORDER_EIG_MIN),
        m1_posdef=m1_pd, m2_posdef=m2_pd,
    )


def nash(game: QuadraticGame):
    """Zero-conjecture stationary point: the Nash equilibrium actions."""
    d1, d2 = game.dims.d1, game.dims.d2
    K = np.block([[game.p1.A, game.p1.B.T], [game.p2.B.T, game.p2.A]])
    if np.linalg.cond(K) > _COND_MAX:
        raise SingularNashSystem("stacked Nash stationarity system is singular")
    z = np.linalg.solve(K, -np.concatenate([game.p1.a, game.p2.a]))
    return z[:d1], z[d1:]


def social_cost(game: QuadraticGame, x1, x2) -> float:
    """Total cost f1 + f2 at the joint action."""
    return eval_cost(game, 1, x1, x2) + eval_cost(game, 2, x1, x2)


def social_optimum(game: QuadraticGame):
    """Unconstrained minimizer of the social cost and its value.

    Emits a NotCertifiedMin warning when the stacked Hessian sym(M1 + M2) is
    not positive definite (the stationary point is then not a certified
    minimum).
    """
    import warnings

    M = stacked_m1(game) + stacked_m2(game)
    H = 0.5 * (M + M.T)
    g = np.concatenate([game.p1.a + game.p2.b, game.p1.b + game.p2.a])
    if np.linalg.cond(H) > _COND_MAX:
        raise SingularSocialSystem("sym(M1 + M2) is singular")
    z = np.linalg.solve(H, -g)
    if np.linalg.eigvalsh(H).min() <= 0.0:
        warnings.warn(
            "NotCertifiedMin: sym(M1 + M2) is not positive definite; the "
            "social stationary point may not be a minimum",
            stacklevel=2,
        )
    d1 = game.dims.d1
    x1, x2 = z[:d1], z[d1:]
    return x1, x2, social_cost(game, x1, x2)
