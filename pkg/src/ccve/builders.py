"""Constructors for quadratic games: unrolled LQ dynamic games, scalar games,
seeded random recipes, and the scalar Moebius fixed-point analyzer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import QuadraticGame, assemble_blocks
from .errors import ComplexFixedPoints, DegenerateScalar, DimensionMismatch

_PSD_TOL = 1e-10


@dataclass(frozen=True)
class LqSpec:
    """Finite-horizon open-loop LQ dynamic game description.

    Dynamics z_{t+1} = F z_t + G1 u_{1,t} + G2 u_{2,t}; stage costs
    1/2 z^T Q_i z + 1/2 u_i^T R_i u_i + u_i^T R_{i,-i} u_{-i}, terminal cost
    1/2 z_T^T Q_{i,f} z_T.
    """

    F: np.ndarray
    G1: np.ndarray
    G2: np.ndarray
    Q1: np.ndarray
    Q2: np.ndarray
    Q1f: np.ndarray
    Q2f: np.ndarray
    R1: np.ndarray
    R2: np.ndarray
    R12: np.ndarray
    R21: np.ndarray
    z0: np.ndarray
    T: int

    @classmethod
    def create(cls, F, G1, G2, Q1, Q2, Q1f, Q2f, R1, R2, R12, R21, z0, T):
        F = np.asarray(F, float)
        n = F.shape[0]
        if F.shape != (n, n):
            raise DimensionMismatch(f"F must be square, got {F.shape}")
        G1 = np.asarray(G1, float).reshape(n, -1)
        G2 = np.asarray(G2, float).reshape(n, -1)
        m1, m2 = G1.shape[1], G2.shape[1]
        spec = cls(
            F=F, G1=G1, G2=G2,
            Q1=np.asarray(Q1, float).reshape(n, n),
            Q2=np.asarray(Q2, float).reshape(n, n),
            Q1f=np.asarray(Q1f, float).reshape(n, n),
            Q2f=np.asarray(Q2f, float).reshape(n, n),
            R1=np.asarray(R1, float).reshape(m1, m1),
            R2=np.asarray(R2, float).reshape(m2, m2),
            R12=np.asarray(R12, float).reshape(m1, m2),
            R21=np.asarray(R21, float).reshape(m2, m1),
            z0=np.asarray(z0, float).reshape(n),
            T=int(T),
        )
        if spec.T < 1:
            raise DimensionMismatch("horizon T must be >= 1")
        for name in ("R1", "R2"):
            m = getattr(spec, name)
            if np.linalg.eigvalsh(0.5 * (m + m.T)).min() <= 0:
                raise DimensionMismatch(f"{name} must be positive definite")
        for name in ("Q1", "Q2", "Q1f", "Q2f"):
            m = getattr(spec, name)
            if np.linalg.norm(m - m.T) > _PSD_TOL * max(1.0, np.linalg.norm(m)):
                raise DimensionMismatch(f"{name} must be symmetric")
            if np.linalg.eigvalsh(0.5 * (m + m.T)).min() < -_PSD_TOL:
                raise DimensionMismatch(f"{name} must be positive semidefinite")
        return spec

    @property
    def n(self):
        return self.F.shape[0]

    @property
    def m1(self):
        return self.G1.shape[1]

    @property
    def m2(self):
        return self.G2.shape[1]


def _unroll_input_map(F, G, T):
    """Block lower-triangular map from stacked controls to stacked states.

    Row t (of T+1) and column k (of T) hold F^{t-1-k} G for t >= k+1.
    """
    n, m = G.shape
    W = np.zeros((n * (T + 1), m * T))
    powers = [np.eye(n)]
    for _ in range(T):
        powers.append(F @ powers[-1])
    for t in range(1, T + 1):
        for k in range(t):
            W[t * n:(t + 1) * n, k * m:(k + 1) * m] = powers[t - 1 - k] @ G
    return W


def _block_diag(blocks):
    import scipy.linalg as sla
    return sla.block_diag(*blocks)


def build_lq_game(spec: LqSpec) -> QuadraticGame:
    """Unroll an LQ dynamic game into a static quadratic game in the stacked
    open-loop controls (d1 = m1*T, d2 = m2*T)."""
    T, n = spec.T, spec.n
    W1 = _unroll_input_map(spec.F, spec.G1, T)
    W2 = _unroll_input_map(spec.F, spec.G2, T)
    Fbar = np.vstack([np.linalg.matrix_power(spec.F, t) for t in range(T + 1)])
    bQ1 = _block_diag([spec.Q1] * T + [spec.Q1f])
    bQ2 = _block_diag([spec.Q2] * T + [spec.Q2f])
    bR1 = _block_diag([spec.R1] * T)
    bR2 = _block_diag([spec.R2] * T)
    bR12 = _block_diag([spec.R12] * T)
    bR21 = _block_diag([spec.R21] * T)
    z0 = spec.z0

    A1 = bR1 + W1.T @ bQ1 @ W1
    B1 = (bR12 + W1.T @ bQ1 @ W2).T
    D1 = W2.T @ bQ1 @ W2
    a1 = W1.T @ bQ1 @ (Fbar @ z0)
    b1 = W2.T @ bQ1 @ (Fbar @ z0)

    A2 = bR2 + W2.T @ bQ2 @ W2
    B2 = (bR21 + W2.T @ bQ2 @ W1).T
    D2 = W1.T @ bQ2 @ W1
    a2 = W2.T @ bQ2 @ (Fbar @ z0)
    b2 = W1.T @ bQ2 @ (Fbar @ z0)

    return QuadraticGame.create(
        spec.m1 * T, spec.m2 * T,
        (A1, B1, D1, a1, b1),
        (A2, B2, D2, a2, b2),
    )


def rollout_cost(spec: LqSpec, i: int, u1, u2) -> float:
    """Trajectory cost by explicit forward simulation (oracle for the unroll).

    Measured relative to the uncontrolled trajectory from z0: the static
    quadratic form carries no constant term, so the control-independent state
    cost 1/2 sum_t (F^t z0)^T Q (F^t z0) is subtracted."""
    T, n = spec.T, spec.n
    u1 = np.asarray(u1, float).reshape(T, spec.m1)
    u2 = np.asarray(u2, float).reshape(T, spec.m2)
    Q = spec.Q1 if i == 1 else spec.Q2
    Qf = spec.Q1f if i == 1 else spec.Q2f
    R = spec.R1 if i == 1 else spec.R2
    Rc = spec.R12 if i == 1 else spec.R21
    u_own, u_opp = (u1, u2) if i == 1 else (u2, u1)
    z = spec.z0.copy()
    z_free = spec.z0.copy()
    total = 0.0
    for t in range(T):
        total += 0.5 * (z @ Q @ z - z_free @ Q @ z_free)
        total += 0.5 * u_own[t] @ R @ u_own[t] + u_own[t] @ Rc @ u_opp[t]
        z = spec.F @ z + spec.G1 @ u1[t] + spec.G2 @ u2[t]
        z_free = spec.F @ z_free
    total += 0.5 * (z @ Qf @ z - z_free @ Qf @ z_free)
    return float(total)


@dataclass(frozen=True)
class ScalarSpec:
    """Per-player scalar cost parameters.

    q = own-quadratic, r = cross, s = opponent-quadratic, w = own-linear,
    v = opponent-linear.
    """

    q1: float
    r1: float
    s1: float
    w1: float = 0.0
    v1: float = 0.0
    q2: float = None
    r2: float = None
    s2: float = None
    w2: float = 0.0
    v2: float = 0.0

    def __post_init__(self):
        # A one-player spec doubles as a symmetric game.
        if self.q2 is None:
            object.__setattr__(self, "q2", self.q1)
        if self.r2 is None:
            object.__setattr__(self, "r2", self.r1)
        if self.s2 is None:
            object.__setattr__(self, "s2", self.s1)


def build_scalar_game(spec: ScalarSpec) -> QuadraticGame:
    """1x1 quadratic game from scalar parameters; requires q s - r^2 != 0."""
    for i, (q, r, s) in ((1, (spec.q1, spec.r1, spec.s1)),
                         (2, (spec.q2, spec.r2, spec.s2))):
        det = q * s - r * r
        if abs(det) < 1e-12 * max(1.0, q * q, r * r, s * s):
            raise DegenerateScalar(f"player {i}: q*s - r^2 = {det:g} is zero")
    return QuadraticGame.create(
        1, 1,
        ([[spec.q1]], [[spec.r1]], [[spec.s1]], [spec.w1], [spec.v1]),
        ([[spec.q2]], [[spec.r2]], [[spec.s2]], [spec.w2], [spec.v2]),
    )


def random_game(d1, d2, recipe="paper7ex2", seed=0, lo=-1.0, hi=1.0) -> QuadraticGame:
    """Deterministic seeded game construction.

    Recipes:
      * "paper7ex1": fixed 2x3 benchmark game (exact constants; d1=2, d2=3).
      * "paper7ex2": scaled-identity A and D (13I, -0.2I / -0.1I), unit
        linear terms for player 2, B entries uniform on (-1, 1).
      * "uniform": like paper7ex2 but B entries uniform on (lo, hi) with the
        identity scale adapted to keep the game well conditioned.

    The stream order is fixed: B1 is drawn first (row-major), then B2.
    """
    if recipe == "paper7ex1":
        if (d1, d2) != (2, 3):
            raise DimensionMismatch("paper7ex1 recipe is defined for d1=2, d2=3")
        return example1_game()
    rng = np.random.default_rng(seed)
    if recipe == "paper7ex2":
        lo, hi = -1.0, 1.0
        scale = 13.0
    elif recipe == "uniform":
        scale = 1.0 + 2.0 * max(abs(lo), abs(hi)) * max(d1, d2)
    else:
        raise ValueError(f"unknown recipe {recipe!r}")
    B1 = rng.uniform(lo, hi, size=(d2, d1))
    B2 = rng.uniform(lo, hi, size=(d1, d2))
    A1 = scale * np.eye(d1)
    D1 = -0.2 * np.eye(d2)
    A2 = scale * np.eye(d2)
    D2 = -0.1 * np.eye(d1)
    return QuadraticGame.create(
        d1, d2,
        (A1, B1, D1, np.zeros(d1), np.zeros(d2)),
        (A2, B2, D2, np.ones(d2), np.ones(d1)),
    )


def example1_game() -> QuadraticGame:
    """The fixed 2x3 benchmark game with printed constants."""
    A1 = np.eye(2)
    B1 = np.array([[-0.1, 0.2], [-0.5, -0.2], [-0.4, -0.4]])
    D1 = -0.2 * np.eye(3)
    a1 = np.zeros(2)
    b1 = np.zeros(3)
    A2 = np.eye(3)
    B2 = np.array([[0.3, 0.2, 0.1], [0.0, 0.1, -0.2]])
    D2 = -0.1 * np.eye(2)
    a2 = np.ones(3)
    b2 = np.ones(2)
    return QuadraticGame.create(2, 3, (A1, B1, D1, a1, b1), (A2, B2, D2, a2, b2))


@dataclass(frozen=True)
class MobiusFixedPoint:
    L: float
    xi_magnitude: float
    classification: str  # "stable" | "unstable" | "marginal"


@dataclass(frozen=True)
class MobiusResult:
    records: tuple[MobiusFixedPoint, ...]
    infinite_root: bool = False


_MARGINAL_BAND = 1e-9


def _classify(xi_mag):
    if xi_mag < 1.0 - _MARGINAL_BAND:
        return "stable"
    if xi_mag > 1.0 + _MARGINAL_BAND:
        return "unstable"
    return "marginal"


def mobius_fixed_points(game: QuadraticGame) -> MobiusResult:
    """Fixed points of the scalar composite map via the quadratic formula.

    With boldM1 = [[m11, m12], [m21, m22]], fixed slopes v solve
    m12 v^2 + (m11 - m22) v - m21 = 0; the local multiplier at a root is
    xi = (m22 - m12 v) / (m11 + m12 v).
    """
    if game.dims.d1 != 1 or game.dims.d2 != 1:
        raise DimensionMismatch("mobius_fixed_points requires a scalar game")
    bm = assemble_blocks(game).boldM1
    m11, m12 = bm[0, 0], bm[0, 1]
    m21, m22 = bm[1, 0], bm[1, 1]
    scale = max(abs(m11), abs(m12), abs(m21), abs(m22), 1e-300)

    def record(v):
        xi = abs((m22 - m12 * v) / (m11 + m12 * v))
        return MobiusFixedPoint(L=float(v), xi_magnitude=float(xi),
                                classification=_classify(xi))

    if abs(m12) < 1e-14 * scale:
        # Degenerate quadratic: the map is affine with at most one finite
        # fixed point; the second fixed point sits at infinity.
        if abs(m11 - m22) < 1e-14 * scale:
            raise DegenerateScalar("composite map is the identity on slopes")
        return MobiusResult((record(m21 / (m11 - m22)),), infinite_root=True)
    disc = (m11 - m22) ** 2 + 4.0 * m12 * m21
    if disc < 0:
        raise ComplexFixedPoints(
            "scalar composite map has complex fixed points (elliptic case)"
        )
    root = np.sqrt(disc)
    v_a = (-(m11 - m22) + root) / (2.0 * m12)
    v_b = (-(m11 - m22) - root) / (2.0 * m12)
    recs = sorted((record(v_a), record(v_b)), key=lambda r: r.xi_magnitude)
    return MobiusResult(tuple(recs))
