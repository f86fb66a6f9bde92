"""Game and conjecture data model, cost evaluation, and block-matrix assembly.

A two-player quadratic game is described by each player's cost

    f_i(x_i, x_{-i}) = 1/2 [x_i; x_{-i}]^T [[A_i, B_i^T], [B_i, D_i]] [x_i; x_{-i}]
                       + [a_i; b_i]^T [x_i; x_{-i}]

with A_i of shape d_i x d_i, B_i of shape d_{-i} x d_i and D_i of shape
d_{-i} x d_{-i}.  The composite matrices M1, M2 and the products
boldM1 = M2^{-T} M1, boldM2 = M1^{-T} M2 drive everything downstream:
conjecture best responses are linear fractional transformations represented
by these matrices.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ANotPositiveDefinite, DimensionMismatch, MSingular

# Reciprocal-condition-number threshold below which M1/M2 count as singular.
RCOND_SINGULAR = 1e-12
# Minimum eigenvalue threshold for A_i > 0.
POSDEF_EIG_MIN = 1e-10
# Relative asymmetry above which symmetrization of A/D emits a warning.
ASYM_WARN = 1e-8


def _as_matrix(value, rows, cols, name):
    m = np.asarray(value, dtype=float)
    if m.shape != (rows, cols):
        raise DimensionMismatch(
            f"{name} must have shape ({rows}, {cols}), got {m.shape}"
        )
    if not np.all(np.isfinite(m)):
        raise DimensionMismatch(f"{name} contains non-finite entries")
    return m


def _as_vector(value, n, name):
    v = np.asarray(value, dtype=float).reshape(-1)
    if v.shape != (n,):
        raise DimensionMismatch(f"{name} must have length {n}, got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise DimensionMismatch(f"{name} contains non-finite entries")
    return v


def _symmetrize(m, name):
    sym = 0.5 * (m + m.T)
    denom = max(np.linalg.norm(m), 1.0)
    if np.linalg.norm(m - m.T) / denom > ASYM_WARN:
        warnings.warn(
            f"{name} is not symmetric (relative asymmetry above {ASYM_WARN:g}); "
            "using its symmetric part",
            stacklevel=3,
        )
    return sym


@dataclass(frozen=True)
class Dims:
    """Action-space dimensions of the two players."""

    d1: int
    d2: int

    def __post_init__(self):
        if self.d1 < 1 or self.d2 < 1:
            raise DimensionMismatch("dimensions must be >= 1")

    @property
    def d(self):
        return self.d1 + self.d2


@dataclass(frozen=True)
class PlayerCost:
    """One player's quadratic cost blocks.

    Shapes follow the own-dimension-first convention: for the player with own
    dimension ``d_own`` and opponent dimension ``d_opp``, A is d_own x d_own,
    B is d_opp x d_own, D is d_opp x d_opp, a has length d_own, b length d_opp.
    A and D are symmetrized on construction.
    """

    A: np.ndarray
    B: np.ndarray
    D: np.ndarray
    a: np.ndarray
    b: np.ndarray

    @classmethod
    def create(cls, A, B, D, a, b, d_own, d_opp, player):
        A = _symmetrize(_as_matrix(A, d_own, d_own, f"A{player}"), f"A{player}")
        B = _as_matrix(B, d_opp, d_own, f"B{player}")
        D = _symmetrize(_as_matrix(D, d_opp, d_opp, f"D{player}"), f"D{player}")
        a = _as_vector(a, d_own, f"a{player}")
        b = _as_vector(b, d_opp, f"b{player}")
        return cls(A=A, B=B, D=D, a=a, b=b)


@dataclass(frozen=True)
class QuadraticGame:
    """A validated-on-demand two-player quadratic game."""

    dims: Dims
    p1: PlayerCost
    p2: PlayerCost

    @classmethod
    def create(cls, d1, d2, p1_blocks, p2_blocks):
        """Build a game from raw (A, B, D, a, b) tuples for each player."""
        dims = Dims(d1, d2)
        p1 = PlayerCost.create(*p1_blocks, d_own=d1, d_opp=d2, player=1)
        p2 = PlayerCost.create(*p2_blocks, d_own=d2, d_opp=d1, player=2)
        return cls(dims=dims, p1=p1, p2=p2)

    def player(self, i):
        if i == 1:
            return self.p1
        if i == 2:
            return self.p2
        raise DimensionMismatch(f"player index must be 1 or 2, got {i}")

    def own_dim(self, i):
        return self.dims.d1 if i == 1 else self.dims.d2

    def opp_dim(self, i):
        return self.dims.d2 if i == 1 else self.dims.d1


@dataclass(frozen=True)
class Conjecture:
    """Affine opponent model held by one player: x_opp = L x_own + ell."""

    holder: int
    L: np.ndarray
    ell: np.ndarray

    @classmethod
    def create(cls, holder, L, ell, dims: Dims):
        if holder not in (1, 2):
            raise DimensionMismatch(f"holder must be 1 or 2, got {holder}")
        d_own = dims.d1 if holder == 1 else dims.d2
        d_opp = dims.d2 if holder == 1 else dims.d1
        L = _as_matrix(L, d_opp, d_own, f"L{holder}")
        ell = _as_vector(ell, d_opp, f"ell{holder}")
        return cls(holder=holder, L=L, ell=ell)


@dataclass(frozen=True)
class CompositeBlocks:
    """M1, M2, their cross products and the named sub-blocks.

    boldM1 = M2^{-T} M1 partitions as [[A1, B1], [C1, D1]] with A1 of shape
    d1 x d1; boldM2 = M1^{-T} M2 partitions as [[D2, C2], [B2, A2]] with D2
    of shape d1 x d1.
    """

    dims: Dims
    M1: np.ndarray
    M2: np.ndarray
    boldM1: np.ndarray
    boldM2: np.ndarray
    A1: np.ndarray = field(repr=False, default=None)
    B1: np.ndarray = field(repr=False, default=None)
    C1: np.ndarray = field(repr=False, default=None)
    D1: np.ndarray = field(repr=False, default=None)
    D2: np.ndarray = field(repr=False, default=None)
    C2: np.ndarray = field(repr=False, default=None)
    B2: np.ndarray = field(repr=False, default=None)
    A2: np.ndarray = field(repr=False, default=None)

    def bold_blocks(self, i):
        """Return (bA_i, bB_i, bC_i, bD_i) for the player-i composite update."""
        if i == 1:
            return self.A1, self.B1, self.C1, self.D1
        return self.A2, self.B2, self.C2, self.D2


def stacked_m1(game: QuadraticGame) -> np.ndarray:
    p1 = game.p1
    return np.block([[p1.A, p1.B.T], [p1.B, p1.D]])


def stacked_m2(game: QuadraticGame) -> np.ndarray:
    p2 = game.p2
    return np.block([[p2.D, p2.B], [p2.B.T, p2.A]])


def _rcond(m):
    try:
        s = np.linalg.svd(m, compute_uv=False)
    except np.linalg.LinAlgError:
        return 0.0
    if s[0] == 0.0:
        return 0.0
    return s[-1] / s[0]


def validate_game(game: QuadraticGame) -> QuadraticGame:
    """Check A_i > 0 and invertibility of M1, M2; return the game unchanged."""
    for i in (1, 2):
        p = game.player(i)
        min_eig = np.linalg.eigvalsh(p.A).min()
        if min_eig <= POSDEF_EIG_MIN:
            raise ANotPositiveDefinite(i, min_eig)
    for i, m in ((1, stacked_m1(game)), (2, stacked_m2(game))):
        rc = _rcond(m)
        if rc < RCOND_SINGULAR:
            raise MSingular(i, rc)
    return game


def eval_cost(game: QuadraticGame, i: int, x1, x2) -> float:
    """Player i's quadratic cost at the joint action (x1, x2)."""
    x1 = _as_vector(x1, game.dims.d1, "x1")
    x2 = _as_vector(x2, game.dims.d2, "x2")
    p = game.player(i)
    x_own, x_opp = (x1, x2) if i == 1 else (x2, x1)
    quad = 0.5 * (
        x_own @ p.A @ x_own + 2.0 * x_opp @ p.B @ x_own + x_opp @ p.D @ x_opp
    )
    return float(quad + p.a @ x_own + p.b @ x_opp)


def assemble_blocks(game: QuadraticGame) -> CompositeBlocks:
    """Form M1, M2, boldM1 = M2^{-T} M1, boldM2 = M1^{-T} M2 and sub-blocks."""
    m1 = stacked_m1(game)
    m2 = stacked_m2(game)
    for i, m in ((1, m1), (2, m2)):
        if _rcond(m) < RCOND_SINGULAR:
            raise MSingular(i, _rcond(m))
    bold1 = np.linalg.solve(m2.T, m1)
    bold2 = np.linalg.solve(m1.T, m2)
    d1 = game.dims.d1
    return CompositeBlocks(
        dims=game.dims,
        M1=m1,
        M2=m2,
        boldM1=bold1,
        boldM2=bold2,
        A1=bold1[:d1, :d1],
        B1=bold1[:d1, d1:],
        C1=bold1[d1:, :d1],
        D1=bold1[d1:, d1:],
        D2=bold2[:d1, :d1],
        C2=bold2[:d1, d1:],
        B2=bold2[d1:, :d1],
        A2=bold2[d1:, d1:],
    )


def riccati_residual(game: QuadraticGame, L1, L2):
    """Residual matrices of the coupled conjecture equations.

    R1 = L2^T (A1 + B1^T L1) + (B1 + D1 L1)   (shape d2 x d1)
    R2 = L1^T (A2 + B2^T L2) + (B2 + D2 L2)   (shape d1 x d2)
    """
    dims = game.dims
    L1 = _as_matrix(L1, dims.d2, dims.d1, "L1")
    L2 = _as_matrix(L2, dims.d1, dims.d2, "L2")
    p1, p2 = game.p1, game.p2
    r1 = L2.T @ (p1.A + p1.B.T @ L1) + (p1.B + p1.D @ L1)
    r2 = L1.T @ (p2.A + p2.B.T @ L2) + (p2.B + p2.D @ L2)
    return r1, r2


def riccati_residual_norms(game: QuadraticGame, L1, L2):
    """Frobenius norms of the coupled residuals, relative to ||A_i||_F."""
    r1, r2 = riccati_residual(game, L1, L2)
    n1 = np.linalg.norm(r1) / np.linalg.norm(game.p1.A)
    n2 = np.linalg.norm(r2) / np.linalg.norm(game.p2.A)
    return float(n1), float(n2)


# --- Game JSON format -------------------------------------------------------

_GAME_KEYS = {"d1", "d2", "player1", "player2"}
_PLAYER_KEYS = {"A", "B", "D", "a", "b"}


def game_to_dict(game: QuadraticGame) -> dict:
    def player(p):
        return {
            "A": p.A.tolist(),
            "B": p.B.tolist(),
            "D": p.D.tolist(),
            "a": p.a.tolist(),
            "b": p.b.tolist(),
        }

    return {
        "d1": game.dims.d1,
        "d2": game.dims.d2,
        "player1": player(game.p1),
        "player2": player(game.p2),
    }


def game_from_dict(data: dict) -> QuadraticGame:
    if not isinstance(data, dict):
        raise DimensionMismatch("game JSON must be an object")
    unknown = set(data) - _GAME_KEYS
    if unknown:
        raise DimensionMismatch(f"unknown game keys: {sorted(unknown)}")
    missing = _GAME_KEYS - set(data)
    if missing:
        raise DimensionMismatch(f"missing game keys: {sorted(missing)}")
    for key in ("player1", "player2"):
        pdata = data[key]
        if not isinstance(pdata, dict):
            raise DimensionMismatch(f"{key} must be an object")
        unknown = set(pdata) - _PLAYER_KEYS
        if unknown:
            raise DimensionMismatch(f"unknown {key} keys: {sorted(unknown)}")
        missing = _PLAYER_KEYS - set(pdata)
        if missing:
            raise DimensionMismatch(f"missing {key} keys: {sorted(missing)}")
    p1, p2 = data["player1"], data["player2"]
    return QuadraticGame.create(
        int(data["d1"]),
        int(data["d2"]),
        (p1["A"], p1["B"], p1["D"], p1["a"], p1["b"]),
        (p2["A"], p2["B"], p2["D"], p2["a"], p2["b"]),
    )


def save_game(game: QuadraticGame, path) -> None:
    with open(path, "w") as fh:
        json.dump(game_to_dict(game), fh, indent=2)
        fh.write("\n")


def load_game(path) -> QuadraticGame:
    with open(path) as fh:
        return game_from_dict(json.load(fh))
