"""Conjecture best-response maps and their iteration.

The cross update maps one player's conjecture slope to the opponent's
consistent best-response slope; the composite update chains two cross steps
and is represented compactly by the blocks of boldM1/boldM2.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import analysis
from .core import (
    CompositeBlocks,
    Conjecture,
    QuadraticGame,
    assemble_blocks,
    eval_cost,
    riccati_residual_norms,
    validate_game,
)
from .errors import DimensionMismatch, SingularBestResponse, SingularComposite

# Conjecture-norm threshold beyond which the iteration counts as diverged.
DIVERGENCE_NORM = 1e12
# Reciprocal-condition threshold for the inverses inside the maps.
_RCOND_MIN = 1e-14


def _solve_or_none(A, B):
    if np.linalg.cond(A) > 1.0 / _RCOND_MIN:
        return None
    return np.linalg.solve(A, B)


def lft_cross(game: QuadraticGame, i: int, L_i):
    """Opponent slope consistent with player i's data given i's slope L_i."""
    p = game.player(i)
    L_i = np.asarray(L_i, dtype=float)
    lhs = p.A.T + L_i.T @ p.B
    rhs = p.B.T + L_i.T @ p.D.T
    sol = _solve_or_none(lhs, rhs)
    if sol is None:
        raise SingularBestResponse(i)
    return -sol


def offset_cross(game: QuadraticGame, i: int, L_i):
    """Opponent affine offset consistent with player i's data at slope L_i."""
    p = game.player(i)
    L_i = np.asarray(L_i, dtype=float)
    lhs = (p.A + p.B.T @ L_i).T
    rhs = p.a + L_i.T @ p.b
    sol = _solve_or_none(lhs, rhs)
    if sol is None:
        raise SingularBestResponse(i)
    return -sol


def composite_step(blocks: CompositeBlocks, i: int, L_i):
    """One composite update L_i -> (C_i + D_i L_i)(A_i + B_i L_i)^{-1}."""
    bA, bB, bC, bD = blocks.bold_blocks(i)
    L_i = np.asarray(L_i, dtype=float)
    lhs = bA + bB @ L_i
    if np.linalg.cond(lhs) > 1.0 / _RCOND_MIN:
        raise SingularComposite(i)
    num = bC + bD @ L_i
    # Right division: solve X (A + B L) = (C + D L) via the transposed system.
    return np.linalg.solve(lhs.T, num.T).T


def best_response(game: QuadraticGame, i: int, conj: Conjecture):
    """Player i's optimal action under its conjecture (L, ell).

    Solves the stationarity condition of f_i(x_i, L x_i + ell); emits a
    NotCertifiedMin warning when the effective Hessian is not positive
    definite.
    """
    if conj.holder != i:
        raise DimensionMismatch(f"conjecture holder {conj.holder} != player {i}")
    p = game.player(i)
    L, ell = conj.L, conj.ell
    S = p.A + L.T @ p.B + p.B.T @ L + L.T @ p.D @ L
    rhs = p.a + L.T @ p.b + p.B.T @ ell + L.T @ p.D.T @ ell
    sol = _solve_or_none(S, rhs)
    if sol is None:
        raise SingularBestResponse(i)
    if np.linalg.eigvalsh(0.5 * (S + S.T)).min() <= 0.0:
        warnings.warn(
            f"NotCertifiedMin: player {i}'s effective Hessian is not positive "
            "definite; returned stationary point may not be a minimizer",
            stacklevel=2,
        )
    return -sol


def predict(conj: Conjecture, x_i):
    """The conjectured opponent action L x_i + ell."""
    x_i = np.asarray(x_i, dtype=float).reshape(-1)
    if x_i.shape[0] != conj.L.shape[1]:
        raise DimensionMismatch(
            f"action length {x_i.shape[0]} does not match conjecture "
            f"input dimension {conj.L.shape[1]}"
        )
    return conj.L @ x_i + conj.ell


@dataclass(frozen=True)
class IterationConfig:
    """Settings for the conjecture iteration.

    ``init=None`` means Nash initialization: zero slopes and offsets equal to
    the opposing Nash action.
    """

    mode: str = "cross"  # "cross" | "composite"
    max_iters: int = 100
    tol: float = 1e-8
    init: tuple[Conjecture, Conjecture] | None = None

    def __post_init__(self):
        if self.mode not in ("cross", "composite"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol <= 0:
            raise ValueError("tol must be positive")


@dataclass(frozen=True)
class IterationStep:
    """Snapshot of one iteration of the conjecture dynamics."""

    iteration: int
    L1: np.ndarray
    ell1: np.ndarray
    L2: np.ndarray
    ell2: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    xhat1: np.ndarray
    xhat2: np.ndarray
    f1: float
    f2: float
    f_social: float
    res1: float
    res2: float


@dataclass(frozen=True)
class IterationTrace:
    steps: tuple[IterationStep, ...]
    status: str  # "converged" | "max_iters" | "diverged" | "singular"
    status_iter: int
    change: float = field(default=np.nan)

    @property
    def final(self) -> IterationStep:
        return self.steps[-1]

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def _record(game, k, L1, ell1, L2, ell2) -> IterationStep:
    conj1 = Conjecture(holder=1, L=L1, ell=ell1)
    conj2 = Conjecture(holder=2, L=L2, ell=ell2)
    x1 = best_response(game, 1, conj1)
    x2 = best_response(game, 2, conj2)
    xhat2 = predict(conj1, x1)
    xhat1 = predict(conj2, x2)
    f1 = eval_cost(game, 1, x1, x2)
    f2 = eval_cost(game, 2, x1, x2)
    res1, res2 = riccati_residual_norms(game, L1, L2)
    return IterationStep(
        iteration=k, L1=L1, ell1=ell1, L2=L2, ell2=ell2,
        x1=x1, x2=x2, xhat1=xhat1, xhat2=xhat2,
        f1=f1, f2=f2, f_social=f1 + f2, res1=res1, res2=res2,
    )


def iterate(game: QuadraticGame, cfg: IterationConfig) -> IterationTrace:
    """Run the conjecture dynamics and record a full trace.

    Cross mode applies simultaneous cross updates; composite mode applies the
    composite update to each player independently. Offsets are refreshed from
    the current slopes at every step.
    """
    validate_game(game)
    dims = game.dims
    if cfg.init is None:
        x1ne, x2ne = analysis.nash(game)
        L1 = np.zeros((dims.d2, dims.d1))
        ell1 = x2ne
        L2 = np.zeros((dims.d1, dims.d2))
        ell2 = x1ne
    else:
        conj1, conj2 = cfg.init
        if conj1.holder != 1 or conj2.holder != 2:
            raise DimensionMismatch("init must be (player-1, player-2) conjectures")
        L1, ell1 = conj1.L.copy(), conj1.ell.copy()
        L2, ell2 = conj2.L.copy(), conj2.ell.copy()

    blocks = assemble_blocks(game) if cfg.mode == "composite" else None
    steps = [_record(game, 0, L1, ell1, L2, ell2)]
    change = np.nan
    for k in range(1, cfg.max_iters + 1):
        try:
            if cfg.mode == "cross":
                L1n = lft_cross(game, 2, L2)
                L2n = lft_cross(game, 1, L1)
            else:
                L1n = composite_step(blocks, 1, L1)
                L2n = composite_step(blocks, 2, L2)
            # Offsets follow the refreshed slopes so each (L, ell) pair stays
            # best-response consistent within the step.
            ell1n = offset_cross(game, 2, L2n)
            ell2n = offset_cross(game, 1, L1n)
        except (SingularBestResponse, SingularComposite):
            return IterationTrace(tuple(steps), "singular", k, change)
        change = max(
            np.linalg.norm(L1n - L1), np.linalg.norm(L2n - L2),
            np.linalg.norm(ell1n - ell1), np.linalg.norm(ell2n - ell2),
        )
        L1, ell1, L2, ell2 = L1n, ell1n, L2n, ell2n
        rec = _record(game, k, L1, ell1, L2, ell2)
        steps.append(rec)
        norms = [np.linalg.norm(m) for m in (L1, L2, ell1, ell2)]
        if max(norms) > DIVERGENCE_NORM:
            return IterationTrace(tuple(steps), "diverged", k, change)
        # Converged when the iterate stops moving or is already a fixed pair
        # (the step-change metric lags fixed-point proximity by one step).
        if change < cfg.tol or max(rec.res1, rec.res2) < cfg.tol:
            return IterationTrace(tuple(steps), "converged", k, change)
    return IterationTrace(tuple(steps), "max_iters", cfg.max_iters, change)


# --- Trace CSV --------------------------------------------------------------

def _flat_headers(prefix, shape):
    if len(shape) == 1:
        return [f"{prefix}_{r}" for r in range(shape[0])]
    return [f"{prefix}_{r}{c}" for r in range(shape[0]) for c in range(shape[1])]


def trace_header(dims) -> list[str]:
    cols = ["iter"]
    cols += _flat_headers("L1", (dims.d2, dims.d1))
    cols += _flat_headers("ell1", (dims.d2,))
    cols += _flat_headers("L2", (dims.d1, dims.d2))
    cols += _flat_headers("ell2", (dims.d1,))
    cols += _flat_headers("x1", (dims.d1,))
    cols += _flat_headers("x2", (dims.d2,))
    cols += _flat_headers("xhat1", (dims.d1,))
    cols += _flat_headers("xhat2", (dims.d2,))
    cols += ["f1", "f2", "f_social", "res1", "res2"]
    return cols


def _fmt(x):
    return format(float(x), ".17g")


def write_trace_csv(trace: IterationTrace, dims, path) -> None:
    """Write the iteration trace with row-major matrices, 17 significant digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(trace_header(dims))
        for st in trace.steps:
            row = [st.iteration]
            for arr in (st.L1, st.ell1, st.L2, st.ell2,
                        st.x1, st.x2, st.xhat1, st.xhat2):
                row += [_fmt(v) for v in np.asarray(arr).reshape(-1)]
            row += [_fmt(st.f1), _fmt(st.f2), _fmt(st.f_social),
                    _fmt(st.res1), _fmt(st.res2)]
            writer.writerow(row)
