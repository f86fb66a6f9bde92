"""Direct equilibrium computation via invariant subspaces.

A fixed conjecture slope L1 corresponds to an invariant subspace of boldM1
whose basis [Y1; X1] has invertible top block: L1 = X1 Y1^{-1}.  The rest of
the equilibrium (L2, offsets, actions) follows from the cross best-response
formulas, and stability/second-order certificates are attached.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import analysis, lft, spectral, stability
from .core import (
    CompositeBlocks,
    QuadraticGame,
    assemble_blocks,
    riccati_residual_norms,
    validate_game,
)
from .errors import (
    ConjugatePairSplit,
    EnumerationTooLarge,
    NoStableSelection,
    NotAFixedPoint,
    SingularActionSystem,
    SingularBestResponse,
    SubspaceNotGraph,
)
from .spectral import Indices, LargestMagnitude, Selection, SmallestMagnitude

# Reciprocal condition number below which Y1 counts as singular.
Y1_RCOND_MIN = 1e-10
_COND_MAX = 1e14
ENUMERATION_CAP = 5000


@dataclass(frozen=True)
class CcveSolution:
    L1: np.ndarray
    ell1: np.ndarray
    L2: np.ndarray
    ell2: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    H1_spectrum: np.ndarray
    stability: stability.StabilityReport
    second_order: analysis.SecondOrderReport
    selection_used: str
    warnings: tuple = ()

    @property
    def stable(self) -> bool:
        return self.stability.stable

    @property
    def xi_max(self) -> tuple[float, float]:
        return self.stability.xi_max_1, self.stability.xi_max_2


def solve_actions(L1, ell1, L2, ell2):
    """Equilibrium actions from the two affine conjectures."""
    L1 = np.asarray(L1, float)
    L2 = np.asarray(L2, float)
    ell1 = np.asarray(ell1, float).reshape(-1)
    ell2 = np.asarray(ell2, float).reshape(-1)
    K = np.eye(L2.shape[0]) - L2 @ L1
    if np.linalg.cond(K) > _COND_MAX:
        raise SingularActionSystem("I - L2 L1 is singular")
    x1 = np.linalg.solve(K, L2 @ ell1 + ell2)
    x2 = L1 @ x1 + ell1
    return x1, x2


def _solution_from_subspace(
    game: QuadraticGame,
    blocks: CompositeBlocks,
    sub: spectral.InvariantSubspace,
    selection_label: str,
) -> CcveSolution:
    Y1, X1 = sub.Y, sub.X
    s = np.linalg.svd(Y1, compute_uv=False)
    if s[0] == 0.0 or s[-1] / s[0] < Y1_RCOND_MIN:
        raise SubspaceNotGraph(
            "the selected invariant subspace is not the graph of a conjecture "
            "(Y1 numerically singular)"
        )
    L1 = np.linalg.solve(Y1.T, X1.T).T
    L2 = lft.lft_cross(game, 1, L1)
    ell2 = lft.offset_cross(game, 1, L1)
    ell1 = lft.offset_cross(game, 2, L2)
    x1, x2 = solve_actions(L1, ell1, L2, ell2)
    report = stability.certify(blocks, game, L1, L2)
    so = analysis.second_order_check(game, L1, L2)
    h1_spec = np.linalg.eigvals(report.H1)
    h1_spec = h1_spec[spectral._sort_key(h1_spec)]
    return CcveSolution(
        L1=L1, ell1=ell1, L2=L2, ell2=ell2, x1=x1, x2=x2,
        H1_spectrum=h1_spec,
        stability=report,
        second_order=so,
        selection_used=selection_label,
        warnings=sub.warnings,
    )


def _solve_with(game, blocks, selection: Selection, route: str) -> CcveSolution:
    d1 = game.dims.d1
    if route == "direct":
        sub = spectral.invariant_subspace(blocks.boldM1, d1, selection)
    else:
        sub = spectral.generalized_pairs(blocks.M1, blocks.M2.T, d1, selection)
    return _solution_from_subspace(game, blocks, sub, str(selection))


def _solve(game: QuadraticGame, selection, route: str) -> CcveSolution:
    validate_game(game)
    blocks = assemble_blocks(game)
    if isinstance(selection, Selection):
        return _solve_with(game, blocks, selection, route)
    if selection != "auto":
        raise ValueError(f"unknown selection {selection!r}")
    # Auto mode: try both magnitude orderings, keep the certified-stable one.
    # A selection that fails to produce a consistent conjecture pair at all
    # (no graph, split pair, singular cross map, residual check) is simply
    # not a candidate.
    candidates = []
    for sel in (LargestMagnitude, SmallestMagnitude):
        try:
            candidates.append(_solve_with(game, blocks, sel, route))
        except (SubspaceNotGraph, ConjugatePairSplit, SingularBestResponse,
                SingularActionSystem, NotAFixedPoint):
            continue
    stable = [c for c in candidates if c.stable]
    if len(stable) != 1:
        raise NoStableSelection(
            f"{len(stable)} of {len(candidates)} magnitude-ordered candidates "
            "certify stable; cannot pick a unique equilibrium"
        )
    return stable[0]


def solve_ccve(game: QuadraticGame, selection="auto") -> CcveSolution:
    """Equilibrium via the invariant subspaces of boldM1.

    ``selection`` is a Selection or "auto"; auto computes both magnitude
    orderings and returns the unique stability-certified one.
    """
    return _solve(game, selection, route="direct")


def solve_via_generalized(game: QuadraticGame, selection="auto") -> CcveSolution:
    """Equilibrium via the generalized eigenproblem M1 K = M2^T K Lambda."""
    return _solve(game, selection, route="generalized")


@dataclass(frozen=True)
class FixedPointCandidate:
    indices: tuple[int, ...]
    eigenvalues: np.ndarray
    L1: np.ndarray
    L2: np.ndarray
    residuals: tuple[float, float]
    xi_max_1: float
    xi_max_2: float
    stable: bool
    second_order_pass: bool


@dataclass(frozen=True)
class EnumerationResult:
    candidates: tuple[FixedPointCandidate, ...]
    # (indices, reason) for subsets that do not yield a conjecture.
    skipped: tuple[tuple[tuple[int, ...], str], ...]


def enumerate_fixed_points(game: QuadraticGame, cap=ENUMERATION_CAP) -> EnumerationResult:
    """All conjugation-closed d1-subsets of spec(boldM1) with invertible Y1."""
    validate_game(game)
    blocks = assemble_blocks(game)
    d, d1 = game.dims.d, game.dims.d1
    if math.comb(d, d1) > cap:
        raise EnumerationTooLarge(
            f"binomial({d}, {d1}) = {math.comb(d, d1)} exceeds cap {cap}"
        )
    spec = spectral.eig(blocks.boldM1)
    values = spec.values  # descending magnitude order
    block_id = spectral._pair_blocks(values)
    # Enumerate whole conjugate blocks so pairs are never split.
    blocks_list = []
    for bid in sorted(set(block_id.tolist())):
        members = tuple(int(i) for i in np.nonzero(block_id == bid)[0])
        blocks_list.append(members)
    candidates = []
    skipped = []
    n_blocks = len(blocks_list)
    for r in range(1, n_blocks + 1):
        for combo in combinations(range(n_blocks), r):
            idx = tuple(sorted(i for b in combo for i in blocks_list[b]))
            if len(idx) != d1:
                continue
            try:
                sub = spectral.invariant_subspace(blocks.boldM1, d1, Indices(idx))
                sol = _solution_from_subspace(game, blocks, sub, f"indices{list(idx)}")
            except SubspaceNotGraph:
                skipped.append((idx, "SubspaceNotGraph"))
                continue
            except NotAFixedPoint:
                skipped.append((idx, "NotAFixedPoint"))
                continue
            except ConjugatePairSplit:  # defensive: blocks are kept whole
                skipped.append((idx, "ConjugatePairSplit"))
                continue
            candidates.append(FixedPointCandidate(
                indices=idx,
                eigenvalues=values[list(idx)],
                L1=sol.L1,
                L2=sol.L2,
                residuals=riccati_residual_norms(game, sol.L1, sol.L2),
                xi_max_1=sol.stability.xi_max_1,
                xi_max_2=sol.stability.xi_max_2,
                stable=sol.stable,
                second_order_pass=sol.second_order.pass_,
            ))
    candidates.sort(key=lambda c: c.indices)
    return EnumerationResult(tuple(candidates), tuple(skipped))


# --- Solution JSON ----------------------------------------------------------

def _complex_pairs(values):
    return [[float(v.real), float(v.imag)] for v in np.asarray(values).reshape(-1)]


def solution_to_dict(sol: CcveSolution) -> dict:
    rep = sol.stability
    so = sol.second_order
    return {
        "L1": sol.L1.tolist(),
        "ell1": sol.ell1.tolist(),
        "L2": sol.L2.tolist(),
        "ell2": sol.ell2.tolist(),
        "x1": sol.x1.tolist(),
        "x2": sol.x2.tolist(),
        "stable": bool(sol.stable),
        "xi_max": {"player1": rep.xi_max_1, "player2": rep.xi_max_2},
        "second_order": {
            "min_eig_1": so.min_eig_1,
            "min_eig_2": so.min_eig_2,
            "pass": bool(so.pass_),
            "m1_posdef": so.m1_posdef,
            "m2_posdef": so.m2_posdef,
        },
        "selection": sol.selection_used,
        "spectrum": _complex_pairs(sol.H1_spectrum),
        "stability": {
            "ratios_1": _complex_pairs(rep.ratios_1),
            "ratios_2": _complex_pairs(rep.ratios_2),
            "xi_max_1": rep.xi_max_1,
            "xi_max_2": rep.xi_max_2,
            "flags": {
                "stable": bool(rep.stable),
                "marginal": bool(rep.marginal),
                "internal_inconsistency": bool(rep.internal_inconsistency),
            },
        },
        "warnings": list(sol.warnings),
    }


def save_solution(sol: CcveSolution, path) -> None:
    with open(path, "w") as fh:
        json.dump(solution_to_dict(sol), fh, indent=2)
        fh.write("\n")
