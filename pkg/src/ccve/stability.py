"""Perturbation-dynamics spectra and local stability certification.

At a fixed conjecture pair, the linearized conjecture dynamics for player i
are dL -> (bD_i - L_i bB_i) dL (bA_i + bB_i L_i)^{-1}; their eigenvalues are
all ratios lambda/mu between the complementary and selected spectra of the
composite matrix.  Max ratio magnitude below one certifies local asymptotic
stability of the iteration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import CompositeBlocks, QuadraticGame, riccati_residual_norms
from .errors import NotAFixedPoint, SingularComposite

# Residual threshold for accepting (L1, L2) as a fixed pair.
FIXED_POINT_TOL = 1e-6
# Half-width of the marginal band around |xi| = 1.
MARGINAL_BAND = 1e-9
_COND_MAX = 1e14


@dataclass(frozen=True)
class StabilityReport:
    H1: np.ndarray
    H1p: np.ndarray
    H2: np.ndarray
    H2p: np.ndarray
    ratios_1: np.ndarray
    ratios_2: np.ndarray
    xi_max_1: float
    xi_max_2: float
    stable: bool
    marginal: bool
    # Set when the two per-player certificates disagree beyond tolerance.
    internal_inconsistency: bool


def h_matrices(blocks: CompositeBlocks, game: QuadraticGame, L1, L2):
    """Similarity-transform diagonal blocks at a fixed pair (L1, L2).

    H1 = bA1 + bB1 L1, H1' = bD1 - L1 bB1 (and analogously for player 2).
    Cross-checks the alternate form H1 = (D2^T + B2 L1)^{-1}(A1 + B1^T L1).
    """
    L1 = np.asarray(L1, dtype=float)
    L2 = np.asarray(L2, dtype=float)
    r1, r2 = riccati_residual_norms(game, L1, L2)
    if max(r1, r2) > FIXED_POINT_TOL:
        raise NotAFixedPoint(
            f"(L1, L2) residuals ({r1:.3e}, {r2:.3e}) above {FIXED_POINT_TOL:g}"
        )
    H1 = blocks.A1 + blocks.B1 @ L1
    H1p = blocks.D1 - L1 @ blocks.B1
    H2 = blocks.A2 + blocks.B2 @ L2
    H2p = blocks.D2 - L2 @ blocks.B2
    lhs = game.p2.D.T + game.p2.B @ L1
    alt = np.linalg.solve(lhs, game.p1.A + game.p1.B.T @ L1)
    scale = max(np.linalg.norm(H1), 1e-300)
    if np.linalg.norm(alt - H1) / scale > 1e-8:
        raise NotAFixedPoint(
            "alternate form of H1 disagrees with the block form; "
            "(L1, L2) is not a consistent fixed pair"
        )
    return H1, H1p, H2, H2p


def perturbation_spectrum(blocks: CompositeBlocks, i: int, L_i):
    """All eigenvalue ratios of the linearized conjecture dynamics at L_i."""
    bA, bB, _, bD = blocks.bold_blocks(i)
    L_i = np.asarray(L_i, dtype=float)
    contract = bA + bB @ L_i
    if np.linalg.cond(contract) > _COND_MAX:
        raise SingularComposite(i)
    lam = np.linalg.eigvals(bD - L_i @ bB)
    mu = np.linalg.eigvals(contract)
    return (lam[:, None] / mu[None, :]).reshape(-1)


def perturbation_operator(blocks: CompositeBlocks, i: int, L_i):
    """Dense matrix of dL -> (bD_i - L_i bB_i) dL (bA_i + bB_i L_i)^{-1}.

    The operator acts on vec(dL) with column-major stacking; its eigenvalues
    must match perturbation_spectrum as a multiset.
    """
    bA, bB, _, bD = blocks.bold_blocks(i)
    L_i = np.asarray(L_i, dtype=float)
    left = bD - L_i @ bB
    right_inv = np.linalg.inv(bA + bB @ L_i)
    return np.kron(right_inv.T, left)


def certify(blocks: CompositeBlocks, game: QuadraticGame, L1, L2) -> StabilityReport:
    """Stability certificate for a fixed conjecture pair."""
    H1, H1p, H2, H2p = h_matrices(blocks, game, L1, L2)
    ratios_1 = perturbation_spectrum(blocks, 1, np.asarray(L1, float))
    ratios_2 = perturbation_spectrum(blocks, 2, np.asarray(L2, float))
    xi1 = float(np.max(np.abs(ratios_1)))
    xi2 = float(np.max(np.abs(ratios_2)))
    stable_1 = xi1 < 1.0 - MARGINAL_BAND
    stable_2 = xi2 < 1.0 - MARGINAL_BAND
    marginal = (abs(xi1 - 1.0) <= MARGINAL_BAND) or (abs(xi2 - 1.0) <= MARGINAL_BAND)
    inconsistent = (stable_1 != stable_2) and not marginal
    return StabilityReport(
        H1=H1, H1p=H1p, H2=H2, H2p=H2p,
        ratios_1=ratios_1, ratios_2=ratios_2,
        xi_max_1=xi1, xi_max_2=xi2,
        stable=stable_1 and not marginal,
        marginal=marginal,
        internal_inconsistency=inconsistent,
    )
