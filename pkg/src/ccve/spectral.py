"""Eigendecomposition and real ordered invariant subspaces.

Invariant subspaces are extracted from the real Schur form with eigenvalue
reordering (LAPACK trsen), so complex conjugate pairs travel together and
real input matrices yield real bases whenever the selected eigenvalue set is
closed under conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import ConjugatePairSplit, EigFailure

# Relative residual tolerance for eigenpairs and subspace checks.
EIG_RESID_TOL = 1e-8
# Relative magnitude separation below which the selection boundary counts
# as having no spectral gap.
GAP_TOL = 1e-8


@dataclass(frozen=True)
class Selection:
    """Which eigenvalues of the target matrix to associate with the subspace."""

    kind: str  # "largest" | "smallest" | "indices"
    indices: tuple = ()

    def __str__(self):
        if self.kind == "indices":
            return f"indices{list(self.indices)}"
        return self.kind


LargestMagnitude = Selection("largest")
SmallestMagnitude = Selection("smallest")


def Indices(idx):
    """Selection by positions into the descending-magnitude-sorted spectrum."""
    return Selection("indices", tuple(int(i) for i in idx))


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted by descending magnitude, with right eigenvectors."""

    values: np.ndarray
    magnitudes: np.ndarray
    vectors: np.ndarray | None = None


@dataclass(frozen=True)
class InvariantSubspace:
    """A real orthonormal basis for an invariant subspace of a real matrix."""

    basis: np.ndarray
    eigenvalues: np.ndarray
    Y: np.ndarray
    X: np.ndarray
    warnings: tuple = field(default=())


def _sort_key(values):
    # Descending magnitude; ties broken by descending real then imaginary part.
    return np.lexsort((-values.imag, -values.real, -np.abs(values)))


def eig(M) -> Spectrum:
    """Full eigendecomposition of a real square matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise EigFailure(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise EigFailure("matrix contains non-finite entries")
    try:
        values, vectors = sla.eig(M)
    except sla.LinAlgError as exc:  # pragma: no cover - LAPACK non-convergence
        raise EigFailure(str(exc)) from exc
    order = _sort_key(values)
    values = values[order]
    vectors = vectors[:, order]
    scale = max(np.linalg.norm(M), 1e-300)
    for j in range(len(values)):
        resid = np.linalg.norm(M @ vectors[:, j] - values[j] * vectors[:, j])
        if resid / scale > EIG_RESID_TOL:
            raise EigFailure(
                f"eigenpair {j} residual {resid / scale:.3e} above tolerance"
            )
    return Spectrum(values=values, magnitudes=np.abs(values), vectors=vectors)


def _schur_blocks(T):
    """Diagonal eigenvalues of a real quasi-triangular matrix, with block ids.

    Returns (values, block_id) arrays of length n; a 2x2 block contributes a
    conjugate pair sharing one block id.
    """
    n = T.shape[0]
    values = np.empty(n, dtype=complex)
    block_id = np.empty(n, dtype=int)
    i = 0
    bid = 0
    while i < n:
        if i + 1 < n and T[i + 1, i] != 0.0:
            a, b = T[i, i], T[i, i + 1]
            c, d = T[i + 1, i], T[i + 1, i + 1]
            mean = 0.5 * (a + d)
            disc = 0.25 * (a - d) ** 2 + b * c
            if disc < 0:
                root = np.sqrt(-disc)
                values[i] = mean + 1j * root
                values[i + 1] = mean - 1j * root
            else:  # defensive: gees normally leaves real pairs as 1x1 blocks
                root = np.sqrt(disc)
                values[i] = mean + root
                values[i + 1] = mean - root
            block_id[i] = block_id[i + 1] = bid
            i += 2
        else:
            values[i] = T[i, i]
            block_id[i] = bid
            i += 1
        bid += 1
    return values, block_id


def _select_positions(values, block_id, k, selection: Selection):
    """Resolve a Selection to Schur positions; enforce conjugate-pair unity.

    Returns (positions, selected_values, warnings).
    """
    n = len(values)
    if not 1 <= k <= n:
        raise EigFailure(f"k must satisfy 1 <= k <= {n}, got {k}")
    order = _sort_key(values)
    if selection.kind == "largest":
        chosen = order[:k]
    elif selection.kind == "smallest":
        chosen = order[n - k:]
    elif selection.kind == "indices":
        if len(selection.indices) != k:
            raise EigFailure(
                f"Indices selection has {len(selection.indices)} entries, expected {k}"
            )
        if any(i < 0 or i >= n for i in selection.indices):
            raise EigFailure("Indices selection out of range")
        chosen = order[list(selection.indices)]
    else:  # pragma: no cover
        raise EigFailure(f"unknown selection kind {selection.kind!r}")

    chosen_set = set(chosen.tolist())
    warns = []
    # Conjugate pairs must be both in or both out.
    for bid in np.unique(block_id):
        members = np.nonzero(block_id == bid)[0]
        if len(members) == 2:
            inside = sum(1 for m in members if m in chosen_set)
            if inside == 1:
                raise ConjugatePairSplit(
                    "selection boundary falls inside a complex conjugate pair"
                )
    # Magnitude gap at the selection boundary (contiguous selections only).
    if selection.kind in ("largest", "smallest") and k < n:
        mags = np.abs(values[order])
        boundary = k if selection.kind == "largest" else n - k
        lo, hi = mags[boundary - 1], mags[boundary]
        if abs(lo - hi) <= GAP_TOL * max(lo, hi, 1e-300):
            warns.append("NoSpectralGap")
    return chosen, values[chosen], tuple(warns)


def invariant_subspace(M, k, selection: Selection) -> InvariantSubspace:
    """Real orthonormal basis for the M-invariant subspace of the selection."""
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    T, Z = sla.schur(M, output="real")
    values, block_id = _schur_blocks(T)
    positions, selected, warns = _select_positions(values, block_id, k, selection)
    select = np.zeros(n, dtype=np.int32)
    select[positions] = 1
    trsen = lapack.dtrsen if T.dtype == np.float64 else lapack.strsen
    ts, qs, wr, wi, m, s, sep, info = trsen(select, T, Z, job="N")
    if info != 0:
        raise EigFailure(f"trsen failed with info={info}")
    if m != k:
        raise EigFailure(
            f"reordered subspace dimension {m} does not match requested {k}"
        )
    basis = np.ascontiguousarray(qs[:, :k])
    # Orthonormality comes from the Schur vectors; verify invariance.
    rep = basis.T @ M @ basis
    scale = max(np.linalg.norm(M), 1e-300)
    resid = np.linalg.norm(M @ basis - basis @ rep) / scale
    if resid > EIG_RESID_TOL:
        raise EigFailure(f"invariant-subspace residual {resid:.3e} above tolerance")
    sel_sorted = selected[_sort_key(selected)]
    return InvariantSubspace(
        basis=basis,
        eigenvalues=sel_sorted,
        Y=basis[:k, :],
        X=basis[k:, :],
        warnings=warns,
    )


def generalized_pairs(M1, M2T, k, selection: Selection) -> InvariantSubspace:
    """Invariant subspace via the generalized problem M1 K = M2^T K Lambda.

    Solved with the QZ decomposition of the pencil (M1, M2T); the leading k
    columns of the right transform span the deflating subspace of the selected
    generalized eigenvalues.
    """
    M1 = np.asarray(M1, dtype=float)
    M2T = np.asarray(M2T, dtype=float)
    n = M1.shape[0]
    AA, BB, alpha, beta, Q, Z = sla.ordqz(M1, M2T, sort=lambda a, b: b == b,
                                          output="real")
    if np.any(np.abs(beta) == 0.0):
        raise EigFailure("infinite generalized eigenvalue: M2^T is singular")
    values = alpha / beta
    # Reuse the Schur selection logic on the generalized eigenvalues; pair
    # structure is recovered from conjugation since ordqz gives no block map.
    block_id = _pair_blocks(values)
    positions, selected, warns = _select_positions(values, block_id, k, selection)
    target = values[positions]

    def want(a, b):
        lam = a / b
        out = np.zeros(len(lam), dtype=bool)
        remaining = list(target)
        scale = max(np.max(np.abs(values)), 1e-300)
        for j, l in enumerate(lam):
            for t in remaining:
                if abs(l - t) <= 1e-6 * scale:
                    out[j] = True
                    remaining.remove(t)
                    break
        return out

    AA, BB, alpha, beta, Q, Z = sla.ordqz(M1, M2T, sort=want, output="real")
    basis = np.ascontiguousarray(Z[:, :k])
    rep = np.linalg.lstsq(M2T @ basis, M1 @ basis, rcond=None)[0]
    scale = max(np.linalg.norm(M1), 1e-300)
    resid = np.linalg.norm(M1 @ basis - M2T @ basis @ rep) / scale
    if resid > EIG_RESID_TOL:
        raise EigFailure(
            f"generalized deflating-subspace residual {resid:.3e} above tolerance"
        )
    sel_sorted = selected[_sort_key(selected)]
    return InvariantSubspace(
        basis=basis,
        eigenvalues=sel_sorted,
        Y=basis[:k, :],
        X=basis[k:, :],
        warnings=warns,
    )


def _pair_blocks(values):
    """Group conjugate pairs among eigenvalues by value matching."""
    n = len(values)
    block_id = -np.ones(n, dtype=int)
    scale = max(np.max(np.abs(values)), 1e-300)
    bid = 0
    for i in range(n):
        if block_id[i] >= 0:
            continue
        block_id[i] = bid
        if abs(values[i].imag) > 1e-12 * scale:
            for j in range(i + 1, n):
                if block_id[j] < 0 and abs(values[j] - np.conj(values[i])) <= 1e-8 * scale:
                    block_id[j] = bid
                    break
        bid += 1
    return block_id


def principal_angles(U, V):
    """Principal angles between the column spans of U and V."""
    return sla.subspace_angles(np.asarray(U, float), np.asarray(V, float))
