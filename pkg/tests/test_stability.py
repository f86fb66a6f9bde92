"""Perturbation spectra, the dense perturbation operator, and certification."""

import numpy as np
import pytest

from ccve import builders, lft, stability
from ccve.core import assemble_blocks
from ccve.equilibrium import solve_ccve
from ccve.errors import NotAFixedPoint
from ccve.stability import (
    certify,
    h_matrices,
    perturbation_operator,
    perturbation_spectrum,
)

from conftest import match_multisets, uniform_pool

SQ3 = np.sqrt(3.0)
WARM_L = -2.0 + SQ3
WARM_XI = 97.0 - 56.0 * SQ3
WARM_H1 = -7.0 - 4.0 * SQ3   # bA1 + bB1 L = -15 - 4 L at the stable slope
WARM_H1P = -7.0 + 4.0 * SQ3  # bD1 - L bB1 = 1 + 4 L


class TestHMatrices:
    def test_warmup_hand_values(self, warmup_game):
        blocks = assemble_blocks(warmup_game)
        H1, H1p, H2, H2p = h_matrices(blocks, warmup_game, [[WARM_L]], [[WARM_L]])
        assert H1[0, 0] == pytest.approx(WARM_H1, abs=1e-12)
        assert H1p[0, 0] == pytest.approx(WARM_H1P, abs=1e-12)
        # The symmetric game gives identical blocks for player 2.
        assert H2[0, 0] == pytest.approx(WARM_H1, abs=1e-12)
        assert H2p[0, 0] == pytest.approx(WARM_H1P, abs=1e-12)

    def test_rejects_non_fixed_pair(self, warmup_game):
        blocks = assemble_blocks(warmup_game)
        with pytest.raises(NotAFixedPoint):
            h_matrices(blocks, warmup_game, [[0.0]], [[0.0]])

    def test_spectrum_splitting(self, bench_game):
        # spec(boldM1) is the disjoint union of spec(H1) and spec(H1').
        sol = solve_ccve(bench_game)
        blocks = assemble_blocks(bench_game)
        H1, H1p, H2, H2p = h_matrices(blocks, bench_game, sol.L1, sol.L2)
        full = np.linalg.eigvals(blocks.boldM1)
        both = np.concatenate([np.linalg.eigvals(H1), np.linalg.eigvals(H1p)])
        assert match_multisets(both, full, 1e-8)
        full2 = np.linalg.eigvals(blocks.boldM2)
        both2 = np.concatenate([np.linalg.eigvals(H2), np.linalg.eigvals(H2p)])
        assert match_multisets(both2, full2, 1e-8)

    def test_h2p_spectrum_reciprocal_to_h1(self, bench_game):
        # H2' is similar to H1^{-T}: the spectra are elementwise reciprocal.
        sol = solve_ccve(bench_game)
        blocks = assemble_blocks(bench_game)
        H1, _, _, H2p = h_matrices(blocks, bench_game, sol.L1, sol.L2)
        assert match_multisets(
            np.linalg.eigvals(H2p), 1.0 / np.linalg.eigvals(H1), 1e-8
        )

    def test_alternate_form_consistency(self, bench_game):
        sol = solve_ccve(bench_game)
        blocks = assemble_blocks(bench_game)
        H1 = h_matrices(blocks, bench_game, sol.L1, sol.L2)[0]
        lhs = bench_game.p2.D.T + bench_game.p2.B @ sol.L1
        alt = np.linalg.solve(lhs, bench_game.p1.A + bench_game.p1.B.T @ sol.L1)
        assert np.allclose(alt, H1, atol=1e-10)


class TestPerturbationSpectrum:
    def test_warmup_single_ratio(self, warmup_game):
        blocks = assemble_blocks(warmup_game)
        ratios = perturbation_spectrum(blocks, 1, [[WARM_L]])
        assert ratios.shape == (1,)
        assert abs(ratios[0]) == pytest.approx(WARM_XI, abs=1e-12)

    def test_all_pairwise_ratios(self, bench_game):
        sol = solve_ccve(bench_game)
        blocks = assemble_blocks(bench_game)
        ratios = perturbation_spectrum(blocks, 1, sol.L1)
        d1, d2 = bench_game.dims.d1, bench_game.dims.d2
        assert ratios.shape == (d1 * d2,)
        lam = np.linalg.eigvals(blocks.D1 - sol.L1 @ blocks.B1)
        mu = np.linalg.eigvals(blocks.A1 + blocks.B1 @ sol.L1)
        expected = [l / m for l in lam for m in mu]
        assert match_multisets(ratios, expected, 1e-10)

    def test_matches_operator_eigenvalues(self, bench_game):
        sol = solve_ccve(bench_game)
        blocks = assemble_blocks(bench_game)
        for i, L in ((1, sol.L1), (2, sol.L2)):
            ratios = perturbation_spectrum(blocks, i, L)
            op = perturbation_operator(blocks, i, L)
            assert match_multisets(ratios, np.linalg.eigvals(op), 1e-8)

    def test_operator_action_identity(self, bench_game):
        sol = solve_ccve(bench_game)
        blocks = assemble_blocks(bench_game)
        bA, bB, _, bD = blocks.bold_blocks(1)
        left = bD - sol.L1 @ bB
        right_inv = np.linalg.inv(bA + bB @ sol.L1)
        op = perturbation_operator(blocks, 1, sol.L1)
        rng = np.random.default_rng(14)
        for _ in range(3):
            dL = rng.standard_normal(sol.L1.shape)
            direct = left @ dL @ right_inv
            via_op = (op @ dL.reshape(-1, order="F")).reshape(dL.shape, order="F")
            assert np.allclose(via_op, direct, atol=1e-12)


class TestCertify:
    def test_warmup_stable_certificate(self, warmup_game):
        blocks = assemble_blocks(warmup_game)
        rep = certify(blocks, warmup_game, [[WARM_L]], [[WARM_L]])
        assert rep.stable
        assert not rep.marginal
        assert not rep.internal_inconsistency
        assert rep.xi_max_1 == pytest.approx(WARM_XI, abs=1e-12)

    def test_warmup_unstable_certificate(self, warmup_game):
        blocks = assemble_blocks(warmup_game)
        L = -2.0 - SQ3
        rep = certify(blocks, warmup_game, [[L]], [[L]])
        assert not rep.stable
        assert rep.xi_max_1 == pytest.approx(1.0 / WARM_XI, rel=1e-10)

    def test_players_agree(self, bench_game):
        sol = solve_ccve(bench_game)
        blocks = assemble_blocks(bench_game)
        rep = certify(blocks, bench_game, sol.L1, sol.L2)
        assert rep.xi_max_1 == pytest.approx(rep.xi_max_2, rel=1e-9)
        assert not rep.internal_inconsistency

    def test_empirical_contraction_matches_certificate(self):
        # A 1e-4 slope perturbation must contract per step at a rate that
        # approaches xi_max_1.
        for g in uniform_pool(3, seed0=300, dmax=4):
            sol = solve_ccve(g)
            blocks = assemble_blocks(g)
            rng = np.random.default_rng(0)
            E = rng.standard_normal(sol.L1.shape)
            E /= np.linalg.norm(E)
            L = sol.L1 + 1e-4 * E
            rate = None
            prev = 1e-4
            for _ in range(60):
                L = lft.composite_step(blocks, 1, L)
                err = np.linalg.norm(L - sol.L1)
                if err < 1e-13 or prev < 1e-13:
                    break
                rate = err / prev
                prev = err
            assert rate is not None
            assert abs(rate - sol.stability.xi_max_1) < 0.05


class TestMarginalBand:
    def test_flags_exposed(self, bench_game):
        sol = solve_ccve(bench_game)
        rep = sol.stability
        assert rep.stable is True
        assert rep.marginal is False
        assert stability.MARGINAL_BAND == 1e-9
        assert stability.FIXED_POINT_TOL == 1e-6
