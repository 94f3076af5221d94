"""Jump operators, the golden-rule rate matrix, and the Lindblad superoperator."""

from __future__ import annotations

import math

import numpy as np
import pytest

from spinbath import (
    BathConfig,
    ChainSpec,
    DegenerateGapError,
    build_hamiltonian,
    build_jump_operators,
    build_lindblad_superoperator,
    build_rate_matrix,
    coupling_matrix_elements,
    gibbs_state,
    spectral_decomposition,
    structural_blocks,
    unvectorize,
    vectorize,
)

from conftest import random_density


def _elems(dec, kappas, temperature=1.0, axes=()):
    cfg = BathConfig(temperature=temperature, kappas=kappas, axes=axes)
    return cfg, coupling_matrix_elements(cfg, dec)


class TestJumpOperators:
    def test_site_one_two_operators(self, paper_dec):
        _, elems = _elems(paper_dec, (1.0, 1.0))
        ops = [op for op in build_jump_operators(paper_dec, elems) if op.site == 1]
        assert [(op.omega, op.pairs) for op in ops] == [
            (pytest.approx(4 / 3), ((1, 3),)),
            (pytest.approx(8 / 3), ((0, 2),)),
        ]
        for op in ops:
            (i, j) = op.pairs[0]
            assert op.matrix[i, j] == 1.0
            assert np.count_nonzero(op.matrix) == 1

    def test_site_two_operators(self, paper_dec):
        _, elems = _elems(paper_dec, (1.0, 1.0))
        ops = [op for op in build_jump_operators(paper_dec, elems) if op.site == 2]
        assert [(op.omega, op.pairs) for op in ops] == [
            (pytest.approx(1 / 3), ((2, 3),)),
            (pytest.approx(5 / 3), ((0, 1),)),
        ]

    def test_commuting_coupling_yields_none(self, paper_dec):
        _, elems = _elems(paper_dec, (1.0, 1.0), axes=("z", "z"))
        assert build_jump_operators(paper_dec, elems) == []

    def test_degenerate_gaps_refused_with_pair_names(self):
        dec = spectral_decomposition(build_hamiltonian(ChainSpec(2, (1.0, 0.5))))
        _, elems = _elems(dec, (1.0, 1.0))
        with pytest.raises(DegenerateGapError, match="omega"):
            build_jump_operators(dec, elems)

    def test_degenerate_override_groups_equal_frequencies(self):
        # uncoupled chain: both site-1 transitions share the gap 2 h_1
        dec = spectral_decomposition(build_hamiltonian(ChainSpec(2, (1.0, 0.5))))
        _, elems = _elems(dec, (1.0, 1.0))
        ops = build_jump_operators(dec, elems, allow_degenerate_gaps=True)
        site1 = [op for op in ops if op.site == 1]
        assert len(site1) == 1
        assert site1[0].omega == pytest.approx(2.0)
        assert len(site1[0].pairs) == 2
        assert np.count_nonzero(site1[0].matrix) == 2


class TestRateMatrix:
    def test_blocked_structure_is_exact(self, paper_model):
        _, _, rates = paper_model(kappas=(0.0, 1.0), temperature=3.0)
        block_a, block_b = (0, 1), (2, 3)
        for i in block_a:
            for j in block_b:
                assert rates.matrix[i, j] == 0.0
                assert rates.matrix[j, i] == 0.0
        assert structural_blocks(rates) == (block_a, block_b)

    def test_zero_temperature_pure_damping(self, paper_model):
        _, _, rates = paper_model(kappas=(1.0, 1.0), temperature=0.0)
        lower = np.tril(rates.matrix, k=-1)
        assert np.count_nonzero(lower) == 0
        assert np.max(np.abs(rates.matrix.sum(axis=0))) < 1e-12

    def test_paper_rates_match_direct_formula(self, paper_model):
        # independent evaluation of the golden-rule expressions at gap 8/3
        _, _, rates = paper_model(kappas=(1.0, 1.0), temperature=1.0)
        nbar = 1.0 / math.expm1(8 / 3)
        expected_damping = (8 / 3) * (1.0 + nbar)
        expected_gain = (8 / 3) * nbar
        assert rates.matrix[0, 2] == pytest.approx(expected_damping, rel=1e-12)
        assert rates.matrix[2, 0] == pytest.approx(expected_gain, rel=1e-12)
        assert expected_damping == pytest.approx(2.865792, abs=1e-6)
        assert expected_gain == pytest.approx(0.199125, abs=1e-6)
        ratio = rates.matrix[2, 0] / rates.matrix[0, 2]
        assert ratio == pytest.approx(math.exp(-8 / 3), rel=1e-10)

    def test_invariants_and_row_counts(self, paper_model):
        _, _, rates = paper_model(kappas=(1.0, 1.0), temperature=1.0)
        rates.validate()
        m = rates.matrix
        off = ~np.eye(4, dtype=bool)
        assert np.all(m[off] >= 0)
        assert np.all(np.diagonal(m) <= 0)
        # every row holds N + 1 = 3 structural nonzeros when all sites couple
        assert np.all(rates.nonzero_mask.sum(axis=1) == 3)

    def test_boundary_diagonal_entries(self, paper_model):
        # ground state loses only upward (gain), top state only downward (damping)
        _, _, rates = paper_model(kappas=(1.0, 1.0), temperature=2.0)
        m = rates.matrix
        assert m[0, 0] == pytest.approx(-(m[1, 0] + m[2, 0] + m[3, 0]), rel=1e-12)
        assert m[3, 3] == pytest.approx(-(m[0, 3] + m[1, 3] + m[2, 3]), rel=1e-12)

    def test_detailed_balance_random_chains(self):
        rng = np.random.default_rng(31)
        for _ in range(25):
            n = int(rng.integers(2, 4))
            from spinbath import random_nondegenerate_chain

            spec = random_nondegenerate_chain(n, rng)
            temperature = float(rng.uniform(0.5, 5.0))
            dec = spectral_decomposition(build_hamiltonian(spec))
            cfg, elems = _elems(dec, tuple(rng.uniform(0.1, 2.0, size=n)), temperature)
            rates = build_rate_matrix(dec, elems, cfg)
            for i in range(dec.dimension):
                for j in range(i + 1, dec.dimension):
                    if not rates.nonzero_mask[i, j]:
                        continue
                    ratio = rates.matrix[j, i] / rates.matrix[i, j]
                    expected = math.exp(-float(dec.gap_table[i, j]) / temperature)
                    assert ratio == pytest.approx(expected, rel=1e-10)

    def test_mask_is_temperature_independent(self, paper_model):
        _, _, cold = paper_model(kappas=(1e-5, 1.0), temperature=0.01)
        _, _, hot = paper_model(kappas=(1e-5, 1.0), temperature=100.0)
        assert np.array_equal(cold.nonzero_mask, hot.nonzero_mask)
        assert np.all(cold.nonzero_mask.sum(axis=1) == 3)  # 1e-5 still structurally couples


class TestLindbladSuperoperator:
    def test_gibbs_annihilated(self, paper_dec, paper_superop):
        for temperature in (0.1, 1.0, 10.0):
            superop = paper_superop(kappas=(1.0, 1.0), temperature=temperature)
            rho = np.diag(gibbs_state(paper_dec, temperature).p).astype(complex)
            assert np.max(np.abs(superop.matrix @ vectorize(rho))) < 1e-10

    def test_infinite_temperature_fixed_point(self, paper_superop):
        superop = paper_superop(kappas=(1.0, 1.0), temperature=1e6)
        rho = np.eye(4, dtype=complex) / 4.0
        residual = np.max(np.abs(superop.matrix @ vectorize(rho)))
        assert residual < 1e-6 * np.max(np.abs(superop.matrix))

    def test_rhs_matches_direct_master_equation(self, paper_dec, paper_superop):
        # oracle: assemble the right-hand side by explicit matrix products
        temperature, kappas = 0.7, (0.4, 1.3)
        superop = paper_superop(kappas=kappas, temperature=temperature)
        cfg, elems = _elems(paper_dec, kappas, temperature)
        ops = build_jump_operators(paper_dec, elems)
        h = np.diag(paper_dec.energies)
        rng = np.random.default_rng(32)
        for _ in range(5):
            rho = random_density(rng, 4)
            rhs = -1j * (h @ rho - rho @ h)
            for op in ops:
                a = op.matrix
                from spinbath import bose_einstein, spectral_density

                j_omega = spectral_density(cfg, op.site, op.omega)
                nbar = bose_einstein(op.omega, temperature)
                down = a.conj().T @ a
                rhs += j_omega * (1 + nbar) * (
                    a @ rho @ a.conj().T - 0.5 * (rho @ down + down @ rho)
                )
                up = a @ a.conj().T
                rhs += j_omega * nbar * (
                    a.conj().T @ rho @ a - 0.5 * (rho @ up + up @ rho)
                )
            got = unvectorize(superop.matrix @ vectorize(rho), 4)
            assert np.max(np.abs(got - rhs)) < 1e-12

    def test_population_block_equals_rate_matrix(self, paper_model, paper_superop):
        for kappas, temperature in (((1.0, 1.0), 1.0), ((1e-5, 1.0), 10.0), ((0.0, 1.0), 0.5)):
            _, _, rates = paper_model(kappas=kappas, temperature=temperature)
            superop = paper_superop(kappas=kappas, temperature=temperature)
            assert np.max(np.abs(superop.population_block() - rates.matrix)) < 1e-12

    def test_populations_structurally_closed(self, paper_superop):
        # population rows carry exactly zero weight on coherence columns
        superop = paper_superop(kappas=(1.0, 1.0), temperature=1.0)
        pop = superop.population_indices
        coh = np.setdiff1d(np.arange(16), pop)
        assert np.count_nonzero(superop.matrix[np.ix_(pop, coh)]) == 0

    def test_coherences_decay_exponentially(self, paper_dec, paper_superop):
        # with nondegenerate gaps each coherence only couples to itself
        superop = paper_superop(kappas=(1.0, 1.0), temperature=1.0)
        pop = superop.population_indices
        coh = np.setdiff1d(np.arange(16), pop)
        sub = superop.matrix[np.ix_(coh, coh)]
        assert np.count_nonzero(sub - np.diag(np.diagonal(sub))) == 0
        assert np.all(np.diagonal(sub).real <= 0)

    def test_zeros_scaling_structure_quick(self):
        from spinbath import count_structural_zeros, predicted_zero_count, random_nondegenerate_chain

        rng = np.random.default_rng(33)
        for n in (2, 3, 4):
            for _ in range(5):
                spec = random_nondegenerate_chain(n, rng)
                dec = spectral_decomposition(build_hamiltonian(spec))
                cfg, elems = _elems(dec, (1.0,) * n)
                rates = build_rate_matrix(dec, elems, cfg)
                assert count_structural_zeros(rates) == predicted_zero_count(n)
