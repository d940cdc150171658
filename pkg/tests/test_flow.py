"""Unit tests for the two flow constructions, the Jordan oracle and the
structural checks."""

import numpy as np
import pytest

from cflow import (
    AnnihilatorPolynomial,
    NotJordanForm,
    RelationInvalid,
    ZeroEigenvalue,
    build_flow,
    check_flow_axioms,
    cluster_roots,
    companion_action_check,
    companion_flow_mu,
    companion_matrix,
    evaluate_companion_flow,
    evaluate_flow,
    extend_matrix,
    jordan_block_flow,
    jordan_oracle,
    mu_functions,
    negative_powers,
)

from conftest import rel_err


class TestNegativePowers:
    def test_diagonal(self):
        negs = negative_powers(np.diag([2.0, 4.0]), 2)
        assert np.allclose(negs[0], np.diag([0.5, 0.25]))
        assert np.allclose(negs[1], np.diag([0.25, 0.0625]))

    def test_singular_rejected(self):
        from cflow import SingularMatrix

        with pytest.raises(SingularMatrix):
            negative_powers(np.zeros((2, 2)), 1)


class TestCompanionMatrix:
    def test_orientation(self):
        q = AnnihilatorPolynomial((-6, 5))  # A^2 = 5A - 6I
        c = companion_matrix(q)
        assert np.allclose(c, [[5, 1], [-6, 0]])

    def test_relation_is_characteristic(self):
        q = AnnihilatorPolynomial((2 - 1j, 0.5, -1.5 + 0.5j))
        c = companion_matrix(q)
        # C satisfies its own relation
        assert np.max(np.abs(q.evaluate_matrix(c))) < 1e-12


class TestBuildFlow:
    def test_diag_two_three(self):
        a = np.diag([2.0, 3.0])
        rep = build_flow(a)
        for z in (0.5, 2.0, -1.0, 0.3 + 0.7j):
            expected = np.diag([2.0 ** complex(z), 3.0 ** complex(z)])
            assert rel_err(evaluate_flow(rep, z), expected) < 1e-13

    def test_unipotent_square_root(self):
        a = np.array([[1.0, 1.0], [0.0, 1.0]])
        rep = build_flow(a)
        assert np.allclose(evaluate_flow(rep, 0.5), [[1, 0.5], [0, 1]], atol=1e-12)

    def test_integer_powers_match_direct(self):
        rng = np.random.default_rng(23)
        a = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        rep = build_flow(a)
        for k in range(-3, 6):
            assert rel_err(evaluate_flow(rep, k), np.linalg.matrix_power(a, k)) < 1e-10

    def test_supplied_relation_validated(self):
        with pytest.raises(RelationInvalid):
            build_flow(np.diag([2.0, 3.0]), AnnihilatorPolynomial((1, 0)))

    def test_padded_relation_accepted(self):
        a = np.diag([2.0, 3.0])
        q = AnnihilatorPolynomial((-6, 5)).times_linear(1.5)
        rep = build_flow(a, q)
        assert rep.degree == 3
        assert rel_err(evaluate_flow(rep, 0.5), np.diag([2.0**0.5, 3.0**0.5])) < 1e-12

    def test_singular_matrix_rejected(self):
        with pytest.raises(ZeroEigenvalue):
            build_flow(np.diag([1.0, 0.0]))

    def test_branch_offset_changes_flow(self):
        a = np.array([[4.0]])
        plain = evaluate_flow(build_flow(a), 0.5)[0, 0]
        shifted = evaluate_flow(build_flow(a, branch_offsets={0: 1}), 0.5)[0, 0]
        assert plain == pytest.approx(2.0)
        assert shifted == pytest.approx(-2.0)  # exp(i*pi) from the extra winding

    def test_mu_at_integers(self):
        # contracting mu(z) against the negative powers must reproduce
        # evaluate_flow at every z
        a = np.diag([2.0, 3.0])
        rep = build_flow(a)
        negs = negative_powers(a, rep.degree)
        for z in (0.0, 1.0, 2.0, 0.5):
            mu = mu_functions(rep, z)
            recon = sum(m * p for m, p in zip(mu, negs))
            assert rel_err(recon, evaluate_flow(rep, z)) < 1e-12


class TestCompanionConstruction:
    def test_mu_zero_and_one(self):
        q = AnnihilatorPolynomial((-6, 5))
        c = np.array([-6.0, 5.0])[::-1]  # (c_1, c_0) = (5, -6)
        mu0 = companion_flow_mu(q, 0.0)
        mu1 = companion_flow_mu(q, 1.0)
        # C^0 c = c and C^1 c = C c
        assert np.allclose(mu0, c, atol=1e-12)
        assert np.allclose(mu1, companion_matrix(q) @ c, atol=1e-12)

    def test_known_formula_value(self):
        # for A^2 = 5A - 6I, mu(1) = (19, -30)
        q = AnnihilatorPolynomial((-6, 5))
        assert np.allclose(companion_flow_mu(q, 1.0), [19.0, -30.0], atol=1e-12)

    def test_agrees_with_direct(self):
        rng = np.random.default_rng(31)
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        rep = build_flow(a)
        for z in (0.5, -1.2 + 0.4j, 2.0):
            direct = evaluate_flow(rep, z)
            comp = evaluate_companion_flow(a, rep.relation, z)
            assert rel_err(comp, direct) < 1e-10

    def test_zero_constant_coefficient_rejected(self):
        with pytest.raises(ZeroEigenvalue):
            companion_flow_mu(AnnihilatorPolynomial((0, 1)), 0.5)


class TestJordanOracle:
    def test_block_flow_integer(self):
        out = jordan_block_flow(3.0, 2, 2)
        assert np.allclose(out, [[9, 6], [0, 9]])

    def test_block_flow_half(self):
        out = jordan_block_flow(1.0, 2, 0.5)
        assert np.allclose(out, [[1, 0.5], [0, 1]])

    def test_block_flow_is_group(self):
        z, w = 0.3 - 0.2j, 1.1 + 0.5j
        fz = jordan_block_flow(2.0 + 1.0j, 3, z)
        fw = jordan_block_flow(2.0 + 1.0j, 3, w)
        fzw = jordan_block_flow(2.0 + 1.0j, 3, z + w)
        assert np.max(np.abs(fz @ fw - fzw)) < 1e-12 * np.max(np.abs(fzw))

    def test_oracle_matches_build_flow(self):
        rng = np.random.default_rng(41)
        t = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        blocks = [(2.0, 2), (3.0, 1)]
        j = np.array([[2.0, 1.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]])
        a = t @ j @ np.linalg.inv(t)
        rep = build_flow(a)
        for z in (0.5, 1.3 - 0.7j, -2.0):
            assert rel_err(evaluate_flow(rep, z), jordan_oracle(blocks, t, z)) < 1e-9

    def test_invalid_block_sizes(self):
        from cflow import DimensionMismatch

        with pytest.raises(DimensionMismatch):
            jordan_oracle([(2.0, 2)], np.eye(3), 1.0)


class TestExtendMatrix:
    def _spectrum(self, values):
        return cluster_roots(values)

    def test_new_simple_root_appends_diagonal(self):
        a = np.array([[2.0]])
        out = extend_matrix(a, 3.0, self._spectrum([2.0]))
        assert np.allclose(out, np.diag([2.0, 3.0]))

    def test_repeated_root_grows_block(self):
        b2 = np.array([[5.0, 1.0], [0.0, 5.0]])
        out = extend_matrix(b2, 5.0, self._spectrum([5.0, 5.0]))
        expected = 5.0 * np.eye(3) + np.diag([1.0, 1.0], 1)
        assert np.allclose(out, expected)

    def test_repeated_root_requires_jordan_form(self):
        rng = np.random.default_rng(2)
        t = rng.standard_normal((2, 2))
        a = t @ np.array([[5.0, 1.0], [0.0, 5.0]]) @ np.linalg.inv(t)
        with pytest.raises(NotJordanForm):
            extend_matrix(a, 5.0, self._spectrum([5.0, 5.0]))

    def test_flow_restriction(self):
        # the flow of the extended matrix restricts to the original flow
        a = np.diag([2.0, 3.0])
        spectrum = self._spectrum([2.0, 3.0])
        big = extend_matrix(a, 1.5, spectrum)
        rep_small = build_flow(a)
        rep_big = build_flow(big)
        for z in (0.5, -1.0, 0.7 + 0.2j):
            f_big = evaluate_flow(rep_big, z)
            assert rel_err(f_big[:2, :2], evaluate_flow(rep_small, z)) < 1e-11


class TestCompanionActionCheck:
    def test_true_relation_small(self):
        a = np.diag([2.0, 3.0])
        q = AnnihilatorPolynomial((-6, 5))
        rng = np.random.default_rng(9)
        for _ in range(10):
            v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
            assert companion_action_check(a, q, v) < 1e-12

    def test_wrong_orientation_large(self):
        # flipping the relation coefficients breaks the intertwining identity
        a = np.diag([2.0, 3.0])
        q = AnnihilatorPolynomial((5, -6))
        assert companion_action_check(a, q, np.array([1.0, 1.0])) > 1e-3


class TestCheckFlowAxioms:
    def test_identity_matrix(self):
        a = np.eye(2)
        rep = build_flow(a)
        report = check_flow_axioms(rep, a, [(0.5, 0.25), (1.0 + 1.0j, -2.0)])
        assert report.max_residual < 1e-13

    def test_report_fields(self):
        a = np.diag([2.0, 3.0])
        rep = build_flow(a)
        report = check_flow_axioms(rep, a, [(0.3, 0.4)])
        assert report.identity_residual < 1e-12
        assert report.generator_residual < 1e-12
        assert report.group_residual < 1e-12
