"""Operator algebra, partial traces, thermal states and entropies."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from spinphonon import (
    DensityMatrix,
    HilbertLayout,
    QOperator,
    annihilation,
    basis_state,
    bose_occupation,
    creation,
    embed,
    mutual_information,
    number_op,
    partial_trace,
    pauli,
    thermal_state,
    von_neumann_entropy,
)
from spinphonon.constants import K_B
from spinphonon.core import mutual_information_array, partial_trace_array
from spinphonon.errors import (
    DimensionError,
    NumericalError,
    ValidationError,
)


class TestHilbertLayout:
    def test_total_dim_is_product(self):
        layout = HilbertLayout((2, 4, 4, 4))
        assert layout.total_dim == 128
        assert layout.n_subsystems == 4

    def test_rejects_empty(self):
        with pytest.raises(ValidationError):
            HilbertLayout(())

    def test_rejects_dimension_below_two(self):
        with pytest.raises(ValidationError):
            HilbertLayout((2, 1))


class TestQOperator:
    def test_shape_mismatch_rejected(self):
        with pytest.raises(DimensionError):
            QOperator(HilbertLayout((2, 2)), np.eye(3))

    def test_dag_and_matmul(self):
        a = annihilation(3)
        n = a.dag() @ a
        npt.assert_allclose(n.data, np.diag([0.0, 1.0, 2.0]), atol=1e-15)

    def test_scalar_multiplication(self):
        op = 2.0 * pauli("z")
        npt.assert_allclose(op.data, np.diag([2.0, -2.0]), atol=1e-15)


class TestDensityMatrix:
    def test_rejects_bad_trace(self):
        with pytest.raises(NumericalError):
            DensityMatrix(HilbertLayout((2,)), np.diag([0.7, 0.7]))

    def test_rejects_non_hermitian(self):
        m = np.array([[0.5, 0.1], [0.0, 0.5]], dtype=complex)
        with pytest.raises(NumericalError):
            DensityMatrix(HilbertLayout((2,)), m)

    def test_rejects_negative_eigenvalue(self):
        with pytest.raises(NumericalError):
            DensityMatrix(HilbertLayout((2,)), np.diag([1.2, -0.2]))


class TestOperators:
    def test_pauli_algebra(self):
        sx, sy, sz = pauli("x").data, pauli("y").data, pauli("z").data
        npt.assert_allclose(sx @ sy - sy @ sx, 2j * sz, atol=1e-15)
        npt.assert_allclose(sx @ sx, np.eye(2), atol=1e-15)

    def test_pauli_unknown_axis(self):
        with pytest.raises(ValidationError):
            pauli("w")

    def test_ladder_commutator_truncated(self):
        n_f = 5
        a = annihilation(n_f).data
        ad = creation(n_f).data
        comm = a @ ad - ad @ a
        # [a, a^dag] = 1 except in the top truncated level
        npt.assert_allclose(np.diag(comm)[:-1], np.ones(n_f - 1), atol=1e-15)
        assert np.diag(comm)[-1] == pytest.approx(-(n_f - 1))

    def test_number_op_counts(self):
        npt.assert_allclose(number_op(4).data, np.diag([0, 1, 2, 3]), atol=1e-15)

    def test_embed_acts_on_one_site(self):
        layout = HilbertLayout((2, 3))
        op = embed(number_op(3), layout, 1)
        expected = np.kron(np.eye(2), np.diag([0.0, 1.0, 2.0]))
        npt.assert_allclose(op.data, expected, atol=1e-15)

    def test_embed_wrong_dimension(self):
        with pytest.raises(DimensionError):
            embed(number_op(3), HilbertLayout((2, 4)), 1)


class TestBasisState:
    def test_index_encoding(self):
        layout = HilbertLayout((2, 3))
        rho = basis_state(layout, [1, 2])
        # index = 1*3 + 2 = 5
        assert rho.data[5, 5] == 1.0
        assert np.sum(np.abs(rho.data)) == pytest.approx(1.0)

    def test_level_out_of_range(self):
        with pytest.raises(ValidationError):
            basis_state(HilbertLayout((2, 3)), [0, 3])

    def test_wrong_number_of_levels(self):
        with pytest.raises(ValidationError):
            basis_state(HilbertLayout((2, 3)), [0])


class TestPartialTrace:
    def test_product_state_factors(self):
        layout = HilbertLayout((2, 3, 4))
        rho = basis_state(layout, [1, 2, 0])
        for site, lvl in [(0, 1), (1, 2), (2, 0)]:
            sub = partial_trace(rho, [site])
            expected = np.zeros(layout.dims[site])
            expected[lvl] = 1.0
            npt.assert_allclose(np.diag(sub.data).real, expected, atol=1e-14)

    def test_bell_state_marginal_is_maximally_mixed(self):
        psi = np.zeros(4)
        psi[0] = psi[3] = 1.0 / math.sqrt(2)
        rho = np.outer(psi, psi)
        sub = partial_trace_array(rho, (2, 2), [0])
        npt.assert_allclose(sub, 0.5 * np.eye(2), atol=1e-14)

    def test_trace_preserved(self):
        rng = np.random.default_rng(3)
        m = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
        rho = m @ m.conj().T
        rho /= np.trace(rho)
        sub = partial_trace_array(rho, (3, 4), [1])
        assert np.trace(sub).real == pytest.approx(1.0, abs=1e-12)

    def test_empty_keep_rejected(self):
        with pytest.raises(ValidationError):
            partial_trace_array(np.eye(4) / 4, (2, 2), [])


class TestBoseOccupation:
    def test_against_direct_formula(self):
        omega, T = 185.0, 65.0
        expected = 1.0 / (math.exp(omega / (K_B * T)) - 1.0)
        assert bose_occupation(omega, T) == pytest.approx(expected, rel=1e-14)

    def test_zero_temperature(self):
        assert bose_occupation(100.0, 0.0) == 0.0

    def test_invalid_inputs(self):
        with pytest.raises(ValidationError):
            bose_occupation(-5.0, 10.0)
        with pytest.raises(ValidationError):
            bose_occupation(5.0, -1.0)


class TestThermalState:
    def test_boltzmann_ratios(self):
        omega, T, n_f = 120.0, 80.0, 5
        rho = thermal_state(omega, T, n_f)
        p = np.diag(rho.data).real
        r = math.exp(-omega / (K_B * T))
        for m in range(n_f - 1):
            assert p[m + 1] / p[m] == pytest.approx(r, rel=1e-12)
        assert p.sum() == pytest.approx(1.0, abs=1e-14)

    def test_zero_temperature_is_ground(self):
        rho = thermal_state(100.0, 0.0, 4)
        npt.assert_allclose(np.diag(rho.data).real, [1, 0, 0, 0], atol=1e-15)


class TestEntropy:
    def test_pure_state_zero(self):
        rho = basis_state(HilbertLayout((4,)), [2])
        assert von_neumann_entropy(rho) == pytest.approx(0.0, abs=1e-14)

    def test_maximally_mixed(self):
        d = 4
        rho = np.eye(d) / d
        assert von_neumann_entropy(rho) == pytest.approx(math.log(d), rel=1e-12)

    def test_known_binary_entropy(self):
        p = 0.3
        rho = np.diag([p, 1 - p])
        expected = -p * math.log(p) - (1 - p) * math.log(1 - p)
        assert von_neumann_entropy(rho) == pytest.approx(expected, rel=1e-12)

    def test_clamps_small_negativity(self):
        rho = np.diag([1.0 + 5e-10, -5e-10])
        assert von_neumann_entropy(rho) == pytest.approx(0.0, abs=1e-8)

    def test_raises_on_large_negativity(self):
        with pytest.raises(NumericalError):
            von_neumann_entropy(np.diag([1.1, -0.1]))


class TestMutualInformation:
    def test_product_state_zero(self):
        layout = HilbertLayout((2, 3))
        rho = basis_state(layout, [0, 1])
        assert mutual_information(rho, ([0], [1])) == pytest.approx(0.0, abs=1e-12)

    def test_bell_state_two_ln_two(self):
        psi = np.zeros(4)
        psi[0] = psi[3] = 1.0 / math.sqrt(2)
        rho = DensityMatrix(HilbertLayout((2, 2)), np.outer(psi, psi))
        assert mutual_information(rho, ([0], [1])) == pytest.approx(
            2 * math.log(2), rel=1e-12
        )

    def test_classical_correlation_ln_two(self):
        # equal mixture of |00> and |11>: purely classical correlation
        rho = np.diag([0.5, 0.0, 0.0, 0.5]).astype(complex)
        mi = mutual_information_array(rho, (2, 2), ([0], [1]))
        assert mi == pytest.approx(math.log(2), rel=1e-12)

    def test_split_must_partition(self):
        layout = HilbertLayout((2, 2, 2))
        rho = basis_state(layout, [0, 0, 0])
        with pytest.raises(ValidationError):
            mutual_information(rho, ([0], [1]))
