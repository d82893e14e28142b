"""
Unit tests for GNS matrices, block structure, contraction and spectral gaps.

Run tests with: python manage.py test fidgap
"""

import math
import unittest

import numpy as np

from fidgap.algebra import AlgebraShape, ReferenceState
from fidgap.dynamics import (
    CpMap, DynamicsSpec, LindbladGenerator, RateFamily, davies_generator,
    depolarizing_generator, kraus_from_superoperator,
)
from fidgap.exceptions import DimensionMismatch, NotDetailedBalance
from fidgap.numkernel import (
    dagger, kron, random_hermitian, random_matrix, random_unitary,
)
from fidgap.spectral import (
    block_decompose, complement_basis, contraction_check, decay_rate_oracle,
    dynamics_report, map_contraction_report, spectral_gap, to_gns_matrix,
)

from .factories import demo_model, random_davies, random_reference

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


class TestGnsMatrix(unittest.TestCase):
    """Test the GNS representation of maps and generators."""

    def setUp(self):
        self.rng = np.random.default_rng(41)
        self.ref = random_reference(AlgebraShape(2, 2), self.rng)

    def test_action_agrees_with_direct_application(self):
        spec = DynamicsSpec.semigroup(random_davies(self.ref, self.rng), self.ref)
        op = to_gns_matrix(spec, self.ref, t=0.9)
        gns = self.ref.gns
        for _ in range(20):
            x = random_matrix(4, self.rng)
            np.testing.assert_allclose(op.matrix @ gns.embed(x),
                                       gns.embed(spec.evolve(0.9, x)), atol=1e-10)

    def test_identity_map(self):
        op = to_gns_matrix(np.eye(16), self.ref)
        np.testing.assert_allclose(op.matrix, np.eye(16), atol=1e-12)
        blocks = block_decompose(op)
        self.assertLess(blocks.phi_residual, 1e-12)
        np.testing.assert_allclose(blocks.tilde_block, np.eye(15), atol=1e-12)
        self.assertAlmostEqual(contraction_check(blocks.tilde_block), 0.0, places=12)

    def test_modular_flow_is_unitary(self):
        op = to_gns_matrix(DynamicsSpec.unitary(self.ref), self.ref, t=0.7)
        np.testing.assert_allclose(dagger(op.matrix) @ op.matrix, np.eye(16), atol=1e-10)
        self.assertAlmostEqual(contraction_check(block_decompose(op).tilde_block), 0.0,
                               delta=1e-10)

    def test_depolarizing_spectrum(self):
        """K = 0, dQ = 2, dB = 1: eigenvalues 1 and exp(-gamma t) three times."""
        ref = ReferenceState.from_hamiltonian(AlgebraShape(2, 1), np.zeros((2, 2)))
        generator = depolarizing_generator(ref, 1.5)
        op = to_gns_matrix(generator, ref, t=0.4)
        eigenvalues = np.sort(np.linalg.eigvals(op.matrix).real)
        np.testing.assert_allclose(eigenvalues, [math.exp(-0.6)] * 3 + [1.0], atol=1e-12)
        margin = contraction_check(block_decompose(op).tilde_block)
        self.assertAlmostEqual(margin, 1 - math.exp(-0.6), places=12)

    def test_wrong_dimension(self):
        with self.assertRaises(DimensionMismatch):
            to_gns_matrix(np.eye(9), self.ref)


class TestBlockStructure(unittest.TestCase):
    """Test the C1 (+) 1-perp decomposition."""

    def setUp(self):
        self.rng = np.random.default_rng(42)
        self.ref = random_reference(AlgebraShape(2, 2), self.rng)

    def test_complement_basis_is_orthonormal(self):
        basis = complement_basis(self.ref.gns.unit)
        self.assertEqual(basis.shape, (16, 15))
        np.testing.assert_allclose(dagger(basis) @ basis, np.eye(15), atol=1e-12)
        np.testing.assert_allclose(self.ref.gns.unit.conj() @ basis, 0, atol=1e-12)

    def test_invariant_map_reassembles(self):
        """[[1, 0], [0, M~]] should reproduce M for an omega-invariant unital map."""
        op = to_gns_matrix(random_davies(self.ref, self.rng), self.ref, t=0.5)
        blocks = block_decompose(op)
        self.assertLess(blocks.phi_residual, 1e-10)
        self.assertLess(blocks.column_residual, 1e-10)
        unital, invariant = op.unit_residuals()
        self.assertLess(max(unital, invariant), 1e-10)
        self.assertAlmostEqual(blocks.corner.real, 1.0, places=10)
        np.testing.assert_allclose(blocks.reassemble(op.unit), op.matrix, atol=1e-10)
        self.assertGreaterEqual(contraction_check(blocks.tilde_block), -1e-10)

    def test_non_invariant_map_reports_phi(self):
        """A unital map that moves omega should give a visible phi residual, no exception."""
        ref = ReferenceState.from_hamiltonian(AlgebraShape(2, 1), SIGMA_Z)
        cp_map = CpMap.from_kraus([SIGMA_X], ref)
        self.assertTrue(cp_map.unital)
        self.assertFalse(cp_map.omega_invariant)
        blocks = block_decompose(to_gns_matrix(cp_map, ref))
        self.assertGreater(blocks.phi_residual, 1e-3)
        report = map_contraction_report(cp_map, ref)
        self.assertGreater(report.phi_residual, 1e-3)
        self.assertTrue(report.warnings)


class TestSpectralGap(unittest.TestCase):
    """Test lambda, gamma and their certificates."""

    def test_depolarizing_demo_gap(self):
        model = demo_model('depolarizing')
        report = spectral_gap(model.spec.generator, model.ref, 'detailed_balance')
        self.assertAlmostEqual(report.gap_lambda, 1.0, delta=1e-10)
        self.assertAlmostEqual(report.gap_gamma, 1.0, delta=1e-10)
        self.assertEqual(report.kernel_dim_on_complement, 0)
        self.assertEqual(report.decay_rate(), (report.gap_lambda, 'lambda'))

    def test_single_qubit_davies_gap_is_half_g(self):
        for g in (0.5, 1.0, 2.0):
            model = demo_model('davies-1q', g=g)
            report = spectral_gap(model.spec.generator, model.ref)
            self.assertAlmostEqual(report.gap_lambda, g / 2, delta=1e-10)

    def test_decay_fit_matches_eigensolve(self):
        """The power-stepping oracle should agree with lambda to 1e-6 relative."""
        for name in ('davies-1q', 'davies-2q'):
            model = demo_model(name)
            report = spectral_gap(model.spec.generator, model.ref)
            fit = decay_rate_oracle(model.spec.generator, model.ref, seed=3)
            self.assertLess(abs(fit - report.gap_lambda) / report.gap_lambda, 1e-6, name)

    def test_gap_certificate_on_random_samples(self):
        """||exp(t L_dis) eta|| <= exp(-lambda t) ||eta|| for centred eta."""
        model = demo_model('davies-2q')
        ref = model.ref
        report = spectral_gap(model.spec.generator, ref)
        lam = report.gap_lambda
        gns = ref.gns
        basis = complement_basis(gns.unit)
        dissipative = model.spec.generator.dissipative_part()
        rng = np.random.default_rng(43)
        for t in (0.1 / lam, 1.0 / lam, 10.0 / lam):
            propagator = gns.represent(dissipative.propagator(t))
            for _ in range(100):
                eta = basis @ (rng.standard_normal(15) + 1j * rng.standard_normal(15))
                lhs = np.linalg.norm(propagator @ eta)
                self.assertLessEqual(lhs, math.exp(-lam * t) * np.linalg.norm(eta) + 1e-9)

    def test_unitary_flow_has_no_gap(self):
        model = demo_model('unitary-chain')
        report = dynamics_report(model.spec)
        self.assertAlmostEqual(report.gap_gamma, 0.0, delta=1e-10)
        self.assertFalse(report.valid)
        self.assertEqual(report.decay_rate(), (0.0, 'contraction'))

    def test_gap_is_basis_independent(self):
        """Rotating the B factor should leave lambda unchanged."""
        rng = np.random.default_rng(44)
        shape = AlgebraShape(2, 2)
        k = random_hermitian(4, rng)
        couplings = [random_hermitian(4, rng) for _ in range(2)]
        w = kron(np.eye(2), random_unitary(2, rng))
        gaps = []
        for rotate in (False, True):
            conj = (lambda m: w @ m @ dagger(w)) if rotate else (lambda m: m)
            ref = ReferenceState.from_hamiltonian(shape, conj(k))
            generator = davies_generator(ref, [conj(s) for s in couplings], RateFamily())
            gaps.append(spectral_gap(generator, ref).gap_lambda)
        self.assertAlmostEqual(gaps[0], gaps[1], delta=1e-9)

    def test_non_detailed_balance_generator(self):
        """A sigma_x jump on a thermal qubit fails detailed balance; the report falls back."""
        ref = ReferenceState.from_hamiltonian(AlgebraShape(2, 1), SIGMA_Z)
        generator = LindbladGenerator(np.zeros((2, 2)), [(SIGMA_X, 1.0)])
        with self.assertRaises(NotDetailedBalance):
            spectral_gap(generator, ref, 'detailed_balance')
        report = dynamics_report(DynamicsSpec.semigroup(generator, ref))
        self.assertEqual(report.mode, 'symmetrized')
        self.assertIsNone(report.gap_lambda)
        self.assertIn('detailed balance', report.warnings[0])

    def test_report_uses_given_thresholds(self):
        """A loose detailed-balance tolerance keeps the lambda path; a high kernel one empties it."""
        ref = ReferenceState.from_hamiltonian(AlgebraShape(2, 1), SIGMA_Z)
        spec = DynamicsSpec.semigroup(LindbladGenerator(np.zeros((2, 2)), [(SIGMA_X, 1.0)]), ref)
        loose = dynamics_report(spec, db_tol=1e6)
        self.assertEqual(loose.mode, 'detailed_balance')
        self.assertIsNotNone(loose.gap_lambda)
        depolarizing = demo_model('depolarizing').spec
        self.assertEqual(dynamics_report(depolarizing).kernel_dim_on_complement, 0)
        self.assertEqual(dynamics_report(depolarizing, kernel_tol=1.5).kernel_dim_on_complement, 3)

    def test_non_primitive_generator_warns(self):
        """Dissipation on B only leaves Q observables undamped: lambda = 0 with a warning."""
        ref = ReferenceState.from_hamiltonian(AlgebraShape(2, 2), np.zeros((4, 4)))
        generator = depolarizing_generator(ref, 0.0, 1.0)
        report = spectral_gap(generator, ref)
        self.assertAlmostEqual(report.gap_lambda, 0.0, delta=1e-12)
        self.assertEqual(report.kernel_dim_on_complement, 3)
        self.assertTrue(any('not primitive' in w for w in report.warnings))

    def test_map_report_uses_step_rate(self):
        model = demo_model('davies-1q')
        propagator = model.spec.generator.propagator(1.0)
        cp_map = CpMap.from_kraus(kraus_from_superoperator(propagator), model.ref)
        report = map_contraction_report(cp_map, model.ref)
        self.assertEqual(report.decay_rate()[1], 'gamma_step')
        self.assertAlmostEqual(report.gap_gamma, 0.5, delta=1e-8)


if __name__ == '__main__':
    unittest.main()
