"""
Unit tests for maps, Lindblad and Davies generators and reduced dynamics.

Run tests with: python manage.py test fidgap
"""

import math
import unittest

import numpy as np

from fidgap.algebra import AlgebraShape, ReferenceState, modular_flow
from fidgap.dynamics import (
    CpMap, DynamicsSpec, LindbladGenerator, RateFamily, assignment, bin_frequencies,
    check_rate_family, choi_matrix, davies_generator, depolarizing_generator,
    detailed_balance_check, evolve, evolve_factorized, is_completely_positive,
    kraus_from_superoperator, reduced_dynamics, semigroup_is_cp,
)
from fidgap.exceptions import (
    DegenerateBinning, NegativeTime, NotHermitian, RateFamilyError, UnsupportedAssignment,
)
from fidgap.fidelity import fidelity_direct
from fidgap.numkernel import dagger, projector, random_hermitian, random_matrix, unvec, vec
from fidgap.prep import QubitTarget, filtered_preparation, replacement_operation

from .factories import demo_model, random_davies, random_reference

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)


class TestLindbladGenerator(unittest.TestCase):
    """Test the dense generator and its propagator."""

    def setUp(self):
        self.rng = np.random.default_rng(31)
        self.ref = random_reference(AlgebraShape(2, 2), self.rng)

    def test_superoperator_matches_apply(self):
        generator = LindbladGenerator(random_hermitian(4, self.rng),
                                      [(random_matrix(4, self.rng), 0.7)])
        x = random_matrix(4, self.rng)
        np.testing.assert_allclose(unvec(generator.superoperator @ vec(x)),
                                   generator.apply(x), atol=1e-12)

    def test_identity_is_preserved(self):
        generator = LindbladGenerator(np.zeros((4, 4)), [(random_matrix(4, self.rng), 1.3)])
        self.assertLess(generator.unit_residual(), 1e-12)

    def test_non_hermitian_hamiltonian_rejected(self):
        with self.assertRaises(NotHermitian):
            LindbladGenerator(np.array([[0, 1], [0, 0]], dtype=complex))

    def test_negative_rate_rejected(self):
        with self.assertRaises(ValueError):
            LindbladGenerator(np.zeros((2, 2)), [(SIGMA_X, -1.0)])

    def test_propagator_is_completely_positive(self):
        """exp(tL) of a Lindblad generator should pass the Choi test."""
        generator = random_davies(self.ref, self.rng)
        passed, relative = semigroup_is_cp(generator, times=(0.1, 1.0, 5.0))
        self.assertTrue(passed, relative)


class TestChoiAndKraus(unittest.TestCase):
    """Test Choi matrices and Kraus extraction."""

    def setUp(self):
        self.rng = np.random.default_rng(32)

    def test_identity_channel_choi_is_rank_one(self):
        """The Choi matrix of the identity map is the unnormalized maximally entangled projector."""
        choi = choi_matrix(np.eye(9))
        self.assertEqual(np.linalg.matrix_rank(choi), 1)
        self.assertAlmostEqual(np.trace(choi).real, 3.0)

    def test_kraus_round_trip(self):
        """Kraus operators read off the Choi matrix should rebuild the map."""
        kraus = [random_matrix(3, self.rng) for _ in range(2)]
        cp_map = CpMap.from_kraus(kraus)
        recovered = CpMap.from_kraus(kraus_from_superoperator(cp_map.superoperator))
        x = random_matrix(3, self.rng)
        np.testing.assert_allclose(recovered.apply(x), cp_map.apply(x), atol=1e-10)

    def test_transpose_is_not_completely_positive(self):
        n = 2
        transpose = np.zeros((n * n, n * n))
        for i in range(n):
            for j in range(n):
                transpose[j * n + i, i * n + j] = 1.0
        passed, relative = is_completely_positive(transpose)
        self.assertFalse(passed)
        self.assertLess(relative, -0.5)


class TestDaviesGenerator(unittest.TestCase):
    """Test Davies generators and the detailed-balance check."""

    def test_rate_families_satisfy_kms_relation(self):
        for kind in ('fermi', 'metropolis'):
            family = RateFamily(kind, 2.0)
            for nu in (0.0, 0.3, 2.0, 40.0, 800.0):
                self.assertAlmostEqual(family(-nu), math.exp(-nu) * family(nu), places=12)

    def test_fermi_rates_sum_to_g(self):
        family = RateFamily('fermi', 1.5)
        self.assertAlmostEqual(family(0.7) + family(-0.7), 1.5, places=14)

    def test_symmetric_rates_rejected(self):
        """A constant rate violates gamma(-nu) = exp(-nu) gamma(nu)."""
        with self.assertRaises(RateFamilyError):
            check_rate_family(lambda nu: 1.0, [0.5])

    def test_degenerate_binning(self):
        """A chain of nearly equal frequencies wider than the tolerance cannot be binned."""
        with self.assertRaises(DegenerateBinning):
            bin_frequencies([0.0, 0.6e-9, 1.2e-9], 1e-9)
        groups = bin_frequencies([0.0, 1.0, 1.0 + 1e-12], 1e-9)
        self.assertEqual(groups, [[0], [1, 2]])

    def test_two_qubit_demo_satisfies_detailed_balance(self):
        """Commutation and self-adjointness residuals should be below 1e-9."""
        model = demo_model('davies-2q')
        generator = model.spec.generator
        report = detailed_balance_check(generator.dissipative_part(), model.ref,
                                        coherent=generator.coherent_part())
        self.assertLessEqual(report.commutation_residual, 1e-9)
        self.assertLessEqual(report.self_adjoint_residual, 1e-9)
        self.assertTrue(report.passed)

    def test_factorized_evolution_matches_direct(self):
        """tau_t(exp(t L_dis) x) should equal exp(t L) x."""
        model = demo_model('davies-2q')
        generator = model.spec.generator
        x = random_matrix(4, np.random.default_rng(33))
        for t in (0.1, 1.0, 10.0):
            direct = unvec(generator.propagator(t) @ vec(x))
            np.testing.assert_allclose(evolve_factorized(generator, t, x, model.ref),
                                       direct, atol=1e-9)

    def test_random_davies_leaves_omega_invariant(self):
        rng = np.random.default_rng(34)
        ref = random_reference(AlgebraShape(3, 2), rng)
        generator = random_davies(ref, rng)
        self.assertLess(generator.invariance_residual(ref), 1e-10)
        self.assertLess(generator.unit_residual(), 1e-10)
        report = detailed_balance_check(generator.dissipative_part(), ref,
                                        coherent=generator.coherent_part())
        self.assertTrue(report.passed, report.to_dict())

    def test_thermal_qubit_has_lowering_and_raising_jumps(self):
        """K = beta sigma_z / 2 with coupling sigma_x: sigma_- at gamma(beta), sigma_+ at gamma(-beta)."""
        beta = 1.3
        ref = ReferenceState.from_hamiltonian(AlgebraShape(2, 1), SIGMA_Z / 2, beta=beta)
        family = RateFamily('fermi', 1.0)
        generator = davies_generator(ref, [SIGMA_X], family)
        self.assertEqual(len(generator.jumps), 2)
        lowering = np.array([[0, 0], [1, 0]], dtype=complex)
        raising = np.array([[0, 1], [0, 0]], dtype=complex)
        by_rate = sorted(generator.jumps, key=lambda jump: jump[1])
        np.testing.assert_allclose(by_rate[0][0], raising, atol=1e-12)
        self.assertAlmostEqual(by_rate[0][1], family(-beta), places=14)
        np.testing.assert_allclose(by_rate[1][0], lowering, atol=1e-12)
        self.assertAlmostEqual(by_rate[1][1], family(beta), places=14)

    def test_commuting_coupling_gives_single_zero_frequency_jump(self):
        ref = ReferenceState.from_hamiltonian(AlgebraShape(2, 1), SIGMA_Z / 2, beta=1.3)
        generator = davies_generator(ref, [SIGMA_Z], RateFamily('fermi', 1.0))
        self.assertEqual(len(generator.jumps), 1)
        matrix, rate = generator.jumps[0]
        np.testing.assert_allclose(matrix, SIGMA_Z, atol=1e-12)
        self.assertAlmostEqual(rate, 0.5, places=14)

    def test_coherent_part_counted_as_dissipative_fails(self):
        """i[K, .] is GNS anti-self-adjoint, so folding it into L_dis breaks self-adjointness."""
        model = demo_model('davies-1q')
        generator = model.spec.generator
        folded = detailed_balance_check(generator, model.ref)
        self.assertFalse(folded.passed)
        self.assertFalse(folded.self_adjoint)
        self.assertGreater(folded.self_adjoint_residual, 1e-3)
        self.assertLessEqual(folded.commutation_residual, folded.threshold)
        self.assertTrue(detailed_balance_check(generator.dissipative_part(), model.ref).passed)

    def test_non_hermitian_coupling_rejected(self):
        ref = ReferenceState.from_hamiltonian(AlgebraShape(2, 1), SIGMA_Z)
        with self.assertRaises(NotHermitian):
            davies_generator(ref, [np.array([[0, 1], [0, 0]], dtype=complex)])


class TestDynamicsSpec(unittest.TestCase):
    """Test the unified interface over the three dynamics kinds."""

    def setUp(self):
        self.rng = np.random.default_rng(35)
        self.ref = random_reference(AlgebraShape(2, 2), self.rng)
        self.x = random_matrix(4, self.rng)

    def test_unitary_is_modular_flow(self):
        spec = DynamicsSpec.unitary(self.ref)
        np.testing.assert_allclose(evolve(spec, 0.8, self.x),
                                   modular_flow(self.x, 0.8, self.ref), atol=1e-13)
        np.testing.assert_allclose(unvec(spec.propagator(0.8) @ vec(self.x)),
                                   modular_flow(self.x, 0.8, self.ref), atol=1e-12)

    def test_map_iterates_floor_of_t(self):
        """A map applied at t = 2.7 should act twice."""
        generator = random_davies(self.ref, self.rng)
        cp_map = CpMap.from_kraus(kraus_from_superoperator(generator.propagator(0.5)), self.ref)
        self.assertTrue(cp_map.unital)
        self.assertTrue(cp_map.omega_invariant)
        spec = DynamicsSpec.from_map(cp_map, self.ref)
        self.assertEqual(spec.steps(2.7), 2)
        np.testing.assert_allclose(spec.evolve(2.7, self.x),
                                   cp_map.apply(cp_map.apply(self.x)), atol=1e-12)

    def test_semigroup_law_and_unitality(self):
        """Lambda_(t+s) = Lambda_t Lambda_s and Lambda_t(1) = 1 for every kind."""
        generator = random_davies(self.ref, self.rng)
        cp_map = CpMap.from_kraus(kraus_from_superoperator(generator.propagator(0.5)), self.ref)
        specs = [DynamicsSpec.unitary(self.ref),
                 DynamicsSpec.semigroup(generator, self.ref),
                 DynamicsSpec.from_map(cp_map, self.ref)]
        identity = np.eye(4, dtype=complex)
        for spec in specs:
            for t, s in [(1.0, 2.0), (0.0, 3.0), (2.0, 2.0)]:
                with self.subTest(kind=spec.kind, t=t, s=s):
                    np.testing.assert_allclose(spec.evolve(t + s, self.x),
                                               spec.evolve(t, spec.evolve(s, self.x)),
                                               atol=1e-10)
                    np.testing.assert_allclose(spec.evolve(t, identity), identity, atol=1e-10)

    def test_negative_time_rejected_for_dissipative_kinds(self):
        spec = DynamicsSpec.semigroup(depolarizing_generator(self.ref, 1.0), self.ref)
        with self.assertRaises(NegativeTime):
            spec.evolve(-0.1, self.x)
        # The reversible flow runs backwards as well.
        DynamicsSpec.unitary(self.ref).evolve(-0.1, self.x)

    def test_schroedinger_dual(self):
        """tr(Lambda*_t(rho) x) should equal tr(rho Lambda_t(x))."""
        spec = DynamicsSpec.semigroup(random_davies(self.ref, self.rng), self.ref)
        rho = self.ref.omega @ random_hermitian(4, self.rng)
        lhs = np.trace(spec.evolve_state(1.3, rho) @ self.x)
        rhs = np.trace(rho @ spec.evolve(1.3, self.x))
        self.assertAlmostEqual(lhs, rhs, places=11)

    def test_depolarizing_contracts_centred_q_observables(self):
        """Lambda_t(q (x) 1) = exp(-t) q (x) 1 for traceless q."""
        ref = ReferenceState.from_hamiltonian(AlgebraShape(2, 2), np.zeros((4, 4)))
        spec = DynamicsSpec.semigroup(depolarizing_generator(ref, 1.0, 2.0), ref)
        y = np.kron(SIGMA_Z, np.eye(2))
        np.testing.assert_allclose(spec.evolve(1.0, y), math.exp(-1.0) * y, atol=1e-12)


class TestReducedDynamics(unittest.TestCase):
    """Test the assignment map and the reduced qubit dynamics."""

    def test_heisenberg_schroedinger_duality(self):
        """<psi|Gamma*_t(|psi><psi|)|psi> should equal the fidelity for a product omega."""
        model = demo_model('davies-2q')
        psi = np.array([1, 0], dtype=complex)
        prep = replacement_operation(QubitTarget.pure(psi), model.ref)
        for t in (0.0, 0.4, 2.0, 7.0):
            reduced = reduced_dynamics(model.spec, prep, t, projector(psi), model.ref)
            overlap = np.vdot(psi, reduced @ psi).real
            self.assertAlmostEqual(overlap, fidelity_direct(prep, model.spec, psi, t),
                                   delta=1e-10)

    def test_reduced_state_is_normalized(self):
        model = demo_model('davies-1q')
        psi = np.array([0.6, 0.8], dtype=complex)
        prep = replacement_operation(QubitTarget.pure(psi), model.ref)
        reduced = reduced_dynamics(model.spec, prep, 1.5, projector(psi), model.ref)
        self.assertAlmostEqual(np.trace(reduced).real, 1.0, places=12)
        np.testing.assert_allclose(reduced, dagger(reduced), atol=1e-13)

    def test_filtered_preparation_has_no_assignment(self):
        model = demo_model('davies-1q')
        prep = filtered_preparation(np.eye(2), 0.5, model.ref)
        with self.assertRaises(UnsupportedAssignment):
            assignment(prep, np.eye(2) / 2, model.ref)


if __name__ == '__main__':
    unittest.main()
