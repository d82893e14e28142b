"""
Randomized acceptance suite: seeded models over every shape, preparation
kind and dynamics kind.

Run tests with: python manage.py test fidgap
"""

import unittest

from fidgap.algebra import gns_norm
from fidgap.fidelity import run_curve
from fidgap.prep import build_x, build_y
from fidgap.spectral import block_decompose, contraction_check, to_gns_matrix

from .factories import random_model, sample_times

SEEDS = range(50)


class TestRandomModels(unittest.TestCase):
    """Identity, centring, contraction and bound ordering on 50 seeded models."""

    @classmethod
    def setUpClass(cls):
        cls.models = [random_model(seed) for seed in SEEDS]

    def test_correlation_identity(self):
        for seed, model in zip(SEEDS, self.models):
            with self.subTest(seed=seed, prep=model.prep.kind, dynamics=model.spec.kind):
                curve = run_curve(model, sample_times(model.spec))
                self.assertLessEqual(curve.identity_residual(), 1e-10)
                self.assertLessEqual(curve.ordering_violation(), 1e-9)

    def test_centred_observables(self):
        for seed, model in zip(SEEDS, self.models):
            with self.subTest(seed=seed):
                ref = model.ref
                self.assertLess(abs(ref.expect(build_x(model.prep, ref))), 1e-10)
                self.assertLess(abs(ref.expect(build_y(model.psi, ref))), 1e-10)

    def test_invariant_maps_contract(self):
        """omega-invariant unital maps are block diagonal and contract on the complement."""
        for seed, model in zip(SEEDS, self.models):
            if model.spec.kind != 'map':
                continue
            with self.subTest(seed=seed):
                blocks = block_decompose(to_gns_matrix(model.spec.cp_map, model.ref))
                self.assertLess(blocks.phi_residual, 1e-10)
                self.assertGreaterEqual(contraction_check(blocks.tilde_block), -1e-10)

    def test_schwarz_never_exceeds_initial_product(self):
        """||Lambda_t(y)|| <= ||y|| for invariant Schwarz maps."""
        for seed, model in zip(SEEDS, self.models):
            with self.subTest(seed=seed):
                y = build_y(model.psi, model.ref)
                norm_y = gns_norm(y, model.ref)
                for t in sample_times(model.spec, 5):
                    evolved = model.spec.evolve(t, y)
                    self.assertLessEqual(gns_norm(evolved, model.ref), norm_y + 1e-10)


if __name__ == '__main__':
    unittest.main()
