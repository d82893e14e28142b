"""
Seeded builders for the test suite: random reference states, preparations
and omega-invariant dynamics of every kind.
"""

import numpy as np

from fidgap.algebra import AlgebraShape, ReferenceState
from fidgap.config import parse_model_config
from fidgap.demos import DEMOS
from fidgap.dynamics import (
    CpMap, DynamicsSpec, RateFamily, davies_generator, kraus_from_superoperator,
)
from fidgap.model import Model, build_model
from fidgap.numkernel import (
    operator_norm, random_hermitian, random_matrix, random_unit_vector, random_unitary,
)
from fidgap.prep import (
    QubitTarget, custom_preparation, filtered_preparation, replacement_operation,
    single_perturbation,
)

SHAPES = [(2, 1), (2, 2), (2, 4), (3, 1), (3, 2), (3, 4)]
PREPARATION_KINDS = ('single', 'replacement', 'filtered', 'custom')
DYNAMICS_KINDS = ('unitary', 'semigroup', 'map')

MAP_STEP = 0.7


def random_reference(shape: AlgebraShape, rng: np.random.Generator,
                     scale: float = 1.0) -> ReferenceState:
    return ReferenceState.from_hamiltonian(shape, random_hermitian(shape.n, rng, scale))


def random_preparation(kind: str, ref: ReferenceState, rng: np.random.Generator):
    dQ, n = ref.shape.dQ, ref.n
    if kind == 'single':
        return single_perturbation(QubitTarget.pure(random_unit_vector(dQ, rng)), ref)
    if kind == 'replacement':
        return replacement_operation(QubitTarget.pure(random_unit_vector(dQ, rng)), ref)
    if kind == 'filtered':
        a = random_matrix(n, rng)
        p = 0.9 / operator_norm(a.conj().T @ a)
        return filtered_preparation(a, p, ref)
    # Isometry blocks: sum_j k_j^dagger k_j = 1.
    u = random_unitary(2 * n, rng)
    return custom_preparation([u[:n, :n], u[n:, :n]], ref)


def random_davies(ref: ReferenceState, rng: np.random.Generator, couplings: int = 2,
                  g: float = 1.0):
    return davies_generator(ref, [random_hermitian(ref.n, rng) for _ in range(couplings)],
                            RateFamily('fermi', g))


def random_dynamics(kind: str, ref: ReferenceState, rng: np.random.Generator) -> DynamicsSpec:
    if kind == 'unitary':
        return DynamicsSpec.unitary(ref)
    generator = random_davies(ref, rng)
    if kind == 'semigroup':
        return DynamicsSpec.semigroup(generator, ref)
    kraus = kraus_from_superoperator(generator.propagator(MAP_STEP))
    return DynamicsSpec.from_map(CpMap.from_kraus(kraus, ref), ref)


def random_model(seed: int, shape=None, prep_kind=None, dynamics_kind=None) -> Model:
    """One model of the random suite; unspecified parts are drawn from the seed."""
    rng = np.random.default_rng(seed)
    dQ, dB = shape or SHAPES[seed % len(SHAPES)]
    prep_kind = prep_kind or PREPARATION_KINDS[seed % len(PREPARATION_KINDS)]
    dynamics_kind = dynamics_kind or DYNAMICS_KINDS[(seed // 2) % len(DYNAMICS_KINDS)]
    ref = random_reference(AlgebraShape(dQ, dB), rng)
    prep = random_preparation(prep_kind, ref, rng)
    spec = random_dynamics(dynamics_kind, ref, rng)
    psi = random_unit_vector(dQ, rng)
    return Model(ref=ref, prep=prep, spec=spec, psi=psi)


def demo_model(name: str, **kwargs) -> Model:
    return build_model(parse_model_config(DEMOS[name](**kwargs)))


def sample_times(spec: DynamicsSpec, count: int = 20):
    if spec.kind == 'map':
        return [float(k) for k in range(count)]
    return [float(t) for t in np.linspace(0.0, 6.0, count)]
