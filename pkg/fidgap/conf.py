"""
Numerical tolerances.

Library functions take plain float tolerances with the defaults below. The
check layer and the management commands read the `FIDGAP` block of the Django
settings through get_tolerances(), which also applies --tol-scale.
"""

from dataclasses import dataclass, fields, replace

HERMITIAN_TOL = 1e-10
# Relative eigenvalue floor of numkernel's positive-definite matrix functions.
POSITIVITY_TOL = 1e-12
FAITHFUL_TOL = 1e-10
IMAGINARY_TOL = 1e-10
KERNEL_TOL = 1e-10
BINNING_TOL = 1e-9
DETAILED_BALANCE_TOL = 1e-9

# Lower bounds rather than residual thresholds.
FLOOR_FIELDS = frozenset({'faithful'})


@dataclass(frozen=True)
class Tolerances:
    hermitian: float = HERMITIAN_TOL
    faithful: float = FAITHFUL_TOL
    unit_vector: float = 1e-10
    kraus: float = 1e-10
    normalization: float = 1e-12
    restriction: float = 1e-10
    identity: float = 1e-10
    centering: float = 1e-10
    ordering: float = 1e-9
    detailed_balance: float = DETAILED_BALANCE_TOL
    kernel: float = KERNEL_TOL
    choi: float = 1e-9
    kms: float = 1e-10
    invariance: float = 1e-10
    imaginary: float = IMAGINARY_TOL

    def scaled(self, factor: float) -> 'Tolerances':
        """Return a copy with every tolerance except the floors multiplied by factor."""
        if factor <= 0:
            raise ValueError('tolerance scale must be positive')
        return replace(self, **{f.name: getattr(self, f.name) * factor
                                for f in fields(self) if f.name not in FLOOR_FIELDS})


def get_tolerances(scale: float = 1.0) -> Tolerances:
    """
    Build the active tolerances from settings.FIDGAP['TOLERANCES'] and scale.
    Unknown keys in the settings block are ignored.
    """
    from django.conf import settings

    overrides = getattr(settings, 'FIDGAP', {}).get('TOLERANCES', {})
    known = {f.name for f in fields(Tolerances)}
    tolerances = Tolerances(**{k: float(v) for k, v in overrides.items()
                               if k in known})
    return tolerances.scaled(scale)


def get_setting(name: str, default=None):
    from django.conf import settings

    return getattr(settings, 'FIDGAP', {}).get(name, default)
