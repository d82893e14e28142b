"""
Fidelity curves and their bounds.

For an encoded pure state psi, preparation {a_j} and Heisenberg dynamics
Lambda_t the fidelity is

    F(t) = sum_j omega(a_j^dagger Lambda_t(P_psi) a_j)

and, for omega-invariant dynamics, it equals the correlation form

    F(t) = <x, Lambda_t(y)>_omega + omega(P_psi).

Schwarz bounds the first term by ||x|| ||Lambda_t(y)||, and a certified
decay rate r of centred observables bounds that again by exp(-r t) ||x|| ||y||.
"""

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Optional, Sequence

import numpy as np

from .algebra import ReferenceState, gns_inner, gns_norm, tracial_on_Q
from .conf import IMAGINARY_TOL
from .dynamics import DynamicsSpec
from .exceptions import ImaginaryResidue, InvalidGap, ModularNotTrivialOnQ
from .prep import (
    Preparation, build_x, build_y, is_perfect_pure_preparation, perturbed_state, psi_projector,
)

if TYPE_CHECKING:
    from .model import Model

logger = logging.getLogger(__name__)

CSV_COLUMNS = ('t', 'f_direct', 'f_correlation', 'bound_schwarz', 'bound_gap',
               'bound_tracial', 'floor')

HALF_LIFE_TOL = 1e-6


def real_part(value: complex, what: str, tol: float = IMAGINARY_TOL) -> float:
    """Drop the imaginary part of a numerically real quantity, loudly if it is not."""
    value = complex(value)
    if abs(value.imag) > tol * max(abs(value.real), 1.0):
        raise ImaginaryResidue(f'{what} has imaginary part {value.imag:.3e}')
    return value.real


def floor_value(psi, ref: ReferenceState) -> float:
    """omega(P_psi), the value every fidelity decays towards."""
    return real_part(ref.expect(psi_projector(psi, ref)), 'omega(P_psi)')


def fidelity_direct(prep: Preparation, spec: DynamicsSpec, psi, t: float) -> float:
    """sum_j omega(a_j^dagger Lambda_t(P_psi) a_j) = tr(omega' Lambda_t(P_psi))."""
    ref = spec.reference
    evolved = spec.evolve(t, psi_projector(psi, ref))
    value = np.einsum('ij,ji->', perturbed_state(prep, ref), evolved)
    return real_part(value, f'fidelity at t={t}', 1e-12)


def fidelity_correlation(prep: Preparation, spec: DynamicsSpec, psi, t: float) -> float:
    """<x, Lambda_t(y)>_omega + omega(P_psi)."""
    ref = spec.reference
    x = build_x(prep, ref)
    y = build_y(psi, ref)
    value = gns_inner(x, spec.evolve(t, y), ref)
    return real_part(value, f'correlation at t={t}') + floor_value(psi, ref)


def schwarz_bound(prep: Preparation, spec: DynamicsSpec, psi, t: float) -> float:
    """||x||_omega ||Lambda_t(y)||_omega + omega(P_psi)."""
    ref = spec.reference
    x = build_x(prep, ref)
    y = build_y(psi, ref)
    return gns_norm(x, ref) * gns_norm(spec.evolve(t, y), ref) + floor_value(psi, ref)


def gap_bound_curve(norm_x: float, norm_y: float, gamma: float, floor: float,
                    times: Sequence[float], valid: bool = True) -> List[float]:
    """exp(-gamma t) ||x|| ||y|| + floor at every t."""
    if not valid:
        raise InvalidGap('the spectral report does not certify a decay rate')
    if gamma < 0 or math.isnan(gamma):
        raise InvalidGap(f'decay rate must be non-negative, got {gamma}')
    amplitude = norm_x * norm_y
    return [amplitude * math.exp(-gamma * t) + floor for t in times]


def tracial_example_bound(d: int, lam: float, times: Sequence[float],
                          ref: Optional[ReferenceState] = None) -> List[float]:
    """
    1/d + exp(-lam t)(1 - 1/d), the gap bound for a perfect pure preparation
    when the reference state is tracial on Q. With `ref` given, checks that the
    modular flow acts trivially on Q first.
    """
    if d < 2:
        raise ValueError(f'd must be at least 2, got {d}')
    if lam < 0:
        raise InvalidGap(f'lambda must be non-negative, got {lam}')
    if ref is not None and not tracial_on_Q(ref):
        raise ModularNotTrivialOnQ('K does not commute with Q (x) 1')
    return [1.0 / d + math.exp(-lam * t) * (1.0 - 1.0 / d) for t in times]


@dataclass
class FidelityCurve:
    times: List[float]
    f_direct: List[float]
    f_correlation: List[float]
    bound_schwarz: List[float]
    bound_gap: List[float]
    floor: float
    norm_x: float
    norm_y: float
    bound_tracial: Optional[List[float]] = None
    metadata: dict = field(default_factory=dict)

    def identity_residual(self) -> float:
        """Largest |f_direct - f_correlation| over the grid."""
        return max((abs(a - b) for a, b in zip(self.f_direct, self.f_correlation)),
                   default=0.0)

    def ordering_violation(self) -> float:
        """
        Largest positive excess in f_direct <= bound_schwarz <= bound_gap;
        0 when the chain holds everywhere.
        """
        worst = 0.0
        for f, s, g in zip(self.f_direct, self.bound_schwarz, self.bound_gap):
            worst = max(worst, f - s, s - g)
        return worst

    def rows(self) -> List[list]:
        bound_tracial = self.bound_tracial or [None] * len(self.times)
        return [list(row) + [self.floor] for row in zip(
            self.times, self.f_direct, self.f_correlation, self.bound_schwarz,
            self.bound_gap, bound_tracial)]

    def write_csv(self, stream) -> None:
        """Shortest round-trip repr for every float, an empty cell for None."""
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for row in self.rows():
            writer.writerow(['' if v is None else repr(float(v)) for v in row])

    def to_dict(self) -> dict:
        return {
            'times': list(self.times),
            'f_direct': list(self.f_direct),
            'f_correlation': list(self.f_correlation),
            'bound_schwarz': list(self.bound_schwarz),
            'bound_gap': list(self.bound_gap),
            'bound_tracial': None if self.bound_tracial is None else list(self.bound_tracial),
            'floor': self.floor,
            'norm_x': self.norm_x,
            'norm_y': self.norm_y,
            'metadata': dict(self.metadata),
        }


def run_curve(model: 'Model', times: Sequence[float], psi=None) -> FidelityCurve:
    """
    Evaluate f_direct, f_correlation and the three bounds on one grid.

    The gap bound uses the rate chosen by SpectralReport.decay_rate() and the
    effective time of the dynamics (a step count for maps). The tracial closed
    form is added when it applies: modular flow trivial on Q, a perfect
    pure-state preparation and a detailed-balance lambda.
    """
    ref, prep, spec = model.ref, model.prep, model.spec
    psi = model.psi if psi is None else psi
    times = [float(t) for t in times]
    x = build_x(prep, ref)
    y = build_y(psi, ref)
    projector = psi_projector(psi, ref)
    rho = perturbed_state(prep, ref)
    floor = floor_value(psi, ref)
    norm_x, norm_y = gns_norm(x, ref), gns_norm(y, ref)

    f_direct, f_correlation, bound_schwarz = [], [], []
    for t in times:
        evolved_p = spec.evolve(t, projector)
        evolved_y = spec.evolve(t, y)
        f_direct.append(real_part(np.einsum('ij,ji->', rho, evolved_p),
                                  f'fidelity at t={t}', 1e-12))
        f_correlation.append(real_part(gns_inner(x, evolved_y, ref),
                                       f'correlation at t={t}',
                                       model.tolerances.imaginary) + floor)
        bound_schwarz.append(norm_x * gns_norm(evolved_y, ref) + floor)

    report = model.spectral_report()
    rate, source = report.decay_rate()
    effective = [spec.effective_time(t) for t in times]
    bound_gap = gap_bound_curve(norm_x, norm_y, rate, floor, effective)

    bound_tracial = None
    if (report.gap_lambda is not None and is_perfect_pure_preparation(prep, psi)
            and tracial_on_Q(ref)):
        bound_tracial = tracial_example_bound(ref.shape.dQ, rate, times)

    curve = FidelityCurve(times=times, f_direct=f_direct, f_correlation=f_correlation,
                          bound_schwarz=bound_schwarz, bound_gap=bound_gap, floor=floor,
                          norm_x=norm_x, norm_y=norm_y, bound_tracial=bound_tracial)
    curve.metadata = {
        'rate': rate,
        'rate_source': source,
        'identity_residual': curve.identity_residual(),
        'ordering_violation': curve.ordering_violation(),
        'invariance_residual': spec.invariance_residual(),
        'centering_x': abs(ref.expect(x)),
        'centering_y': abs(ref.expect(y)),
    }
    logger.info('fidelity curve: %d points, rate %.6g (%s), identity residual %.2e',
                len(times), rate, source, curve.metadata['identity_residual'])
    return curve


def half_life(model: 'Model', times: Sequence[float], psi=None,
              tol: float = HALF_LIFE_TOL) -> Optional[float]:
    """
    First t with f_direct(t) = (1 + floor)/2, by bisection inside the first
    grid interval whose endpoints straddle the target. None when the curve
    never reaches it on the grid.
    """
    psi = model.psi if psi is None else psi
    target = 0.5 * (1.0 + floor_value(psi, model.ref))

    def excess(t: float) -> float:
        return fidelity_direct(model.prep, model.spec, psi, t) - target

    times = sorted(float(t) for t in times)
    if not times:
        return None
    values = [excess(t) for t in times]
    if values[0] <= 0:
        return times[0]
    crossings = [i for i, v in enumerate(values) if v <= 0]
    if not crossings:
        return None
    hi_index = crossings[0]
    lo, hi = times[hi_index - 1], times[hi_index]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
    return hi


def time_grid(t_max: float, points: int = 200, spacing: str = 'log') -> List[float]:
    """
    Grid over [0, t_max]. Log spacing covers [t_max/1000, t_max] geometrically
    and prepends t = 0.
    """
    if t_max <= 0:
        raise ValueError(f't_max must be positive, got {t_max}')
    if points < 2:
        raise ValueError(f'a time grid needs at least two points, got {points}')
    if spacing == 'linear':
        return [float(t) for t in np.linspace(0.0, t_max, points)]
    if spacing == 'log':
        return [0.0] + [float(t) for t in np.geomspace(t_max * 1e-3, t_max, points - 1)]
    raise ValueError(f'unknown time grid spacing {spacing!r}')


def default_t_max(rate: float) -> float:
    """10/rate, or 10 when no positive rate is known."""
    return 10.0 / rate if rate > 0 else 10.0

