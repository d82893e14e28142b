"""
Result envelopes and their files: JSON envelope, CSV curve, SVG chart.

All outputs are deterministic for a fixed config and seed: JSON keys are
sorted, floats are written in shortest round-trip form, and the SVG carries
no date and a fixed hash salt.
"""

import io
import json
import logging
import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import __version__
from .checks import Check
from .config import ModelConfig
from .fidelity import FidelityCurve
from .spectral import SpectralReport

logger = logging.getLogger(__name__)

SVG_HASH_SALT = 'fidgap'


def _json_default(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f'{type(value).__name__} is not JSON serializable')


def dumps(data) -> str:
    return json.dumps(data, sort_keys=True, indent=2, default=_json_default) + '\n'


@dataclass
class ResultEnvelope:
    config: ModelConfig
    seed: Optional[int]
    checks: List[Check] = field(default_factory=list)
    report: Optional[SpectralReport] = None
    curve: Optional[FidelityCurve] = None
    extra: dict = field(default_factory=dict)
    warnings: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        data = {
            'version': __version__,
            'seed': self.seed,
            'config': self.config.to_dict(),
            'config_hash': self.config.content_hash(),
            'checks': [c.to_dict() for c in self.checks],
            'passed': self.passed,
            'spectral_report': self.report.to_dict() if self.report else None,
            'detailed_balance': (self.report.detailed_balance.to_dict()
                                 if self.report and self.report.detailed_balance else None),
            'curve': self.curve.to_dict() if self.curve else None,
            'warnings': list(self.warnings),
        }
        data.update(self.extra)
        return data

    def to_json(self) -> str:
        return dumps(self.to_dict())


def curve_csv(curve: FidelityCurve) -> str:
    buffer = io.StringIO()
    curve.write_csv(buffer)
    return buffer.getvalue()


def write_text(path: str, text: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as handle:
        handle.write(text)
    logger.info('wrote %s', path)


def write_svg(curve: FidelityCurve, path: str, title: str = '') -> None:
    """Line chart of f_direct with its bounds against t."""
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({'svg.hashsalt': SVG_HASH_SALT}):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        ax.plot(curve.times, curve.f_direct, label='fidelity', linewidth=2)
        ax.plot(curve.times, curve.bound_schwarz, '--', label='Schwarz bound')
        ax.plot(curve.times, curve.bound_gap, ':', label='gap bound')
        if curve.bound_tracial is not None:
            ax.plot(curve.times, curve.bound_tracial, '-.', label='tracial closed form')
        ax.axhline(curve.floor, color='grey', linewidth=0.8, label='floor')
        ax.set_xlabel('t')
        ax.set_ylabel('F(t)')
        if title:
            ax.set_title(title)
        ax.legend(loc='upper right')
        fig.tight_layout()
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        fig.savefig(path, format='svg', metadata={'Date': None})
        plt.close(fig)
    logger.info('wrote %s', path)
