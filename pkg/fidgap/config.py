"""
Model configuration files.

A model is described by one JSON document. Complex numbers are [re, im]
pairs (a bare real number is accepted on input), matrices are row-major
nested arrays of them:

    {
      "shape": {"dQ": 2, "dB": 2},
      "beta": 1.0,
      "hamiltonian": [[[0, 0], ...], ...],
      "dynamics": {"kind": "davies", "couplings": [...],
                   "rate_family": {"kind": "fermi", "g": 1.0}},
      "preparation": {"kind": "replacement", "psi": [[1, 0], [0, 0]]},
      "psi": [[1, 0], [0, 0]],
      "time_grid": {"t_max": 10.0, "points": 200, "spacing": "log"}
    }

Dynamics kinds: unitary, lindblad {hamiltonian_part, jumps: [{matrix, rate}]},
davies {couplings, rate_family}, depolarizing {gamma_q, gamma_b}, map {kraus}.
The lindblad hamiltonian_part may be the string "modular" to use K itself.
Preparation kinds: single {sigma | psi}, replacement {psi | sigma},
filtered {a, p}, custom {kraus}.

Parsing mirrors the hard/soft split of input validation: anything that
cannot be interpreted raises ParseError naming the field, while Hermiticity
and unit norms are left to the invariant checks so that they are reported
with their residuals.
"""

import copy
import hashlib
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .algebra import AlgebraShape
from .exceptions import DimensionMismatch, ParseError, UnknownParameter

logger = logging.getLogger(__name__)

CONFIG_DYNAMICS_KINDS = ('unitary', 'lindblad', 'davies', 'depolarizing', 'map')
CONFIG_PREPARATION_KINDS = ('single', 'replacement', 'filtered', 'custom')
TIME_GRID_SPACINGS = ('log', 'linear')


def parse_complex(value: Any, field_name: str) -> complex:
    if isinstance(value, bool):
        raise ParseError('expected a number or an [re, im] pair', field_name)
    if isinstance(value, (int, float)):
        return complex(float(value), 0.0)
    if (isinstance(value, (list, tuple)) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value)):
        return complex(float(value[0]), float(value[1]))
    raise ParseError('expected a number or an [re, im] pair', field_name)


def parse_vector(value: Any, field_name: str, length: Optional[int] = None) -> np.ndarray:
    if not isinstance(value, list):
        raise ParseError('expected a list of complex entries', field_name)
    vector = np.array([parse_complex(v, f'{field_name}[{i}]') for i, v in enumerate(value)],
                      dtype=complex)
    if length is not None and vector.size != length:
        raise ParseError(f'expected {length} entries, got {vector.size}', field_name)
    return vector


def parse_matrix(value: Any, field_name: str, dim: Optional[int] = None) -> np.ndarray:
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ParseError('expected a non-empty list of rows', field_name)
    rows = [parse_vector(row, f'{field_name}[{i}]') for i, row in enumerate(value)]
    widths = {row.size for row in rows}
    if len(widths) != 1:
        raise ParseError('rows have different lengths', field_name)
    matrix = np.array(rows, dtype=complex)
    if dim is not None and matrix.shape != (dim, dim):
        raise ParseError(f'expected a {dim}x{dim} matrix, got {matrix.shape[0]}x{matrix.shape[1]}',
                         field_name)
    return matrix


def parse_number(value: Any, field_name: str, minimum: Optional[float] = None,
                 strict: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError('expected a real number', field_name)
    value = float(value)
    if minimum is not None and (value < minimum or (strict and value == minimum)):
        bound = '>' if strict else '>='
        raise ParseError(f'must be {bound} {minimum}, got {value}', field_name)
    return value


def encode_complex(z: complex) -> List[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def encode_vector(v: np.ndarray) -> list:
    return [encode_complex(z) for z in np.asarray(v).reshape(-1)]


def encode_matrix(m: np.ndarray) -> list:
    return [encode_vector(row) for row in np.asarray(m)]


def _require(data: dict, key: str, prefix: str) -> Any:
    if not isinstance(data, dict):
        raise ParseError('expected an object', prefix or None)
    if key not in data:
        raise ParseError('missing required field', f'{prefix}.{key}' if prefix else key)
    return data[key]


def _kind(data: Any, prefix: str, allowed) -> str:
    kind = _require(data, 'kind', prefix)
    if kind not in allowed:
        raise ParseError(f"unknown kind {kind!r}, expected one of {', '.join(allowed)}",
                         f'{prefix}.kind')
    return kind


@dataclass
class ModelConfig:
    """
    Parsed model description. `dynamics` and `preparation` keep their kind and
    parsed numpy payloads; to_dict() restores the canonical JSON form.
    """
    shape: AlgebraShape
    beta: float
    hamiltonian: np.ndarray
    dynamics: Dict[str, Any]
    preparation: Dict[str, Any]
    psi: np.ndarray
    time_grid: Dict[str, Any]
    warnings: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'shape': self.shape.to_dict(),
            'beta': self.beta,
            'hamiltonian': encode_matrix(self.hamiltonian),
            'dynamics': _encode_dynamics(self.dynamics),
            'preparation': _encode_preparation(self.preparation),
            'psi': encode_vector(self.psi),
            'time_grid': dict(self.time_grid),
        }

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))

    def content_hash(self) -> str:
        """SHA-256 of the canonical JSON form."""
        return hashlib.sha256(self.canonical_json().encode('utf-8')).hexdigest()


def _parse_dynamics(data: Any, n: int) -> Dict[str, Any]:
    prefix = 'dynamics'
    kind = _kind(data, prefix, CONFIG_DYNAMICS_KINDS)
    if kind == 'unitary':
        return {'kind': kind}
    if kind == 'lindblad':
        hamiltonian_part = data.get('hamiltonian_part')
        if hamiltonian_part is None:
            hamiltonian_part = np.zeros((n, n), dtype=complex)
        elif hamiltonian_part != 'modular':
            hamiltonian_part = parse_matrix(hamiltonian_part, f'{prefix}.hamiltonian_part', n)
        jumps_data = _require(data, 'jumps', prefix)
        if not isinstance(jumps_data, list):
            raise ParseError('expected a list of jumps', f'{prefix}.jumps')
        jumps = []
        for i, jump in enumerate(jumps_data):
            where = f'{prefix}.jumps[{i}]'
            matrix = parse_matrix(_require(jump, 'matrix', where), f'{where}.matrix', n)
            rate = parse_number(_require(jump, 'rate', where), f'{where}.rate', minimum=0.0)
            jumps.append((matrix, rate))
        return {'kind': kind, 'hamiltonian_part': hamiltonian_part, 'jumps': jumps}
    if kind == 'davies':
        couplings = _require(data, 'couplings', prefix)
        if not isinstance(couplings, list) or not couplings:
            raise ParseError('expected a non-empty list of couplings', f'{prefix}.couplings')
        family = data.get('rate_family', {'kind': 'fermi', 'g': 1.0})
        family_kind = family.get('kind', 'fermi') if isinstance(family, dict) else None
        if family_kind not in ('fermi', 'metropolis'):
            raise ParseError(f'unknown rate family {family_kind!r}', f'{prefix}.rate_family.kind')
        return {
            'kind': kind,
            'couplings': [parse_matrix(c, f'{prefix}.couplings[{i}]', n)
                          for i, c in enumerate(couplings)],
            'rate_family': {
                'kind': family_kind,
                'g': parse_number(family.get('g', 1.0), f'{prefix}.rate_family.g', minimum=0.0),
            },
        }
    if kind == 'depolarizing':
        return {
            'kind': kind,
            'gamma_q': parse_number(_require(data, 'gamma_q', prefix), f'{prefix}.gamma_q',
                                    minimum=0.0),
            'gamma_b': parse_number(data.get('gamma_b', 0.0), f'{prefix}.gamma_b', minimum=0.0),
        }
    kraus = _require(data, 'kraus', prefix)
    if not isinstance(kraus, list) or not kraus:
        raise ParseError('expected a non-empty list of Kraus operators', f'{prefix}.kraus')
    return {'kind': kind,
            'kraus': [parse_matrix(k, f'{prefix}.kraus[{i}]', n) for i, k in enumerate(kraus)]}


def _encode_dynamics(dynamics: Dict[str, Any]) -> dict:
    kind = dynamics['kind']
    if kind == 'lindblad':
        hamiltonian_part = dynamics['hamiltonian_part']
        return {
            'kind': kind,
            'hamiltonian_part': (hamiltonian_part if isinstance(hamiltonian_part, str)
                                 else encode_matrix(hamiltonian_part)),
            'jumps': [{'matrix': encode_matrix(m), 'rate': rate}
                      for m, rate in dynamics['jumps']],
        }
    if kind == 'davies':
        return {'kind': kind, 'couplings': [encode_matrix(c) for c in dynamics['couplings']],
                'rate_family': dict(dynamics['rate_family'])}
    if kind == 'map':
        return {'kind': kind, 'kraus': [encode_matrix(k) for k in dynamics['kraus']]}
    return dict(dynamics)


def _parse_preparation(data: Any, shape: AlgebraShape) -> Dict[str, Any]:
    prefix = 'preparation'
    kind = _kind(data, prefix, CONFIG_PREPARATION_KINDS)
    if kind in ('single', 'replacement'):
        if 'psi' in data:
            return {'kind': kind, 'psi': parse_vector(data['psi'], f'{prefix}.psi', shape.dQ)}
        if 'sigma' in data:
            return {'kind': kind,
                    'sigma': parse_matrix(data['sigma'], f'{prefix}.sigma', shape.dQ)}
        raise ParseError('needs a target state, psi or sigma', prefix)
    if kind == 'filtered':
        return {
            'kind': kind,
            'a': parse_matrix(_require(data, 'a', prefix), f'{prefix}.a', shape.n),
            'p': parse_number(_require(data, 'p', prefix), f'{prefix}.p', minimum=0.0, strict=True),
        }
    kraus = _require(data, 'kraus', prefix)
    if not isinstance(kraus, list) or not kraus:
        raise ParseError('expected a non-empty list of Kraus operators', f'{prefix}.kraus')
    return {'kind': kind,
            'kraus': [parse_matrix(k, f'{prefix}.kraus[{i}]', shape.n)
                      for i, k in enumerate(kraus)]}


def _encode_preparation(preparation: Dict[str, Any]) -> dict:
    encoded = {'kind': preparation['kind']}
    if 'psi' in preparation:
        encoded['psi'] = encode_vector(preparation['psi'])
    if 'sigma' in preparation:
        encoded['sigma'] = encode_matrix(preparation['sigma'])
    if 'a' in preparation:
        encoded['a'] = encode_matrix(preparation['a'])
        encoded['p'] = preparation['p']
    if 'kraus' in preparation:
        encoded['kraus'] = [encode_matrix(k) for k in preparation['kraus']]
    return encoded


def _parse_time_grid(data: Any, warnings: List[str]) -> Dict[str, Any]:
    if data is None:
        return {'points': 200, 'spacing': 'log'}
    if not isinstance(data, dict):
        raise ParseError('expected an object', 'time_grid')
    grid = {}
    if data.get('t_max') is not None:
        grid['t_max'] = parse_number(data['t_max'], 'time_grid.t_max', minimum=0.0, strict=True)
    points = data.get('points', 200)
    if isinstance(points, bool) or not isinstance(points, int) or points < 2:
        raise ParseError('expected an integer >= 2', 'time_grid.points')
    grid['points'] = points
    spacing = data.get('spacing', 'log')
    if spacing not in TIME_GRID_SPACINGS:
        raise ParseError(f'unknown spacing {spacing!r}', 'time_grid.spacing')
    grid['spacing'] = spacing
    unknown = set(data) - {'t_max', 'points', 'spacing'}
    if unknown:
        warnings.append(f"time_grid: ignored unknown keys {', '.join(sorted(unknown))}")
    return grid


def parse_model_config(data: Any) -> ModelConfig:
    """Parse a decoded JSON document into a ModelConfig."""
    if not isinstance(data, dict):
        raise ParseError('a model config must be a JSON object')
    warnings: List[str] = []
    shape_data = _require(data, 'shape', '')
    try:
        shape = AlgebraShape(int(_require(shape_data, 'dQ', 'shape')),
                             int(_require(shape_data, 'dB', 'shape')))
    except (TypeError, ValueError, DimensionMismatch) as exc:
        raise ParseError(str(exc), 'shape') from exc
    beta = parse_number(data.get('beta', 1.0), 'beta', minimum=0.0, strict=True)
    hamiltonian = parse_matrix(_require(data, 'hamiltonian', ''), 'hamiltonian', shape.n)
    dynamics = _parse_dynamics(_require(data, 'dynamics', ''), shape.n)
    preparation = _parse_preparation(_require(data, 'preparation', ''), shape)
    psi = parse_vector(_require(data, 'psi', ''), 'psi', shape.dQ)
    time_grid = _parse_time_grid(data.get('time_grid'), warnings)

    known = {'shape', 'beta', 'hamiltonian', 'dynamics', 'preparation', 'psi', 'time_grid'}
    unknown = set(data) - known
    if unknown:
        warnings.append(f"ignored unknown top-level keys {', '.join(sorted(unknown))}")
    for warning in warnings:
        logger.warning('config: %s', warning)
    return ModelConfig(shape, beta, hamiltonian, dynamics, preparation, psi, time_grid,
                       warnings)


def loads_config(text: str) -> ModelConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f'invalid JSON: {exc.msg}', line=exc.lineno) from exc
    return parse_model_config(data)


def load_config(path: str) -> ModelConfig:
    try:
        with open(path, encoding='utf-8') as handle:
            text = handle.read()
    except OSError as exc:
        raise ParseError(f'cannot read {path}: {exc.strerror}') from exc
    return loads_config(text)


def dump_config(config: ModelConfig) -> str:
    """Pretty, key-sorted JSON; parses back to an equal config."""
    return json.dumps(config.to_dict(), sort_keys=True, indent=2) + '\n'


def _split_path(path: str) -> List[Any]:
    keys: List[Any] = []
    for part in path.split('.'):
        if not part:
            raise UnknownParameter(f'malformed parameter path {path!r}')
        keys.append(int(part) if part.isdigit() else part)
    return keys


def get_parameter(data: dict, path: str) -> Any:
    node: Any = data
    for key in _split_path(path):
        try:
            node = node[key]
        except (KeyError, IndexError, TypeError):
            raise UnknownParameter(f'no parameter at {path!r}') from None
    return node


def with_parameter(config: ModelConfig, path: str, value: float) -> ModelConfig:
    """
    Copy of `config` with the scalar at the dotted `path` (list indices as
    integers, e.g. dynamics.jumps.0.rate) replaced by `value`.
    """
    data = copy.deepcopy(config.to_dict())
    current = get_parameter(data, path)
    if isinstance(current, bool) or not isinstance(current, (int, float)):
        raise UnknownParameter(f'{path!r} does not address a scalar')
    keys = _split_path(path)
    parent = get_parameter(data, '.'.join(str(k) for k in keys[:-1])) if len(keys) > 1 else data
    if isinstance(current, int):
        if not float(value).is_integer():
            raise ParseError(f'expected an integer, got {value!r}', path)
        parent[keys[-1]] = int(value)
    else:
        parent[keys[-1]] = float(value)
    return parse_model_config(data)
