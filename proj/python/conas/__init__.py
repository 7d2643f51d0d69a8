"""Sparse Boolean Fourier recovery and multi-stage cell search.

Thin wrappers over the compiled ``_conas`` module. Expansions are dicts
mapping a sorted tuple of coordinates to a coefficient; ``()`` is the
constant term.
"""

import json
import os

from . import _conas
from ._conas import (
    ConfigError,
    edge_count,
    enumerate_parities,
    lasso_solve,
    parity_count,
    sample_encodings,
    sampling_matrix,
)

__all__ = [
    "ConfigError",
    "count",
    "decode_cell",
    "edge_count",
    "enumerate_parities",
    "exact_transform",
    "expansion_eval",
    "lasso_solve",
    "make_planted",
    "minimize_over_support",
    "parity_count",
    "restrict_expansion",
    "run",
    "sample_encodings",
    "sampling_matrix",
]


def _terms(expansion):
    return [(list(s), float(c)) for s, c in expansion.items()]


def _expansion(terms):
    return {tuple(s): c for s, c in terms}


def exact_transform(n, f):
    """Fourier coefficients of ``f(alpha)`` where alpha is a list of +-1."""
    return _expansion(_conas.exact_transform(n, f))


def expansion_eval(n, expansion, alpha):
    return _conas.expansion_eval(n, _terms(expansion), list(alpha))


def restrict_expansion(n, expansion, fixed):
    """Substitute ``fixed`` ({coordinate: +-1}) and relabel the free coordinates."""
    return _expansion(_conas.restrict_expansion(n, _terms(expansion), dict(fixed)))


def minimize_over_support(n, expansion):
    """(assignment, value) minimizing the expansion over its own variables."""
    return _conas.minimize_over_support(n, _terms(expansion))


def make_planted(n, sparsity, degree=2, seed=0, lo=1.0, hi=2.0):
    return _expansion(_conas.make_planted(n, sparsity, degree, seed, lo, hi))


def count(cell_spec=None):
    return json.loads(_conas.count_json(json.dumps(cell_spec or {})))


def decode_cell(cell_spec, encoding):
    return json.loads(_conas.decode_cell_json(json.dumps(cell_spec), encoding))


def run(command, config, out_dir, seed=None, base_dir=None):
    """Run ``search``, ``phase``, ``stages`` or ``dft`` on a config dict.

    Writes the same files as the command-line tool into ``out_dir`` and
    returns the parsed result.
    """
    os.makedirs(out_dir, exist_ok=True)
    text = _conas.run_command(command, json.dumps(config), os.fspath(out_dir),
                              os.fspath(base_dir or ""), seed)
    return json.loads(text)
