"""Indexes of Hermitian moment matrices.

Measures and densities are given as dicts in the same shape the CLI configs use.
"""

import json

from . import _core
from ._core import (
    ConfigError,
    IndexSequence,
    MomidxError,
    NotApplicable,
    NotOnCircle,
    NotPositiveDefinite,
    Oracle,
    TooShort,
    alpha_sequence,
    binomial_matrix,
    bpe_map,
    bpe_verdict,
    cholesky_lower,
    conjugate_section,
    estimate_limit,
    gamma_at_sequence,
    gamma_direct_ls,
    gamma_sequence,
    gamma_shift_crosscheck,
    kernel_diag,
    lambda_sequence,
    monic_norms,
    smallest_eigenvalue,
)

__version__ = _core.__version__


def _text(spec):
    return spec if isinstance(spec, str) else json.dumps(spec)


def measure_oracle(measure, **quadrature):
    return Oracle.from_measure(_text(measure), **quadrature)


def toeplitz_oracle(density):
    return Oracle.toeplitz(_text(density))


def moment(measure, j, k):
    """Returns (value, error_bound, converged)."""
    return _core.moment(_text(measure), j, k)


def total_mass(measure):
    return _core.total_mass(_text(measure))


def szego_integral(density):
    return _core.szego_integral(_text(density))


def szego_verdict(measure, n, **limits):
    return _core.szego_verdict(_text(measure), n, **limits)


def density_verdict(measure, n, z_ref=0.0, override_hypothesis=False):
    return _core.density_verdict(_text(measure), z_ref, n, override_hypothesis)


def run_job(config, max_order=None, seed=0):
    """Runs a job config; returns (report dict, {file name: contents}, exit code)."""
    report, files, code = _core.run_job(_text(config), max_order, seed)
    return json.loads(report), files, code


LEBESGUE = {"type": "circle_density", "density": {"family": "lebesgue"}}
