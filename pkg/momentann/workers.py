# -*- coding: utf-8 -*-
from __future__ import absolute_import, division, print_function
import numpy as np

from scipy.optimize import least_squares
from momentann import slfn


def initial_params(spec, rng, init_scale):
    theta0 = rng.uniform(-init_scale, init_scale, (spec.H, spec.row_width)) / np.sqrt(spec.J)
    theta1 = rng.uniform(-1.0, 1.0, spec.H) / np.sqrt(spec.H)
    return np.concatenate((theta0.ravel(), theta1))


def fit_restart_star(restart_seed, Z, y, spec, options):
    return fit_restart(*restart_seed, Z=Z, y=y, spec=spec, options=options)


# One local least-squares run from a random start.  Everything it needs is
# passed in so that it can be mapped over a process pool.
def fit_restart(restart, seed_seq, Z, y, spec, options):
    rng = np.random.default_rng(seed_seq)
    start = initial_params(spec, rng, options['init_scale'])

    def residuals(flat):
        return slfn.forward(slfn.SlfnParams.from_flat(spec, flat), Z) - y

    def jacobian(flat):
        return slfn.grad_params(slfn.SlfnParams.from_flat(spec, flat), Z)

    start_sse = float(np.sum(residuals(start) ** 2))
    summary = {
        'restart': restart,
        'start_sse': start_sse,
        'sse': np.inf,
        'converged': False,
        'status': None,
        'nfev': 0,
        'gradient_norm': np.inf,
        'message': '',
    }
    try:
        result = least_squares(
            residuals,
            start,
            jac=jacobian,
            method=options['method'],
            gtol=options['gradient_tolerance'],
            xtol=options['step_tolerance'],
            ftol=options['function_tolerance'],
            max_nfev=options['max_iterations'],
        )
    except (ValueError, np.linalg.LinAlgError) as ex:
        summary['message'] = 'numerical failure: %s' % (ex,)
        return summary, None

    sse = float(np.sum(result.fun ** 2))
    finite = np.isfinite(sse) and np.all(np.isfinite(result.x))
    gradient_norm = float(np.max(np.abs(result.jac.T @ result.fun))) if finite else np.inf
    summary.update(
        {
            'sse': sse if finite else np.inf,
            'converged': bool(finite and restart_converged(result, gradient_norm, sse, options)),
            'status': int(result.status),
            'nfev': int(result.nfev),
            'gradient_norm': gradient_norm,
            'message': str(result.message),
        }
    )
    return summary, (result.x if finite else None)


def restart_converged(result, gradient_norm, sse, options):
    """
    A restart has converged when the optimizer stopped on one of its own
    tolerance tests, or when it hit the evaluation cap with a gradient of
    SSE/2 already below gradient_tolerance relative to max(1, SSE).

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.workers import *  # NOQA
        >>> from types import SimpleNamespace
        >>> options = {'gradient_tolerance': 1e-8}
        >>> assert restart_converged(SimpleNamespace(status=2), 1.0, 1.0, options)
        >>> assert not restart_converged(SimpleNamespace(status=0), 1e-3, 10.0, options)
        >>> assert restart_converged(SimpleNamespace(status=0), 5e-8, 10.0, options)
    """
    if result.status > 0:
        return True
    return gradient_norm <= options['gradient_tolerance'] * max(1.0, sse)


def fit_candidate_star(H, design, options):
    from momentann import estimator

    try:
        return H, estimator.fit_slfn(design, H, options), None
    except Exception as ex:  # NOQA
        return H, None, ex
