# -*- coding: utf-8 -*-
r"""
Linear (OLS) and SLFN (multi-start nonlinear least squares) estimation on a
transformed design, with degrees of freedom, information criteria and the
Hessian approximation used for inference.

Example0:
    >>> # ENABLE_DOCTEST
    >>> # df bookkeeping of the linear and network panel models
    >>> from momentann.estimator import *  # NOQA
    >>> R, T = 260, 22
    >>> linear = [model_df('linear', kind, 2, 0, R, T) for kind in ('pooled', 'region', 'time', 'twoway')]
    >>> assert linear == [3, 262, 24, 283]
    >>> rows = [('pooled', 3), ('pooled', 8), ('region', 4), ('region', 9),
    ...         ('time', 3), ('time', 6), ('twoway', 2), ('twoway', 10)]
    >>> assert [model_df('slfn', kind, 2, H, R, T) for kind, H in rows] == [12, 32, 272, 287, 31, 40, 287, 311]
    >>> assert model_df('slfn', 'time', 4, 6, R, T) == 52
"""
from __future__ import absolute_import, division, print_function
import logging
import multiprocessing as mp
import numpy as np

from collections import namedtuple
from functools import partial
from tqdm import tqdm
from momentann import slfn, workers
from momentann.utils import InputError, NumericalError, from_json_float
from momentann.within import FESpec

logger = logging.getLogger(__name__)


MODEL_KINDS = ('linear', 'slfn')
HESSIAN_MODES = ('gauss_newton', 'finite_difference')
CRITERIA = ('aic', 'bic')
FULLY_CONNECTED_TOL = 1e-8
FD_STEP = 1e-5


Criteria = namedtuple('Criteria', ['aic', 'bic', 'defined'])


class FitOptions(object):
    def __init__(
        self,
        restarts=20,
        seed=0,
        max_iterations=10000,
        gradient_tolerance=1e-8,
        step_tolerance=1e-10,
        function_tolerance=1e-10,
        init_scale=1.0,
        hessian_mode='gauss_newton',
        method='lm',
        processes=1,
        progress=False,
    ):
        if restarts < 1:
            raise InputError('restarts must be >= 1, got %r' % (restarts,))
        if min(gradient_tolerance, step_tolerance, function_tolerance) <= 0:
            raise InputError('tolerances must be positive')
        if hessian_mode not in HESSIAN_MODES:
            raise InputError('hessian_mode must be one of %s' % (HESSIAN_MODES,))
        if method not in ('lm', 'trf', 'dogbox'):
            raise InputError('unknown least-squares method %r' % (method,))
        self.restarts = int(restarts)
        self.seed = int(seed)
        self.max_iterations = int(max_iterations)
        self.gradient_tolerance = float(gradient_tolerance)
        self.step_tolerance = float(step_tolerance)
        self.function_tolerance = float(function_tolerance)
        self.init_scale = float(init_scale)
        self.hessian_mode = hessian_mode
        self.method = method
        self.processes = int(processes)
        self.progress = bool(progress)

    def worker_options(self):
        return {
            'init_scale': self.init_scale,
            'method': self.method,
            'gradient_tolerance': self.gradient_tolerance,
            'step_tolerance': self.step_tolerance,
            'function_tolerance': self.function_tolerance,
            'max_iterations': self.max_iterations,
        }

    def to_dict(self):
        data = self.worker_options()
        data.update(
            {
                'restarts': self.restarts,
                'seed': self.seed,
                'hessian_mode': self.hessian_mode,
            }
        )
        return data


class FitResult(object):
    def __init__(
        self,
        kind,
        fe_spec,
        column_names,
        params,
        sse,
        n,
        df,
        hessian,
        H=0,
        center=None,
        scale=None,
        restart_summaries=None,
        converged=True,
        warnings=None,
        R=0,
        T=0,
        hessian_mode='gauss_newton',
    ):
        J = len(column_names)
        self.kind = kind
        self.fe_spec = fe_spec
        self.column_names = list(column_names)
        self.params = params
        self.sse = float(sse)
        self.n = int(n)
        self.df = int(df)
        self.hessian = np.asarray(hessian, dtype=np.float64)
        self.H = int(H)
        self.center = np.zeros(J) if center is None else np.asarray(center, dtype=np.float64)
        self.scale = np.ones(J) if scale is None else np.asarray(scale, dtype=np.float64)
        self.restart_summaries = list(restart_summaries or [])
        self.converged = bool(converged)
        self.warnings = list(warnings or [])
        self.R = int(R)
        self.T = int(T)
        self.hessian_mode = hessian_mode
        if self.df >= self.n:
            raise InputError('model df %d must be below n=%d' % (self.df, self.n))
        self.sigma_hat = float(np.sqrt(self.sse / (self.n - self.df)))
        self.criteria = information_criteria(self.sse, self.n, self.df)

    @property
    def aic(self):
        return self.criteria.aic

    @property
    def bic(self):
        return self.criteria.bic

    @property
    def J(self):
        return len(self.column_names)

    @property
    def P(self):
        return self.hessian.shape[0]

    @property
    def std_errors(self):
        """Coefficient standard errors of a linear fit."""
        if self.kind != 'linear':
            return None
        return np.sqrt(np.diag(self.sigma_hat ** 2 * np.linalg.pinv(self.hessian)))

    @property
    def t_stats(self):
        if self.kind != 'linear':
            return None
        return self.params / self.std_errors

    def to_dict(self):
        if self.kind == 'linear':
            params = self.params.tolist()
        else:
            params = self.params.to_dict()
        return {
            'model': self.kind,
            'fe_spec': self.fe_spec.to_dict(),
            'H': self.H,
            'column_names': self.column_names,
            'params': params,
            'standardization': {'center': self.center.tolist(), 'scale': self.scale.tolist()},
            'sse': self.sse,
            'n': self.n,
            'df': self.df,
            'R': self.R,
            'T': self.T,
            'sigma_hat': self.sigma_hat,
            'aic': self.aic,
            'bic': self.bic,
            'criteria_defined': self.criteria.defined,
            'hessian': self.hessian.tolist(),
            'hessian_mode': self.hessian_mode,
            'std_errors': None if self.std_errors is None else self.std_errors.tolist(),
            't_stats': None if self.t_stats is None else self.t_stats.tolist(),
            'restart_summaries': self.restart_summaries,
            'converged': self.converged,
            'warnings': self.warnings,
        }

    @classmethod
    def from_dict(cls, data):
        kind = data['model']
        if kind not in MODEL_KINDS:
            raise InputError('unknown model kind %r in fit' % (kind,))
        if kind == 'linear':
            params = np.asarray(data['params'], dtype=np.float64)
        else:
            params = slfn.SlfnParams.from_dict(data['params'])
        return cls(
            kind,
            FESpec.from_dict(data['fe_spec']),
            data['column_names'],
            params,
            from_json_float(data['sse']),
            data['n'],
            data['df'],
            data['hessian'],
            H=data.get('H', 0),
            center=data['standardization']['center'],
            scale=data['standardization']['scale'],
            restart_summaries=data.get('restart_summaries'),
            converged=data.get('converged', True),
            warnings=data.get('warnings'),
            R=data.get('R', 0),
            T=data.get('T', 0),
            hessian_mode=data.get('hessian_mode', 'gauss_newton'),
        )

    def __repr__(self):
        return '<FitResult %s %s H=%d df=%d sse=%.4f>' % (
            self.kind,
            self.fe_spec.kind,
            self.H,
            self.df,
            self.sse,
        )


def model_df(kind, fe_spec, J, H, R, T):
    """Mean-function parameters including the fixed effects."""
    if not isinstance(fe_spec, FESpec):
        fe_spec = FESpec(fe_spec)
    fe_count = fe_spec.fe_param_count(R, T)
    if kind == 'linear':
        return J + fe_count + (1 if fe_spec.kind == 'pooled' else 0)
    if kind == 'slfn':
        return slfn.SlfnSpec(J, H, fe_spec.hidden_bias).P + fe_count
    raise InputError('unknown model kind %r' % (kind,))


def information_criteria(sse, n, df):
    r"""
    Gaussian AIC and BIC with k = df mean-function parameters.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.estimator import *  # NOQA
        >>> n = 5078
        >>> crit = information_criteria(3.247 ** 2 * (n - 3), n, 3)
        >>> assert abs(crit.aic - 26379) <= 10 and abs(crit.bic - 26399) <= 10
        >>> crit = information_criteria(2.252 ** 2 * (n - 283), n, 283)
        >>> assert abs(crit.aic - 22934) <= 10 and abs(crit.bic - 24783) <= 10
        >>> a, b = information_criteria(100.0, 50, 3), information_criteria(100.0, 50, 6)
        >>> assert np.isclose(b.aic - a.aic, 2 * 3)
        >>> assert np.isclose(a.bic - a.aic, (np.log(50) - 2) * 3)
        >>> assert information_criteria(0.0, 50, 3) == (-np.inf, -np.inf, False)
    """
    if not n > df >= 1:
        raise InputError('information criteria need n > df >= 1, got n=%r df=%r' % (n, df))
    if sse <= 0:
        return Criteria(-np.inf, -np.inf, False)
    base = n * np.log(2.0 * np.pi * sse / n) + n
    return Criteria(float(base + 2.0 * df), float(base + np.log(n) * df), True)


def fit_linear(design):
    r"""
    OLS on the transformed design.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.estimator import *  # NOQA
        >>> from momentann.within import design_from_arrays
        >>> rng = np.random.RandomState(0)
        >>> X = rng.randn(40, 2)
        >>> exact = fit_linear(design_from_arrays(X @ [1.5, -0.5], X))
        >>> assert np.allclose(exact.params, [1.5, -0.5], rtol=0, atol=1e-12) and exact.sse < 1e-20
        >>> y = X @ [0.3, 0.2] + rng.randn(40)
        >>> fit = fit_linear(design_from_arrays(y, X, fe_kind='time'))
        >>> oracle = np.linalg.solve(X.T @ X, X.T @ y)
        >>> assert np.allclose(fit.params, oracle, rtol=0, atol=1e-10)
        >>> assert np.allclose(fit.hessian, X.T @ X, rtol=0, atol=1e-10)
        >>> assert fit.df == 3 and np.isclose(fit.sigma_hat ** 2 * (fit.n - fit.df), fit.sse, rtol=1e-12)
        >>> assert np.allclose(fit.std_errors, fit.sigma_hat * np.sqrt(np.diag(np.linalg.inv(X.T @ X))))

    Example1:
        >>> # ENABLE_DOCTEST
        >>> from momentann.estimator import *  # NOQA
        >>> from momentann.within import RawDesign, within_transform
        >>> import pandas as pd
        >>> R, T = 260, 22
        >>> frame = pd.DataFrame({'region_id': np.repeat(np.arange(R), T), 'year': np.tile(np.arange(T), R)})
        >>> rng = np.random.RandomState(1)
        >>> frame['m1'], frame['m2'], frame['y'] = rng.randn(3, R * T)
        >>> design = within_transform(RawDesign(frame, ['m1', 'm2'], {}), FESpec('region'))
        >>> assert fit_linear(design).df == 262
        >>> import pytest
        >>> frame['m2'] = 2 * frame['m1']
        >>> with pytest.raises(NumericalError, match='rank'):
        ...     fit_linear(within_transform(RawDesign(frame, ['m1', 'm2'], {}), FESpec('region')))
    """
    Z = design.design_matrix()
    df = model_df('linear', design.fe_spec, design.J, 0, design.R, design.T)
    if design.n <= df:
        raise InputError('need more observations (%d) than model df (%d)' % (design.n, df))
    if np.linalg.matrix_rank(Z) < Z.shape[1]:
        raise NumericalError('rank deficiency in the linear design')
    beta = np.linalg.lstsq(Z, design.y, rcond=None)[0]
    resid = design.y - Z @ beta
    fit = FitResult(
        'linear',
        design.fe_spec,
        design.column_names,
        beta,
        float(resid @ resid),
        design.n,
        df,
        Z.T @ Z,
        R=design.R,
        T=design.T,
    )
    logger.info('Linear %s fit: sse=%.6g df=%d' % (design.fe_spec.kind, fit.sse, fit.df))
    return fit


def standardized(fit, X):
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != fit.J:
        raise InputError('inputs have %d columns but the fit expects %d' % (X.shape[1], fit.J))
    return (X - fit.center) / fit.scale


def predict(fit, X):
    """Fitted mean function at model-space input rows."""
    single = np.ndim(X) == 1
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if fit.kind == 'linear':
        if X.shape[1] != fit.J:
            raise InputError('inputs have %d columns but the fit expects %d' % (X.shape[1], fit.J))
        out = X @ fit.params[: fit.J]
        if len(fit.params) > fit.J:
            out = out + fit.params[fit.J]
    else:
        out = slfn.forward(fit.params, standardized(fit, X))
    return float(out[0]) if single else out


def param_gradients(fit, X):
    """n x P derivatives of the fitted function with respect to the parameters."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if fit.kind == 'linear':
        if X.shape[1] != fit.J:
            raise InputError('inputs have %d columns but the fit expects %d' % (X.shape[1], fit.J))
        if len(fit.params) > fit.J:
            X = np.hstack((X, np.ones((X.shape[0], 1))))
        return X
    return slfn.grad_params(fit.params, standardized(fit, X))


def input_gradients(fit, X):
    """Slopes of the fitted function with respect to the model-space inputs."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if fit.kind == 'linear':
        return np.tile(fit.params[: fit.J], (X.shape[0], 1))
    return slfn.grad_input(fit.params, standardized(fit, X)) / fit.scale


def standardization(design):
    scale = design.X.std(axis=0)
    scale[~(scale > 0)] = 1.0
    if design.fe_spec.hidden_bias:
        center = design.X.mean(axis=0)
    else:
        # Without a hidden bias, centering would change the function class.
        center = np.zeros(design.J)
    return center, scale


def _run_restarts(Z, y, spec, opts):
    children = np.random.SeedSequence(opts.seed).spawn(opts.restarts)
    to_process = list(enumerate(children))
    partial_fit_restart = partial(
        workers.fit_restart_star, Z=Z, y=y, spec=spec, options=opts.worker_options()
    )
    if opts.processes > 1:
        pool = mp.Pool(processes=opts.processes)
        try:
            results = pool.map(partial_fit_restart, to_process)
        finally:
            pool.close()
            pool.join()
    else:
        iterator = tqdm(to_process, total=len(to_process), leave=False, disable=not opts.progress)
        results = [partial_fit_restart(item) for item in iterator]
    return results


def fit_slfn(design, H, opts=None):
    r"""
    Best-of-restarts nonlinear least-squares fit of an H-unit network.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> # noiseless data from a known network is fitted exactly
        >>> from momentann.estimator import *  # NOQA
        >>> from momentann.within import design_from_arrays
        >>> rng = np.random.RandomState(0)
        >>> X = rng.uniform(-2, 2, (300, 2))
        >>> truth = slfn.SlfnParams(slfn.SlfnSpec(2, 2), [[1.0, -2.0], [2.0, 1.0]], [3.0, -2.0])
        >>> design = design_from_arrays(slfn.forward(truth, X), X)
        >>> fit = fit_slfn(design, 2, FitOptions(restarts=20, seed=1))
        >>> assert fit.sse <= 1e-6 * design.n
        >>> assert fit.df == 7 and len(fit.restart_summaries) == 20
        >>> again = fit_slfn(design, 2, FitOptions(restarts=20, seed=1))
        >>> assert again.sse == fit.sse and np.array_equal(again.params.flat, fit.params.flat)
        >>> fewer = fit_slfn(design, 2, FitOptions(restarts=5, seed=1))
        >>> assert fit.sse <= fewer.sse
        >>> # Gauss-Newton and finite-difference Hessians agree at a zero-residual optimum
        >>> fd = hessian(fit, design, 'finite_difference')
        >>> assert np.allclose(fd, fit.hessian, rtol=1e-3, atol=1e-3 * np.abs(fit.hessian).max())
        >>> assert np.allclose(fd, fd.T, rtol=0, atol=1e-10)

    Example1:
        >>> # ENABLE_DOCTEST
        >>> from momentann.estimator import *  # NOQA
        >>> from momentann.within import design_from_arrays
        >>> rng = np.random.RandomState(2)
        >>> X = rng.randn(100, 2)
        >>> fit = fit_slfn(design_from_arrays(np.zeros(100), X), 2, FitOptions(restarts=3))
        >>> assert all(s['sse'] <= s['start_sse'] for s in fit.restart_summaries)
        >>> assert fit.sse <= min(s['start_sse'] for s in fit.restart_summaries)

    Example2:
        >>> # ENABLE_DOCTEST
        >>> # recovery of a noisy network, judged on a grid against the generator
        >>> from momentann.estimator import *  # NOQA
        >>> from momentann.within import design_from_arrays
        >>> rng = np.random.RandomState(5)
        >>> truth = slfn.SlfnParams(slfn.SlfnSpec(2, 2), [[1.0, -2.0], [2.0, 1.0]], [3.0, -2.0])
        >>> X = rng.uniform(-2, 2, (2000, 2))
        >>> y = slfn.forward(truth, X) + 0.1 * rng.randn(2000)
        >>> fit = fit_slfn(design_from_arrays(y, X), 2, FitOptions(restarts=20, seed=3))
        >>> g = np.linspace(-2, 2, 50)
        >>> grid = np.array([(a, b) for a in g for b in g])
        >>> rmse = np.sqrt(np.mean((predict(fit, grid) - slfn.forward(truth, grid)) ** 2))
        >>> assert rmse <= 0.05 and 0.09 <= fit.sigma_hat <= 0.11

    Example3:
        >>> # ENABLE_DOCTEST
        >>> # time-FE fits on the synthetic panel, from small to large networks
        >>> from momentann.estimator import *  # NOQA
        >>> from momentann.datasets import synthesize
        >>> from momentann.panel import apply_filters, load_panel
        >>> from momentann.within import assemble_design, within_transform
        >>> data = synthesize(R=20, T=22, seed=3)
        >>> panel, _ = apply_filters(load_panel(data['gva'], data['regions']), 10.0, 5)
        >>> fe_spec = FESpec('time')
        >>> design = within_transform(assemble_design(panel, data['features'], fe_spec), fe_spec)
        >>> for H in (3, 6, 10):
        ...     fit = fit_slfn(design, H, FitOptions(restarts=5, seed=0))
        ...     assert fit.df == 3 * H + design.T and np.isfinite(fit.sse)
        ...     assert fit.sse < np.sum(design.y ** 2)
        ...     assert fit.converged or any('before convergence' in w for w in fit.warnings)
        >>> # a restart stopped by the evaluation cap is still a candidate
        >>> capped = fit_slfn(design, 3, FitOptions(restarts=2, max_iterations=3))
        >>> assert not capped.converged and np.isfinite(capped.sse)
        >>> assert 'stopped before convergence' in capped.warnings[0]
    """
    opts = FitOptions() if opts is None else opts
    if H < 1:
        raise InputError('H must be >= 1, got %r' % (H,))
    fe_spec = design.fe_spec
    spec = slfn.SlfnSpec(design.J, H, fe_spec.hidden_bias)
    df = model_df('slfn', fe_spec, design.J, H, design.R, design.T)
    if design.n <= df:
        raise InputError('need more observations (%d) than model df (%d)' % (design.n, df))

    center, scale = standardization(design)
    Z = (design.X - center) / scale
    results = _run_restarts(Z, design.y, spec, opts)

    summaries = [summary for summary, _ in results]
    # Capped restarts stay candidates; only non-finite ones are dropped.
    candidates = [
        (summary['sse'], summary['restart'], flat)
        for summary, flat in results
        if flat is not None
    ]
    if not candidates:
        raise NumericalError(
            'all %d restarts failed to produce finite parameters (H=%d); last message: %s'
            % (opts.restarts, H, summaries[-1]['message'])
        )
    # Lowest SSE wins, ties go to the lowest restart index.
    best_sse, best_restart, best_flat = min(candidates, key=lambda item: (item[0], item[1]))
    params = slfn.SlfnParams.from_flat(spec, best_flat)
    converged = bool(summaries[best_restart]['converged'])
    n_converged = sum(1 for summary in summaries if summary['converged'])
    logger.info(
        'SLFN %s H=%d: best restart %d of %d, sse=%.6g (%d converged)'
        % (fe_spec.kind, H, best_restart, opts.restarts, best_sse, n_converged)
    )

    warnings = []
    if not converged:
        message = 'best restart %d stopped before convergence: %s' % (
            best_restart,
            summaries[best_restart]['message'],
        )
        logger.warning(message)
        warnings.append(message)
    weak = slfn.check_fully_connected(params, FULLY_CONNECTED_TOL)
    if weak:
        message = 'hidden units %s have output weights below %g' % (weak, FULLY_CONNECTED_TOL)
        logger.warning(message)
        warnings.append(message)

    jac = slfn.grad_params(params, Z)
    fit = FitResult(
        'slfn',
        fe_spec,
        design.column_names,
        params,
        best_sse,
        design.n,
        df,
        jac.T @ jac,
        H=H,
        center=center,
        scale=scale,
        restart_summaries=summaries,
        converged=converged,
        warnings=warnings,
        R=design.R,
        T=design.T,
        hessian_mode=opts.hessian_mode,
    )
    if opts.hessian_mode == 'finite_difference':
        fit.hessian = hessian(fit, design, 'finite_difference')
    if not fit.criteria.defined:
        fit.warnings.append('sse is zero; information criteria undefined')
    return fit


def hessian(fit, design, mode='gauss_newton'):
    """
    Hessian approximation of SSE/2 at the fitted parameters.  Linear fits
    always return X'X.
    """
    if mode not in HESSIAN_MODES:
        raise InputError('hessian mode must be one of %s' % (HESSIAN_MODES,))
    if fit.kind == 'linear':
        Z = design.design_matrix()
        return Z.T @ Z
    spec = fit.params.spec
    Z = standardized(fit, design.X)
    if mode == 'gauss_newton':
        jac = slfn.grad_params(fit.params, Z)
        return jac.T @ jac

    def half_sse_gradient(flat):
        params = slfn.SlfnParams.from_flat(spec, flat)
        resid = slfn.forward(params, Z) - design.y
        return slfn.grad_params(params, Z).T @ resid

    theta = fit.params.flat
    result = np.empty((spec.P, spec.P))
    for k in range(spec.P):
        step = FD_STEP * max(1.0, abs(theta[k]))
        e = np.zeros(spec.P)
        e[k] = step
        result[:, k] = (half_sse_gradient(theta + e) - half_sse_gradient(theta - e)) / (2 * step)
    return 0.5 * (result + result.T)


def select_model(design, H_candidates, criterion='bic', opts=None, include_linear=True):
    r"""
    Fits every candidate H and picks the minimizer of the chosen criterion.

    Returns:
        tuple: (best H, list of table rows, dict H -> FitResult)

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.estimator import *  # NOQA
        >>> from momentann.within import design_from_arrays
        >>> rng = np.random.RandomState(11)
        >>> truth = slfn.SlfnParams(slfn.SlfnSpec(2, 2), [[1.0, -2.0], [2.0, 1.0]], [3.0, -2.0])
        >>> X = rng.uniform(-2, 2, (500, 2))
        >>> design = design_from_arrays(slfn.forward(truth, X) + 0.1 * rng.randn(500), X)
        >>> opts = FitOptions(restarts=4, seed=0)
        >>> best_bic, table, fits = select_model(design, [1, 2, 3, 4], 'bic', opts)
        >>> rows = [row for row in table if row['H'] > 0 and row['df'] is not None]
        >>> best_aic = min(rows, key=lambda row: row['aic'])['H']
        >>> assert best_bic <= best_aic
        >>> assert all(row['converged'] for row in rows if row['H'] == best_bic)
        >>> assert table[0]['H'] == 0 and table[0]['model'] == 'linear'
        >>> single, table, _ = select_model(design, [2], 'aic', opts, include_linear=False)
        >>> assert single == 2 and len(table) == 1

    Example1:
        >>> # ENABLE_DOCTEST
        >>> # BIC never prefers a larger network than AIC, and never an unconverged one
        >>> from momentann.estimator import *  # NOQA
        >>> from momentann.within import design_from_arrays
        >>> rng = np.random.RandomState(13)
        >>> truth = slfn.SlfnParams(slfn.SlfnSpec(2, 2), [[1.0, -2.0], [2.0, 1.0]], [3.0, -2.0])
        >>> opts = FitOptions(restarts=20, seed=0)
        >>> reps, ordered = 50, 0
        >>> for _ in range(reps):
        ...     X = rng.uniform(-2, 2, (2000, 2))
        ...     design = design_from_arrays(slfn.forward(truth, X) + 0.1 * rng.randn(2000), X)
        ...     best_bic, _, fits = select_model(design, range(1, 7), 'bic', opts, include_linear=False)
        ...     converged = [H for H in fits if fits[H].converged]
        ...     assert fits[best_bic].converged or not converged
        ...     best_aic = min(converged or fits, key=lambda H: (fits[H].aic, H))
        ...     ordered += int(best_bic <= best_aic)
        >>> assert ordered >= 0.95 * reps
    """
    opts = FitOptions() if opts is None else opts
    if criterion not in CRITERIA:
        raise InputError('criterion must be one of %s' % (CRITERIA,))
    if not H_candidates:
        raise InputError('no candidate H values')

    table, fits, errors = [], {}, {}
    if include_linear:
        try:
            linear = fit_linear(design)
            table.append(_table_row(linear, 'linear'))
        except (NumericalError, InputError) as ex:
            logger.warning('linear reference fit failed: %s' % (ex,))

    for H in tqdm(list(H_candidates), leave=False, disable=not opts.progress):
        _, fit, ex = workers.fit_candidate_star(H, design, opts)
        if ex is not None:
            logger.warning('candidate H=%d failed: %s' % (H, ex))
            errors[H] = ex
            table.append({'model': 'slfn', 'H': H, 'df': None, 'aic': None, 'bic': None,
                          'sigma_hat': None, 'converged': False, 'error': str(ex)})
            continue
        fits[H] = fit
        table.append(_table_row(fit, 'slfn'))

    if not fits:
        raise NumericalError('all %d candidates failed' % (len(list(H_candidates)),))
    eligible = {H: fit for H, fit in fits.items() if fit.converged}
    if not eligible:
        logger.warning('no candidate converged; selecting among unconverged fits')
        eligible = fits
    best_H = min(eligible, key=lambda H: (getattr(eligible[H], criterion), H))
    logger.info('Selected H=%d by %s' % (best_H, criterion.upper()))
    return best_H, table, fits


def _table_row(fit, model):
    return {
        'model': model,
        'H': fit.H,
        'df': fit.df,
        'aic': fit.aic,
        'bic': fit.bic,
        'sigma_hat': fit.sigma_hat,
        'converged': fit.converged,
        'error': '',
    }


def compare_specs(panel, features, kinds=None, method='iterated'):
    r"""
    Linear fits of the same features under several fixed-effects kinds,
    one row per kind with coefficients, standard errors and t statistics.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.estimator import *  # NOQA
        >>> from momentann.panel import load_panel
        >>> from momentann.moments import MomentFeatures
        >>> rng = np.random.RandomState(4)
        >>> regions = [{'region_id': 'r%d' % i, 'lat': 40.0, 'lon': 5.0} for i in range(12)]
        >>> feats, obs = [], []
        >>> for i in range(12):
        ...     for t in range(2000, 2008):
        ...         m = rng.normal([10, 30], [2, 5])
        ...         feats.append(MomentFeatures('r%d' % i, t, m))
        ...         obs.append({'region_id': 'r%d' % i, 'year': t, 'growth': 0.5 * m[0] - 0.1 * m[1] + rng.randn()})
        >>> table = compare_specs(load_panel(obs, regions), feats)
        >>> assert [row['kind'] for row in table] == ['pooled', 'region', 'time', 'twoway']
        >>> assert [row['df'] for row in table] == [3, 14, 10, 21]
        >>> assert all(abs(row['t_m1']) > 2 for row in table)
    """
    from momentann.within import FE_KINDS, assemble_design, within_transform

    kinds = FE_KINDS if kinds is None else kinds
    table = []
    for kind in kinds:
        fe_spec = FESpec(kind)
        raw = assemble_design(panel, features, fe_spec)
        fit = fit_linear(within_transform(raw, fe_spec, method=method))
        row = {'kind': kind, 'n': fit.n, 'df': fit.df, 'aic': fit.aic, 'bic': fit.bic, 'sigma_hat': fit.sigma_hat}
        names = fit.column_names + (['const'] if len(fit.params) > fit.J else [])
        for name, coef, se, tstat in zip(names, fit.params, fit.std_errors, fit.t_stats):
            row['coef_%s' % (name,)] = float(coef)
            row['se_%s' % (name,)] = float(se)
            row['t_%s' % (name,)] = float(tstat)
        table.append(row)
    return table


if __name__ == '__main__':
    r"""
    CommandLine:
        python -m momentann.estimator --allexamples
    """
    import multiprocessing

    multiprocessing.freeze_support()  # for win32
    import utool as ut  # NOQA

    ut.doctest_funcs()
