# -*- coding: utf-8 -*-
r"""
Delta-method prediction variance, marginal / interaction / location curves,
contour grids and uniform-shift scenarios on a fitted model.

Curves on within-transformed designs live in deviation units: every held
input sits at zero, its transformed mean.
"""
from __future__ import absolute_import, division, print_function
import logging
import numpy as np
import pandas as pd

from scipy import stats
from momentann import estimator
from momentann.utils import InputError
from momentann.within import LOCATION_COLUMNS

logger = logging.getLogger(__name__)


DEFAULT_LEVEL = 0.95
DEFAULT_GRID_POINTS = 101
DEFAULT_GRID_COVERAGE = 0.98
SINGULAR_WARNING = 'singular Hessian; pseudo-inverse used for confidence intervals'


class MarginalCurve(object):
    def __init__(self, label, grid, fitted, lower, upper, level, varied=None, direction=None,
                 reference=None, warnings=None):
        self.label = label
        self.varied = varied
        self.direction = direction
        self.grid = np.asarray(grid, dtype=np.float64)
        self.fitted = np.asarray(fitted, dtype=np.float64)
        self.lower = np.asarray(lower, dtype=np.float64)
        self.upper = np.asarray(upper, dtype=np.float64)
        self.level = float(level)
        self.reference = reference
        self.warnings = list(warnings or [])

    def to_frame(self):
        return pd.DataFrame(
            {'grid_value': self.grid, 'fit': self.fitted, 'lower': self.lower, 'upper': self.upper}
        )

    def __len__(self):
        return len(self.grid)

    def __repr__(self):
        return '<MarginalCurve %s points=%d level=%.3f>' % (self.label, len(self), self.level)


class ScenarioResult(object):
    def __init__(self, frame, shift, warnings=None):
        self.frame = frame
        self.shift = np.asarray(shift, dtype=np.float64)
        self.warnings = list(warnings or [])

    @property
    def delta(self):
        return self.frame['delta'].to_numpy()

    def to_frame(self):
        return self.frame.copy()

    def __repr__(self):
        return '<ScenarioResult regions=%d shift=%s>' % (len(self.frame), self.shift.tolist())


def inverse_hessian(fit):
    """Cached inverse (or pseudo-inverse) of the fit's Hessian."""
    cached = getattr(fit, '_inverse_hessian', None)
    if cached is not None:
        return cached
    hessian = fit.hessian
    singular = np.linalg.matrix_rank(hessian) < hessian.shape[0]
    if not singular:
        try:
            inverse = np.linalg.inv(hessian)
        except np.linalg.LinAlgError:
            singular = True
    if singular:
        logger.warning(SINGULAR_WARNING)
        inverse = np.linalg.pinv(hessian)
        if SINGULAR_WARNING not in fit.warnings:
            fit.warnings.append(SINGULAR_WARNING)
    fit._inverse_hessian = inverse
    return inverse


def prediction_variances(fit, X):
    grads = estimator.param_gradients(fit, X)
    quad = np.einsum('ij,jk,ik->i', grads, inverse_hessian(fit), grads)
    return np.maximum(fit.sigma_hat ** 2 * quad, 0.0)


def prediction_variance(fit, x):
    r"""
    sigma^2 * grad' H^-1 grad with the gradient taken over the parameters.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.inference import *  # NOQA
        >>> from momentann.within import design_from_arrays
        >>> rng = np.random.RandomState(0)
        >>> for _ in range(20):
        ...     n, J = rng.randint(20, 200), rng.randint(1, 5)
        ...     X = rng.randn(n, J)
        ...     fit = estimator.fit_linear(design_from_arrays(X @ rng.randn(J) + rng.randn(n), X))
        ...     x = rng.randn(J)
        ...     oracle = fit.sigma_hat ** 2 * x @ np.linalg.inv(X.T @ X) @ x
        ...     assert abs(prediction_variance(fit, x) - oracle) <= 1e-10
        >>> assert prediction_variance(fit, np.zeros(J)) == 0.0
        >>> fit.sigma_hat *= 3.0
        >>> assert np.isclose(prediction_variance(fit, x), 9.0 * oracle, rtol=1e-12)

    Example1:
        >>> # ENABLE_DOCTEST
        >>> # a dead hidden unit leaves the Hessian singular
        >>> from momentann.inference import *  # NOQA
        >>> from momentann import slfn
        >>> from momentann.within import FESpec
        >>> params = slfn.SlfnParams(slfn.SlfnSpec(1, 2), [[1.0], [0.0]], [1.0, 0.0])
        >>> X = np.linspace(-1, 1, 20)[:, None]
        >>> jac = slfn.grad_params(params, X)
        >>> fit = estimator.FitResult('slfn', FESpec('time'), ['m1'], params, 1.0, 20, 5, jac.T @ jac, H=2)
        >>> assert prediction_variance(fit, [0.5]) >= 0
        >>> assert SINGULAR_WARNING in fit.warnings
    """
    return float(prediction_variances(fit, np.atleast_2d(np.asarray(x, dtype=np.float64)))[0])


def t_quantile(fit, level):
    if not 0 < level < 1:
        raise InputError('confidence level must be in (0, 1), got %r' % (level,))
    return float(stats.t.isf((1.0 - level) / 2.0, fit.n - fit.df))


def held_inputs(design):
    """Evaluation point for the inputs that are not varied."""
    if design.fe_spec.kind == 'pooled':
        return design.input_means()
    return np.zeros(design.J)


def _check_compatible(fit, design):
    if list(fit.column_names) != list(design.column_names):
        raise InputError(
            'fit inputs %s do not match design inputs %s' % (fit.column_names, design.column_names)
        )


def _validate_grid(grid):
    grid = np.asarray(grid, dtype=np.float64).ravel()
    if grid.size == 0:
        raise InputError('grid must be nonempty')
    if not np.all(np.isfinite(grid)):
        raise InputError('grid values must be finite')
    if grid.size > 1 and np.any(np.diff(grid) <= 0):
        raise InputError('grid must be strictly increasing')
    return grid


def default_grid(values, points=DEFAULT_GRID_POINTS, coverage=DEFAULT_GRID_COVERAGE):
    r"""
    Evenly spaced grid over the central ``coverage`` range of ``values``.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.inference import *  # NOQA
        >>> grid = default_grid(np.arange(101.0))
        >>> assert len(grid) == 101 and np.isclose(grid[0], 1.0) and np.isclose(grid[-1], 99.0)
        >>> import pytest
        >>> with pytest.raises(InputError):
        ...     default_grid(np.ones(10))
    """
    tail = 100.0 * (1.0 - coverage) / 2.0
    lo, hi = np.percentile(np.asarray(values, dtype=np.float64), [tail, 100.0 - tail])
    if not hi > lo:
        raise InputError('input has no spread; supply an explicit grid')
    return np.linspace(lo, hi, points)


def _curve(fit, points, grid, level, label, **kwargs):
    fitted = estimator.predict(fit, points)
    half = t_quantile(fit, level) * np.sqrt(prediction_variances(fit, points))
    warnings = [w for w in fit.warnings if w == SINGULAR_WARNING]
    return MarginalCurve(label, grid, fitted, fitted - half, fitted + half, level, warnings=warnings, **kwargs)


def marginal_curve(fit, design, varied, grid=None, level=DEFAULT_LEVEL):
    r"""
    Fitted function over one input with all other inputs held at their
    design means.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.inference import *  # NOQA
        >>> from momentann.within import design_from_arrays
        >>> rng = np.random.RandomState(1)
        >>> X = rng.randn(80, 2)
        >>> design = design_from_arrays(X @ [0.8, -0.4] + 0.5 * rng.randn(80), X)
        >>> fit = estimator.fit_linear(design)
        >>> grid = np.linspace(-2, 2, 41)
        >>> curve = marginal_curve(fit, design, 0, grid)
        >>> assert np.allclose(np.diff(curve.fitted) / np.diff(grid), fit.params[0], rtol=1e-10)
        >>> assert np.all(curve.lower <= curve.fitted) and np.all(curve.fitted <= curve.upper)
        >>> assert np.array_equal(curve.to_frame().columns, ['grid_value', 'fit', 'lower', 'upper'])
        >>> again = marginal_curve(fit, design, 0, grid)
        >>> assert np.array_equal(again.upper, curve.upper)
        >>> assert len(marginal_curve(fit, design, 1)) == 101

    Example1:
        >>> # ENABLE_DOCTEST
        >>> # nominal 95% intervals cover the true line about 95% of the time
        >>> from momentann.inference import *  # NOQA
        >>> from momentann.within import design_from_arrays
        >>> rng = np.random.RandomState(2)
        >>> beta, x0, hits, reps = np.array([1.0, -0.5]), 1.5, 0, 2000
        >>> for _ in range(reps):
        ...     X = rng.randn(50, 2)
        ...     design = design_from_arrays(X @ beta + rng.randn(50), X)
        ...     curve = marginal_curve(estimator.fit_linear(design), design, 0, [x0])
        ...     hits += int(curve.lower[0] <= x0 * beta[0] <= curve.upper[0])
        >>> assert 0.93 <= hits / reps <= 0.97

    Example2:
        >>> # ENABLE_DOCTEST
        >>> # network intervals cover the generating curve
        >>> from momentann.inference import *  # NOQA
        >>> from momentann import slfn
        >>> from momentann.within import design_from_arrays
        >>> rng = np.random.RandomState(3)
        >>> truth = slfn.SlfnParams(slfn.SlfnSpec(2, 2), [[1.0, -2.0], [2.0, 1.0]], [3.0, -2.0])
        >>> grid = np.linspace(-1.5, 1.5, 31)
        >>> points = np.column_stack((grid, np.zeros(31)))
        >>> rates = []
        >>> for _ in range(200):
        ...     X = rng.uniform(-2, 2, (500, 2))
        ...     design = design_from_arrays(slfn.forward(truth, X) + 0.3 * rng.randn(500), X)
        ...     fit = estimator.fit_slfn(design, 2, estimator.FitOptions(restarts=5))
        ...     curve = marginal_curve(fit, design, 0, grid)
        ...     true = slfn.forward(truth, points)
        ...     rates.append(np.mean((curve.lower <= true) & (true <= curve.upper)))
        >>> assert np.mean(rates) >= 0.90
    """
    _check_compatible(fit, design)
    if not 0 <= varied < design.J:
        raise InputError('varied input %r out of range for J=%d' % (varied, design.J))
    grid = _validate_grid(default_grid(design.X[:, varied]) if grid is None else grid)
    points = np.tile(held_inputs(design), (len(grid), 1))
    points[:, varied] = grid
    return _curve(fit, points, grid, level, design.column_names[varied], varied=varied)


def interaction_curve(fit, design, direction, grid=None, level=DEFAULT_LEVEL):
    r"""
    Fitted function along held + s * direction.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.inference import *  # NOQA
        >>> from momentann.within import RawDesign, FESpec, within_transform
        >>> rng = np.random.RandomState(4)
        >>> frame = pd.DataFrame({'region_id': np.repeat(np.arange(10), 6), 'year': np.tile(np.arange(6), 10)})
        >>> frame['m1'], frame['m2'] = rng.randn(2, 60)
        >>> frame['y'] = 0.6 * frame.m1 + 0.9 * frame.m2 + 0.2 * rng.randn(60)
        >>> design = within_transform(RawDesign(frame, ['m1', 'm2'], {}), FESpec('region'))
        >>> fit = estimator.fit_linear(design)
        >>> grid = np.linspace(-1, 1, 21)
        >>> along = interaction_curve(fit, design, [1.0, 1.0], grid)
        >>> assert np.allclose(np.diff(along.fitted) / np.diff(grid), fit.params.sum(), rtol=1e-10)
        >>> single = interaction_curve(fit, design, [1.0, 0.0], grid)
        >>> assert np.array_equal(single.fitted, marginal_curve(fit, design, 0, grid).fitted)
        >>> surface = contour_grid(fit, design, (0, 1), grid, grid)
        >>> assert np.allclose(np.diag(surface), along.fitted, rtol=0, atol=1e-12)
        >>> import pytest
        >>> with pytest.raises(InputError):
        ...     interaction_curve(fit, design, [0.0, 0.0], grid)
    """
    _check_compatible(fit, design)
    direction = np.asarray(direction, dtype=np.float64).ravel()
    if direction.shape != (design.J,):
        raise InputError('direction has %d entries, expected J=%d' % (direction.size, design.J))
    if not np.any(direction != 0):
        raise InputError('direction must be nonzero')
    if grid is None:
        grid = default_grid(design.X @ direction / (direction @ direction))
    grid = _validate_grid(grid)
    points = held_inputs(design) + grid[:, None] * direction
    label = '+'.join(
        '%g*%s' % (d, name) for d, name in zip(direction, design.column_names) if d != 0
    )
    return _curve(fit, points, grid, level, label, direction=direction)


def contour_grid(fit, design, inputs, grid_i, grid_j):
    r"""
    Fitted values on the Cartesian grid of two inputs; entry [a, b] has
    input i at grid_i[a] and input j at grid_j[b].

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.inference import *  # NOQA
        >>> from momentann import slfn
        >>> from momentann.within import design_from_arrays
        >>> rng = np.random.RandomState(5)
        >>> X = rng.randn(200, 2)
        >>> truth = slfn.SlfnParams(slfn.SlfnSpec(2, 2), [[1.0, -1.0], [0.5, 1.5]], [2.0, -1.0])
        >>> design = design_from_arrays(slfn.forward(truth, X) + 0.1 * rng.randn(200), X)
        >>> fit = estimator.fit_slfn(design, 2, estimator.FitOptions(restarts=4))
        >>> gi, gj = np.linspace(-1, 1, 11), np.linspace(-2, 2, 9)
        >>> surface = contour_grid(fit, design, (0, 1), gi, gj)
        >>> assert surface.shape == (11, 9)
        >>> assert np.allclose(surface[:, 4], marginal_curve(fit, design, 0, gi).fitted, rtol=0, atol=1e-12)
        >>> assert np.allclose(surface[5, :], marginal_curve(fit, design, 1, gj).fitted, rtol=0, atol=1e-12)
        >>> one = contour_grid(fit, design, (0, 1), [0.3], [0.7])
        >>> assert np.isclose(one[0, 0], estimator.predict(fit, [0.3, 0.7]), rtol=0, atol=1e-14)
        >>> fit.params = slfn.SlfnParams.zeros(fit.params.spec)
        >>> assert not np.any(contour_grid(fit, design, (0, 1), gi, gj))
        >>> frame = contour_frame(gi, gj, surface)
        >>> assert list(frame.columns) == ['x_i', 'x_j', 'fit'] and len(frame) == 99
    """
    _check_compatible(fit, design)
    i, j = inputs
    if i == j:
        raise InputError('contour inputs must differ, got (%d, %d)' % (i, j))
    for index in (i, j):
        if not 0 <= index < design.J:
            raise InputError('input %r out of range for J=%d' % (index, design.J))
    grid_i = _validate_grid(grid_i)
    grid_j = _validate_grid(grid_j)
    gi, gj = np.meshgrid(grid_i, grid_j, indexing='ij')
    points = np.tile(held_inputs(design), (gi.size, 1))
    points[:, i] = gi.ravel()
    points[:, j] = gj.ravel()
    return np.asarray(estimator.predict(fit, points)).reshape(gi.shape)


def contour_frame(grid_i, grid_j, surface):
    gi, gj = np.meshgrid(grid_i, grid_j, indexing='ij')
    return pd.DataFrame({'x_i': gi.ravel(), 'x_j': gj.ravel(), 'fit': np.asarray(surface).ravel()})


def location_inputs(design, latitude, longitude):
    """Maps centroid coordinates into the design's input space."""
    lat_index = design.column_index('lat')
    lon_index = design.column_index('lon')
    offsets = design.offsets()
    return {
        lat_index: float(latitude) - offsets[lat_index],
        lon_index: float(longitude) - offsets[lon_index],
    }


def location_curve(fit, design, region, varied, grid=None, level=DEFAULT_LEVEL):
    r"""
    Marginal curve with the location inputs pinned to one region's centroid.
    ``reference`` is the region's average observed value of the varied input
    in model units (None when the region has no rows in the design).

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.inference import *  # NOQA
        >>> from momentann.panel import RegionMeta
        >>> from momentann.within import RawDesign, FESpec, within_transform
        >>> rng = np.random.RandomState(6)
        >>> R, T = 15, 8
        >>> frame = pd.DataFrame({'region_id': np.repeat(['r%02d' % r for r in range(R)], T),
        ...                       'year': np.tile(np.arange(T), R)})
        >>> frame['lat'] = np.repeat(rng.uniform(35, 60, R), T)
        >>> frame['lon'] = np.repeat(rng.uniform(-10, 30, R), T)
        >>> frame['m1'], frame['m2'] = rng.normal(10, 3, R * T), rng.normal(30, 5, R * T)
        >>> frame['y'] = 0.3 * frame.m1 * (frame.lat - 45) / 10 + 0.1 * rng.randn(R * T)
        >>> cols = ['m1', 'm2', 'lat', 'lon']
        >>> design = within_transform(RawDesign(frame, cols, {}), FESpec('time', include_location_inputs=True))
        >>> fit = estimator.fit_slfn(design, 3, estimator.FitOptions(restarts=4, seed=0))
        >>> assert np.isfinite(fit.sse)
        >>> grid = np.linspace(-4, 4, 17)
        >>> north, south = RegionMeta('n', 58.0, 5.0), RegionMeta('s', 37.0, 5.0)
        >>> a, b = location_curve(fit, design, north, 0, grid), location_curve(fit, design, south, 0, grid)
        >>> assert not np.allclose(a.fitted, b.fitted)
        >>> twin = location_curve(fit, design, RegionMeta('twin', 58.0, 5.0), 0, grid)
        >>> assert np.array_equal(twin.fitted, a.fitted) and twin.reference is None
        >>> center = RegionMeta('c', frame.lat.mean(), frame.lon.mean())
        >>> assert np.allclose(location_curve(fit, design, center, 0, grid).fitted,
        ...                    marginal_curve(fit, design, 0, grid).fitted, rtol=0, atol=1e-10)
        >>> first = RegionMeta('r00', frame.lat[0], frame.lon[0])
        >>> ref = location_curve(fit, design, first, 0, grid).reference
        >>> assert np.isclose(ref, design.X[:T, 0].mean())
        >>> import pytest
        >>> plain = within_transform(RawDesign(frame, ['m1', 'm2'], {}), FESpec('time'))
        >>> with pytest.raises(InputError, match='location'):
        ...     location_curve(estimator.fit_linear(plain), plain, north, 0, grid)
    """
    _check_compatible(fit, design)
    if not fit.fe_spec.include_location_inputs or not set(LOCATION_COLUMNS) <= set(design.column_names):
        raise InputError('fit was estimated without location inputs')
    if varied not in design.moment_indices():
        raise InputError('varied input %r is not a moment input' % (varied,))
    grid = _validate_grid(default_grid(design.X[:, varied]) if grid is None else grid)
    points = np.tile(held_inputs(design), (len(grid), 1))
    for index, value in location_inputs(design, region.latitude, region.longitude).items():
        points[:, index] = value
    points[:, varied] = grid

    rows = design.region_ids.astype(str) == str(region.region_id)
    reference = float(design.X[rows, varied].mean()) if rows.any() else None
    label = '%s@%s' % (design.column_names[varied], region.region_id)
    return _curve(fit, points, grid, level, label, varied=varied, reference=reference)


def scenario_uniform_shift(fit, design, shift, features=None):
    r"""
    Per-region average over observed years of f(x + shift) - f(x), with the
    shift applied directly in model input space.

    Args:
        fit (FitResult):
        design (TransformedDesign): the design the fit was estimated on
        shift (array_like): one entry per moment input
        features (DataFrame, optional): feature table, checked for K

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.inference import *  # NOQA
        >>> from momentann.within import RawDesign, FESpec, within_transform
        >>> rng = np.random.RandomState(7)
        >>> frame = pd.DataFrame({'region_id': np.repeat(['a', 'b', 'c'], 10), 'year': np.tile(np.arange(10), 3)})
        >>> frame['m1'], frame['m2'] = rng.randn(2, 30)
        >>> frame['y'] = frame.m1 - 0.5 * frame.m2 + 0.1 * rng.randn(30)
        >>> design = within_transform(RawDesign(frame, ['m1', 'm2'], {}), FESpec('time'))
        >>> fit = estimator.fit_linear(design)
        >>> result = scenario_uniform_shift(fit, design, [2.0, 0.0])
        >>> assert result.frame['region_id'].tolist() == ['a', 'b', 'c']
        >>> assert np.allclose(result.delta, 2 * fit.params[0], rtol=0, atol=1e-12)
        >>> assert np.array_equal(result.delta, result.frame.scenario - result.frame.baseline)
        >>> assert not np.any(scenario_uniform_shift(fit, design, [0.0, 0.0]).delta)
        >>> import pytest
        >>> with pytest.raises(InputError):
        ...     scenario_uniform_shift(fit, design, [2.0])

    Example1:
        >>> # ENABLE_DOCTEST
        >>> # network deltas agree with re-evaluating the generator
        >>> from momentann.inference import *  # NOQA
        >>> from momentann import slfn
        >>> from momentann.within import design_from_arrays
        >>> rng = np.random.RandomState(8)
        >>> truth = slfn.SlfnParams(slfn.SlfnSpec(2, 2), [[1.0, -2.0], [2.0, 1.0]], [3.0, -2.0])
        >>> X = rng.uniform(-2, 2, (1000, 2))
        >>> ids = np.array(['r%04d' % i for i in range(1000)])
        >>> design = design_from_arrays(slfn.forward(truth, X) + 0.1 * rng.randn(1000), X, region_ids=ids)
        >>> fit = estimator.fit_slfn(design, 2, estimator.FitOptions(restarts=10, seed=0))
        >>> shift = np.array([0.5, 0.0])
        >>> result = scenario_uniform_shift(fit, design, shift)
        >>> # deltas come back sorted by region id, which is row order here
        >>> assert result.frame['region_id'].tolist() == ids.tolist()
        >>> oracle = slfn.forward(truth, X + shift) - slfn.forward(truth, X)
        >>> assert np.all(np.abs(result.delta - oracle) <= 2 * fit.sigma_hat)
    """
    _check_compatible(fit, design)
    moment_idx = design.moment_indices()
    shift = np.asarray(shift, dtype=np.float64).ravel()
    if shift.shape != (len(moment_idx),):
        raise InputError(
            'shift has %d entries but the fit has %d moment inputs' % (shift.size, len(moment_idx))
        )
    if features is not None:
        from momentann.moments import moment_columns

        K = len(moment_columns(features))
        if K != len(moment_idx):
            raise InputError('features have K=%d but the fit uses %d moments' % (K, len(moment_idx)))

    full_shift = np.zeros(design.J)
    full_shift[moment_idx] = shift
    baseline = np.asarray(estimator.predict(fit, design.X))
    if np.any(full_shift != 0):
        scenario = np.asarray(estimator.predict(fit, design.X + full_shift))
    else:
        scenario = baseline.copy()
    frame = pd.DataFrame(
        {'region_id': design.region_ids.astype(str), 'baseline': baseline, 'scenario': scenario}
    )
    frame = frame.groupby('region_id', sort=True)[['baseline', 'scenario']].mean().reset_index()
    frame['delta'] = frame['scenario'] - frame['baseline']
    logger.info(
        'Scenario shift %s: mean delta %.4f over %d regions'
        % (shift.tolist(), frame['delta'].mean(), len(frame))
    )
    return ScenarioResult(frame, shift, warnings=list(fit.warnings))


if __name__ == '__main__':
    r"""
    CommandLine:
        python -m momentann.inference --allexamples
    """
    import multiprocessing

    multiprocessing.freeze_support()  # for win32
    import utool as ut  # NOQA

    ut.doctest_funcs()
