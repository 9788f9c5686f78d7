# -*- coding: utf-8 -*-
"""
Design assembly and the pooled / region / time / two-way within
transformations.
"""
from __future__ import absolute_import, division, print_function
import logging
import numpy as np
import pandas as pd

from momentann.moments import features_to_frame, moment_columns
from momentann.utils import InputError, NumericalError

logger = logging.getLogger(__name__)


FE_KINDS = ('pooled', 'region', 'time', 'twoway')
DEMEANING_METHODS = ('iterated', 'single_pass')
LOCATION_COLUMNS = ['lat', 'lon']

DEMEAN_TOL = 1e-10
DEMEAN_MAX_SWEEPS = 1000


class FESpec(object):
    def __init__(self, kind, include_location_inputs=False):
        if kind not in FE_KINDS:
            raise InputError('fixed-effects kind must be one of %s, got %r' % (FE_KINDS, kind))
        if include_location_inputs and kind not in ('pooled', 'time'):
            raise InputError(
                'location inputs are constant within a region and are eliminated '
                'by %r demeaning; use pooled or time' % (kind,)
            )
        self.kind = kind
        self.include_location_inputs = bool(include_location_inputs)

    @property
    def hidden_bias(self):
        return self.kind == 'pooled'

    def fe_param_count(self, R, T):
        return {
            'pooled': 0,
            'region': R,
            'time': T,
            'twoway': R + T - 1,
        }[self.kind]

    def to_dict(self):
        return {'kind': self.kind, 'include_location_inputs': self.include_location_inputs}

    @classmethod
    def from_dict(cls, data):
        return cls(data['kind'], data.get('include_location_inputs', False))

    def __eq__(self, other):
        return isinstance(other, FESpec) and self.to_dict() == other.to_dict()

    def __repr__(self):
        return 'FESpec(%r, include_location_inputs=%r)' % (
            self.kind,
            self.include_location_inputs,
        )


class RawDesign(object):
    """Joined panel rows before transformation: region_id, year, y and inputs."""

    def __init__(self, frame, column_names, report):
        self.frame = frame
        self.column_names = list(column_names)
        self.report = report

    @property
    def n(self):
        return len(self.frame)


class TransformedDesign(object):
    def __init__(
        self,
        region_ids,
        years,
        y,
        X,
        y_raw,
        X_raw,
        fe_spec,
        column_names,
        method='iterated',
        sweeps=0,
    ):
        self.region_ids = np.asarray(region_ids)
        self.years = np.asarray(years)
        self.y = np.asarray(y, dtype=np.float64)
        self.X = np.asarray(X, dtype=np.float64).reshape(len(self.y), -1)
        self.y_raw = np.asarray(y_raw, dtype=np.float64)
        self.X_raw = np.asarray(X_raw, dtype=np.float64).reshape(len(self.y), -1)
        self.fe_spec = fe_spec
        self.column_names = list(column_names)
        self.method = method
        self.sweeps = sweeps
        self.R = int(len(np.unique(self.region_ids)))
        self.T = int(len(np.unique(self.years)))
        self.fe_param_count = fe_spec.fe_param_count(self.R, self.T)
        assert len(self.column_names) == self.X.shape[1]

    @property
    def n(self):
        return self.X.shape[0]

    @property
    def J(self):
        return self.X.shape[1]

    @property
    def add_constant(self):
        return self.fe_spec.kind == 'pooled'

    def design_matrix(self):
        """Regressor matrix of the linear model: inputs plus a constant when pooled."""
        if self.add_constant:
            return np.hstack((self.X, np.ones((self.n, 1))))
        return self.X

    def input_means(self):
        return self.X.mean(axis=0)

    def offsets(self):
        # raw - transformed, averaged; maps raw inputs into model space.
        return (self.X_raw - self.X).mean(axis=0)

    def column_index(self, name):
        if name not in self.column_names:
            raise InputError('design has no input %r (inputs: %s)' % (name, self.column_names))
        return self.column_names.index(name)

    def moment_indices(self):
        return [j for j, name in enumerate(self.column_names) if name not in LOCATION_COLUMNS]

    def keyed(self, values):
        index = pd.MultiIndex.from_arrays([self.region_ids, self.years], names=['region_id', 'year'])
        return pd.Series(np.asarray(values, dtype=np.float64), index=index)

    def to_frame(self):
        data = {'region_id': self.region_ids, 'year': self.years, 'y_tilde': self.y}
        for j, name in enumerate(self.column_names):
            data['%s_tilde' % (name,)] = self.X[:, j]
        return pd.DataFrame(data)

    def __repr__(self):
        return '<TransformedDesign %s n=%d J=%d R=%d T=%d>' % (
            self.fe_spec.kind,
            self.n,
            self.J,
            self.R,
            self.T,
        )


def design_from_arrays(y, X, fe_kind='time', region_ids=None, years=None, column_names=None):
    r"""
    Wraps arrays that already live in model space.  Without explicit keys
    every row belongs to its own region and to a single year.
    """
    y = np.asarray(y, dtype=np.float64)
    X = np.asarray(X, dtype=np.float64).reshape(len(y), -1)
    if region_ids is None:
        region_ids = np.array(['r%d' % (i,) for i in range(len(y))])
    if years is None:
        years = np.zeros(len(y), dtype=np.int64)
    if column_names is None:
        column_names = ['x%d' % (j + 1,) for j in range(X.shape[1])]
    return TransformedDesign(
        region_ids, years, y, X, y, X, FESpec(fe_kind), column_names, method='identity'
    )


def assemble_design(panel, features, fe_spec, strict=False):
    r"""
    Joins panel observations with moment features (and centroids).

    Args:
        panel (PanelDataset):
        features (list of MomentFeatures or DataFrame with m1..mK):
        fe_spec (FESpec):
        strict (bool): raise when an observation has no features

    Returns:
        RawDesign

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.within import *  # NOQA
        >>> from momentann.panel import load_panel
        >>> from momentann.moments import MomentFeatures
        >>> regions = [{'region_id': r, 'lat': 40.0 + i, 'lon': 2.0 * i} for i, r in enumerate('AB')]
        >>> obs = [{'region_id': r, 'year': t, 'growth': 1.0} for r in 'AB' for t in (2000, 2001)]
        >>> panel = load_panel(obs, regions)
        >>> feats = [MomentFeatures(r, t, np.array([10.0, 30.0])) for r in 'AB' for t in (2000, 2001, 2002)]
        >>> raw = assemble_design(panel, feats, FESpec('time'))
        >>> assert raw.column_names == ['m1', 'm2']
        >>> assert raw.report['features_without_observation'] == 2
        >>> raw = assemble_design(panel, feats, FESpec('time', include_location_inputs=True))
        >>> assert raw.column_names == ['m1', 'm2', 'lat', 'lon'] and raw.n == 4
    """
    if isinstance(features, pd.DataFrame):
        feat_frame = features.copy()
        feat_frame['region_id'] = feat_frame['region_id'].astype(str)
    else:
        feat_frame = features_to_frame(features)
    cols = moment_columns(feat_frame)
    if not cols:
        raise InputError('no moment features supplied')
    feat_frame = feat_frame[['region_id', 'year'] + cols]
    if feat_frame.duplicated(['region_id', 'year']).any():
        raise InputError('duplicate (region_id, year) in features')

    obs = panel.obs
    joined = obs.merge(feat_frame, on=['region_id', 'year'], how='outer', indicator=True)
    missing = joined['_merge'] == 'left_only'
    unused = joined['_merge'] == 'right_only'
    if missing.any():
        first = joined.loc[missing].iloc[0]
        message = 'missing features for %d observations (first: region %s year %d)' % (
            int(missing.sum()),
            first['region_id'],
            first['year'],
        )
        if strict:
            raise InputError(message)
        logger.warning(message)
    frame = joined.loc[joined['_merge'] == 'both'].drop(columns='_merge')
    if len(frame) == 0:
        raise InputError('empty intersection of observations and features')

    column_names = list(cols)
    if fe_spec.include_location_inputs:
        regions = panel.regions
        frame = frame.merge(
            regions[LOCATION_COLUMNS], left_on='region_id', right_index=True, how='left'
        )
        if frame[LOCATION_COLUMNS].isna().any().any():
            raise InputError('centroid coordinates missing for some regions')
        column_names += LOCATION_COLUMNS

    frame = frame.rename(columns={'growth': 'y'})
    frame = frame[['region_id', 'year', 'y'] + column_names]
    frame = frame.sort_values(['region_id', 'year']).reset_index(drop=True)
    report = {
        'rows': len(frame),
        'observations_without_features': int(missing.sum()),
        'features_without_observation': int(unused.sum()),
        'columns': column_names,
    }
    return RawDesign(frame, column_names, report)


def _group_demean(values, keys):
    means = pd.DataFrame(values).groupby(keys).transform('mean').to_numpy()
    return values - means


def _max_group_mean(values, keys):
    return float(np.abs(pd.DataFrame(values).groupby(keys).mean().to_numpy()).max())


def demean_twoway(values, region_keys, year_keys, tol=DEMEAN_TOL, max_sweeps=DEMEAN_MAX_SWEEPS):
    r"""
    Alternating region / year demeaning until every region mean and every
    year mean of every column is below ``tol``.

    Returns:
        tuple: (demeaned values, sweeps)
    """
    current = np.array(values, dtype=np.float64)
    for sweep in range(1, max_sweeps + 1):
        current = _group_demean(current, region_keys)
        current = _group_demean(current, year_keys)
        if _max_group_mean(current, region_keys) < tol:
            return current, sweep
    raise NumericalError(
        'two-way demeaning did not converge within %d sweeps (max region mean %.3e)'
        % (max_sweeps, _max_group_mean(current, region_keys))
    )


def within_transform(raw, fe_spec, method='iterated', tol=DEMEAN_TOL, max_sweeps=DEMEAN_MAX_SWEEPS):
    r"""
    Removes fixed effects from the response and every input column.

    Args:
        raw (RawDesign):
        fe_spec (FESpec):
        method (str): 'iterated' alternating projections or 'single_pass'
            y - y_r. - y_.t + y_.. (two-way only)

    Returns:
        TransformedDesign

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.within import *  # NOQA
        >>> frame = pd.DataFrame({'region_id': ['a', 'a', 'b', 'b'], 'year': [1, 2, 1, 2],
        ...                       'y': [1.0, 2.0, 3.0, 5.0], 'm1': [1.0, 2.0, 3.0, 5.0]})
        >>> raw = RawDesign(frame, ['m1'], {})
        >>> design = within_transform(raw, FESpec('twoway'))
        >>> assert np.allclose(design.y, [0.25, -0.25, -0.25, 0.25], atol=1e-12)
        >>> single = within_transform(raw, FESpec('twoway'), method='single_pass')
        >>> assert np.allclose(single.y, design.y, atol=1e-12, rtol=0)
        >>> assert design.fe_param_count == 3
        >>> pooled = within_transform(raw, FESpec('pooled'))
        >>> assert np.array_equal(pooled.y, frame['y'].values)
        >>> assert pooled.design_matrix()[:, -1].tolist() == [1.0] * 4

    Example1:
        >>> # ENABLE_DOCTEST
        >>> # group means vanish after transformation, also on unbalanced panels
        >>> from momentann.within import *  # NOQA
        >>> rng = np.random.RandomState(3)
        >>> keys = [(r, t) for r in range(8) for t in range(6) if rng.rand() > 0.3]
        >>> frame = pd.DataFrame(keys, columns=['region_id', 'year'])
        >>> frame['y'], frame['m1'], frame['m2'] = rng.randn(3, len(frame))
        >>> raw = RawDesign(frame, ['m1', 'm2'], {})
        >>> for kind, groups in [('region', ['region_id']), ('time', ['year']), ('twoway', ['region_id', 'year'])]:
        ...     design = within_transform(raw, FESpec(kind))
        ...     tol = 1e-12 if kind != 'twoway' else 1e-10
        ...     cols = np.column_stack((design.y, design.X))
        ...     for key in groups:
        ...         means = pd.DataFrame(cols).groupby(frame[key].values).mean().to_numpy()
        ...         assert np.abs(means).max() <= tol
        >>> one = RawDesign(frame[frame.region_id == frame.region_id.iloc[0]], ['m1', 'm2'], {})
        >>> assert abs(within_transform(one, FESpec('region')).y.sum()) < 1e-12
    """
    if raw.n == 0:
        raise InputError('cannot transform an empty design')
    if method not in DEMEANING_METHODS:
        raise InputError('demeaning method must be one of %s' % (DEMEANING_METHODS,))
    frame = raw.frame
    region_keys = frame['region_id'].values
    year_keys = frame['year'].values
    y_raw = frame['y'].to_numpy(dtype=np.float64)
    X_raw = frame[raw.column_names].to_numpy(dtype=np.float64)
    values = np.column_stack((y_raw, X_raw))

    sweeps = 0
    if fe_spec.kind == 'pooled':
        transformed = values.copy()
    elif fe_spec.kind == 'region':
        transformed = _group_demean(values, region_keys)
    elif fe_spec.kind == 'time':
        transformed = _group_demean(values, year_keys)
    elif method == 'single_pass':
        region_means = pd.DataFrame(values).groupby(region_keys).transform('mean').to_numpy()
        year_means = pd.DataFrame(values).groupby(year_keys).transform('mean').to_numpy()
        transformed = values - region_means - year_means + values.mean(axis=0)
    else:
        transformed, sweeps = demean_twoway(values, region_keys, year_keys, tol, max_sweeps)
        logger.info('Two-way demeaning converged after %d sweeps' % (sweeps,))

    return TransformedDesign(
        region_keys,
        year_keys,
        transformed[:, 0],
        transformed[:, 1:],
        y_raw,
        X_raw,
        fe_spec,
        raw.column_names,
        method=method,
        sweeps=sweeps,
    )


def residual_sum_diagnostics(residuals, fe_spec):
    r"""
    Largest absolute residual sum over the groups the fixed effects absorb.

    Args:
        residuals (pd.Series): indexed by (region_id, year)
        fe_spec (FESpec):

    Returns:
        dict: subset of {'overall', 'region', 'year'}

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.within import *  # NOQA
        >>> rng = np.random.RandomState(0)
        >>> frame = pd.DataFrame({'region_id': np.repeat(['a', 'b', 'c'], 5), 'year': np.tile(range(5), 3)})
        >>> frame['y'], frame['m1'] = rng.randn(2, 15)
        >>> design = within_transform(RawDesign(frame, ['m1'], {}), FESpec('region'))
        >>> beta = np.linalg.lstsq(design.X, design.y, rcond=None)[0]
        >>> diag = residual_sum_diagnostics(design.keyed(design.y - design.X @ beta), design.fe_spec)
        >>> assert set(diag) == {'region'} and diag['region'] <= 1e-10
        >>> pooled = within_transform(RawDesign(frame, ['m1'], {}), FESpec('pooled'))
        >>> Z = pooled.design_matrix()
        >>> beta = np.linalg.lstsq(Z, pooled.y, rcond=None)[0]
        >>> diag = residual_sum_diagnostics(pooled.keyed(pooled.y - Z @ beta), pooled.fe_spec)
        >>> assert diag['overall'] <= 1e-10
    """
    region_level = residuals.index.get_level_values(0)
    year_level = residuals.index.get_level_values(1)
    result = {}
    if fe_spec.kind == 'pooled':
        result['overall'] = float(abs(residuals.sum()))
    if fe_spec.kind in ('region', 'twoway'):
        result['region'] = float(residuals.groupby(region_level).sum().abs().max())
    if fe_spec.kind in ('time', 'twoway'):
        result['year'] = float(residuals.groupby(year_level).sum().abs().max())
    return result


def lsdv_slopes(frame, column_names, kind):
    r"""
    Slopes of OLS with explicit region and/or year indicator columns.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> # within-transformed OLS reproduces dummy-variable OLS on unbalanced panels
        >>> from momentann.within import *  # NOQA
        >>> rng = np.random.RandomState(7)
        >>> for rep in range(50):
        ...     R, T = rng.randint(3, 21), rng.randint(3, 11)
        ...     keys = [(r, t) for r in range(R) for t in range(T) if rng.rand() > 0.25]
        ...     frame = pd.DataFrame(keys, columns=['region_id', 'year'])
        ...     frame['m1'], frame['m2'] = rng.randn(2, len(frame))
        ...     frame['y'] = (0.7 * frame.m1 - 1.3 * frame.m2 + rng.randn(R)[frame.region_id]
        ...                   + rng.randn(T)[frame.year] + 0.1 * rng.randn(len(frame)))
        ...     raw = RawDesign(frame, ['m1', 'm2'], {})
        ...     for kind in ('region', 'time', 'twoway'):
        ...         design = within_transform(raw, FESpec(kind))
        ...         beta = np.linalg.lstsq(design.X, design.y, rcond=None)[0]
        ...         assert np.allclose(beta, lsdv_slopes(frame, ['m1', 'm2'], kind), rtol=0, atol=1e-8)
    """
    X = frame[column_names].to_numpy(dtype=np.float64)
    blocks = [X]
    if kind in ('region', 'twoway'):
        blocks.append(pd.get_dummies(frame['region_id'].astype(str)).to_numpy(dtype=np.float64))
    if kind in ('time', 'twoway'):
        dummies = pd.get_dummies(frame['year'].astype(str)).to_numpy(dtype=np.float64)
        blocks.append(dummies[:, 1:] if kind == 'twoway' else dummies)
    if kind == 'pooled':
        blocks.append(np.ones((len(frame), 1)))
    Z = np.hstack(blocks)
    coef = np.linalg.lstsq(Z, frame['y'].to_numpy(dtype=np.float64), rcond=None)[0]
    return coef[: len(column_names)]


if __name__ == '__main__':
    r"""
    CommandLine:
        python -m momentann.within --allexamples
    """
    import multiprocessing

    multiprocessing.freeze_support()  # for win32
    import utool as ut  # NOQA

    ut.doctest_funcs()
