# -*- coding: utf-8 -*-
from __future__ import absolute_import, division, print_function
import logging
import numpy as np
import pandas as pd

from collections import namedtuple
from momentann.utils import InputError

logger = logging.getLogger(__name__)


DEFAULT_K = 2
DEFAULT_MIN_DAYS = 300


DailySeries = namedtuple('DailySeries', ['region_id', 'year', 'values'])
MomentFeatures = namedtuple('MomentFeatures', ['region_id', 'year', 'm'])


def moment(series, k):
    r"""
    Raw mean for k = 1, population central moment (1/n) sum (x - xbar)^k
    for k >= 2.

    Args:
        series (DailySeries or array_like): daily values
        k (int): order >= 1

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.moments import *  # NOQA
        >>> assert moment([5.0, 5.0, 5.0], 1) == 5.0
        >>> assert moment([5.0, 5.0, 5.0], 2) == 0.0
        >>> assert np.isclose(moment([1.0, 2.0, 3.0], 2), 2.0 / 3.0, rtol=1e-15)
        >>> assert moment([1.0, 2.0, 3.0], 3) == 0.0

    Example1:
        >>> # ENABLE_DOCTEST
        >>> # shift, scale and permutation properties on random series
        >>> from momentann.moments import *  # NOQA
        >>> rng = np.random.RandomState(0)
        >>> for _ in range(1000):
        ...     x = rng.normal(rng.uniform(-10, 25), rng.uniform(0.5, 8), rng.randint(2, 367))
        ...     c, a = rng.uniform(-10, 10), rng.uniform(-3, 3)
        ...     perm = rng.permutation(x)
        ...     assert np.isclose(moment(x + c, 1), moment(x, 1) + c, rtol=1e-12, atol=1e-12 * (1 + abs(c)))
        ...     assert moment(x, 2) >= 0
        ...     for k in (2, 3, 4):
        ...         floor = 1e-12 * moment(x, 2) ** (k / 2.0)
        ...         assert np.isclose(moment(x + c, k), moment(x, k), rtol=1e-12, atol=floor * 10)
        ...         assert np.isclose(moment(a * x, k), a ** k * moment(x, k), rtol=1e-12, atol=floor * abs(a) ** k)
        ...         assert np.isclose(moment(perm, k), moment(x, k), rtol=1e-12, atol=floor)
    """
    values = series.values if isinstance(series, DailySeries) else series
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        raise InputError('moment of an empty series')
    if k < 1:
        raise InputError('moment order must be >= 1, got %r' % (k,))
    return float(_moments(values, (k,))[0])


def _moments(values, orders):
    mean = values.mean()
    deviation = values - mean
    return [mean if k == 1 else np.mean(deviation ** k) for k in orders]


def moment_vector(values, K):
    if K < 1:
        raise InputError('K must be >= 1, got %r' % (K,))
    values = np.asarray(values, dtype=np.float64)
    return np.array(_moments(values, range(1, K + 1)), dtype=np.float64)


def build_features(daily_rows, K=DEFAULT_K, min_days=DEFAULT_MIN_DAYS):
    r"""
    Groups daily rows by region and calendar year and computes the first K
    moments of each group.

    Args:
        daily_rows (DataFrame or iterable of dict): region_id, date, tmean
        K (int): number of moments
        min_days (int): groups with fewer days are excluded

    Returns:
        tuple: (list of MomentFeatures, report dict)

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.moments import *  # NOQA
        >>> dates = pd.date_range('2001-01-01', '2001-12-31')
        >>> rows = pd.DataFrame({'region_id': 'A', 'date': dates.strftime('%Y-%m-%d'), 'tmean': 4.5})
        >>> features, report = build_features(rows, K=2)
        >>> assert len(features) == 1
        >>> assert features[0].m.tolist() == [4.5, 0.0]
        >>> assert report['groups'] == 1 and report['partial'] == []

    Example1:
        >>> # ENABLE_DOCTEST
        >>> from momentann.moments import *  # NOQA
        >>> rng = np.random.RandomState(1)
        >>> dates = pd.date_range('2000-01-01', '2000-12-31')
        >>> assert len(dates) == 366
        >>> values = rng.normal(10, 5, len(dates))
        >>> leap = pd.DataFrame({'region_id': 'A', 'date': dates.strftime('%Y-%m-%d'), 'tmean': values})
        >>> other = leap.assign(region_id='B', tmean=values + 3.0)
        >>> no_feb29 = leap[leap['date'] != '2000-02-29'].assign(region_id='C')
        >>> features, report = build_features(pd.concat([leap, other, no_feb29]), K=2)
        >>> by_region = {f.region_id: f.m for f in features}
        >>> assert np.isclose(by_region['B'][0], by_region['A'][0] + 3.0)
        >>> assert np.isclose(by_region['B'][1], by_region['A'][1])
        >>> assert not np.allclose(by_region['A'], by_region['C'])
        >>> assert np.isclose(by_region['C'][1], np.mean((no_feb29.tmean - no_feb29.tmean.mean()) ** 2))
        >>> assert [p['region_id'] for p in report['partial']] == ['C']

    Example2:
        >>> # ENABLE_DOCTEST
        >>> from momentann.moments import *  # NOQA
        >>> import pytest
        >>> short = pd.DataFrame({'region_id': 'A', 'date': pd.date_range('2003-01-01', periods=100).strftime('%Y-%m-%d'), 'tmean': 1.0})
        >>> features, report = build_features(short, K=2, min_days=300)
        >>> assert features == [] and report['excluded'][0]['days'] == 100
        >>> # line numbers count the CSV header as line 1
        >>> rows = [{'region_id': 'A', 'date': '2003-01-0%d' % d, 'tmean': 1.0} for d in (1, 2)]
        >>> with pytest.raises(InputError, match='malformed date .* at line 4'):
        ...     build_features(rows + [{'region_id': 'A', 'date': '2003-13-45', 'tmean': 1.0}], K=1)
        >>> with pytest.raises(InputError, match='non-finite temperature at line 3'):
        ...     build_features([rows[0], dict(rows[1], tmean='x')], K=1)
        >>> with pytest.raises(InputError, match='duplicate day 2003-01-01 for region A at line 4'):
        ...     build_features(rows + [rows[0]], K=1)
    """
    if K < 1:
        raise InputError('K must be >= 1, got %r' % (K,))
    if isinstance(daily_rows, pd.DataFrame):
        frame = daily_rows.copy()
    else:
        frame = pd.DataFrame(list(daily_rows))
    missing = [col for col in ('region_id', 'date', 'tmean') if col not in frame.columns]
    if missing:
        raise InputError('daily rows are missing columns %s' % (missing,))
    frame = frame.reset_index(drop=True)

    dates = pd.to_datetime(frame['date'], format='%Y-%m-%d', errors='coerce')
    if dates.isna().any():
        line = int(np.flatnonzero(dates.isna().values)[0])
        raise InputError(
            'malformed date %r at line %d' % (frame['date'].iloc[line], line + 2)
        )
    tmean = pd.to_numeric(frame['tmean'], errors='coerce').astype(float)
    nonfinite = ~np.isfinite(tmean.values)
    if nonfinite.any():
        line = int(np.flatnonzero(nonfinite)[0])
        raise InputError('non-finite temperature at line %d' % (line + 2,))

    frame = pd.DataFrame(
        {
            'region_id': frame['region_id'].astype(str),
            'year': dates.dt.year.astype(np.int64),
            'date': dates,
            'tmean': tmean,
        }
    )
    duplicated = frame.duplicated(['region_id', 'date'])
    if duplicated.any():
        line = int(np.flatnonzero(duplicated.values)[0])
        first = frame.iloc[line]
        raise InputError(
            'duplicate day %s for region %s at line %d'
            % (first['date'].strftime('%Y-%m-%d'), first['region_id'], line + 2)
        )
    # Fixed within-group order makes the summation order independent of input order.
    frame = frame.sort_values(['region_id', 'date'], kind='mergesort')

    features, partial, excluded = [], [], []
    for (region_id, year), group in frame.groupby(['region_id', 'year'], sort=True):
        days = len(group)
        expected = 366 if pd.Timestamp(year=int(year), month=12, day=31).dayofyear == 366 else 365
        if days < min_days:
            excluded.append({'region_id': region_id, 'year': int(year), 'days': days})
            continue
        if days < expected:
            partial.append({'region_id': region_id, 'year': int(year), 'days': days})
        m = moment_vector(group['tmean'].values, K)
        features.append(MomentFeatures(region_id, int(year), m))

    if excluded:
        logger.warning(
            '%d region-years excluded with fewer than %d days' % (len(excluded), min_days)
        )
    if partial:
        logger.warning('%d region-years are partial years' % (len(partial),))

    report = {
        'groups': len(features),
        'K': int(K),
        'min_days': int(min_days),
        'partial': partial,
        'excluded': excluded,
    }
    return features, report


def features_to_frame(features):
    if not features:
        return pd.DataFrame(columns=['region_id', 'year'])
    K = len(features[0].m)
    data = {
        'region_id': [f.region_id for f in features],
        'year': np.array([f.year for f in features], dtype=np.int64),
    }
    stacked = np.vstack([f.m for f in features])
    for k in range(K):
        data['m%d' % (k + 1,)] = stacked[:, k]
    return pd.DataFrame(data)


def frame_to_features(frame):
    cols = moment_columns(frame)
    if not cols:
        raise InputError('feature table has no moment columns m1..mK')
    values = frame[cols].to_numpy(dtype=np.float64)
    if not np.all(np.isfinite(values)):
        raise InputError('feature table contains non-finite moments')
    return [
        MomentFeatures(str(region_id), int(year), values[i])
        for i, (region_id, year) in enumerate(zip(frame['region_id'], frame['year']))
    ]


def moment_columns(frame):
    cols = []
    k = 1
    while 'm%d' % (k,) in frame.columns:
        cols.append('m%d' % (k,))
        k += 1
    return cols


if __name__ == '__main__':
    r"""
    CommandLine:
        python -m momentann.moments --allexamples
    """
    import multiprocessing

    multiprocessing.freeze_support()  # for win32
    import utool as ut  # NOQA

    ut.doctest_funcs()
