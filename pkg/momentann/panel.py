# -*- coding: utf-8 -*-
"""Unbalanced region x year panel of growth rates plus region centroids."""
from __future__ import absolute_import, division, print_function
import logging
import numpy as np
import pandas as pd

from collections import namedtuple
from momentann.utils import InputError

logger = logging.getLogger(__name__)


OBS_COLUMNS = ['region_id', 'year', 'growth']
REGION_COLUMNS = ['region_id', 'lat', 'lon']

DEFAULT_MAX_ABS_GROWTH = 10.0
DEFAULT_MIN_PERIODS = 5


RegionMeta = namedtuple('RegionMeta', ['region_id', 'latitude', 'longitude'])
Observation = namedtuple('Observation', ['region_id', 'year', 'y'])


class PanelDataset(object):
    """
    Immutable panel.  ``obs`` holds one row per observed (region_id, year)
    cell sorted by key, ``regions`` is indexed by region_id.
    """

    def __init__(self, obs, regions):
        self._obs = obs.sort_values(['region_id', 'year']).reset_index(drop=True)
        self._regions = regions.sort_index()

    @property
    def obs(self):
        return self._obs.copy()

    @property
    def regions(self):
        return self._regions.copy()

    @property
    def R(self):
        return int(self._obs['region_id'].nunique())

    @property
    def T(self):
        return int(self._obs['year'].nunique())

    @property
    def n(self):
        return len(self._obs)

    def region(self, region_id):
        if region_id not in self._regions.index:
            raise InputError('unknown region_id %r' % (region_id,))
        row = self._regions.loc[region_id]
        return RegionMeta(region_id, float(row['lat']), float(row['lon']))

    def observations(self):
        for row in self._obs.itertuples(index=False):
            yield Observation(row.region_id, int(row.year), float(row.growth))

    def is_balanced(self):
        return self.n == self.R * self.T

    def growth_series(self):
        return self._obs.set_index(['region_id', 'year'])['growth']

    def to_frames(self):
        regions = self._regions.reset_index()[REGION_COLUMNS]
        return self._obs[OBS_COLUMNS].copy(), regions

    def __repr__(self):
        return '<PanelDataset R=%d T=%d n=%d>' % (self.R, self.T, self.n)


def _as_frame(rows, columns, what):
    if isinstance(rows, pd.DataFrame):
        frame = rows.copy()
    else:
        frame = pd.DataFrame(list(rows))
    missing = [col for col in columns if col not in frame.columns]
    if missing:
        raise InputError('%s rows are missing columns %s' % (what, missing))
    return frame[columns]


def load_panel(obs_rows, region_rows):
    r"""
    Validates growth observations and region metadata into a PanelDataset.

    Args:
        obs_rows (DataFrame or iterable of dict): region_id, year, growth
        region_rows (DataFrame or iterable of dict): region_id, lat, lon

    Returns:
        PanelDataset

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.panel import *  # NOQA
        >>> regions = [{'region_id': 'A', 'lat': 50.0, 'lon': 10.0},
        ...            {'region_id': 'B', 'lat': 40.0, 'lon': -3.0}]
        >>> obs = [{'region_id': r, 'year': t, 'growth': 1.0}
        ...        for r in 'AB' for t in (2000, 2001)]
        >>> panel = load_panel(obs, regions)
        >>> assert (panel.R, panel.T) == (2, 2)
        >>> # unbalanced panels are legal
        >>> panel = load_panel(obs[:3], regions)
        >>> assert (panel.R, panel.T, panel.n) == (2, 2, 3)
        >>> assert not panel.is_balanced()

    Example1:
        >>> # ENABLE_DOCTEST
        >>> from momentann.panel import *  # NOQA
        >>> regions = [{'region_id': 'A', 'lat': 50.0, 'lon': 10.0}]
        >>> bad = [{'region_id': 'A', 'year': 2000, 'growth': float('nan')}]
        >>> import pytest
        >>> with pytest.raises(InputError, match='non-finite response'):
        ...     load_panel(bad, regions)
        >>> dup = [{'region_id': 'A', 'year': 2000, 'growth': 1.0}] * 2
        >>> with pytest.raises(InputError, match='duplicate'):
        ...     load_panel(dup, regions)
        >>> orphan = [{'region_id': 'Z', 'year': 2000, 'growth': 1.0}]
        >>> with pytest.raises(InputError, match='unresolvable'):
        ...     load_panel(orphan, regions)
    """
    regions = _as_frame(region_rows, REGION_COLUMNS, 'region')
    obs = _as_frame(obs_rows, OBS_COLUMNS, 'observation')

    regions['region_id'] = regions['region_id'].astype(str)
    try:
        regions['lat'] = pd.to_numeric(regions['lat'], errors='raise').astype(float)
        regions['lon'] = pd.to_numeric(regions['lon'], errors='raise').astype(float)
    except (TypeError, ValueError) as ex:
        raise InputError('malformed region row: %s' % (ex,))
    if regions['region_id'].duplicated().any():
        dups = sorted(regions.loc[regions['region_id'].duplicated(), 'region_id'])
        raise InputError('duplicate region_id %s' % (dups,))
    bad_lat = ~regions['lat'].between(-90.0, 90.0)
    bad_lon = ~regions['lon'].between(-180.0, 180.0)
    if bad_lat.any() or bad_lon.any():
        bad = sorted(regions.loc[bad_lat | bad_lon, 'region_id'])
        raise InputError('coordinates out of range for regions %s' % (bad,))

    obs['region_id'] = obs['region_id'].astype(str)
    try:
        years = pd.to_numeric(obs['year'], errors='raise')
        growth = pd.to_numeric(obs['growth'], errors='raise').astype(float)
    except (TypeError, ValueError) as ex:
        raise InputError('malformed observation row: %s' % (ex,))
    if not np.all(np.mod(years, 1) == 0):
        raise InputError('malformed observation row: non-integer year')
    obs['year'] = years.astype(np.int64)
    obs['growth'] = growth

    nonfinite = ~np.isfinite(obs['growth'].values)
    if nonfinite.any():
        first = obs.loc[nonfinite].iloc[0]
        raise InputError(
            'non-finite response for region %s year %d'
            % (first['region_id'], first['year'])
        )
    duplicated = obs.duplicated(['region_id', 'year'])
    if duplicated.any():
        first = obs.loc[duplicated].iloc[0]
        raise InputError(
            'duplicate observation for region %s year %d'
            % (first['region_id'], first['year'])
        )
    unknown = ~obs['region_id'].isin(regions['region_id'])
    if unknown.any():
        raise InputError(
            'unresolvable region_id %s' % (sorted(obs.loc[unknown, 'region_id'].unique()),)
        )

    return PanelDataset(obs, regions.set_index('region_id'))


def apply_filters(
    panel, max_abs_growth=DEFAULT_MAX_ABS_GROWTH, min_periods=DEFAULT_MIN_PERIODS
):
    r"""
    Trims extreme growth rates, then drops regions observed in fewer than
    ``min_periods`` of the remaining years.

    Returns:
        tuple: (PanelDataset, report dict)

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.panel import *  # NOQA
        >>> regions = [{'region_id': r, 'lat': 45.0, 'lon': 5.0} for r in 'AB']
        >>> obs = [{'region_id': 'A', 'year': 2000 + t, 'growth': g}
        ...        for t, g in enumerate([12.3, 9.9, -10.0, 1.0, 2.0, 3.0, 4.0])]
        >>> obs += [{'region_id': 'B', 'year': 2000 + t, 'growth': 0.5} for t in range(4)]
        >>> panel = load_panel(obs, regions)
        >>> filtered, report = apply_filters(panel, 10.0, 5)
        >>> assert report['rows_trimmed'] == 2
        >>> assert report['regions_dropped'] == ['B']
        >>> assert 9.9 in filtered.obs['growth'].values
        >>> assert (filtered.R, filtered.T) == (1, 5)
        >>> again, _ = apply_filters(filtered, 10.0, 5)
        >>> assert again.obs.equals(filtered.obs)
    """
    if not max_abs_growth > 0:
        raise InputError('max_abs_growth must be positive, got %r' % (max_abs_growth,))
    if min_periods < 1:
        raise InputError('min_periods must be >= 1, got %r' % (min_periods,))

    obs = panel.obs
    keep = obs['growth'].abs() < max_abs_growth
    trimmed = obs.loc[keep]

    counts = trimmed.groupby('region_id')['year'].transform('size')
    enough = counts >= min_periods
    dropped = sorted(set(trimmed['region_id']) - set(trimmed.loc[enough, 'region_id']))
    filtered = trimmed.loc[enough]
    if len(filtered) == 0:
        raise InputError('empty dataset after filtering')

    regions = panel.regions
    result = PanelDataset(filtered, regions)
    report = {
        'rows_in': panel.n,
        'rows_trimmed': int((~keep).sum()),
        'regions_dropped': dropped,
        'rows_dropped_with_regions': int((~enough).sum()),
        'max_abs_growth': float(max_abs_growth),
        'min_periods': int(min_periods),
        'R': result.R,
        'T': result.T,
        'n': result.n,
    }
    logger.info(
        'Filtered panel: %d rows trimmed, %d regions dropped, R=%d T=%d n=%d'
        % (report['rows_trimmed'], len(dropped), result.R, result.T, result.n)
    )
    return result, report


class MarginalAverages(object):
    def __init__(self, region_means, year_means, overall, region_counts, year_counts):
        self.region_means = region_means
        self.year_means = year_means
        self.overall = overall
        self.region_counts = region_counts
        self.year_counts = year_counts


def marginal_averages(values):
    r"""
    Marginal averages over observed cells only.

    Args:
        values (pd.Series): indexed by a (region_id, year) MultiIndex

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.panel import *  # NOQA
        >>> idx = pd.MultiIndex.from_tuples([('a', 1), ('a', 2), ('b', 1), ('b', 2)])
        >>> avg = marginal_averages(pd.Series([1.0, 2.0, 3.0, 5.0], index=idx))
        >>> assert avg.region_means.tolist() == [1.5, 4.0]
        >>> assert avg.year_means.tolist() == [2.0, 3.5]
        >>> assert avg.overall == 2.75

    Example1:
        >>> # ENABLE_DOCTEST
        >>> from momentann.panel import *  # NOQA
        >>> idx = pd.MultiIndex.from_tuples([('A', 1), ('A', 2), ('B', 1)])
        >>> avg = marginal_averages(pd.Series([1.0, 3.0, 5.0], index=idx))
        >>> assert avg.region_means.to_dict() == {'A': 2.0, 'B': 5.0}
        >>> assert avg.year_means.to_dict() == {1: 3.0, 2: 3.0}
        >>> assert avg.overall == 3.0
        >>> single = marginal_averages(pd.Series([7.0], index=idx[:1]))
        >>> assert single.overall == single.region_means.iloc[0] == single.year_means.iloc[0] == 7.0
    """
    if len(values) == 0:
        raise InputError('marginal averages need at least one observed cell')
    values = values.dropna()
    region_level = values.index.get_level_values(0)
    year_level = values.index.get_level_values(1)
    grouped_r = values.groupby(region_level)
    grouped_t = values.groupby(year_level)
    return MarginalAverages(
        region_means=grouped_r.mean(),
        year_means=grouped_t.mean(),
        overall=float(values.mean()),
        region_counts=grouped_r.size(),
        year_counts=grouped_t.size(),
    )


if __name__ == '__main__':
    r"""
    CommandLine:
        python -m momentann.panel --allexamples
    """
    import multiprocessing

    multiprocessing.freeze_support()  # for win32
    import utool as ut  # NOQA

    ut.doctest_funcs()
