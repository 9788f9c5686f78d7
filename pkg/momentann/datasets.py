# -*- coding: utf-8 -*-
from __future__ import absolute_import, division, print_function
import logging
import numpy as np
import pandas as pd

from momentann import moments, slfn
from momentann.panel import OBS_COLUMNS, REGION_COLUMNS, load_panel
from momentann.utils import InputError, ensure_parent

logger = logging.getLogger(__name__)


TEMPS_COLUMNS = ['region_id', 'date', 'tmean']
SCHEMAS = {
    'gva': (OBS_COLUMNS, ['year', 'growth']),
    'regions': (REGION_COLUMNS, ['lat', 'lon']),
    'temps': (TEMPS_COLUMNS, ['tmean']),
}

GENERATORS = ('linear', 'slfn')


def load_table(name, fpath):
    r"""
    Reads one of the input CSVs and checks its header and numeric columns.
    Errors carry the CSV line number (the header is line 1).

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.datasets import *  # NOQA
        >>> import tempfile, os, pytest
        >>> dpath = tempfile.mkdtemp()
        >>> fpath = os.path.join(dpath, 'gva.csv')
        >>> with open(fpath, 'w') as f:
        ...     _ = f.write('region_id,year,growth\nA,2000,1.5\nA,2001,x\n')
        >>> with pytest.raises(InputError, match='line 3'):
        ...     load_table('gva', fpath)
        >>> with open(fpath, 'w') as f:
        ...     _ = f.write('region,year,growth\nA,2000,1.5\n')
        >>> with pytest.raises(InputError, match='header'):
        ...     load_table('gva', fpath)
        >>> with open(fpath, 'w') as f:
        ...     _ = f.write('region_id,year,growth\n007,2000,1.5\n')
        >>> assert load_table('gva', fpath)['region_id'].tolist() == ['007']
    """
    if name not in SCHEMAS:
        raise InputError('unknown table %r' % (name,))
    columns, numeric = SCHEMAS[name]
    frame = _read_csv(fpath)
    missing = [col for col in columns if col not in frame.columns]
    if missing:
        raise InputError(
            '%s: header %s lacks columns %s' % (fpath, list(frame.columns), missing)
        )
    frame = frame[columns].copy()
    for col in numeric:
        frame[col] = _numeric_column(frame[col], col, fpath)
    return frame


def _read_csv(fpath):
    try:
        return pd.read_csv(fpath, dtype=str, keep_default_na=False, encoding='utf-8')
    except FileNotFoundError:
        raise InputError('missing input %s' % (fpath,))
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as ex:
        raise InputError('%s: unreadable CSV (%s)' % (fpath, ex))


def _numeric_column(values, col, fpath):
    parsed = pd.to_numeric(values.str.strip(), errors='coerce')
    bad = parsed.isna().to_numpy()
    if bad.any():
        index = int(np.flatnonzero(bad)[0])
        raise InputError(
            '%s: non-numeric %s %r at line %d' % (fpath, col, values.iloc[index], index + 2)
        )
    return parsed.astype(float)


def load_dataset(gva_fpath, regions_fpath):
    """PanelDataset from gva.csv and regions.csv."""
    obs = load_table('gva', gva_fpath)
    regions = load_table('regions', regions_fpath)
    years = obs['year'].to_numpy()
    nonint = np.flatnonzero(np.mod(years, 1) != 0)
    if len(nonint):
        raise InputError('%s: non-integer year at line %d' % (gva_fpath, nonint[0] + 2))
    obs['year'] = obs['year'].astype(np.int64)
    return load_panel(obs, regions)


def load_features(fpath):
    frame = _read_csv(fpath)
    for col in ('region_id', 'year'):
        if col not in frame.columns:
            raise InputError('%s: header lacks column %s' % (fpath, col))
    cols = moments.moment_columns(frame)
    if not cols:
        raise InputError('%s: header has no moment columns m1..mK' % (fpath,))
    frame = frame[['region_id', 'year'] + cols].copy()
    for col in ['year'] + cols:
        frame[col] = _numeric_column(frame[col], col, fpath)
    frame['year'] = frame['year'].astype(np.int64)
    return frame


def write_table(frame, fpath):
    ensure_parent(fpath)
    # pandas writes floats with repr, which round-trips exactly.
    frame.to_csv(fpath, index=False)


def seasonal_daily(rng, region_ids, latitudes, years):
    r"""
    Daily mean temperatures with a latitude-dependent annual cycle, a
    region-year level anomaly and day-to-day noise.

    Returns:
        DataFrame: region_id, date, tmean
    """
    frames = []
    for region_id, lat in zip(region_ids, latitudes):
        level = 24.0 - 0.45 * (lat - 36.0)
        amplitude = 6.0 + 0.15 * (lat - 36.0)
        for year in years:
            dates = pd.date_range('%d-01-01' % (year,), '%d-12-31' % (year,))
            phase = 2.0 * np.pi * (dates.dayofyear.to_numpy() - 15.0) / len(dates)
            anomaly = rng.normal(0.0, 1.0)
            spread = rng.uniform(2.0, 4.0)
            tmean = level + anomaly - amplitude * np.cos(phase) + rng.normal(0.0, spread, len(dates))
            frames.append(
                pd.DataFrame(
                    {
                        'region_id': region_id,
                        'date': dates.strftime('%Y-%m-%d'),
                        'tmean': np.round(tmean, 2),
                    }
                )
            )
    return pd.concat(frames, ignore_index=True)


def truth_response(truth, M):
    """Generator's regression function at raw moment rows."""
    M = np.atleast_2d(np.asarray(M, dtype=np.float64))
    if truth['generator'] == 'linear':
        return (M - np.asarray(truth['center'])) @ np.asarray(truth['beta'])
    Z = (M - np.asarray(truth['center'])) / np.asarray(truth['scale'])
    return slfn.forward(slfn.SlfnParams.from_dict(truth['network']), Z)


def synthesize(
    R=30,
    T=12,
    K=2,
    generator='linear',
    H=2,
    noise_sd=0.5,
    missing_rate=0.0,
    first_year=2000,
    seed=0,
):
    r"""
    Synthetic regions, daily temperatures and growth responses with a known
    regression function plus region and year effects.

    Returns:
        dict: frames 'gva', 'regions', 'temps', 'features' and 'truth'

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.datasets import *  # NOQA
        >>> data = synthesize(R=4, T=3, seed=1)
        >>> assert list(data['gva'].columns) == ['region_id', 'year', 'growth']
        >>> assert len(data['gva']) == 12 and len(data['regions']) == 4
        >>> assert len(data['temps']) == 4 * (366 + 365 + 365)
        >>> again = synthesize(R=4, T=3, seed=1)
        >>> assert again['gva'].equals(data['gva']) and again['temps'].equals(data['temps'])
        >>> feats = data['features']
        >>> resid = (data['gva'].growth.values - truth_response(data['truth'], feats[['m1', 'm2']].values)
        ...          - np.array(data['truth']['region_effects'])[np.repeat(range(4), 3)]
        ...          - np.tile(data['truth']['year_effects'], 4))
        >>> assert np.allclose(resid, data['truth']['noise'], rtol=0, atol=1e-12)

    Example1:
        >>> # ENABLE_DOCTEST
        >>> from momentann.datasets import *  # NOQA
        >>> data = synthesize(R=6, T=4, generator='slfn', H=3, missing_rate=0.3, seed=2)
        >>> assert len(data['gva']) < 24 and data['truth']['network']['H'] == 3
        >>> assert np.isfinite(truth_response(data['truth'], [[10.0, 30.0]])).all()
    """
    if generator not in GENERATORS:
        raise InputError('generator must be one of %s' % (GENERATORS,))
    if R < 1 or T < 1 or K < 1:
        raise InputError('need R, T, K >= 1')
    if not 0 <= missing_rate < 1:
        raise InputError('missing_rate must be in [0, 1)')
    rng = np.random.default_rng(seed)

    region_ids = ['R%03d' % (r,) for r in range(R)]
    years = list(range(first_year, first_year + T))
    regions = pd.DataFrame(
        {
            'region_id': region_ids,
            'lat': np.round(rng.uniform(36.0, 62.0, R), 4),
            'lon': np.round(rng.uniform(-9.0, 30.0, R), 4),
        }
    )
    temps = seasonal_daily(rng, region_ids, regions['lat'].to_numpy(), years)
    features, _ = moments.build_features(temps, K=K, min_days=1)
    feat_frame = moments.features_to_frame(features)
    M = feat_frame[moments.moment_columns(feat_frame)].to_numpy()

    scale = M.std(axis=0)
    scale[~(scale > 0)] = 1.0
    truth = {
        'generator': generator,
        'K': K,
        'seed': seed,
        'noise_sd': noise_sd,
        'center': M.mean(axis=0),
        'scale': scale,
    }
    # Each moment moves growth by about one percentage point per standard deviation.
    if generator == 'linear':
        truth['beta'] = rng.normal(0.0, 1.0, K) / scale
    else:
        spec = slfn.SlfnSpec(K, H)
        theta0 = rng.normal(0.0, 1.5, (H, K))
        theta1 = rng.normal(0.0, 2.0, H)
        truth['network'] = slfn.SlfnParams(spec, theta0, theta1).to_dict()
    region_effects = rng.normal(0.0, 1.0, R)
    year_effects = rng.normal(0.0, 1.0, T)
    truth['region_effects'] = region_effects
    truth['year_effects'] = year_effects

    r_index = feat_frame['region_id'].map({r: i for i, r in enumerate(region_ids)}).to_numpy()
    t_index = feat_frame['year'].to_numpy() - first_year
    noise = rng.normal(0.0, noise_sd, len(feat_frame))
    growth = truth_response(truth, M) + region_effects[r_index] + year_effects[t_index] + noise
    gva = pd.DataFrame(
        {'region_id': feat_frame['region_id'], 'year': feat_frame['year'], 'growth': growth}
    )
    keep = rng.uniform(size=len(gva)) >= missing_rate
    truth['noise'] = noise[keep]
    gva = gva.loc[keep].reset_index(drop=True)
    logger.info(
        'Synthesized %s data: R=%d T=%d K=%d n=%d' % (generator, R, T, K, len(gva))
    )
    return {
        'gva': gva,
        'regions': regions,
        'temps': temps,
        'features': feat_frame,
        'truth': truth,
    }


if __name__ == '__main__':
    r"""
    CommandLine:
        python -m momentann.datasets --allexamples
    """
    import multiprocessing

    multiprocessing.freeze_support()  # for win32
    import utool as ut  # NOQA

    ut.doctest_funcs()
