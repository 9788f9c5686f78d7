# -*- coding: utf-8 -*-
from __future__ import absolute_import, division, print_function
import json
import numpy as np
import utool as ut

from os import makedirs
from os.path import basename, dirname, exists


class InputError(ValueError):
    """Malformed, duplicate or missing input.  Maps to CLI exit code 2."""


class NumericalError(RuntimeError):
    """Failure of a numerical routine.  Maps to CLI exit code 1."""


def exit_code_for(exception):
    r"""
    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.utils import *  # NOQA
        >>> assert exit_code_for(InputError('bad row')) == 2
        >>> assert exit_code_for(ValueError('bad value')) == 2
        >>> assert exit_code_for(NumericalError('no restart converged')) == 1
        >>> # LinAlgError subclasses ValueError but is a numerical failure
        >>> assert exit_code_for(np.linalg.LinAlgError('singular matrix')) == 1
    """
    if isinstance(exception, (NumericalError, np.linalg.LinAlgError, FloatingPointError)):
        return 1
    if isinstance(exception, (InputError, FileNotFoundError, KeyError, ValueError)):
        return 2
    return 1


# Converts numpy scalars and arrays so that json.dump can serialize them.
def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(key): to_jsonable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        obj = float(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        # JSON has no infinities; keep them readable and reversible.
        return 'nan' if np.isnan(obj) else ('inf' if obj > 0 else '-inf')
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def from_json_float(value):
    if isinstance(value, str):
        return float(value)
    return value


def write_json(fpath, data):
    ensure_parent(fpath)
    with open(fpath, 'w') as f:
        json.dump(to_jsonable(data), f, indent=2, sort_keys=True)
        f.write('\n')


def read_json(fpath):
    with open(fpath, 'r') as f:
        return json.load(f)


def ensure_parent(fpath):
    parent = dirname(fpath)
    if parent and not exists(parent):
        makedirs(parent, exist_ok=True)


def file_hash(fpath):
    with open(fpath, 'rb') as f:
        return ut.hash_data(f.read())


def manifest(config, input_fpaths):
    r"""
    Builds the manifest written next to every pipeline output.

    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.utils import *  # NOQA
        >>> m1 = manifest({'seed': 1, 'fe_kind': 'time'}, [])
        >>> m2 = manifest({'fe_kind': 'time', 'seed': 1}, [])
        >>> assert m1['config_hash'] == m2['config_hash']
        >>> assert set(m1['versions']) >= {'momentann', 'numpy', 'scipy', 'pandas'}
    """
    import momentann
    import pandas as pd
    import scipy

    config_text = json.dumps(to_jsonable(config), sort_keys=True)
    inputs = {}
    for fpath in input_fpaths:
        if fpath and exists(fpath):
            inputs[basename(fpath)] = file_hash(fpath)
    return {
        'config': to_jsonable(config),
        'config_hash': ut.hash_data(config_text),
        'inputs': inputs,
        'versions': {
            'momentann': momentann.__version__,
            'numpy': np.__version__,
            'scipy': scipy.__version__,
            'pandas': pd.__version__,
        },
    }


if __name__ == '__main__':
    r"""
    CommandLine:
        python -m momentann.utils --allexamples
    """
    import multiprocessing

    multiprocessing.freeze_support()  # for win32
    ut.doctest_funcs()
