# -*- coding: utf-8 -*-
from __future__ import absolute_import, division, print_function
import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # NOQA
import numpy as np  # NOQA

from momentann.utils import ensure_parent  # NOQA


# 800 x 600 viewBox at matplotlib's 72 points per inch
FIGSIZE = (800.0 / 72.0, 600.0 / 72.0)


def plot_curve(curve, fpath, xlabel=None, ylabel='growth effect'):
    r"""
    Example0:
        >>> # ENABLE_DOCTEST
        >>> from momentann.plot import *  # NOQA
        >>> from momentann.inference import MarginalCurve
        >>> import tempfile, os
        >>> grid = np.linspace(-1, 1, 5)
        >>> curve = MarginalCurve('m1', grid, grid, grid - 0.1, grid + 0.1, 0.95, reference=0.2)
        >>> fpath = plot_curve(curve, os.path.join(tempfile.mkdtemp(), 'margins.svg'))
        >>> text = open(fpath).read()
        >>> assert 'viewBox="0 0 800 600"' in text
    """
    ensure_parent(fpath)
    fig, ax = plt.subplots(1, 1, figsize=FIGSIZE)
    ax.fill_between(curve.grid, curve.lower, curve.upper, color='0.8', label='%d%% CI' % round(100 * curve.level))
    ax.plot(curve.grid, curve.fitted, color='k', label='fit')
    if curve.reference is not None:
        ax.axvline(curve.reference, color='r', linestyle='--', label='typical value')
    ax.axhline(0.0, color='0.5', linewidth=0.5)
    ax.set_xlabel(xlabel or '%s (deviation from mean)' % (curve.label,))
    ax.set_ylabel(ylabel)
    ax.legend(loc='best')
    fig.savefig(fpath, format='svg', dpi=72)
    plt.close(fig)
    return fpath


def plot_contour(grid_i, grid_j, surface, fpath, labels=('x_i', 'x_j')):
    ensure_parent(fpath)
    fig, ax = plt.subplots(1, 1, figsize=FIGSIZE)
    gi, gj = np.meshgrid(grid_i, grid_j, indexing='ij')
    filled = ax.contourf(gi, gj, surface, levels=20, cmap='RdBu_r')
    ax.contour(gi, gj, surface, levels=[0.0], colors='k', linewidths=0.8)
    fig.colorbar(filled, ax=ax, label='growth effect')
    ax.set_xlabel(labels[0])
    ax.set_ylabel(labels[1])
    fig.savefig(fpath, format='svg', dpi=72)
    plt.close(fig)
    return fpath


if __name__ == '__main__':
    r"""
    CommandLine:
        python -m momentann.plot --allexamples
    """
    import multiprocessing

    multiprocessing.freeze_support()  # for win32
    import utool as ut  # NOQA

    ut.doctest_funcs()
