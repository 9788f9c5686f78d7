# -*- coding: utf-8 -*-
r"""
Batch front end.  Every verb builds one luigi task (see run_luigi) and runs
it with the local scheduler.  Options left unset fall back to the
``--config`` file (luigi format, one section per task) and then to the task
defaults.  Every option can also be set through ``MOMENTANN_<VERB>_<OPTION>``.

Exit codes: 0 success, 1 numerical failure, 2 input or validation error.

Example0:
    >>> # ENABLE_DOCTEST
    >>> # synthetic fixture through ingest, fit, select, margins and scenario
    >>> from momentann.cli import *  # NOQA
    >>> import tempfile, os
    >>> import numpy as np
    >>> import pandas as pd
    >>> from click.testing import CliRunner
    >>> from momentann.utils import read_json
    >>> runner = CliRunner()
    >>> dpath = tempfile.mkdtemp()
    >>> def invoke(*args):
    ...     return runner.invoke(cli, list(args), catch_exceptions=False)
    >>> result = invoke('--out', dpath, '--seed', '3', 'synth', '--regions', '20', '--years', '22')
    >>> assert result.exit_code == 0, result.output
    >>> data = ['--gva', os.path.join(dpath, 'gva.csv'), '--regions', os.path.join(dpath, 'regions.csv')]
    >>> result = invoke('--out', dpath, 'ingest', '--temps', os.path.join(dpath, 'temps.csv'))
    >>> assert result.exit_code == 0, result.output
    >>> features = os.path.join(dpath, 'features.csv')
    >>> assert len(pd.read_csv(features)) == 20 * 22
    >>> other = os.path.join(dpath, 'again')
    >>> assert invoke('--out', other, 'ingest', '--temps', os.path.join(dpath, 'temps.csv')).exit_code == 0
    >>> for fname in ('features.csv', 'ingest_report.json'):
    ...     assert open(os.path.join(other, fname), 'rb').read() == open(os.path.join(dpath, fname), 'rb').read()
    >>> linear = os.path.join(dpath, 'linear')
    >>> result = invoke('--out', linear, 'fit', *data, '--features', features, '--model', 'linear', '--fe-kind', 'pooled')
    >>> assert result.exit_code == 0, result.output
    >>> fit = read_json(os.path.join(linear, 'fit.json'))
    >>> assert fit['df'] == 3 and os.path.exists(os.path.join(linear, 'fit.manifest.json'))
    >>> net = os.path.join(dpath, 'slfn')
    >>> result = invoke('--out', net, 'fit', *data, '--features', features, '--fe-kind', 'time', '-H', '3', '--restarts', '3')
    >>> assert result.exit_code == 0, result.output
    >>> assert read_json(os.path.join(net, 'fit.json'))['df'] == 31
    >>> chosen = os.path.join(dpath, 'select')
    >>> result = invoke('--out', chosen, 'select', *data, '--features', features, '--fe-kind', 'time', '--H-list', '1,2', '--restarts', '2')
    >>> assert result.exit_code == 0, result.output
    >>> selection = pd.read_csv(os.path.join(chosen, 'selection.csv'))
    >>> assert list(selection.columns) == ['H', 'df', 'aic', 'bic', 'sigma_hat', 'converged']
    >>> assert list(selection.H) == [1, 2]
    >>> details = read_json(os.path.join(chosen, 'selection.json'))
    >>> assert details['table'][0]['model'] == 'linear'
    >>> assert details['best_H'] == read_json(os.path.join(chosen, 'fit.json'))['H']
    >>> fit_json = os.path.join(linear, 'fit.json')
    >>> result = invoke('--out', linear, 'margins', *data, '--features', features, '--fit', fit_json, '--svg')
    >>> assert result.exit_code == 0, result.output
    >>> margins = pd.read_csv(os.path.join(linear, 'margins.csv'))
    >>> assert list(margins.columns) == ['grid_value', 'fit', 'lower', 'upper'] and len(margins) == 101
    >>> assert np.allclose(np.diff(margins.fit) / np.diff(margins.grid_value), fit['params'][0])
    >>> result = invoke('--out', linear, 'scenario', *data, '--features', features, '--fit', fit_json, '--shift', '2,0')
    >>> assert result.exit_code == 0, result.output
    >>> scenario = pd.read_csv(os.path.join(linear, 'scenario.csv'))
    >>> assert list(scenario.columns) == ['region_id', 'baseline', 'scenario', 'delta']
    >>> assert np.allclose(scenario.delta, 2 * fit['params'][0], rtol=0, atol=1e-9)
    >>> zero = os.path.join(dpath, 'zero')
    >>> result = invoke('--out', zero, 'scenario', *data, '--features', features, '--fit', fit_json, '--shift', '0,0')
    >>> assert result.exit_code == 0 and not pd.read_csv(os.path.join(zero, 'scenario.csv')).delta.any()

Example1:
    >>> # ENABLE_DOCTEST
    >>> from momentann.cli import *  # NOQA
    >>> import tempfile, os, json
    >>> from click.testing import CliRunner
    >>> runner = CliRunner()
    >>> dpath = tempfile.mkdtemp()
    >>> missing = os.path.join(dpath, 'nope.csv')
    >>> result = runner.invoke(cli, ['--out', dpath, 'fit', '--gva', missing, '--regions', missing, '--features', missing])
    >>> assert result.exit_code == 2 and 'missing input' in result.output
    >>> result = runner.invoke(cli, ['--out', dpath, 'synth', '--regions', '3', '--years', '2'])
    >>> result = runner.invoke(cli, ['--out', dpath, 'fit', '--gva', os.path.join(dpath, 'gva.csv'),
    ...                              '--regions', os.path.join(dpath, 'regions.csv'), '--temps', os.path.join(dpath, 'temps.csv'),
    ...                              '--fe-kind', 'twoway', '--model', 'linear', '--min-periods', '5'])
    >>> assert result.exit_code == 2 and 'empty dataset' in result.output
"""
from __future__ import absolute_import, division, print_function
import click
import json
import logging
import luigi

from os.path import exists
from momentann import run_luigi
from momentann.utils import InputError, NumericalError, exit_code_for

logger = logging.getLogger(__name__)


def _split(value, cast, what):
    if value is None:
        return None
    try:
        return tuple(cast(item) for item in value.split(',') if item.strip() != '')
    except ValueError:
        raise click.BadParameter('%s must be a comma separated list, got %r' % (what, value))


def fail(ctx, exception):
    code = exit_code_for(exception)
    error = {'error': exception.__class__.__name__, 'message': str(exception), 'exit_code': code}
    click.echo(json.dumps(error), err=True)
    ctx.exit(code)


def require_inputs(task, names):
    for name in names:
        fpath = getattr(task, name)
        if not fpath:
            raise InputError('missing input: --%s is required' % (name.replace('_', '-'),))
        if not exists(fpath):
            raise InputError('missing input %s (--%s)' % (fpath, name.replace('_', '-')))


def data_inputs(task):
    names = ['gva', 'regions']
    names.append('features' if task.features else 'temps')
    return names


def run_task(ctx, task_cls, options, inputs=None):
    """Instantiates ``task_cls`` with the options that were set and builds it."""
    try:
        kwargs = {key: value for key, value in options.items() if value is not None}
        for key in ('seed', 'out'):
            if ctx.obj.get(key) is not None and key in dict(task_cls.get_params()):
                kwargs[key] = ctx.obj[key]
        task = task_cls(**kwargs)
        if inputs is not None:
            require_inputs(task, inputs(task))
    except Exception as ex:  # NOQA
        fail(ctx, ex)

    del run_luigi.FAILURES[:]
    result = luigi.build(
        [task], local_scheduler=True, workers=1, detailed_summary=True, log_level='WARNING'
    )
    if run_luigi.FAILURES:
        fail(ctx, run_luigi.FAILURES[0][1])
    if not result.scheduling_succeeded:
        fail(ctx, NumericalError('%s did not complete (%s)' % (task.task_id, result.status)))
    click.echo(json.dumps({'status': 'ok', 'task': task.task_family, 'out': task.out}))


def data_options(func):
    decorators = [
        click.option('--gva', default=None, help='Growth CSV: region_id,year,growth.'),
        click.option('--regions', default=None, help='Region CSV: region_id,lat,lon.'),
        click.option('--features', default=None, help='Feature CSV from `ingest`.'),
        click.option('--temps', default=None, help='Daily CSV, used when --features is not given.'),
        click.option('-K', '--moments', 'K', type=int, default=None, help='Number of moments [2].'),
        click.option('--min-days', type=int, default=None, help='Minimum days per region-year [300].'),
        click.option('--max-abs-growth', type=float, default=None, help='Trim |growth| >= this [10].'),
        click.option('--min-periods', type=int, default=None, help='Minimum years per region [5].'),
        click.option(
            '--fe-kind',
            type=click.Choice(['pooled', 'region', 'time', 'twoway']),
            default=None,
            help='Fixed effects [time].',
        ),
        click.option('--location/--no-location', default=None, help='Centroid inputs.'),
        click.option(
            '--demeaning', type=click.Choice(['iterated', 'single_pass']), default=None
        ),
    ]
    for decorator in reversed(decorators):
        func = decorator(func)
    return func


def estimation_options(func):
    decorators = [
        click.option('--model', type=click.Choice(['linear', 'slfn']), default=None, help='[slfn]'),
        click.option('-H', '--hidden', 'H', type=int, default=None, help='Hidden units [3].'),
        click.option('--restarts', type=int, default=None, help='Random restarts [20].'),
        click.option('--max-iterations', type=int, default=None),
        click.option('--gradient-tolerance', type=float, default=None),
        click.option('--step-tolerance', type=float, default=None),
        click.option('--function-tolerance', type=float, default=None),
        click.option(
            '--hessian-mode',
            type=click.Choice(['gauss_newton', 'finite_difference']),
            default=None,
        ),
        click.option('--processes', type=int, default=None, help='Restart worker processes [1].'),
    ]
    for decorator in reversed(decorators):
        func = decorator(func)
    return func


@click.group(context_settings={'auto_envvar_prefix': 'MOMENTANN'})
@click.option('--config', default=None, help='Config file with per-task sections (luigi format).')
@click.option('--seed', type=int, default=None, help='Seed for restarts and synthetic data.')
@click.option('--out', default=None, help='Output directory [out].')
@click.option('--verbose', is_flag=True, default=False)
@click.pass_context
def cli(ctx, config, seed, out, verbose):
    """Fixed-effects panel regressions on temperature moments."""
    ctx.obj = {'seed': seed, 'out': out}
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING)
    if config:
        if not exists(config):
            fail(ctx, InputError('missing input %s (--config)' % (config,)))
        luigi.configuration.add_config_path(config)


@cli.command()
@click.option('--generator', type=click.Choice(['linear', 'slfn']), default=None)
@click.option('--regions', type=int, default=None, help='Number of regions [30].')
@click.option('--years', type=int, default=None, help='Number of years [12].')
@click.option('-K', '--moments', 'K', type=int, default=None)
@click.option('-H', '--hidden', 'H', type=int, default=None)
@click.option('--noise-sd', type=float, default=None)
@click.option('--missing-rate', type=float, default=None)
@click.pass_context
def synth(ctx, **options):
    """Synthetic fixture with known ground truth."""
    run_task(ctx, run_luigi.Synthesize, options)


@cli.command()
@click.option('--temps', default=None, help='Daily CSV: region_id,date,tmean.')
@click.option('-K', '--moments', 'K', type=int, default=None)
@click.option('--min-days', type=int, default=None)
@click.pass_context
def ingest(ctx, **options):
    """Daily series to annual moment features."""
    run_task(ctx, run_luigi.IngestFeatures, options, lambda task: ['temps'])


@cli.command()
@data_options
@estimation_options
@click.pass_context
def fit(ctx, **options):
    """Fit one linear or network model."""
    run_task(ctx, run_luigi.FitModel, options, data_inputs)


@cli.command()
@data_options
@estimation_options
@click.option('--H-list', 'H_list', default=None, help='Candidate H values, e.g. 1,2,3.')
@click.option('--criterion', type=click.Choice(['aic', 'bic']), default=None)
@click.pass_context
def select(ctx, **options):
    """Choose H by AIC or BIC."""
    options['H_list'] = _split(options['H_list'], int, '--H-list')
    if options['H_list'] is not None and not options['H_list']:
        fail(ctx, InputError('select needs a nonempty H list'))
    run_task(ctx, run_luigi.SelectModel, options, data_inputs)


@cli.command()
@data_options
@click.pass_context
def compare(ctx, **options):
    """Linear fits under every fixed-effects kind."""
    run_task(ctx, run_luigi.CompareSpecs, options, data_inputs)


def fit_inputs(task):
    names = data_inputs(task)
    if task.fit:
        names.append('fit')
    return names


@cli.command()
@data_options
@estimation_options
@click.option('--fit', default=None, help='fit.json; fitted from the options when omitted.')
@click.option('--varied', default=None, help='Input name [m1].')
@click.option('--direction', default=None, help='Interaction direction, e.g. 1,1.')
@click.option('--region', default=None, help='Location curve for this region_id.')
@click.option('--contour', default=None, help='Two input names, e.g. m1,m2.')
@click.option('--grid-points', type=int, default=None)
@click.option('--level', type=float, default=None)
@click.option('--svg/--no-svg', default=None)
@click.pass_context
def margins(ctx, **options):
    """Marginal, interaction, location curves and contour grids."""
    options['direction'] = _split(options['direction'], float, '--direction')
    options['contour'] = _split(options['contour'], str, '--contour')
    run_task(ctx, run_luigi.Margins, options, fit_inputs)


@cli.command()
@data_options
@estimation_options
@click.option('--fit', default=None, help='fit.json; fitted from the options when omitted.')
@click.option('--shift', default=None, help='Shift per moment, e.g. 2,0.')
@click.pass_context
def scenario(ctx, **options):
    """Per-region effect of a uniform shift of the moments."""
    options['shift'] = _split(options['shift'], float, '--shift')
    run_task(ctx, run_luigi.Scenario, options, fit_inputs)


def main():
    cli(prog_name='momentann')


if __name__ == '__main__':
    main()
