# -*- coding: utf-8 -*-
from __future__ import absolute_import, division, print_function
import luigi
import logging
import numpy as np
import pandas as pd

from luigi.util import inherits
from os.path import exists, join
from time import time
from momentann import datasets, estimator, inference, moments
from momentann.panel import apply_filters
from momentann.utils import InputError, manifest, read_json, write_json
from momentann.within import FESpec, assemble_design, residual_sum_diagnostics, within_transform

logger = logging.getLogger('luigi-interface')


SELECTION_COLUMNS = ['H', 'df', 'aic', 'bic', 'sigma_hat', 'converged']


# Exceptions raised inside tasks, in the order luigi reported them.
FAILURES = []


@luigi.Task.event_handler(luigi.Event.FAILURE)
def record_failure(task, exception):
    FAILURES.append((task, exception))


def _ints(values):
    return tuple(int(v) for v in values)


def _floats(values):
    return tuple(float(v) for v in values)


class PipelineTask(luigi.Task):
    """
    Writes ``<verb>.manifest.json`` next to its outputs and counts as
    complete only when the manifest matches the current parameters and
    input files.
    """

    out = luigi.Parameter(default='out', description='Output directory.')

    verb = None

    def input_fpaths(self):
        return []

    def manifest_target(self):
        return luigi.LocalTarget(join(self.out, '%s.manifest.json' % (self.verb,)))

    def current_manifest(self):
        config = dict(self.param_kwargs)
        config['task'] = self.__class__.__name__
        return manifest(config, self.input_fpaths())

    def write_manifest(self):
        write_json(self.manifest_target().path, self.current_manifest())

    def complete(self):
        outputs = luigi.task.flatten(self.output())
        if not all(output.exists() for output in outputs):
            return False
        if not self.manifest_target().exists():
            return False
        previous = read_json(self.manifest_target().path)
        current = self.current_manifest()
        return (previous['config_hash'], previous['inputs']) == (
            current['config_hash'],
            current['inputs'],
        )


class Synthesize(PipelineTask):
    generator = luigi.ChoiceParameter(
        choices=datasets.GENERATORS, var_type=str, default='linear',
        description='Ground-truth regression function.',
    )
    regions = luigi.IntParameter(default=30, description='Number of regions.')
    years = luigi.IntParameter(default=12, description='Number of years.')
    K = luigi.IntParameter(default=2, description='Number of moments driving the response.')
    H = luigi.IntParameter(default=2, description='Hidden units of the ground-truth network.')
    noise_sd = luigi.FloatParameter(default=0.5)
    missing_rate = luigi.FloatParameter(default=0.0, description='Share of dropped region-years.')
    seed = luigi.IntParameter(default=0)

    verb = 'synth'

    def output(self):
        return {
            'gva': luigi.LocalTarget(join(self.out, 'gva.csv')),
            'regions': luigi.LocalTarget(join(self.out, 'regions.csv')),
            'temps': luigi.LocalTarget(join(self.out, 'temps.csv')),
            'truth': luigi.LocalTarget(join(self.out, 'truth.json')),
        }

    def run(self):
        data = datasets.synthesize(
            R=self.regions,
            T=self.years,
            K=self.K,
            generator=self.generator,
            H=self.H,
            noise_sd=self.noise_sd,
            missing_rate=self.missing_rate,
            seed=self.seed,
        )
        output = self.output()
        for name in ('gva', 'regions', 'temps'):
            datasets.write_table(data[name], output[name].path)
        write_json(output['truth'].path, data['truth'])
        self.write_manifest()
        logger.info('Synthetic fixture written to %s' % (self.out,))


class IngestFeatures(PipelineTask):
    temps = luigi.Parameter(default='', description='Daily series CSV (region_id,date,tmean).')
    K = luigi.IntParameter(default=moments.DEFAULT_K, description='Number of moments.')
    min_days = luigi.IntParameter(
        default=moments.DEFAULT_MIN_DAYS, description='Minimum days per region-year.'
    )

    verb = 'ingest'

    def input_fpaths(self):
        return [self.temps]

    def output(self):
        return {
            'features': luigi.LocalTarget(join(self.out, 'features.csv')),
            'report': luigi.LocalTarget(join(self.out, 'ingest_report.json')),
        }

    def run(self):
        t_start = time()
        daily = datasets.load_table('temps', self.temps)
        features, report = moments.build_features(daily, K=self.K, min_days=self.min_days)
        if not features:
            raise InputError('no region-year has at least %d days' % (self.min_days,))
        output = self.output()
        datasets.write_table(moments.features_to_frame(features), output['features'].path)
        write_json(output['report'].path, report)
        self.write_manifest()
        logger.info(
            '%s computed %d feature rows in %.3fs'
            % (self.__class__.__name__, len(features), time() - t_start)
        )


@inherits(IngestFeatures)
class FitModel(PipelineTask):
    gva = luigi.Parameter(default='', description='Growth CSV (region_id,year,growth).')
    regions = luigi.Parameter(default='', description='Region CSV (region_id,lat,lon).')
    features = luigi.Parameter(
        default='', description='Feature CSV; computed from temps when empty.'
    )
    max_abs_growth = luigi.FloatParameter(default=10.0)
    min_periods = luigi.IntParameter(default=5)
    fe_kind = luigi.ChoiceParameter(
        choices=['pooled', 'region', 'time', 'twoway'], var_type=str, default='time'
    )
    location = luigi.BoolParameter(default=False, description='Add centroid inputs.')
    demeaning = luigi.ChoiceParameter(
        choices=['iterated', 'single_pass'], var_type=str, default='iterated'
    )
    model = luigi.ChoiceParameter(choices=estimator.MODEL_KINDS, var_type=str, default='slfn')
    H = luigi.IntParameter(default=3, description='Hidden units.')
    restarts = luigi.IntParameter(default=20)
    seed = luigi.IntParameter(default=0)
    max_iterations = luigi.IntParameter(default=10000)
    gradient_tolerance = luigi.FloatParameter(default=1e-8)
    step_tolerance = luigi.FloatParameter(default=1e-10)
    function_tolerance = luigi.FloatParameter(default=1e-10)
    hessian_mode = luigi.ChoiceParameter(
        choices=estimator.HESSIAN_MODES, var_type=str, default='gauss_newton'
    )
    processes = luigi.IntParameter(default=1, description='Worker processes for restarts.')

    verb = 'fit'

    def requires(self):
        if self.features:
            return {}
        return {'IngestFeatures': self.clone(IngestFeatures)}

    def features_fpath(self):
        if self.features:
            return self.features
        return self.requires()['IngestFeatures'].output()['features'].path

    def input_fpaths(self):
        return [self.gva, self.regions, self.features_fpath()]

    def fit_options(self):
        return estimator.FitOptions(
            restarts=self.restarts,
            seed=self.seed,
            max_iterations=self.max_iterations,
            gradient_tolerance=self.gradient_tolerance,
            step_tolerance=self.step_tolerance,
            function_tolerance=self.function_tolerance,
            hessian_mode=self.hessian_mode,
            processes=self.processes,
        )

    def load_design(self):
        panel = datasets.load_dataset(self.gva, self.regions)
        panel, filter_report = apply_filters(panel, self.max_abs_growth, self.min_periods)
        features = datasets.load_features(self.features_fpath())
        fe_spec = FESpec(self.fe_kind, self.location)
        raw = assemble_design(panel, features, fe_spec)
        design = within_transform(raw, fe_spec, method=self.demeaning)
        report = {'filters': filter_report, 'design': raw.report, 'sweeps': design.sweeps}
        return panel, features, design, report

    def output(self):
        return {
            'fit': luigi.LocalTarget(join(self.out, 'fit.json')),
            'diagnostics': luigi.LocalTarget(join(self.out, 'diagnostics.json')),
            'design': luigi.LocalTarget(join(self.out, 'design.csv')),
        }

    def run(self):
        t_start = time()
        _, _, design, report = self.load_design()
        if self.model == 'linear':
            fit = estimator.fit_linear(design)
        else:
            fit = estimator.fit_slfn(design, self.H, self.fit_options())

        resid = design.y - np.asarray(estimator.predict(fit, design.X))
        report['residual_sums'] = residual_sum_diagnostics(design.keyed(resid), design.fe_spec)
        report['warnings'] = fit.warnings
        report['restarts'] = fit.restart_summaries

        output = self.output()
        write_json(output['fit'].path, fit.to_dict())
        write_json(output['diagnostics'].path, report)
        datasets.write_table(design.to_frame(), output['design'].path)
        self.write_manifest()
        logger.info(
            '%s %r completed in %.3fs' % (self.__class__.__name__, fit, time() - t_start)
        )


def load_fit(fpath):
    if not exists(fpath):
        raise InputError('missing input %s' % (fpath,))
    return estimator.FitResult.from_dict(read_json(fpath))


@inherits(FitModel)
class SelectModel(PipelineTask):
    H_list = luigi.ListParameter(default=[1, 2, 3, 4, 5, 6, 7, 8, 9, 10])
    criterion = luigi.ChoiceParameter(choices=estimator.CRITERIA, var_type=str, default='bic')

    verb = 'select'

    def requires(self):
        return self.clone(FitModel).requires()

    def input_fpaths(self):
        return self.clone(FitModel).input_fpaths()

    def output(self):
        return {
            'selection': luigi.LocalTarget(join(self.out, 'selection.csv')),
            'details': luigi.LocalTarget(join(self.out, 'selection.json')),
            'fit': luigi.LocalTarget(join(self.out, 'fit.json')),
        }

    def run(self):
        if not self.H_list:
            raise InputError('select needs a nonempty H list')
        fit_task = self.clone(FitModel)
        _, _, design, _ = fit_task.load_design()
        best_H, table, fits = estimator.select_model(
            design, _ints(self.H_list), self.criterion, fit_task.fit_options()
        )
        output = self.output()
        rows = [row for row in table if row['model'] == 'slfn']
        frame = pd.DataFrame(rows, columns=SELECTION_COLUMNS)
        datasets.write_table(frame, output['selection'].path)
        details = {'criterion': self.criterion, 'best_H': best_H, 'table': table}
        write_json(output['details'].path, details)
        write_json(output['fit'].path, fits[best_H].to_dict())
        self.write_manifest()


@inherits(FitModel)
class CompareSpecs(PipelineTask):
    verb = 'compare'

    def requires(self):
        return self.clone(FitModel).requires()

    def input_fpaths(self):
        return self.clone(FitModel).input_fpaths()

    def output(self):
        return luigi.LocalTarget(join(self.out, 'comparison.csv'))

    def run(self):
        fit_task = self.clone(FitModel)
        panel = datasets.load_dataset(self.gva, self.regions)
        panel, _ = apply_filters(panel, self.max_abs_growth, self.min_periods)
        features = datasets.load_features(fit_task.features_fpath())
        table = estimator.compare_specs(panel, features, method=self.demeaning)
        datasets.write_table(pd.DataFrame(table), self.output().path)
        self.write_manifest()


class FitConsumer(PipelineTask):
    """Shared plumbing of tasks that read a persisted fit."""

    fit = luigi.Parameter(default='', description='fit.json; fitted from the config when empty.')

    def requires(self):
        if self.fit:
            return {}
        return {'FitModel': self.clone(FitModel)}

    def fit_fpath(self):
        if self.fit:
            return self.fit
        return self.requires()['FitModel'].output()['fit'].path

    def input_fpaths(self):
        return self.clone(FitModel).input_fpaths() + [self.fit_fpath()]

    def load(self):
        fit = load_fit(self.fit_fpath())
        # The design is rebuilt with the fit's own fixed-effects spec.
        fit_task = self.clone(FitModel, fe_kind=fit.fe_spec.kind, location=fit.fe_spec.include_location_inputs)
        panel, features, design, _ = fit_task.load_design()
        if fit.column_names != design.column_names:
            raise InputError(
                'fit inputs %s do not match the configured data %s'
                % (fit.column_names, design.column_names)
            )
        return fit, panel, features, design


@inherits(FitModel)
class Margins(FitConsumer):
    varied = luigi.Parameter(default='m1', description='Input whose curve is drawn.')
    direction = luigi.ListParameter(
        default=[], description='Interaction direction, one entry per input.'
    )
    region = luigi.Parameter(default='', description='Location curve for this region_id.')
    contour = luigi.ListParameter(default=[], description='Two input names for a contour grid.')
    grid_points = luigi.IntParameter(default=inference.DEFAULT_GRID_POINTS)
    level = luigi.FloatParameter(default=inference.DEFAULT_LEVEL)
    svg = luigi.BoolParameter(default=False, description='Also write SVG plots.')

    verb = 'margins'

    def output(self):
        outputs = {'margins': luigi.LocalTarget(join(self.out, 'margins.csv'))}
        if self.contour:
            outputs['contour'] = luigi.LocalTarget(join(self.out, 'contour.csv'))
        if self.svg:
            outputs['svg'] = luigi.LocalTarget(join(self.out, 'margins.svg'))
            if self.contour:
                outputs['contour_svg'] = luigi.LocalTarget(join(self.out, 'contour.svg'))
        return outputs

    def run(self):
        from momentann import plot

        fit, panel, _, design = self.load()
        output = self.output()
        if self.direction:
            direction = _floats(self.direction)
            grid = inference.default_grid(
                design.X @ np.asarray(direction) / np.dot(direction, direction), self.grid_points
            )
            curve = inference.interaction_curve(fit, design, direction, grid, self.level)
        else:
            varied = design.column_index(self.varied)
            grid = inference.default_grid(design.X[:, varied], self.grid_points)
            if self.region:
                curve = inference.location_curve(
                    fit, design, panel.region(self.region), varied, grid, self.level
                )
            else:
                curve = inference.marginal_curve(fit, design, varied, grid, self.level)
        datasets.write_table(curve.to_frame(), output['margins'].path)
        if self.svg:
            plot.plot_curve(curve, output['svg'].path)

        if self.contour:
            if len(self.contour) != 2:
                raise InputError('contour needs exactly two input names')
            i, j = [design.column_index(name) for name in self.contour]
            grid_i = inference.default_grid(design.X[:, i], self.grid_points)
            grid_j = inference.default_grid(design.X[:, j], self.grid_points)
            surface = inference.contour_grid(fit, design, (i, j), grid_i, grid_j)
            datasets.write_table(
                inference.contour_frame(grid_i, grid_j, surface), output['contour'].path
            )
            if self.svg:
                plot.plot_contour(grid_i, grid_j, surface, output['contour_svg'].path, labels=list(self.contour))
        for warning in curve.warnings:
            logger.warning(warning)
        self.write_manifest()


@inherits(FitModel)
class Scenario(FitConsumer):
    shift = luigi.ListParameter(default=[2.0, 0.0], description='Shift per moment input.')

    verb = 'scenario'

    def output(self):
        return luigi.LocalTarget(join(self.out, 'scenario.csv'))

    def run(self):
        fit, _, features, design = self.load()
        result = inference.scenario_uniform_shift(fit, design, _floats(self.shift), features)
        datasets.write_table(result.to_frame(), self.output().path)
        self.write_manifest()


if __name__ == '__main__':
    luigi.run()
