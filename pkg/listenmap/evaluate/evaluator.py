import io
import json
import os
from string import Template
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from typing import Optional

import numpy as np
import pandas as pd

import listenmap
from listenmap import PipelineModelWrapper
from listenmap import functions
from listenmap.classifiers import ModelKind, get_classifier, score
from listenmap.data import parameter_data
from listenmap.data.templates import model_labels, target_labels, templates
from listenmap.featurizers.featurizer_base import feature_set_label, read_sidecar
from listenmap.records import DataError
from .metrics import auc, balanced_accuracy, precision_at_k, roc_curve_points


@dataclass
class EvalRow:
    model: str
    feature_set: str
    target: str
    balanced_accuracy: float = float('nan')
    precision_at_k: float = float('nan')
    auc: float = float('nan')
    n_train: int = 0
    n_test: int = 0
    positive_prevalence: float = float('nan')
    seed: int = 0
    status: str = 'ok'
    error: Optional[str] = None

    @property
    def failed(self):
        return self.status != 'ok'

    def sort_key(self):
        metric = -self.balanced_accuracy if not self.failed else 0.0
        return (self.failed, metric, self.target, self.model, self.feature_set)

    def to_dict(self):
        row = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, float) and np.isnan(value):
                value = None
            row[f.name] = value
        return row


report_columns = [f.name for f in fields(EvalRow)]


class EvalReport:
    """Evaluation rows ordered by balanced accuracy (best first), ties broken
    by target, model and feature set. Failed cells come last."""
    def __init__(self, rows, provenance=None):
        self.rows = sorted(rows, key=EvalRow.sort_key)
        self.provenance = provenance or {}

    def __len__(self):
        return len(self.rows)

    @property
    def failed_cells(self):
        return [r for r in self.rows if r.failed]

    def for_target(self, target):
        return [r for r in self.rows if r.target == target]

    def to_frame(self):
        return pd.DataFrame([r.to_dict() for r in self.rows], columns=report_columns)

    def to_dict(self):
        return {'rows': [r.to_dict() for r in self.rows],
                'provenance': self.provenance}


def run_cell(kind, feature_set, target, train, test, config,
             k_percent=5.0, threshold=0.5, stats=None):
    """
    Train one (model, feature set, target) cell and score its test split.

    Returns (EvalRow, ModelArtifact or None, ROC points or None). A cell that
    raises is returned as a failed row carrying the error text instead of
    stopping the matrix.
    """
    kind = ModelKind(kind)
    row = EvalRow(kind.value, feature_set, target, n_train=len(train),
                  n_test=len(test), seed=config.seed)
    try:
        y_train, y_test = train.labels(target), test.labels(target)
        if len(test):
            row.positive_prevalence = float(np.mean(y_test))
        flatten = not kind.sequential
        classifier = get_classifier(kind, config)
        artifact = classifier.fit(train.features(flatten), y_train, target=target,
                                  feature_set=train.spec.feature_set, stats=stats)
        scores = score(artifact, test)
        row.balanced_accuracy = balanced_accuracy(y_test, scores, threshold)
        row.precision_at_k = precision_at_k(y_test, scores, k_percent)
        row.auc = auc(y_test, scores)
        roc = roc_curve_points(y_test, scores)
    except DataError as err:
        row.status, row.error = 'failed', 'DataError: %s' % err
        return row, None, None
    except Exception as err:
        row.status, row.error = 'error', '%s: %s' % (type(err).__name__, err)
        return row, None, None
    return row, artifact, roc


def _run_cell_args(args):
    return run_cell(*args)


def run_matrix(cells, jobs=1):
    """
    Run evaluation cells, in worker processes when jobs > 1.

    :param cells: Argument tuples for run_cell.
    :type cells: list

    :param jobs: Number of worker processes.
    :type jobs: int, optional
    """
    cells = list(cells)
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_run_cell_args, cells))
    return [run_cell(*cell) for cell in cells]


def format_metric(value):
    return '' if value is None or np.isnan(value) else '%.4f' % value


def summary_text(frame, target, seed=None):
    "Plain-text results table of one target from a report frame"
    rows = frame[frame['target'] == target]
    header = templates['report_row'].format(model='Model', features='Features',
                                            balanced_accuracy='Balanced Accuracy',
                                            precision_at_k='Precision@k', auc='AUC')
    lines = [header, '-' * len(header)]
    for _, r in rows.iterrows():
        line = templates['report_row'].format(
                model=model_labels.get(r['model'], r['model']),
                features=feature_set_label(r['feature_set'].split('+')),
                balanced_accuracy=format_metric(r['balanced_accuracy']),
                precision_at_k=format_metric(r['precision_at_k']),
                auc=format_metric(r['auc']))
        if r['status'] != 'ok':
            line += '  [%s]' % r['status']
        lines.append(line.rstrip())
    n_failed = int((rows['status'] != 'ok').sum())
    return Template(templates['report_summary']).substitute(
            target_label=target_labels.get(target, target), n_rows=len(rows),
            n_failed=n_failed, seed='' if seed is None else seed,
            table_txt='\n'.join(lines))


class Evaluator(PipelineModelWrapper):
    def __init__(self, pipeline_model=None, **kwargs):
        """Train and score every (model kind, feature set, target) cell on
        the materialized datasets, and write the artifacts and reports.

        Reports go to reports/report.csv and reports/report.json (rows plus
        provenance). Trained parameters go to
        artifacts/<kind>_<feature set>_<target>.json/.bin.
        """
        if pipeline_model is None:
            pipeline_model = listenmap.ListenershipModel()
        self._lm = pipeline_model
        defaults = dict(model_kinds=[k.value for k in ModelKind],
                        targets=list(parameter_data.targets),
                        k_percent=5.0,
                        decision_threshold=0.5,
                        export_roc=True,
                        jobs=1)
        self._lm.update(kwargs, override=True)
        self._lm.update(defaults, override=False)
        self._log_strings = {
            'cell_success': '${model} on ${feature_set} for ${target}: '
                            'balanced accuracy ${balanced_accuracy}, AUC ${auc}',
            'cell_failure': '${model} on ${feature_set} for ${target}: ${error}',
            'evaluate_success': '${n_cells} cells evaluated, ${n_failed} failed',
            'summary_success': 'wrote ${path}',
            }

    def stats_for(self, name):
        "Standardization statistics recorded by the featurizer, if any"
        sidecar = os.path.join(self.output_path('featurize'), name + '.json')
        if not os.path.exists(sidecar):
            return None
        with io.open(sidecar, 'r', encoding='utf-8') as f:
            return read_sidecar(f)[2]

    def cells(self, datasets):
        "run_cell argument tuples in a fixed order"
        cells = []
        for target in self.targets:
            if target not in parameter_data.targets:
                raise ValueError('unknown target ' + repr(target))
            for name in sorted(datasets):
                train, test = datasets[name]
                stats = self.stats_for(name)
                for kind in self.model_kinds:
                    cells.append((ModelKind(kind).value, name, target, train, test,
                                  self.train_config(ModelKind(kind).value),
                                  float(self.k_percent), float(self.decision_threshold),
                                  stats))
        return cells

    def provenance(self, datasets):
        manifest = os.path.join(self.output_path('synth'), 'manifest.json')
        generator_hash = None
        if os.path.exists(manifest):
            with io.open(manifest, 'r', encoding='utf-8') as f:
                generator_hash = json.load(f).get('config_hash')
        settings = {k: v for k, v in self.settings().items()
                    if k not in ('output_dir', 'input_file', 'synth_config', 'verbose', 'jobs')}
        return {'listenmap_version': listenmap.__version__,
                'global_seed': self.global_seed,
                'split_spec': self.split_spec.to_dict(),
                'window_specs': {name: datasets[name][1].spec.to_dict()
                                 for name in sorted(datasets)},
                'train_configs': {ModelKind(k).value: self.train_config(ModelKind(k).value).to_dict()
                                  for k in self.model_kinds},
                'k_percent': float(self.k_percent),
                'decision_threshold': float(self.decision_threshold),
                'generator_config_hash': generator_hash,
                'settings_hash': functions.config_hash(settings)}

    def run(self, datasets):
        """
        Evaluate every cell and write artifacts and reports.

        :param datasets: (train, test) Dataset pairs keyed by feature set name.
        :type datasets: dict
        """
        if not datasets:
            raise DataError('no datasets to evaluate')
        results = run_matrix(self.cells(datasets), int(self.jobs or 1))
        artifacts = self.output_path('artifacts')
        reports = self.output_path('report')
        for row, artifact, roc in results:
            prefix = '%s_%s_%s' % (row.model, row.feature_set, row.target)
            if row.failed:
                self.log('cell_failure', model=row.model, feature_set=row.feature_set,
                         target=row.target, error=row.error)
                continue
            artifact.save(os.path.join(artifacts, prefix))
            if self.export_roc:
                fpr, tpr, thresholds = roc
                pd.DataFrame({'fpr': fpr, 'tpr': tpr, 'threshold': thresholds}).to_csv(
                        os.path.join(reports, 'roc_%s.csv' % prefix), index=False,
                        lineterminator='\n')
            self.log('cell_success', model=row.model, feature_set=row.feature_set,
                     target=row.target, balanced_accuracy=format_metric(row.balanced_accuracy),
                     auc=format_metric(row.auc), priority=1)

        report = EvalReport([r for r, _, _ in results], self.provenance(datasets))
        report.to_frame().to_csv(os.path.join(reports, 'report.csv'), index=False,
                                 lineterminator='\n')
        with io.open(os.path.join(reports, 'report.json'), 'w', encoding='utf-8',
                     newline='\n') as f:
            f.write(json.dumps(report.to_dict(), indent=2, sort_keys=True) + '\n')
        self.failed_cells = len(report.failed_cells)
        self.internal_failures = sum(1 for r in report.rows if r.status == 'error')
        self.log('evaluate_success', n_cells=len(report), n_failed=self.failed_cells)
        return report

    def summarize(self):
        """
        Write reports/summary_<target>.txt for each target in report.csv.

        Returns the summary texts keyed by target.
        """
        reports = self.output_path('report')
        path = os.path.join(reports, 'report.csv')
        if not os.path.exists(path):
            raise DataError('no evaluation report at %s; run train-eval first' % path)
        frame = pd.read_csv(path, dtype={'model': str, 'feature_set': str, 'target': str,
                                         'status': str})
        texts = {}
        for target in [t for t in parameter_data.targets if t in set(frame['target'])]:
            text = summary_text(frame, target, self.global_seed)
            out = os.path.join(reports, 'summary_%s.txt' % target)
            with io.open(out, 'w', encoding='utf-8', newline='\n') as f:
                f.write(text)
            self.log('summary_success', path=out, priority=1)
            texts[target] = text
        return texts


__all__ = ['EvalRow', 'EvalReport', 'Evaluator', 'run_cell', 'run_matrix',
           'summary_text', 'report_columns']
