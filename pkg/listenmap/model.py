import io
import json
import logging
import os
from string import Template

import listenmap
from . import functions
from .data import parameter_data
from .records import DataError

logger = logging.getLogger(__name__)

#Sections of a pipeline JSON file; their keys are flattened onto the model
config_sections = ['paths', 'synth', 'ingest', 'analyze', 'features', 'train', 'eval']

_levels = {'warning': logging.WARNING,
           'error': logging.ERROR,
           'fail': logging.ERROR,
           'failure': logging.ERROR}


def default_settings():
    "Flat defaults for every configurable attribute of a pipeline run"
    return dict(
            #paths
            input_file=None,
            synth_config=None,
            output_dir='.',
            n_beneficiaries=None,
            #global
            seed=None,
            jobs=1,
            verbose=1,
            #ingest
            engagement_threshold=parameter_data.engagement_threshold,
            technical_success_statuses=list(parameter_data.technical_success_tokens),
            slot_start_hour=parameter_data.slot_start_hour,
            slot_end_hour=parameter_data.slot_end_hour,
            slot_hours=parameter_data.slot_hours,
            #analyze
            pickup_rate_cut=0.5,
            engagement_rate_cut=0.5,
            long_trajectory_min_weeks=51,
            short_trajectory_max_weeks=19,
            engagement_rate_basis='picked',
            trajectory_length_basis='engaged',
            screen_before_bucketing=False,
            efficacy_unit='beneficiary_week',
            gap_weeks=6,
            timeline_beneficiaries=[],
            #features
            n_features_weeks=6,
            n_offset_weeks=1,
            stride_weeks=1,
            feature_sets=[list(fs) for fs in parameter_data.default_feature_sets],
            train_fraction=0.8,
            #train
            model_kinds=['random', 'logistic_regression', 'feedforward_nn', 'lstm'],
            epochs=50,
            batch_size=256,
            learning_rate=1e-3,
            beta1=0.9,
            beta2=0.999,
            epsilon=1e-8,
            l2_penalty=0.0,
            early_stop_patience=None,
            validation_fraction=0.1,
            positive_class_weight=None,
            hidden_units=128,
            n_hidden_layers=3,
            lstm_units=128,
            model_overrides={},
            #eval
            targets=list(parameter_data.targets),
            k_percent=5.0,
            decision_threshold=0.5,
            export_roc=True,
            )


class ListenershipModel:
    """
    The central object of a listenership pipeline run consisting of:

    - the location of raw call records (or of a synthetic cohort config)
    - ingest settings (engagement threshold, time slot grid, technical success)
    - cohort analysis settings (bucket cuts, screening, efficacy unit)
    - rolling window and train/test split settings
    - training settings per model kind and evaluation settings
    - the output directory where every stage writes its files
    """
    def __init__(self, **kwargs):
        """Class for managing listenership pipeline runs.

           :param setup_file: Specify a JSON pipeline config from which to load the model.
           :type setup_file: str
            """
        self._required = {'output_dir': str,
                          'seed': None,
                          'engagement_threshold': float,
                          'feature_sets': list,
                          'model_kinds': list,
                          'targets': list}

        self._classes = ['generator', 'parser', 'featurizer', 'evaluator']

        # Attributes for logging
        self._log_lines = []
        self._log_strings = {'input_success':
                             'loaded pipeline config from ${setup_file}',
                             'config_warning':
                             'unknown configuration key ${key} in section ${section}',
                             'stage_success':
                             '${stage} finished'}
        #place to store warnings
        self._warned = []

        self.update(default_settings(), override=True)

        for key in kwargs:
            setattr(self, key, kwargs[key])

        if getattr(self, 'setup_file', None):
            self.model_name = self.setup_file.rsplit('.', 1)[0]
            self.load(self.setup_file)
            for key in kwargs:
                if key != 'setup_file':
                    setattr(self, key, kwargs[key])

        self.compatibility_check()

    #File IO functions

    def load(self, setup_file):
        """Load a JSON pipeline config and assign every setting as an
        attribute of the model. Keys inside the stage sections are flattened;
        top-level keys are assigned directly."""
        with io.open(setup_file, 'r', encoding='utf-8') as f:
            try:
                config = json.load(f)
            except ValueError as err:
                raise ValueError('Could not parse pipeline config %s: %s' % (setup_file, err))
        if not isinstance(config, dict):
            raise ValueError('Pipeline config must be a JSON object')

        known = set(default_settings())
        base = os.path.dirname(os.path.abspath(setup_file))
        for var in config:
            if var in config_sections and isinstance(config[var], dict):
                for key, val in config[var].items():
                    if key not in known:
                        self.log('config_warning', key=key, section=var)
                    if var == 'paths' and key in ['input_file', 'synth_config'] and val:
                        val = self._resolve(base, val)
                    setattr(self, key, val)
            else:
                if var not in known:
                    self.log('config_warning', key=var, section='top level')
                setattr(self, var, config[var])
        self._config = config
        self.log('input_success', setup_file=setup_file, priority=1)

    @staticmethod
    def _resolve(base, path):
        if os.path.isabs(path) or os.path.exists(path):
            return path
        return os.path.join(base, path)

    def settings(self):
        "The effective configuration, grouped by the keys of default_settings"
        return {key: getattr(self, key) for key in sorted(default_settings())}

    def output_path(self, stage):
        """
        Directory for the outputs of a stage, created on demand.

        :param stage: One of synth, ingest, analyze, featurize, artifacts, report.
        :type stage: str
        """
        path = os.path.join(self.output_dir, parameter_data.output_subdirectories[stage])
        try:
            os.makedirs(path, exist_ok=True)
        except OSError as err:
            raise OSError('could not create output directory %s: %s' % (path, err))
        return path

    def log(self, event, **kwargs):
        """
        Add an event to the log. This assumes that the template
        for the event has been specified in the _log_strings attribute
        of the class that calls the log() function.

        :param event: A key that defines the event to be logged. The
                      _log_strings attribute of the subclass which
                      calls log() should be a dictionary where `event`
                      is a key and the value is a template string. The
                      special argument priority (default 0) hides the event
                      unless verbose exceeds it.

                      The event title should be of the form routinename_status, where
                      routinename is the name of the routine and the status
                      is success/warning/error/etc.
        :type event: str

        :param kwargs: Keyword arguments can be specified and will be passed into
                       the template retrieved from _log_strings['event']

        :type kwargs: keyword arguments
        """
        message = self._log_strings[event]
        routine, status = event.rsplit('_', 1)
        kwargs['routine'] = routine
        kwargs['status'] = status
        if 'priority' not in kwargs:
            kwargs['priority'] = 0
        log_string = Template('${routine}: ${status} - ' + message).substitute(kwargs)
        if log_string in self._warned:
            return
        level = _levels.get(status, logging.INFO)
        if (self.verbose or 0) > kwargs['priority'] or level >= logging.WARNING:
            self._log_lines.append(log_string)
            logger.log(level, log_string)
        else:
            logger.debug(log_string)
        if status == 'warning':
            self._warned.append(log_string)

    #Self checks

    def update(self, dictvar, override=False):
        """
        Update the attributes of the model with the attribute names/vals included
        in dictvar. The keys of dictvar correspond to attributes of the ListenershipModel
        to be set, and the values correspond to the values they will be set to.

        :param dictvar: Dictionary of key names corresponding to attributes of ListenershipModel
                        instance to be updated with the associated values in dictvar.
        :type dictvar: dict

        :param override: If True then the values in dictvar will override existing values
                         of the attributes of ListenershipModel instance. Optional parameter,
                         default is False.
        :type override: bool
        """
        if not override:
            dictvar = dict(dictvar)
            dictvar.update(self.__dict__)
            self.__dict__ = dictvar
        else:
            self.__dict__.update(dictvar)

    def compatibility_check(self):
        """
        Check that the model has all required attributes. Required
        attributes can be specified in self._required.
        """
        for var, kind in self._required.items():
            if not hasattr(self, var):
                raise AttributeError('Listenership model must contain the ' +
                                     'attribute ' + str(var))
            val = getattr(self, var)
            if kind and val is not None:
                try:
                    setattr(self, var, kind(val))
                except (TypeError, ValueError):
                    raise TypeError('The attribute ' + str(var) + ' must be ' +
                                    'compatible with the function ' + str(kind))

    @property
    def global_seed(self):
        "Seed every stage derives its streams from (0 if unset)"
        return 0 if self.seed is None else int(self.seed)

    #Typed views of the flat settings

    @property
    def grid(self):
        from listenmap.analyze.analysis_base import TimeSlotGrid
        return TimeSlotGrid(int(self.slot_start_hour), int(self.slot_end_hour),
                            int(self.slot_hours))

    @property
    def bucket_thresholds(self):
        from listenmap.analyze.buckets import BucketThresholds
        return BucketThresholds(
                pickup_rate_cut=float(self.pickup_rate_cut),
                engagement_rate_cut=float(self.engagement_rate_cut),
                long_trajectory_min_weeks=int(self.long_trajectory_min_weeks),
                short_trajectory_max_weeks=int(self.short_trajectory_max_weeks),
                engagement_rate_basis=self.engagement_rate_basis,
                trajectory_length_basis=self.trajectory_length_basis)

    def window_spec(self, feature_set):
        from listenmap.featurizers.featurizer_base import WindowSpec
        return WindowSpec(n_features_weeks=int(self.n_features_weeks),
                          n_offset_weeks=int(self.n_offset_weeks),
                          stride_weeks=int(self.stride_weeks),
                          feature_set=tuple(feature_set))

    @property
    def split_spec(self):
        from listenmap.featurizers.featurizer_base import SplitSpec
        return SplitSpec(train_fraction=float(self.train_fraction),
                         seed=functions.derive_seed(self.global_seed, 'split'))

    def train_config(self, kind):
        """
        Training settings for one model kind: the shared train settings with
        model_overrides[kind] applied on top.
        """
        from listenmap.classifiers.classifier_base import TrainConfig
        fields = dict(epochs=self.epochs, batch_size=self.batch_size,
                      learning_rate=self.learning_rate, beta1=self.beta1,
                      beta2=self.beta2, epsilon=self.epsilon,
                      l2_penalty=self.l2_penalty,
                      early_stop_patience=self.early_stop_patience,
                      validation_fraction=self.validation_fraction,
                      positive_class_weight=self.positive_class_weight,
                      hidden_units=self.hidden_units,
                      n_hidden_layers=self.n_hidden_layers,
                      lstm_units=self.lstm_units)
        fields.update((self.model_overrides or {}).get(kind, {}))
        fields['seed'] = functions.derive_seed(self.global_seed, 'train', kind)
        return TrainConfig(**fields)

    #Components

    @property
    def generator(self):
        from listenmap.generators import CohortGenerator
        return CohortGenerator(self)

    @property
    def parser(self):
        from listenmap.parsers import CallRecordParser
        return CallRecordParser(self)

    @property
    def featurizer(self):
        from listenmap.featurizers import WindowFeaturizer
        return WindowFeaturizer(self)

    @property
    def evaluator(self):
        from listenmap.evaluate import Evaluator
        return Evaluator(self)

    def analyses(self):
        from listenmap.analyze import (BucketAnalysis, DropoutAnalysis,
                                       EfficacyAnalysis, TimelineAnalysis,
                                       TimeSlotAnalysis)
        return [EfficacyAnalysis(self), BucketAnalysis(self), TimeSlotAnalysis(self),
                DropoutAnalysis(self), TimelineAnalysis(self)]

    #Pipeline stages

    def synthesize(self):
        "Generate the synthetic call-record corpus into data/calls.csv"
        path = self.generator.run()
        self.log('stage_success', stage='synth', priority=1)
        return path

    def ingest(self, input_file=None):
        """Parse call records into trajectories and write data/weekly.csv.
        Without an input_file the synthesized data/calls.csv is used."""
        parser = self.parser
        if input_file is None:
            input_file = self.input_file or os.path.join(
                    self.output_path('synth'), 'calls.csv')
        if not os.path.exists(input_file):
            raise DataError('call record file not found: ' + input_file)
        parser.parse(input_file)
        trajectories = parser.build()
        parser.write_weekly(trajectories)
        self.log('stage_success', stage='ingest', priority=1)
        return trajectories

    def load_trajectories(self):
        "Trajectories from data/weekly.csv, ingesting first if it is missing"
        path = os.path.join(self.output_path('ingest'), 'weekly.csv')
        if os.path.exists(path):
            return self.parser.read_weekly(path)
        return self.ingest()

    def analyze(self, trajectories=None):
        if trajectories is None:
            trajectories = self.load_trajectories()
        if not trajectories:
            raise DataError('cohort is empty; nothing to analyze')
        tables = {}
        for analysis in self.analyses():
            tables.update(analysis.run(trajectories))
        self.log('stage_success', stage='analyze', priority=1)
        return tables

    def featurize(self, trajectories=None):
        if trajectories is None:
            trajectories = self.load_trajectories()
        datasets = self.featurizer.run(trajectories)
        self.log('stage_success', stage='featurize', priority=1)
        return datasets

    def train_evaluate(self, datasets=None):
        featurizer = self.featurizer
        if datasets is None:
            datasets = featurizer.load_all()
            if datasets is None:
                datasets = featurizer.run(self.load_trajectories())
        report = self.evaluator.run(datasets)
        self.log('stage_success', stage='train-eval', priority=1)
        return report

    def report(self):
        paths = self.evaluator.summarize()
        self.log('stage_success', stage='report', priority=1)
        return paths

    def run(self):
        "Run every stage: synth (when no input file is given) through report"
        if not self.input_file:
            self.synthesize()
        trajectories = self.ingest()
        self.analyze(trajectories)
        datasets = self.featurize(trajectories)
        report = self.train_evaluate(datasets)
        self.report()
        return report


__all__ = ['ListenershipModel', 'default_settings', 'config_sections']
