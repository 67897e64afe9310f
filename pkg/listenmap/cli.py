import json
import logging
import optparse
import os
import sys

usage = {}

usage['synth'] = """listenmap synth [--config <cohort-or-pipeline.json>] [--out DIR] [--seed N] [--jobs N]
    Generate a synthetic call-record corpus into DIR/data/calls.csv together
    with a generation manifest. A cohort config or a pipeline config with a
    synth_config path is accepted; without one the reference cohort of
    configs/reference_cohort.json is generated.
"""

usage['ingest'] = """listenmap ingest [--config FILE] [--input CSV] [--out DIR]
    Validate call records, write DIR/data/weekly.csv and row_errors.jsonl.
"""

usage['analyze'] = """listenmap analyze [--config FILE] [--out DIR]
    Write the cohort analytics tables to DIR/analysis/.
"""

usage['featurize'] = """listenmap featurize [--config FILE] [--out DIR] [--seed N]
    Build the rolling-window train/test datasets in DIR/datasets/.
"""

usage['train-eval'] = """listenmap train-eval [--config FILE] [--out DIR] [--target T] [--jobs N]
    Train and score every model kind, feature set and target; write
    DIR/artifacts/ and DIR/reports/report.csv. Exits nonzero if a cell failed.
"""

usage['report'] = """listenmap report [--out DIR]
    Print the per-target results tables from DIR/reports/report.csv.
"""

usage['run'] = """listenmap run [--config FILE] [--out DIR]
    Run every stage from synth (or ingest of --input) through report.
"""

#Exit codes
EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

target_choices = {'low_pickup': ['low_pickup'],
                  'low_engagement': ['low_engagement'],
                  'both': ['low_pickup', 'low_engagement']}


class UsageError(Exception):
    pass


class OptionParser(optparse.OptionParser):
    "optparse parser that reports usage errors with exit code 1"
    def error(self, msg):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, '%s: error: %s\n' % (self.get_prog_name(), msg))


def get_options(args=None, get_parser=False):
    import listenmap

    parser = OptionParser(
        'Usage: %prog ('
        + '|'.join(sorted(usage.keys()))
        + ') [options]',
        version=listenmap.__version__,
        prog='listenmap')
    parser.add_option('-c', '--config', dest='config',
                      help='pipeline JSON config (or cohort config for synth)')
    parser.add_option('-o', '--out', dest='out',
                      help='output directory; overrides paths.output_dir')
    parser.add_option('-i', '--input', dest='input_file',
                      help='call-record CSV; overrides paths.input_file')
    parser.add_option('-s', '--seed', dest='seed', type='int',
                      help='global seed (unsigned 64-bit)')
    parser.add_option('-j', '--jobs', dest='jobs', type='int',
                      help='maximum number of worker processes')
    parser.add_option('-t', '--target', dest='target', type='choice',
                      choices=sorted(target_choices),
                      help='low_pickup, low_engagement or both')
    parser.add_option('-v', '--verbose', dest='verbose', type='int',
                      help='verbosity; events with priority below it are shown')

    if isinstance(args, str):
        args = args.split()
    options, args = parser.parse_args(args)
    if len(args) < 1:
        parser.error('Command expected')
    if len(args) > 1:
        parser.error('Unexpected arguments: %s' % ' '.join(args[1:]))
    if options.seed is not None and not 0 <= options.seed < 2 ** 64:
        parser.error('--seed must be an unsigned 64-bit integer')
    if options.jobs is not None and options.jobs < 1:
        parser.error('--jobs must be >= 1')
    if get_parser:
        return options, args, parser
    else:
        return options, args


def match_keys(arg, usage, parser):
    """Try to match part of a command against
       the set of commands from usage. Throws
       an error if not successful.

    """
    possible_args = [key for key in usage if key.startswith(arg)]
    if len(possible_args) == 0:
        parser.error('Command "%s" not understood.' % arg)
    elif len(possible_args) > 1:
        parser.error(('Command "%s" ambiguous.\n'
                      'Could be one of %s\n\n') % (arg, possible_args))
    else:
        return possible_args[0]


def is_cohort_config(path):
    "True for a cohort generator config rather than a pipeline config"
    with open(path, 'r', encoding='utf-8') as f:
        try:
            config = json.load(f)
        except ValueError as err:
            raise UsageError('could not parse %s: %s' % (path, err))
    return isinstance(config, dict) and 'archetypes' in config


def configure_logging(verbose):
    logger = logging.getLogger('listenmap')
    if not any(getattr(h, '_listenmap_cli', False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter('%(levelname)s %(message)s'))
        handler._listenmap_cli = True
        logger.addHandler(handler)
    logger.setLevel(logging.DEBUG if verbose is not None and verbose > 2 else logging.INFO)


def build_model(command, options):
    "ListenershipModel from the config file with the command line flags applied on top"
    from listenmap import ListenershipModel

    overrides = {}
    config = options.config
    if config and not os.path.exists(config):
        raise UsageError('config file not found: ' + config)
    if config and command in ('synth', 'run') and is_cohort_config(config):
        overrides['synth_config'] = config
        config = None
    if options.out is not None:
        overrides['output_dir'] = options.out
    if options.input_file is not None:
        overrides['input_file'] = options.input_file
    if options.seed is not None:
        overrides['seed'] = options.seed
    if options.jobs is not None:
        overrides['jobs'] = options.jobs
    if options.verbose is not None:
        overrides['verbose'] = options.verbose
    if options.target is not None:
        overrides['targets'] = target_choices[options.target]
    if config:
        return ListenershipModel(setup_file=config, **overrides)
    return ListenershipModel(**overrides)


def run_command(command, model):
    "Run one subcommand; returns the exit code"
    if command == 'synth':
        model.synthesize()
    elif command == 'ingest':
        model.ingest()
    elif command == 'analyze':
        model.analyze()
    elif command == 'featurize':
        model.featurize()
    elif command == 'train-eval':
        model.train_evaluate()
    elif command == 'report':
        for target, text in model.report().items():
            sys.stdout.write(text + '\n')
    elif command == 'run':
        model.run()
    if command in ('train-eval', 'run') and model.failed_cells:
        return EXIT_INTERNAL if model.internal_failures else EXIT_DATA
    return EXIT_OK


def main(args=None):
    """The CLI main entry point function.

    The optional argument args, can be used to
    directly supply command line argument like

    $ listenmap <args>

    otherwise args will be taken from sys.argv. Returns the exit code:
    0 success, 1 usage, 2 data error, 3 internal error.

    """
    from listenmap.records import DataError

    options, args, parser = get_options(args, get_parser=True)
    command = args[0]
    if command not in usage:
        command = match_keys(command, usage, parser)
    configure_logging(options.verbose)
    logger = logging.getLogger('listenmap.cli')

    try:
        model = build_model(command, options)
        return run_command(command, model)
    except (DataError, UnicodeDecodeError) as err:
        logger.error('data error: %s', err)
        return EXIT_DATA
    except (UsageError, ValueError) as err:
        logger.error('%s', err)
        return EXIT_USAGE
    except Exception:
        logger.exception('internal error')
        return EXIT_INTERNAL


if __name__ == '__main__':
    sys.exit(main())
