#Program constants
program_weeks = 72
max_attempts = 9
attempt_days = 4

#Status tokens as written in call-detail CSV files, in model-feature order
status_tokens = ['PICKED_UP', 'BUSY', 'SWITCHED_OFF', 'OUT_OF_NETWORK', 'OTHER']

#Statuses in which the network delivered the call to the line
technical_success_tokens = ['PICKED_UP', 'BUSY']

call_record_headers = ['beneficiary_id', 'message_index', 'attempt_number',
                       'attempt_date', 'attempt_time', 'status',
                       'duration_seconds']
optional_call_record_headers = ['gestation_week']

#Listening for longer than this (strictly) counts as engagement
engagement_threshold = 30.0

#Low-listenership labels: fewer than label_min_weeks positives in the window
label_window_weeks = 6
label_min_weeks = 3

#Time slot grid (hours, 24h clock)
slot_start_hour = 8
slot_end_hour = 22
slot_hours = 2

#Beneficiaries per pickup x engagement bucket in the reference cohort
bucket_names = ['HPHE', 'HPLE', 'LPHE', 'LPLE']
reference_bucket_counts = {'HPHE': 1212, 'HPLE': 2651,
                           'LPHE': 1421, 'LPLE': 6087}

#Columns contributed per week by each feature group
feature_group_columns = {
    'duration': ['total_duration_seconds'],
    'attempt': ['n_attempts'],
    'status': ['n_' + token.lower() for token in status_tokens],
    'date': ['week_of_year_scaled', 'pickup_slot_scaled'],
}
feature_group_order = ['duration', 'attempt', 'status', 'date']

default_feature_sets = [['duration', 'attempt'],
                        ['duration', 'attempt', 'status'],
                        ['duration', 'attempt', 'status', 'date']]

targets = ['low_pickup', 'low_engagement']

#Fixed output directory layout under the run output directory
output_subdirectories = {'synth': 'data',
                         'ingest': 'data',
                         'analyze': 'analysis',
                         'featurize': 'datasets',
                         'artifacts': 'artifacts',
                         'report': 'reports'}

#Logits are clamped to this magnitude before the sigmoid and the loss
logit_clamp = 30.0
