templates = {}

#Plain-text report templates

templates['report_summary'] = r"""Prediction of ${target_label}: balanced accuracy, precision at k and AUC on the test split
${n_rows} rows, ${n_failed} failed cells, seed ${seed}

${table_txt}
"""

#str.format template: one aligned row of the plain-text summary table
templates['report_row'] = "{model:<22} {features:<36} {balanced_accuracy:>17} {precision_at_k:>12} {auc:>9}"

target_labels = {'low_pickup': 'low pickup',
                 'low_engagement': 'low engagement'}

model_labels = {'random': 'Random',
                'logistic_regression': 'Logistic Regression',
                'feedforward_nn': 'Feedforward NN',
                'lstm': 'LSTM'}
