regular_expressions = {}

#regular_expressions[key] = [regex,group_name_list]

regular_expressions['attempt_date'] = [r'^(\d{4})-(\d{2})-(\d{2})$',
        ['year', 'month', 'day']]

regular_expressions['attempt_time'] = [r'^([01]\d|2[0-3]):([0-5]\d):([0-5]\d)$',
        ['hour', 'minute', 'second']]

regular_expressions['non_negative_integer'] = [r'^\d+$', []]

# plain decimal, "." separator, no exponent
regular_expressions['non_negative_real'] = [r'^\d+(?:\.\d*)?$', []]
