from .analysis_base import *
from .efficacy import *
from .buckets import *
from .time_slots import *
from .dropouts import *
from .timelines import *
