from .generator_base import *
from .cohort_generator import *
