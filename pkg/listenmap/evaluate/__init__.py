from .metrics import *
from .evaluator import *
