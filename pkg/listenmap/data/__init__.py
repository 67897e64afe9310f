from .parameter_data import *
from .templates import *
from .regular_expressions import *
