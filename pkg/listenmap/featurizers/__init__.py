from .featurizer_base import *
from .window_featurizer import *
