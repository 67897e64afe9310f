from .parser_base import *
from .cdr_parser import *
