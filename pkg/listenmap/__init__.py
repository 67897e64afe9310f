"""Listenership Mapping and Analysis Package (ListenMAP)"""
# Standard dependencies
import logging

# Non-standard dependencies
import numpy as np
import pandas as pd

from . import data

__version__ = "0.1.0"

logger = logging.getLogger('listenmap')
logger.addHandler(logging.NullHandler())


class PipelineModelWrapper:
    """Give a component transparent access to the attributes of the
    ListenershipModel it is attached to (stored as self._lm)."""

    def __getattr__(self, attr):
        "Return the value of the pipeline model instance if its there. Otherwise return the instances own value (or none if the instance does not have the attribute defined and the attribute is not private)"
        if attr == '_lm':
            return object.__getattribute__(self, attr)

        elif hasattr(self._lm, attr):
            return getattr(self._lm, attr)
        else:
            if attr in self.__dict__:
                val = object.__getattribute__(self, attr)
                del self.__dict__[attr]
                #this makes sure that the attr is read from _lm
                setattr(self._lm, attr, val)
                return val
            elif attr.startswith('_'):
                raise AttributeError("Attribute {attr} in invalid".format(**locals()))
            else:
                return None

    def __setattr__(self, attr, val):
        "Set attribute for the instance as well as the pipeline model instance"
        accumulate = ['_required', '_log_strings']
        if attr == '_lm':
            self.__dict__[attr] = val
        elif attr in accumulate:
            self._lm.__dict__[attr].update(val)
        else:
            setattr(self._lm, attr, val)


from listenmap.records import DataError
from listenmap.model import ListenershipModel


def load(setup_file, **kwargs):
    lm = ListenershipModel(setup_file=setup_file, **kwargs)
    return lm
