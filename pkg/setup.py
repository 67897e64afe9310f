#!/usr/bin/env python
"""Listenership Mapping and Analysis Package (ListenMAP)"""

import os
import sys

try:
    from setuptools import setup
except ImportError:
    from distutils.core import setup
__version__ = "0.1.0"
__python_version__ = sys.version

description = __doc__
classifiers = [
        'Development Status :: 4 - Beta',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'Intended Audience :: Developers',
        'OSI Approved :: GNU General Public License (GPL)',
        'Natural Language :: English',
        'Operating System :: POSIX :: Linux',
        'Programming Language :: Python',
        'Topic :: Scientific/Engineering :: Information Analysis',
        'Topic :: Scientific/Engineering :: Medical Science Apps.',
              ]

requires = ['numpy',
            'scipy>=1.8',
            'pandas',
            'tqdm']

license = 'GPL'
long_description = open('README.md').read()
name = 'listenmap'
packages = [
           'listenmap',
           'listenmap.analyze',
           'listenmap.classifiers',
           'listenmap.data',
           'listenmap.evaluate',
           'listenmap.featurizers',
           'listenmap.generators',
           'listenmap.parsers',
           ]
package_dir = {'listenmap': 'listenmap'}
package_data = {'listenmap': []}
platforms = ['linux', 'windows']
if os.name == 'nt':
    scripts = []
else:
    scripts = [
        'tools/listenmap'
              ]

setup(
      classifiers=classifiers,
      description=description,
      license=license,
      long_description=long_description,
      name=name,
      package_data=package_data,
      package_dir=package_dir,
      packages=packages,
      platforms=platforms,
      scripts=scripts,
      version=__version__,
      install_requires=requires
      )
