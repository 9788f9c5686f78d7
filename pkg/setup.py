# -*- coding: utf-8 -*-
from os.path import dirname, join
from setuptools import find_packages, setup


def parse_requirements(fname='requirements.txt'):
    with open(join(dirname(__file__), fname)) as f:
        lines = [line.split('#')[0].strip() for line in f.readlines()]
    return [line for line in lines if line and not line.startswith('-')]


def parse_version(fpath=join('momentann', '__init__.py')):
    with open(join(dirname(__file__), fpath)) as f:
        for line in f:
            if line.startswith('__version__'):
                return line.split('=')[1].strip().strip("'")
    raise ValueError('no __version__ in %s' % (fpath,))


setup(
    name='momentann',
    version=parse_version(),
    description='Fixed-effects panel regressions with single-hidden-layer networks on temperature moments',
    packages=find_packages(include=['momentann', 'momentann.*']),
    install_requires=parse_requirements(),
    extras_require={'tests': ['pytest', 'xdoctest']},
    entry_points={'console_scripts': ['momentann=momentann.cli:main']},
    python_requires='>=3.7',
)
