# -*- coding: utf-8 -*-

# Copyright 2016 The semistatic Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.

from setuptools import find_packages, setup

from semistatic import __version__


with open('requirements.txt') as requirements_file:
    requirements = [line.strip() for line in requirements_file
                    if line.strip()]


setup(
    description='Model-independent hedging bounds from call option quotes',
    author='The semistatic Authors',
    version=__version__,
    license='Apache License 2.0',
    packages=find_packages(exclude=['tests']),
    package_data={'semistatic': ['data/*.json', 'data/*.csv']},
    install_requires=requirements,
    extras_require={
        'testing': [
            'coverage>=4.0',
            'mock>=1.0.1',
            'pytest>=2.7.0',
        ],
    },
    entry_points={
        'console_scripts': 'semistatic = semistatic.main_cli:cli',
    },
    name='semistatic',
    classifiers=[
        'Intended Audience :: Financial and Insurance Industry',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Programming Language :: Python :: 3',
        'Topic :: Office/Business :: Financial',
        'Topic :: Scientific/Engineering :: Mathematics',
    ],
)
