#!/usr/bin/env python3
"""
    sbv-sim: Sub-band vectoring simulator for multi-operator VDSL2

    Setup.py

    Copyright (C) 2026 sbv-sim authors.

    This software is licensed under the MIT License; see LICENSE.txt
    in the distribution root for the full text.


    This module sets up the sbv-sim package and installs the
    'sbv-sim' command-line utility.

    This package requires Python >= 3.9.

"""

import io
import re
import sys

from os.path import dirname, join

from setuptools import find_packages  # type: ignore
from setuptools import setup  # type: ignore


if sys.version_info < (3, 9):
    print("sbv-sim requires Python >= 3.9")
    sys.exit(1)


def read(*names: str, **kwargs: str):
    try:
        return io.open(
            join(dirname(__file__), *names), encoding=kwargs.get("encoding", "utf8")
        ).read()
    except (IOError, OSError):
        return ""


# Load version string from file
__version__ = "[missing]"
exec(open(join("src", "sbv_sim", "version.py")).read())

setup(
    name="sbv-sim",
    version=__version__,
    license="MIT",
    description="Sub-band vectoring simulator for co-located VDSL2 operators",
    long_description="{0}\n{1}".format(
        re.compile("^.. start-badges.*^.. end-badges", re.M | re.S).sub(
            "", read("README.rst")
        ),
        re.sub(":[a-z]+:`~?(.*?)`", r"``\1``", read("CHANGELOG.rst")),
    ),
    author="sbv-sim authors",
    packages=find_packages("src"),
    package_dir={"": "src"},
    package_data={"sbv_sim": ["py.typed", "config/*.conf"]},
    include_package_data=True,
    zip_safe=False,
    python_requires=">=3.9",
    classifiers=[
        # complete classifier list: http://pypi.python.org/pypi?%3Aaction=list_classifiers
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Intended Audience :: Telecommunications Industry",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Programming Language :: Python :: Implementation :: CPython",
        "Topic :: Scientific/Engineering",
        "Topic :: System :: Networking",
    ],
    keywords=["dsl", "vdsl2", "vectoring", "crosstalk", "simulation"],
    setup_requires=[],
    install_requires=["numpy>=1.22", "typing_extensions"],
    extras_require={
        "test": ["pytest", "hypothesis"],
    },
    # Set up an 'sbv-sim' command ('sbv-sim.exe' on Windows),
    # which calls main() in src/sbv_sim/main.py
    entry_points={
        "console_scripts": [
            "sbv-sim=sbv_sim.main:main",
        ],
    },
)
