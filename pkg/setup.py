#!/usr/bin/env python
from setuptools import setup

requirements = ["numpy",
                "pyyaml",
                "omegaconf",
                "pydantic",
                "pytest"
                ]

PACKAGE_NAME = "decilediff"
__version__ = "0.1.0"

setup(name=PACKAGE_NAME,
      version=__version__,
      description="Dynamic decile difference distributions of income and expenditure, and their polynomial fits",
      packages=["decilediff"],
      package_data={"decilediff": ["commands.yml", "appendix/*.csv", "appendix/*.yml"]},
      install_requires=requirements,
      entry_points={"console_scripts": ["decilediff=decilediff.cli:main"]},
      classifiers=[],
      )
