"""A setuptools based setup module.
"""

from pathlib import Path
from setuptools import setup, find_namespace_packages

here = Path(__file__).parent.absolute()

# Get the long description from the README file
with open(here / 'doc/misc/README.md', encoding='utf-8') as f:
    long_description = f.read()

setup(
    name='diffhomog',

    version='0.3.0',

    description='Homogenization of randomly deformed periodic media in Python',

    long_description=long_description,
    long_description_content_type='text/markdown',

    author='diffhomog contributors',

    license='OSI Approved :: GNU General Public License v3 (GPLv3)',

    classifiers=[
        'Development Status :: 4 - Beta',
        'Programming Language :: Python :: 3.9',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Scientific/Engineering :: Physics',
    ],

    keywords='stochastic homogenization random diffeomorphism monte carlo',

    install_requires=[
        'climada>=4.0,<=4.1.0',
    ],

    packages=find_namespace_packages(include=['diffhomog*']),

    entry_points={
        'console_scripts': ['diffhomog=diffhomog.cli.main:main'],
    },

    package_data={'diffhomog': ['conf/*.conf']},

    setup_requires=['setuptools_scm'],
    include_package_data=True,
)
