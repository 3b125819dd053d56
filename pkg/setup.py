from os.path import join, dirname

from setuptools import setup, find_packages

deps = ['bitarray>=1.5.0',
        'numpy>=1.17',
        'pyyaml>=3.10']
scm_version_options = {
        'write_to': 'src/mdap/version.py',
        'fallback_version': '0.1.0',
        }
classifiers = ['Development Status :: 4 - Beta',
               'Intended Audience :: Science/Research',
               'Natural Language :: English',
               'Operating System :: OS Independent',
               'Programming Language :: Python :: 3',
               'Topic :: Scientific/Engineering :: Mathematics']


def read(filename):
    with open(join(dirname(__file__), filename)) as f:
        return f.read()

setup(name='mdap',
      packages=find_packages('src'),
      package_dir={'': 'src'},
      include_package_data=True,
      package_data={'mdap': ['data/*.yaml']},
      install_requires=deps,
      python_requires='>=3.8',
      setup_requires=['setuptools-scm>=3.3.0'],
      use_scm_version=scm_version_options,
      tests_require=['tox'],
      classifiers=classifiers,
      description='Heuristics, exact oracles and a Monte-Carlo harness for '
                  'random 3-dimensional assignment problems',
      long_description=read('README.md'),
      long_description_content_type='text/markdown',
      zip_safe=False,
      keywords="assignment matching latin-square heuristics monte-carlo",
      test_suite='tests',
      entry_points={"console_scripts": ["mdap = mdap.cli:main"]},
      )
