from distutils.core import setup

import os


def version():
    setupDir = os.path.dirname(os.path.realpath(__file__))
    versionFile = open(os.path.join(setupDir, 'workloadtk', 'VERSION'))
    return versionFile.readline().strip()

setup(
    name='WorkloadTk',
    version=version(),
    author='WorkloadTk developers',
    packages=['workloadtk', 'workloadtk.classifiers', 'workloadtk.simulator'],
    scripts=['bin/workloadtk'],
    package_data={'workloadtk': ['VERSION', 'scenarios/*.yaml']},
    url='http://pypi.python.org/pypi/workloadtk/',
    license='GPL3',
    description='A toolbox for autonomic workload discovery and configuration tuning of cluster jobs.',
    install_requires=[
        "numpy >= 1.8.0",
        "biolib >= 0.1.0",
        "scipy >= 1.0.0",
        "pyyaml >= 5.1"],
)
