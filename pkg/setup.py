import setuptools
from codecs import open
from os import path


here = path.abspath(path.dirname(__file__))
requires_list = []
with open(path.join(here, 'requirements.txt'), encoding='utf-8') as f:
    for line in f:
        requires_list.append(str(line))


setuptools.setup(
    name='torch_bmst',
    version='0.1.0',
    description='Random bipartite Euclidean minimum spanning trees: solvers, structural checks and limit-constant estimators',
    packages=setuptools.find_namespace_packages(include=['torch_bmst', 'torch_bmst.*']),
    include_package_data=True,
    package_data={'torch_bmst': ['data/configs/*.yaml']},
    install_requires=requires_list,
    extras_require={'test': ['pytest', 'hypothesis']},
    entry_points={'console_scripts': ['torch-bmst = torch_bmst.cli.run:main']},
)
