"""
NSATP
Non-stationary arrival time prediction for public transit
"""
import sys
from setuptools import setup, find_packages

short_description = __doc__.split("\n")

# from https://github.com/pytest-dev/pytest-runner#conditional-requirement
needs_pytest = {'pytest', 'test', 'ptr'}.intersection(sys.argv)
pytest_runner = ['pytest-runner'] if needs_pytest else []

try:
    with open("README.md", "r") as handle:
        long_description = handle.read()
except OSError:
    long_description = "\n".join(short_description[2:])

version = {}
with open("nsatp/_version.py", "r") as handle:
    exec(handle.read(), version)


setup(
    name='nsatp',
    description=short_description[1],
    long_description=long_description,
    long_description_content_type="text/markdown",
    version=version["__version__"],
    license='MIT',

    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,

    # Allows `setup.py test` to work correctly with pytest
    setup_requires=[] + pytest_runner,
    install_requires=['torch', 'numpy', 'tomli; python_version<"3.11"'],
    extras_require={'test': ['pytest', 'pytest-cov']},
    entry_points={'console_scripts': ['nsatp=nsatp.cli:main']},
    python_requires=">=3.8",
)
