import pathlib
import re
import sys

from setuptools import setup

if sys.version_info < (3, 8):
    raise RuntimeError("simplexcf requires Python 3.8+")


HERE = pathlib.Path(__file__).parent
txt = (HERE / "simplexcf" / "__init__.py").read_text("utf-8")
try:
    version = re.findall(r'^__version__ = "([^\']+)"\r?$', txt, re.M)[0]
except IndexError:
    raise RuntimeError("Unable to determine version.")


def get_long_description() -> str:
    readme = HERE / "README.md"
    with readme.open("r") as f:
        return f.read()


setup(
    name="simplexcf",
    version=version,
    description="Counterfactuals for categorical variables via optimal transport "
    "on the simplex",
    long_description=get_long_description(),
    long_description_content_type="text/markdown",
    packages=["simplexcf"],
    classifiers=[
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Topic :: Scientific/Engineering :: Mathematics",
    ],
    license="MIT",
    keywords=[
        "optimal transport",
        "compositional data",
        "counterfactual fairness",
        "simplex",
    ],
    install_requires=[
        "contourpy>=1.0",
        "numpy>=1.20",
        "pandas>=1.4",
        "scipy>=1.8",
    ],
    extras_require={
        "dev": [
            "black",
            "flake8",
            "hypothesis",
            "isort",
            "mypy",
            "pytest",
            "pytest-asyncio",
            "pytest-cov",
        ],
        "docs": ["sphinx", "sphinx-autodoc-typehints"],
    },
    entry_points={"console_scripts": ["simplexcf = simplexcf.cli:main"]},
    python_requires=">=3.8",
)
