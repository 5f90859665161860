from setuptools import setup, find_packages

setup(
    name="cayley-spectra",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=[
        "numpy>=1.22.0",
        "scipy>=1.10.0",
        "mpmath>=1.2.0",
        "pandas>=1.5.0",
        "pydantic>=2.0.0",
        "typing-extensions>=4.0.0"
    ],
    entry_points={
        "console_scripts": [
            "cayley-spectra=cayley_spectra.experiments.cli:main",
        ],
    },
    python_requires=">=3.9",
    author="xisun",
    description="Closed-form spectra of Cayley trees with self-loop perturbations, checked against finite-ball numerics",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Programming Language :: Python :: 3.13",
    ],
)
