from setuptools import find_packages, setup

setup(
    name="tidlab",
    packages=find_packages(exclude=["tests"]),
    version="0.1.0",
    install_requires=[
        "numpy",
        "scipy",
        "hydra-core>=1.3",
        "omegaconf",
        "pyyaml",
        "ray",
        "wandb",
    ],
    entry_points={"console_scripts": ["tidlab=tidlab.experiments.cli:main"]},
)
