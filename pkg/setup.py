from setuptools import find_packages, setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="tangent_lifts",
    version="0.1.0",
    author="Smart Social Contracts",
    author_email="smartsocialcontracts@gmail.com",
    description="Affine transport lifts of vector fields to tangent bundles",
    long_description=long_description,
    long_description_content_type="text/markdown",
    url="https://github.com/smart-social-contracts/tangent-lifts",
    packages=find_packages(exclude=["tests"]),
    classifiers=[
        "Programming Language :: Python :: 3.10",
    ],
    python_requires=">=3.10",
    install_requires=["kybra-simple-logging==0.1.*", "numpy>=1.24", "scipy>=1.10"],
    entry_points={"console_scripts": ["tangent-lifts=tangent_lifts.cli:main"]},
)
