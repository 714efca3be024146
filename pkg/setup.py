from setuptools import setup, find_packages

setup(
    name="efx_donation",
    packages=find_packages(exclude=["tests"]),
    version="0.1.0",
    install_requires=["click", "networkx", "numpy", "tabulate"],
    entry_points={"console_scripts": ["efx-donation=efx_donation.main:cli"]},
)
