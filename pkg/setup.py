from setuptools import find_packages, setup

with open("requirements.txt", encoding="utf-8") as f:
    required = [
        line
        for line in f.read().splitlines()
        if line.strip() and not line.startswith("#")
    ]

setup(
    name="pynmqsd",
    version="0.1.0",
    description="Numerical lab for non-Markovian quantum state diffusion.",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["tests", "tests.*"]),
    install_requires=required,
    entry_points={"console_scripts": ["nmqsd=pynmqsd.cli:main"]},
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: BSD License",
        "Programming Language :: Python :: 3.10",
        "Topic :: Scientific/Engineering :: Physics",
    ],
    python_requires=">=3.10",
    include_package_data=True,
)
