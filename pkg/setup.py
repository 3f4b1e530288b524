from setuptools import setup

description = open("README.md").read()

setup(
    use_scm_version={"version_scheme": "post-release"},
    setup_requires=["setuptools_scm"],
    packages=["irswpcn"],
    install_requires=[
        "numpy",
        "scipy",
        "mako",
        "filelock",
        'tomli; python_version < "3.11"',
    ],
    extras_require={"test": ["pytest", "cvxpy"]},
    entry_points={"console_scripts": ["irswpcn=irswpcn.__main__:main"]},
    python_requires=">=3.8",
    zip_safe=False,
    name="irswpcn",
    description=(
        "Reflect beamforming and time allocation for IRS-assisted "
        "wireless powered hybrid NOMA/TDMA networks"
    ),
    long_description=description,
    long_description_content_type="text/markdown",
    license="MIT",
    platforms=["any"],
    classifiers=[
        "Development Status :: 4 - Beta",
        "Intended Audience :: Science/Research",
        "Operating System :: OS Independent",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
    ],
)
