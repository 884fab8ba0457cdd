from setuptools import setup, find_packages

setup(
    name="cavity-fock-filters",
    version="0.1.0",
    description="Photon statistics of a cavity field probed by atoms crossing a level anticrossing",
    package_dir={"": "src"},
    packages=find_packages(where="src"),
    py_modules=["config", "main"],
    package_data={"utilities": ["presets.json"]},
    python_requires=">=3.10",
    install_requires=[
        "pydantic>=2.0",
        "click>=8.0.0",
        "python-dotenv>=1.0.0",
        "numpy>=1.24",
        "scipy>=1.10",
    ],
    extras_require={"test": ["pytest>=7.0"]},
    entry_points={"console_scripts": ["cavity-fock=app.cmd.cmd:cli"]},
)
