from setuptools import setup, find_packages

setup(
    name='pulsecool',
    version='0.1.0',
    author='Marc Hadfield',
    author_email='marc@vital.ai',
    description='Broadband pulsed-laser Doppler cooling of a trapped ion: simulator, theory and image thermometry',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    packages=find_packages(exclude=["test", "test_data"]),
    package_data={
        'pulsecool.config': ['schema.cfg'],
    },
    license='Apache License 2.0',
    install_requires=[

        'lark',

        'numpy',
        'scipy>=1.10',

        'numba>=0.58',
    ],
    extras_require={
        'test': [
            'pytest>=7',
        ],
    },
    entry_points={
        'console_scripts': [
            'pulsecool=pulsecool.cli.main:main',
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3.11",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
    ],
    python_requires='>=3.10',
)
