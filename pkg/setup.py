import io
import os
import re

from setuptools import setup

here = os.path.realpath(os.path.dirname(__file__))

name = "rmlsim"

# the version lives in the package itself
with io.open(os.path.join(here, name, "version.py")) as f:
    content = f.read()
    major = re.search(r"^MAJOR_VERSION = ['\"]([^'\"]*)['\"]", content, re.M)
    minor = re.search(r"^MINOR_VERSION = ['\"]([^'\"]*)['\"]", content, re.M)
    if major and minor:
        version = f"{major.group(1)}.{minor.group(1)}"
    else:
        raise RuntimeError("Unable to find version strings.")


if __name__ == "__main__":
    try:
        setup(
            version=version,
        )
    except:  # noqa
        print(
            "\n\nAn error occurred while building the project, "
            "please ensure you have the most updated version of setuptools, "
            "setuptools_scm and wheel with:\n"
            "   pip install -U setuptools setuptools_scm wheel\n\n",
        )
        raise
