MAJOR_VERSION = "0.1"
MINOR_VERSION = "0"

__version__ = f"{MAJOR_VERSION}.{MINOR_VERSION}"
