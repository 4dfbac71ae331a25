"""RTF vector estimation for acoustic sensor networks with block-diagonal noise."""

__version__ = "1.0.0"
