"""wordsmith: natural-language commands to trained planar-robot control policies."""

__version__ = "0.1.0"
