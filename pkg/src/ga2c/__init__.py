"""ga2c: black-box node injection evasion attack on graph convolutional networks."""

__version__ = "1.0.0"
