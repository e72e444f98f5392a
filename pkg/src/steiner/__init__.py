"""Classification of Steiner triple systems containing a subsystem of order 7."""

__version__ = "0.1.0"
