"""Dense orbits of an explicit expanding map, its exponential conjugate, and companion volume/Lipschitz checks."""

__version__ = "0.1.0"
