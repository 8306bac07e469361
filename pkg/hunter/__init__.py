"""Self-similar implosion profiles of the gravitational Euler-Poisson system."""
__version__ = "0.1.0"
