"""Numerical building blocks: integration, root finding, fits and special functions."""
