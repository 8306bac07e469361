"""The self-similar system, its local expansions, the isothermal sphere and the matched profiles."""
