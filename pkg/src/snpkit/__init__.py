"""snpkit: exact integer matrix semantics for spiking neural P systems.

Subpackages cover guard-regex compilation, system parsing/validation,
matrix construction, step-by-step simulation (with and without rule
delays), and reachability analysis over sum vectors.
"""

__version__ = "0.1.0"
