"""Phased-array lattice analysis toolkit.

Converts infinite-array active reflection data into finite-array scattering
matrices over square and triangular lattices, reads and writes Touchstone
S-parameter files, and computes scan-dependent array metrics (active VSWR,
orthogonal port coupling, normalized gain, array-factor patterns).
"""

__version__ = "0.1.0"
