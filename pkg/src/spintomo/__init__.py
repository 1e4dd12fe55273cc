"""Spin-polarized tunneling tomography of a quantum-dot spin qubit.

Simulates the dot's open dynamics, counts stochastic tunneling events into
polarized drains, inverts the counts into Stokes parameters, fits them with
polynomials and rebuilds the time-dependent density matrix.
"""

__version__ = "0.1.0"
