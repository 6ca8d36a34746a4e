"""Noisy measurement-based rotation programs: Pauli algebra, horizontal curves,
sub-Riemannian geodesics on SU(2) and channel-level error measurement."""

__version__ = "0.1.0"
