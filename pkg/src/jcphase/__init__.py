"""Phase-space analysis of the two-photon Jaynes-Cummings resonance."""

__version__ = "0.1.0"
