"""Thick off-lattice random walks sampled by reflection moves, with size and knotting analysis."""

__version__ = "1.0.0"
