"""Experiment drivers: Poincare sections of the three-particle ring and Lyapunov indicators."""

from .lyapunov import LyapunovSeries, finite_time_chi, lyapunov_series, time_grid
from .ring import (ReducedRingCoords, expand_ring3, henon_heiles_fit, henon_heiles_mismatch,
                   reduce_ring3, reduced_hamiltonian, ring_potential, to_henon_heiles)
from .section import (REGULARITY_THRESHOLD, SectionOrbit, SectionPoint, SectionResult,
                      accessible_interval, is_regular, orbit_regularity, poincare_section)

__all__ = [
    "LyapunovSeries", "REGULARITY_THRESHOLD", "ReducedRingCoords", "SectionOrbit",
    "SectionPoint", "SectionResult", "accessible_interval", "expand_ring3", "finite_time_chi",
    "henon_heiles_fit", "henon_heiles_mismatch", "is_regular", "lyapunov_series",
    "orbit_regularity", "poincare_section", "reduce_ring3", "reduced_hamiltonian",
    "ring_potential", "time_grid",
]
