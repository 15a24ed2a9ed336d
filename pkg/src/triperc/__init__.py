"""
Site percolation on the triangular lattice.

The lattice is realized on Z^2 with neighbors ``(x +- 1, y)``, ``(x, y +- 1)``,
``(x + 1, y - 1)`` and ``(x - 1, y + 1)``. Modules:

``lattice``       regions, configurations, seeded sampling
``connectivity``  clusters, crossing events, circuits
``geometry``      lowest crossing, its two sides, arm events, pivotal sites
``oracle``        exhaustive enumeration on small boxes
``experiments``   Monte Carlo estimators and fits
``cli``           command-line front end
"""

__version__ = "0.1.0"

from .connectivity import (LR, TB, ClusterLabeling, CrossingQuery, closed_circuit_in_annulus,
                           cluster_radius, cluster_size_at, has_crossing, label_clusters,
                           lr_closed, lr_open, lr_open_endpoint_exempt, radius_reached,
                           tb_closed, tb_open)
from .errors import (DataQualityError, DomainError, EnumerationCapError, EstimationError,
                     PreconditionError)
from .experiments import (DEFAULT_SEED, EstimateRecord, ExperimentResult, ExperimentSpec,
                          FitResult, estimate_cluster_tail, estimate_conditional_pivotal,
                          estimate_crossing_probability, estimate_one_arm, fit_exponential,
                          fit_power_law, fit_trend, locate_pc, rsw_aspect_check,
                          run_experiment)
from .geometry import (Arm, ArmSpec, Crossing, CrossingPartition, arm_event, count_pivotal,
                       four_arm_spec, lowest_crossing, partition, pivotal_sites_arms,
                       pivotal_sites_flip, three_arm_spec)
from .lattice import (CLOSED, OFFSETS, OPEN, SIDES, Configuration, Region, Site, is_adjacent,
                      neighbors, replica_seed, sample, uniforms)
from .oracle import (EventPolynomial, brute_force_lowest_crossing, event_polynomial,
                     exact_expected_pivotal, exact_expected_pivotal_on_LR, run_suite,
                     verify_duality, verify_fkg, verify_russo)


def region_neighbors(r: Region, v) -> list[Site]:
    """Neighbors of `v` inside `r`; raises :class:`DomainError` if `v` is outside."""
    return r.neighbors(v)


def boundary(r: Region, side: str) -> list[Site]:
    return r.boundary(side)


def flip(c: Configuration, v) -> Configuration:
    return c.flip(v)
