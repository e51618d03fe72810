"""Survivable elastic optical network simulator with prioritized restoration."""

from eon_fdsp.prioritizer import (
    DisruptedService,
    WeightVector,
    normalize,
    rank_fdfs,
    rank_fdsp,
    solve_weights,
)
from eon_fdsp.rsa import (
    CandidatePath,
    ModulationFormat,
    PliRsa,
    ReachTable,
    k_shortest_paths,
    select_modulation,
    slots_required,
)
from eon_fdsp.simulation import FailureSpec, RunMetrics, Simulation, run
from eon_fdsp.spectrum import SlotBlock, SpectrumPool
from eon_fdsp.topology import Topology, fail_links, load_topology, parse_topology, sample_failures
from eon_fdsp.traffic import ServiceRequest, TrafficConfig, generate

__version__ = "0.1.0"
