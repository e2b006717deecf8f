"""Systematically derived behaviour characterisations (SDBC) for swarm neuroevolution.

Thin wrapper over the C++ core. Configuration is passed as YAML text in the
same format the ``sdbc`` command-line tool reads; an empty string means defaults.
"""

from ._sdbc import (
    SchemaMismatchError,
    analyze,
    behaviour_distance,
    characterisation_names,
    compute_weights,
    crowding_distance,
    gate_fitness,
    genome_length,
    mann_whitney_u,
    mutual_information,
    non_dominated_sort,
    novelty,
    pursuit_fitness,
    run,
    run_trial,
    sharing_fitness,
    standardise,
    task_names,
)

__all__ = [
    "SchemaMismatchError",
    "analyze",
    "behaviour_distance",
    "characterisation_names",
    "compute_weights",
    "crowding_distance",
    "gate_fitness",
    "genome_length",
    "mann_whitney_u",
    "mutual_information",
    "non_dominated_sort",
    "novelty",
    "pursuit_fitness",
    "run",
    "run_trial",
    "sharing_fitness",
    "standardise",
    "task_names",
]
