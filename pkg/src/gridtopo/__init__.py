"""Topology and admittance identification from nodal phasor measurements."""
from .estimation import (
    AdmittanceEstimate,
    CoefficientMatrix,
    DegenerateSystemError,
    IdentifiabilityReport,
    IdentifiedNetwork,
    OutOfDomainError,
    analyze_identifiability,
    assemble_admittance_matrix,
    build_snapshot_coefficient,
    build_stacked_coefficient,
    coefficient_from_measurements,
    estimate_admittance,
    expected_rank,
    extract_topology,
    min_measurements,
)
from .measurements import (
    MeasurementSet,
    NodalVoltageProfile,
    PhasorSnapshot,
    nodal_profiles,
    read_measurements_csv,
    validate_measurement_set,
    write_measurements_csv,
)
from .rigidity import (
    Realization,
    RigidityCheckReport,
    build_rigidity_matrix,
    check_equivalence,
    trivial_motion_basis,
)
from .simulator import (
    GroundTruthNetwork,
    VoltageProfileSpec,
    fixture_path,
    forward_currents,
    generate_measurements,
    generate_random_network,
    load_network,
)
from .topology import EdgeIndexing, build_edge_indexing, build_incidence_matrix

__version__ = "0.1.0"
