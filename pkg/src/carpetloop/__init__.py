"""Loops in grid-carpet complements: words, diagrams, homotopies, verdicts."""

from .errors import (
    AssignmentFailure,
    CapExceeded,
    CarpetLoopError,
    DegeneratePosition,
    IncompatibleHomotopies,
    LevelOutOfRange,
    MalformedDiagram,
    NoInducedDiagram,
    NotFoundError,
    RefinementViolation,
    Unroutable,
)
from .grid import (
    Corridor,
    DefiningSequence,
    EXPLICIT,
    FULL_CARPET,
    GridSquare,
    PolyLoop,
    corridor_by_id,
    corridors,
    eligible_squares,
    level_space_contains,
    validate_loop,
)
from .words import (
    CrossingInterval,
    CyclicWord,
    Letter,
    RefinementCorrespondence,
    crossing_intervals,
    crossing_relation,
    encode_word,
    realize_word,
    refinement_map,
)
from .freegroup import (
    FreeWord,
    Puncture,
    bonding_map,
    punctures,
    puncture_word,
    shape_image,
    winding_vector,
)
from .traces import (
    CancellationDiagram,
    CoherentScheme,
    SearchCaps,
    TraceWord,
    coherent_scheme,
    diagram_valid,
    enumerate_diagrams,
    induce_diagram,
    trace_trivial,
)
from .homotopy import (
    CellType,
    Cellulation,
    ContainmentReport,
    GapReport,
    LevelHomotopy,
    build_cellulation,
    build_homotopy,
    circle_param,
    circle_point,
    classify_squares,
    convergence_gap,
    evaluate,
    verify_containment,
)
from .decide import (
    Certificate,
    CheckReport,
    Inconclusive,
    Nontrivial,
    TrivialUpTo,
    check_certificate,
    decide,
    make_certificate,
)
from .rings import central_ring, subdivided_ring

__version__ = "0.1.0"

__all__ = [
    "AssignmentFailure",
    "CancellationDiagram",
    "CapExceeded",
    "CarpetLoopError",
    "CellType",
    "Cellulation",
    "Certificate",
    "CheckReport",
    "CoherentScheme",
    "ContainmentReport",
    "Corridor",
    "CrossingInterval",
    "CyclicWord",
    "DefiningSequence",
    "DegeneratePosition",
    "EXPLICIT",
    "FULL_CARPET",
    "FreeWord",
    "GapReport",
    "GridSquare",
    "IncompatibleHomotopies",
    "Inconclusive",
    "Letter",
    "LevelHomotopy",
    "LevelOutOfRange",
    "MalformedDiagram",
    "NoInducedDiagram",
    "NotFoundError",
    "Nontrivial",
    "PolyLoop",
    "Puncture",
    "RefinementCorrespondence",
    "RefinementViolation",
    "SearchCaps",
    "TraceWord",
    "TrivialUpTo",
    "Unroutable",
    "bonding_map",
    "build_cellulation",
    "build_homotopy",
    "central_ring",
    "check_certificate",
    "circle_param",
    "circle_point",
    "classify_squares",
    "coherent_scheme",
    "convergence_gap",
    "corridor_by_id",
    "corridors",
    "crossing_intervals",
    "crossing_relation",
    "decide",
    "diagram_valid",
    "eligible_squares",
    "encode_word",
    "enumerate_diagrams",
    "evaluate",
    "induce_diagram",
    "level_space_contains",
    "make_certificate",
    "punctures",
    "puncture_word",
    "realize_word",
    "refinement_map",
    "shape_image",
    "subdivided_ring",
    "trace_trivial",
    "validate_loop",
    "verify_containment",
    "winding_vector",
]
