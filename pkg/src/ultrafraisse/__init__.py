"""Fraisse sequences over truncated ultrametric ball trees.

Builds sequences of finite discrete spaces over a fixed ball tree, embeds
the tree generically into the limit, and runs the lifting, homeomorphism
extension and retraction algorithms with machine-checkable certificates.
"""

from .balltree import (
    BallTree,
    BoundSchedule,
    NowhereDenseFailure,
    NowhereDenseWitness,
    ball,
    ball_quotients,
    check_axioms,
    check_bounded,
    factoring_level,
    from_sequence,
    is_uniformly_nowhere_dense,
    nowhere_dense_to_uniform,
    thread_embedding,
    u_metric,
    validate_witness,
)
from .engine import (
    BuildResult,
    FraisseTask,
    PaddedObject,
    PaddingSchedule,
    TaskSchedule,
    build_fraisse,
    dominate_arrow,
    dominate_object,
    dominating_arrow,
    make_ball_cover,
    make_padded_object,
    make_splitter,
    point_split_task,
    verify_fraisse,
)
from .errors import DepthError, InputError, SchemaError
from .fixtures import binary_tree, k4, random_tree
from .generic import (
    AmbientAutoMap,
    GenericPresentation,
    LiftResult,
    PartialHomeo,
    brute_force_lift_oracle,
    embed_generic,
    extend_homeo,
    lift_through_generic,
    presentation_from_subset,
    retract_onto,
    retraction_table,
)
from .sequences import (
    InverseSequence,
    Report,
    SequenceArrow,
    SlicedSequence,
    Thread,
    apply_sequence_arrow,
    check_coherent,
    limit_threads,
    project,
)
from .slices import SliceArrow, SliceObject, amalgamate_slice, direct_slice
from .spaces import FiniteSpace, PointMap, Surjection, compose, identity, product, pullback
