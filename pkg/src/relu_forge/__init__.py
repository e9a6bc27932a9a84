"""relu-forge: constructive deep ReLU networks and their verification.

Build bumps, product gates and exact data interpolants as explicit ReLU
networks, fit rate-optimal approximation spaces, and reproduce the desk-scale
over-parameterized training phenomena.
"""

from .nets import (
    AffineMap,
    NetSummary,
    ParseError,
    ReluNet,
    apply_to_channels,
    compose_serial,
    deserialize,
    evaluate,
    evaluate_batch,
    pad_depth,
    scale_readout,
    serialize,
    stack_parallel,
    sum_nets,
    summarize,
)
from .primitives import (
    BumpSpec,
    bump_net,
    clamp_net,
    const_net,
    coord_net,
    identity_net,
    psi_kj_net,
    psi_net,
    trapezoid_net,
)
from .gates import (
    FIXED_DEPTH,
    LOG_DEPTH,
    GateSpec,
    gate_budget,
    multi_gate,
    pair_gate,
    square_net,
    stages_for,
    unary_gate,
)
from .analysis import (
    NormEstimate,
    distance,
    lp_norm_mc,
    net_fn,
    slope_fit,
    sup_norm_grid,
    tensor_grid,
    uniform_cube_sample,
    worker_count,
)
from .deepen import (
    Dataset,
    DeepenPlan,
    bad_interpolant,
    closeness_constant,
    deepen,
    deepen_fc,
    empirical_risk,
    interpolation_residual,
    make_plan,
    partition_sum_at_points,
    separation_radius,
    student_depth,
    tau_bound,
)
from .basis import (
    ApproxBasis,
    BasisSpec,
    FittedModel,
    ResourceError,
    basis_size,
    build_basis,
    fit_interpolating,
    fit_least_squares,
    rate_experiment,
    witness_function,
)
from .data import (
    additive_target,
    make_dataset,
    random_teacher,
    read_dataset_csv,
    sample_separated,
    smooth_product_target,
    sparse_bump_target,
    write_dataset_csv,
)
from .trainer import (
    MLP,
    TrainConfig,
    TrainHistory,
    compare_constructed,
    epoch_sweep,
    gradient_check,
    load_csv,
    mlp_to_relunet,
    synthetic_split,
    train,
    width_sweep,
)

__version__ = "0.1.0"
