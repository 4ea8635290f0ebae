from .basic import (
    KINDS,
    ConstructionManifest,
    alpha_k,
    alphabeta_generations,
    block_quota,
    build_alphabeta,
    build_thm_ub,
    check_alphabeta,
    covering_start,
    dyadic_T,
    prime_interval_set,
)
from .lorentz import LorentzResult, dyadic_blocks, lorentz_complement, lorentz_profile
from .almost import (
    NEOLEM_STREAM,
    build_thm53_level,
    complement_range,
    defect_profile,
    dyadic_t_grid,
    glue_level,
    hypothesis_threshold_n,
    neolem_complement,
    neolem_hypothesis_check,
    neolem_model,
    thm53_intervals,
    thm53_j_max,
    thm53_primes,
    thm53_quota,
)
