"""Thin sum-product bases: integer-set kernels, constructions, a random-set
model, representation statistics and coverage diagnostics."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConstructionError,
    ExprError,
    FormatError,
    ResourceLimitError,
    SumprodError,
)
from .intset import (  # noqa: E402
    IntSet,
    count_upto,
    deserialize,
    load,
    make_set,
    pair_count_upto,
    power_set_k,
    product_set,
    save,
    serialize,
    sumset,
)
