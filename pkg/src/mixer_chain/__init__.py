"""Random walk on Z x| Sigma (the mixer chain on Z): exact algebra, word
bounds, a BFS distance oracle and Monte Carlo experiments."""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    GENERATORS,
    Cycle,
    MixerElement,
    MixerGenerator,
    Move,
    SitePermutation,
    Swap,
    apply_generator,
    canonical_key,
    compose,
    conjugate_by_translation,
    cycle_decomposition,
    displacement_sum,
    evaluate_word,
    inverse,
    invert_perm,
    mul,
)
from .bfs import BFSResourceError, bfs_ball, bfs_distance  # noqa: E402
from .words import (  # noqa: E402
    covering_number,
    covering_path,
    cycle_word,
    lower_bound,
    transposition_word,
    upper_bound_word,
)
