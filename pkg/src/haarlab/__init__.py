"""haarlab: a numerical laboratory for dyadic Haar analysis on the torus.

Operator constructions (directional Haar projections, dyadic shifts,
ring-domain operators, mollified layer operators, Riesz transforms and
their compositions) together with the verification harness that measures
their decay exponents, norm equivalences and exact combinatorial bounds.
"""

from .grid import (
    GridFunction,
    ProbeSpec,
    generate_probe,
    inner_product,
    lp_norm,
)
from .dyadic import (
    DyadicCube,
    HaarCoefficients,
    SignPattern,
    all_sign_patterns,
    conditional_expectation,
    haar_analysis,
    haar_function,
    haar_synthesis,
)
from .projection import directional_projection, figiel_shift
from .ring import (
    RingDomain,
    ring_block,
    ring_cover,
    ring_operator,
    shifted_ring_operator,
    tiling_identity_check,
)
from .filtration import (
    AdmissibleCollection,
    ExactInterval,
    Filtration,
    build_admissible_collection,
    build_atoms,
    lemma_overlap_measure,
    stein_spotcheck,
    verify_atom_properties,
)
from .mollify import (
    MollifierSpec,
    build_mollifier,
    delta_layer,
    kernel_expansion_check,
    layer_projection,
    mollified_haar,
    negative_layer_projection,
)
from .riesz import (
    antiderivative,
    layer_riesz_composition,
    mollified_haar_riesz,
    riesz_inverse,
    riesz_layer_operator,
    riesz_transform,
)
from .opnorm import (
    DecayFit,
    ExponentPair,
    NormEstimate,
    estimate_norm,
    exponents,
    fit_decay,
    interpolation_experiment,
)

__version__ = "0.1.0"
