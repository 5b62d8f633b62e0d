"""Correspondence analysis of ordered observations.

Build contingency tables from screenplay text, map chi-squared profile
distances into a Euclidean factor space, cluster the observation
sequence under an adjacency constraint, and test sequence style against
random reorderings.
"""

from . import ca, render, seqclust, stylometrics, tabulate
from ._kernels import BACKEND as KERNEL_BACKEND
from .ca import (
    FactorSpace,
    FrequencyModel,
    Profile,
    chi2_distance,
    decompose,
    factor_correlations,
    frequencies,
    inertia_explained,
    project_supplementary,
    total_inertia,
)
from .render import PlaneRender, PointSet, emit_dendrogram, emit_plane_svg
from .seqclust import (
    Dendrogram,
    OrderedPoints,
    classify_triangles,
    cluster_sequence,
    cophenetic,
    detect_caesuras,
    verify_ultrametric,
)
from .stylometrics import SequenceProfile, movements, permutation_test, style_stats
from .tabulate import (
    ContingencyTable,
    aggregate,
    build_attribute_table,
    build_term_table,
    parse_script,
    tokenize,
)

__version__ = "0.1.0"
