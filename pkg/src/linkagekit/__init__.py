"""linkagekit: exact pedigree likelihoods and linkage-detection statistics.

A library and command-line toolkit for two-locus linkage analysis on
human pedigrees: peeling likelihoods cross-checked against brute-force
enumeration, lod scores and recombination-fraction MLEs, efficient
scores, sequential and false-discovery detection criteria, a locus
heterogeneity test, gene-counting EM, expected lod scores, family-based
tests, and gene-drop simulation.
"""

from .detect import (
    ElodMethod,
    ElodResult,
    HetTestResult,
    OddsOfErrorReport,
    SprtBoundaries,
    SprtConfig,
    SprtDecision,
    SprtOutcome,
    elod_enumerate,
    elod_monte_carlo,
    fdr,
    heterogeneity_test,
    kl_information,
    odds_of_error_check,
    sprt_boundaries,
    sprt_run,
)
from .errors import LinkageKitError
from .familytests import (
    HomozygosityInput,
    HomozygosityResult,
    SibPair,
    SibPairResult,
    TrioTransmission,
    count_transmissions,
    homozygosity_score,
    sib_pair_test,
    tdt,
)
from .genecount import (
    EmTrajectory,
    PhenotypeSystem,
    em_convergence_rate,
    em_gene_count,
)
from .likelihood import (
    GenotypePosteriors,
    IndividualObservation,
    LodCurve,
    MleEstimate,
    ObservedData,
    ScoreCategory,
    ScoreReport,
    brute_force_loglik,
    default_chi_grid,
    finney_score,
    lod,
    lod_curve,
    mle_recombination,
    pedigree_loglik,
    posterior_genotypes,
)
from .model import (
    Haplotype,
    Locus,
    PenetranceModel,
    PhasedGenotype,
    Phenotype,
    RecombinationParam,
    TwoLocusModel,
    founder_prior,
    penetrance_prob,
    transmission_prob,
)
from .pedigree import (
    Individual,
    NuclearFamily,
    Pedigree,
    PeelingOrder,
    PeelStep,
    Sex,
    peeling_order,
    pivot_separates,
    validate_pedigree,
)
from .sim import SimConfig, estimate_power, gene_drop, replicate_rng

__version__ = "0.1.0"

__all__ = [
    "ElodMethod",
    "ElodResult",
    "EmTrajectory",
    "GenotypePosteriors",
    "Haplotype",
    "HetTestResult",
    "HomozygosityInput",
    "HomozygosityResult",
    "Individual",
    "IndividualObservation",
    "LinkageKitError",
    "Locus",
    "LodCurve",
    "MleEstimate",
    "NuclearFamily",
    "ObservedData",
    "OddsOfErrorReport",
    "Pedigree",
    "PeelStep",
    "PeelingOrder",
    "PenetranceModel",
    "PhasedGenotype",
    "Phenotype",
    "PhenotypeSystem",
    "RecombinationParam",
    "ScoreCategory",
    "ScoreReport",
    "Sex",
    "SibPair",
    "SibPairResult",
    "SimConfig",
    "SprtBoundaries",
    "SprtConfig",
    "SprtDecision",
    "SprtOutcome",
    "TrioTransmission",
    "TwoLocusModel",
    "brute_force_loglik",
    "count_transmissions",
    "default_chi_grid",
    "elod_enumerate",
    "elod_monte_carlo",
    "em_convergence_rate",
    "em_gene_count",
    "estimate_power",
    "fdr",
    "finney_score",
    "founder_prior",
    "gene_drop",
    "heterogeneity_test",
    "homozygosity_score",
    "kl_information",
    "lod",
    "lod_curve",
    "mle_recombination",
    "odds_of_error_check",
    "pedigree_loglik",
    "peeling_order",
    "penetrance_prob",
    "pivot_separates",
    "posterior_genotypes",
    "replicate_rng",
    "sib_pair_test",
    "sim",
    "sprt_boundaries",
    "sprt_run",
    "tdt",
    "transmission_prob",
    "validate_pedigree",
]
