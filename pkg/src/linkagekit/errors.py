"""Exception hierarchy for linkagekit.

Every error raised by the library derives from :class:`LinkageKitError`,
so callers can catch one type at an analysis boundary.  The CLI maps
these onto exit code 1.
"""


class LinkageKitError(Exception):
    """Base class for all linkagekit errors."""


# --- pedigree structure -------------------------------------------------


class PedigreeError(LinkageKitError):
    """Invalid pedigree structure."""


class EmptyPedigreeError(PedigreeError):
    """A pedigree must contain at least one individual."""


class MissingParentError(PedigreeError):
    """A referenced parent id is absent from the pedigree."""


class HalfSpecifiedParentsError(PedigreeError):
    """Exactly one of father/mother was given; need both or neither."""


class CycleDetectedError(PedigreeError):
    """An individual is its own ancestor."""


class InvalidStructureError(PedigreeError):
    """Structurally invalid record (duplicate id, self-mating, ...)."""


class LoopDetectedError(PedigreeError):
    """The marriage-node graph contains a loop; peeling is unavailable."""


# --- model --------------------------------------------------------------


class ModelError(LinkageKitError):
    """Invalid genetic model specification."""


class InvalidLocusError(ModelError):
    """Allele frequencies are negative or do not sum to one."""


# --- likelihood ---------------------------------------------------------


class InconsistentDataError(LinkageKitError):
    """Observed data have zero probability under the model (Mendelian
    violation); the likelihood is identically zero."""


class TooLargeToEnumerateError(LinkageKitError):
    """Pedigree exceeds the brute-force enumeration guard."""


class NullProbabilityZeroError(LinkageKitError):
    """A multinomial category with zero null probability has observations."""


# --- detection statistics -----------------------------------------------


class ZeroPowerRegionError(LinkageKitError):
    """The critical region has zero probability under the alternative."""


class GridMissingNullError(LinkageKitError):
    """A lod-curve grid must contain the null point chi = 0.5."""


class SupportMismatchError(LinkageKitError):
    """f0 puts mass where f1 has none; KL information is undefined."""


class ZeroReplicatesError(LinkageKitError):
    """Monte Carlo estimation requires at least one replicate."""


# --- family-based tests -------------------------------------------------


class EmptyInputError(LinkageKitError):
    """The test requires at least one observation."""


class NoInformativeTransmissionsError(LinkageKitError):
    """No transmissions from heterozygous parents were scored."""


# --- gene-counting EM ---------------------------------------------------


class ZeroTotalCountError(LinkageKitError):
    """Phenotype counts sum to zero; nothing to estimate."""


class NonSimplexInitError(LinkageKitError):
    """EM initialization must be strictly positive and sum to one."""


class InsufficientIteratesError(LinkageKitError):
    """Too few EM iterates to estimate a convergence rate."""


# --- file parsing -------------------------------------------------------


class ParseError(LinkageKitError):
    """Malformed input file; carries the offending line number."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number
