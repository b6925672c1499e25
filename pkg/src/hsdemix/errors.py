"""Exception hierarchy shared across the package.

Every error carries a short machine-parsable ``category`` used by the CLI
to emit single-line failure reports.
"""


class HsDemixError(Exception):
    category = "error"


class FormatError(HsDemixError):
    """Malformed header or payload in an interchange file."""

    category = "format"


class SizeError(HsDemixError):
    """Header dimensions disagree with the payload."""

    category = "size"


class ShapeError(HsDemixError):
    """Operands with incompatible shapes."""

    category = "shape"


class DegenerateInputError(HsDemixError):
    """Input that makes the requested operation meaningless (e.g. all-zero data)."""

    category = "degenerate-input"


class InsufficientSamplesError(HsDemixError):
    """Fewer positive-class voxels than requested dictionary atoms."""

    category = "insufficient-samples"


class ThinViolationError(HsDemixError):
    """More atoms requested than spectral bands (d > f)."""

    category = "thin-violation"


class RankError(HsDemixError):
    """Rank-deficient matrix where full column rank is required."""

    category = "rank"


class ConvergenceError(HsDemixError):
    """Iterative routine failed to converge within its budget."""

    category = "convergence"


class DivergenceError(HsDemixError):
    """Non-finite values appeared inside an iterative solve."""

    category = "divergence"


class DegenerateMaskError(HsDemixError):
    """Ground-truth mask with a single class; ROC undefined."""

    category = "degenerate-mask"


class TrivialInstanceError(HsDemixError):
    """Instance with nothing to bound (empty sparse support)."""

    category = "trivial-instance"
