"""Exception types shared across the package."""


class SepnmfError(Exception):
    """Base class for all errors raised by this package."""


class InvalidMatrixError(SepnmfError, ValueError):
    """Matrix input violates a structural invariant (shape, finiteness)."""


class ZeroDirectionError(SepnmfError, ValueError):
    """A projection direction with zero norm was supplied."""


class InvalidOptionsError(SepnmfError, ValueError):
    """Option combination violates a precondition."""


class ConvergenceFailureError(SepnmfError, RuntimeError):
    """An iterative kernel exhausted its sweep limit without converging."""


class RankDeficiencyError(SepnmfError, RuntimeError):
    """The residual vanished before the requested number of columns was found.

    `extracted_count` reports how many columns were obtained; `result`, when
    not None, carries the partial extraction.
    """

    def __init__(self, message, extracted_count=0, result=None):
        super().__init__(message)
        self.extracted_count = extracted_count
        self.result = result
