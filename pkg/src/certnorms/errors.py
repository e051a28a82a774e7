"""Exception hierarchy shared by the library, the service and the CLI.

Exit-code mapping used by the CLI:
  2 -> InputValidationError (bad files, dimension mismatches, invalid data)
  3 -> CapExceededError (an enumeration / dimension cap was hit)
  4 -> CertifiedBoundError (a certified interval failed its own invariant)
"""


class CertnormsError(Exception):
    """Base class for all library errors."""


class InputValidationError(CertnormsError):
    exit_code = 2


class DimensionMismatchError(InputValidationError):
    pass


class CapExceededError(CertnormsError):
    exit_code = 3


class CertifiedBoundError(CertnormsError):
    exit_code = 4
