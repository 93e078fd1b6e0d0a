class FieldError:
    BAD_DIMENSION = 'Dimension must be 1, 2 or 3'
    NOT_POWER_OF_TWO = 'Resolution must be a power of two'
    OUT_OF_RANGE = 'Resolution must lie between 4 and 4096'
    NON_FINITE = 'Field contains non-finite values'
    BAD_RANK = 'Unsupported field rank'
    GRID_MISMATCH = 'Fields live on different grids'


class ModelError:
    INADMISSIBLE = 'State outside the admissible region (theta <= 0)'
    NON_FINITE = 'State has non-finite components'
    NOT_FOUND = 'Unknown model'
    BAD_EXPONENTS = 'Growth exponents must satisfy p >= q >= 2'
    RECOVERY_RANGE = 'Internal energy outside the range of e(F, .)'
    RECOVERY_STALLED = 'Entropy recovery did not converge'


class SearchError:
    ZERO_DENOMINATOR = 'Test field is trivial (zero denominator)'
    EXCURSION = 'Test field leaves the admissible region'
    CUBE_TOO_LARGE = 'Cube exceeds the periodic domain'
    BAD_TEST_FIELD = 'Test field violates its boundary mode'


class SolverError:
    CFL = 'Time step exceeds the CFL bound'
    UNSUPPORTED = 'Unsupported reference/model combination'
    NO_TIME_DERIVATIVES = 'Reference lacks time derivatives'
    ENERGY_BOUND = 'Viscous member exceeds the uniform energy bound'


class MeasureError:
    UNRESOLVABLE = 'Finest scale is not resolved by the sampling grid'
    UNQUERYABLE = 'Input cannot be evaluated at the requested times'
    BOUNDARY_TIME = 't0 must be interior to the time window'


class RunError:
    BAD_CONFIG = 'Invalid configuration'
    UNKNOWN_KEY = 'Unknown configuration key'
    WRITE_FAILED = 'Could not write artifact'
    FORMAT_VERSION = 'Artifact format version mismatch'
    CHECKSUM = 'Artifact checksum mismatch'


class LabError(Exception):
    """Base error; exit_code is what the command line reports."""
    exit_code = 1


class InvalidDimension(LabError):
    pass


class InvalidResolution(LabError):
    pass


class GridMismatch(LabError):
    pass


class InadmissibleState(LabError):
    pass


class RecoveryFailure(LabError):
    def __init__(self, message: str, time: float = None, cell: tuple = None):
        if time is not None or cell is not None:
            message = f'{message} (t={time}, cell={cell})'
        super().__init__(message)
        self.time = time
        self.cell = cell


class ZeroDenominator(LabError):
    pass


class InadmissibleExcursion(LabError):
    pass


class CubeExceedsDomain(LabError):
    pass


class InvalidTestField(LabError):
    pass


class CFLViolation(LabError):
    pass


class UnsupportedCombination(LabError):
    pass


class MissingTimeDerivatives(LabError):
    pass


class EnergyBoundExceeded(LabError):
    pass


class UnresolvableScale(LabError):
    pass


class UnqueryableInput(LabError):
    pass


class ConfigError(LabError):
    pass


class ModelNotFound(LabError):
    pass


class ArtifactWriteError(LabError):
    pass


class FormatVersionMismatch(LabError):
    pass


class ChecksumMismatch(LabError):
    pass
