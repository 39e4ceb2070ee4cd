"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures
onto its documented codes: 2 for usage/configuration problems, 3 for bad
data, 4 for numerical failures.
"""


class GafTLError(Exception):
    exit_code = 1


class ConfigError(GafTLError, ValueError):
    exit_code = 2


class DataError(GafTLError, ValueError):
    exit_code = 3


class NumericalError(GafTLError, ArithmeticError):
    exit_code = 4


# data loading / preprocessing
class MalformedRow(DataError):
    pass


class DuplicateDate(DataError):
    pass


class EmptyFile(DataError):
    pass


class UnknownTicker(DataError):
    pass


class ManifestError(DataError):
    pass


class DegenerateRange(DataError):
    pass


class TooShort(DataError):
    pass


class InvalidRatio(ConfigError):
    pass


# similarity
class OutOfRange(DataError):
    pass


class LengthMismatch(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class EmptySample(DataError):
    pass


class EmptySeries(DataError):
    pass


class TooFewSamples(DataError):
    pass


class ZeroVariance(NumericalError):
    pass


class InvalidParameter(ConfigError):
    pass


class NegativeParameter(InvalidParameter):
    pass


class InvalidCombination(ConfigError):
    pass


# selection
class PoolTooSmall(ConfigError):
    pass


class EmptyPool(PoolTooSmall):
    pass


class SelectionError(GafTLError):
    """Evaluation failed for one candidate; ``ticker`` names it."""

    def __init__(self, ticker, cause):
        super().__init__(f"similarity evaluation failed for {ticker}: {cause}")
        self.ticker = ticker
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)


# model
class NonFiniteInput(NumericalError):
    pass


class NonFiniteLoss(NumericalError):
    def __init__(self, epoch, stage=None):
        where = f" in stage {stage!r}" if stage else ""
        super().__init__(f"non-finite loss at epoch {epoch}{where}")
        self.epoch = epoch
        self.stage = stage


class NoSource(ConfigError):
    pass


# metrics
class ZeroActual(DataError):
    pass


class ConstantActual(DataError):
    pass


# pipeline
class MismatchedConfigs(ConfigError):
    pass
