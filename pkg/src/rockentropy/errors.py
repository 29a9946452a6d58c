"""Exception hierarchy shared by every module of the package."""


class RockEntropyError(Exception):
    """Base class for all errors raised by rockentropy."""


# volume_io
class ManifestMismatch(RockEntropyError):
    pass


class IoError(RockEntropyError, OSError):
    pass


class UnsupportedFormat(RockEntropyError):
    pass


class DegenerateVoi(RockEntropyError):
    pass


class VoiOutOfBounds(RockEntropyError):
    pass


# partition
class TooManyDivisions(RockEntropyError):
    pass


# attributes
class DegenerateAttribute(RockEntropyError):
    pass


class ConstantDataset(RockEntropyError):
    pass


# entropy
class EmptyInput(RockEntropyError):
    pass


class NumericalInstability(RockEntropyError):
    pass


class MissingStandardization(RockEntropyError):
    pass


# ranking
class HeterogeneousBatch(RockEntropyError):
    pass


class NoSurvivors(RockEntropyError):
    """Every sample of a batch was excluded or skipped."""


# stats
class UndefinedCorrelation(RockEntropyError):
    pass


class EmptyGroup(RockEntropyError):
    pass


# glcm
class DegenerateSlice(RockEntropyError):
    pass


# phantom
class InvalidSpec(RockEntropyError):
    pass
