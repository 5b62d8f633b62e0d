"""Exception hierarchy.

Input problems derive from :class:`InputError`, numerical failures from
:class:`NumericError`; the CLI maps them to exit codes 1 and 2.
"""


class SeqcaError(Exception):
    """Base class for all package errors."""


class InputError(SeqcaError, ValueError):
    pass


class NumericError(SeqcaError, ArithmeticError):
    pass


class NoScenesFound(InputError):
    pass


class EmptyVocabulary(InputError):
    pass


class SpecMismatch(InputError):
    pass


class UnknownLabel(InputError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidTable(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class MalformedMatrix(InputError):
    pass


class KTooLarge(InputError):
    pass


class FactorOutOfRange(InputError, IndexError):
    pass


class OriginPoint(NumericError):
    pass


class DecompositionFailure(NumericError):
    pass
