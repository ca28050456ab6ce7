"""Exception hierarchy.

Every error carries a stable ``category`` string so the CLI can report a
machine-readable failure reason.
"""


class StretchyError(Exception):
    category = "error"


class TermCountOverflowError(StretchyError, OverflowError):
    category = "arithmetic_overflow"


class NumericOverflowError(StretchyError, FloatingPointError):
    category = "numeric_overflow"


class DomainError(StretchyError, ValueError):
    category = "domain_error"


class SingularExponentError(DomainError):
    category = "singular_exponent"


class SingularSystemError(StretchyError, ArithmeticError):
    category = "singular_system"


class DegenerateColumnError(StretchyError, ValueError):
    category = "degenerate_column"


class DimensionError(StretchyError, ValueError):
    category = "dimension_mismatch"


class DataFormatError(StretchyError, ValueError):
    category = "parse_error"


class ModelFormatError(StretchyError, ValueError):
    category = "model_format"


class EmptyInputError(StretchyError, ValueError):
    category = "empty_input"
