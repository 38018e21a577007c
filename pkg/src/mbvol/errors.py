class ConfigurationError(ValueError):
    """Tuning constants or experiment settings that cannot be realised."""


class UndefinedStatisticError(ArithmeticError):
    """A studentised statistic whose denominator or log argument is not positive."""


class LoadError(ValueError):
    """Malformed input data; the message names the offending line when known."""
