"""Exception hierarchy shared by the library and the command line front end."""


class TRSMError(Exception):
    exit_code = 1
    kind = "error"


class ConfigError(TRSMError, ValueError):
    exit_code = 2
    kind = "config"


class DataError(TRSMError, ValueError):
    exit_code = 3
    kind = "data"


class InsufficientSpanError(DataError):
    kind = "insufficient-span"


class ModelValidityError(TRSMError, ValueError):
    exit_code = 4
    kind = "model-validity"


class DomainError(ModelValidityError):
    kind = "domain"


class FrequencyRangeError(ModelValidityError):
    kind = "frequency-range"
