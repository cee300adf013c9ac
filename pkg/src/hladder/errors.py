"""Exception hierarchy shared by all hladder modules."""


class HladderError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(HladderError, ValueError):
    pass


class TextureError(HladderError, ValueError):
    pass


class SymmetryError(HladderError):
    """A requested spatial operation is not available for this cell."""


class DegeneracyError(HladderError):
    def __init__(self, message, k=None):
        super().__init__(message)
        self.k = k


class VanishingOverlapError(HladderError):
    pass


class NoStraddlingPairError(HladderError):
    pass


class NoClosingError(HladderError):
    pass


class TransportError(HladderError):
    pass


class ConfigError(HladderError, ValueError):
    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.key = key
        self.line = line
