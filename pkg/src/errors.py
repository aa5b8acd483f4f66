from typing import Optional


class PvffError(Exception):
    """Base for every error the toolkit raises on bad input or state."""
    exit_code = 1


class ConfigError(PvffError):
    pass


class DataError(PvffError):
    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyWindowError(DataError):
    pass


class StructureError(PvffError):
    pass


class DimensionError(PvffError):
    pass


class DegenerateClassifierError(PvffError):
    pass


class ModelFormatError(PvffError):
    pass
