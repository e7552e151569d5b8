"""Exception types raised across the package."""


class ScriptFidelityError(Exception):
    """Base class for all package errors."""


class ConfigError(ScriptFidelityError, ValueError):
    """A script configuration file could not be parsed or is invalid."""


class InputFormatError(ScriptFidelityError, ValueError):
    """A corpus or matrix file does not follow its schema."""


class UnknownLanguageError(ScriptFidelityError, KeyError):
    """A language id is not present in the script registry."""

    def __init__(self, language, known=()):
        self.language = language
        self.known = tuple(sorted(known))
        super().__init__(language)

    def __str__(self):
        known = ", ".join(self.known) or "none"
        return f"unknown language {self.language!r} (known: {known})"
