"""Exception types shared across the package.

Errors deriving from ``InputError`` indicate bad user input (files, shapes,
arguments) and map to CLI exit code 2; anything else is an internal failure.
"""


class SecamError(Exception):
    pass


class InputError(SecamError):
    pass


class FormatError(InputError):
    """File contents do not match the expected on-disk format."""


class UnsupportedError(InputError):
    """Well-formed input that this implementation deliberately rejects."""


class IoError(InputError):
    """Underlying read/write failure."""


class ManifestError(InputError):
    """Bundle manifest is missing keys or semantically inconsistent."""


class ShapeError(InputError):
    """Array shapes violate a cross-object contract."""


class ArgumentError(InputError):
    """Parameter outside its documented range."""


class EmptyMaskError(InputError):
    """Operation requires at least one set pixel."""
