class ConfigurationError(ValueError):
    """Walk parameters violate a size or index constraint."""


class DegenerateBasisError(ValueError):
    """An analytic reduced model is undefined for the requested sizes."""


class ParityError(ValueError):
    """A closed form was asked for a step count of the wrong parity."""


class SizeGuardError(ValueError):
    """The dense oracle refused an instance that is too large."""


class UnsupportedSourceError(ValueError):
    """A fidelity source does not apply to the requested layout."""
