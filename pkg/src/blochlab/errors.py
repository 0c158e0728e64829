"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid lattice configuration or experiment spec (CLI exit code 2)."""


class BasisMismatchError(ValueError):
    """States or operators expressed in incompatible bases."""


class GaugeFixError(RuntimeError):
    """Gauge fixing failed: value and derivative both vanish at the anchor point."""


class NumericalInvariantError(RuntimeError):
    """A numerical invariant exceeded its tolerance (CLI exit code 3)."""
