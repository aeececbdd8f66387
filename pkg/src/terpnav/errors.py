"""Exception types shared across the package."""


class TerpNavError(Exception):
    """Base class for all terpnav errors."""


class ContractError(TerpNavError, ValueError):
    """A call violated a documented precondition (bad sizes, out-of-range
    indices, velocity limits, ...)."""


class SensingError(TerpNavError):
    """Sensing produced unusable data (all cells missing, robot outside the
    world extent)."""


class GridFormatError(TerpNavError, ValueError):
    """A grid exchange file is malformed or inconsistent."""


class DegenerateRegionError(TerpNavError):
    """Every cell inside the exploration circle has infinite cost; the caller
    should fall back to arc expansion instead of resizing the circle."""


class PlannerStuckError(TerpNavError):
    """No finite-cost candidate waypoint exists after all arc/radius
    fallbacks; the episode cannot make progress."""


class ConfigError(TerpNavError, ValueError):
    """A scenario or suite configuration file is invalid."""
