class ThermofluxError(ValueError):
    """Base class for invalid inputs and infeasible requests."""


class SpectrumMismatchError(ThermofluxError):
    pass


class NonPhysicalStateError(ThermofluxError):
    pass


class InfeasibleError(ThermofluxError):
    """Marginal totals or integrality requirements cannot be met."""


class ResourceLimitError(ThermofluxError):
    """The exhaustive oracle would exceed its configured size caps."""
