"""Exception types shared across the toolkit."""


class XplabError(Exception):
    """Base class for all toolkit errors."""


class IndexOutOfRange(XplabError):
    """A subscript or chase index lies outside its admissible range."""


class ParamViolation(XplabError):
    """Construction parameters violate a stated constraint."""


class StructuralViolation(XplabError):
    """A built network fails a structural bound; carries the offending quantity."""

    def __init__(self, quantity: str, value, bound):
        super().__init__(f"{quantity}={value} violates bound {bound}")
        self.quantity = quantity
        self.value = value
        self.bound = bound


class BandwidthViolation(XplabError):
    """An algorithm emitted more bits on an edge class than its budget allows."""


class RoundLimitExceeded(XplabError):
    """The designated output nodes produced no output within max_rounds."""


class TooManySteps(XplabError):
    """The simulated running time exceeds the cut-simulation hypothesis bound."""


class CoverageGap(XplabError):
    """A party's known set fails to cover what an iteration requires (schedule bug)."""


class ExactnessViolation(XplabError):
    """A known configuration diverges from the direct run or a re-execution."""


class InstanceTooLarge(XplabError):
    """A pointer cannot be chunked through the network within the round budget."""


class BudgetExceeded(XplabError):
    """An exact computation exceeds the configured dynamic-programming budget."""
