"""
Exception hierarchy for the simulation engine
"""


class SimulationError(Exception):
    """Base class for every error raised by the engine"""


class ConfigError(SimulationError, ValueError):
    """Invalid experiment configuration or command-line combination"""


class ScheduleTooShort(SimulationError, IndexError):
    """A finite schedule was queried past its last step"""


class DegenerateN(SimulationError, ValueError):
    """The threshold recursion cannot start for this n"""


class PotentialOverflow(SimulationError, OverflowError):
    """An exponential potential would exceed the safe exponent cap"""


class TotalLoadMismatch(SimulationError, ValueError):
    """Two load vectors were compared that differ in total load"""


class RIsOne(SimulationError, ValueError):
    """The biased-walk crossing formula is undefined for r = 1"""


class UnknownSuite(SimulationError, KeyError):
    """No acceptance suite is registered under the requested name"""


class StateCorruption(SimulationError, AssertionError):
    """Incrementally maintained structures disagree with a full rebuild"""
