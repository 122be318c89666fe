"""Exception types shared across the package."""


class SwarmError(Exception):
    """Base class for all errors raised by this package."""


class ContractViolation(SwarmError):
    """A caller handed a function arguments that break its contract."""


class ConfigError(SwarmError):
    """Instance configuration failed validation.

    Carries the full list of violated constraints so an admin rejection
    can report all of them at once.
    """

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class CapabilityDenied(SwarmError):
    """An operation required a capability that the instance disables."""


class SpecInfeasible(SwarmError):
    """The objective cannot be evaluated for this world (too few agents)."""


class PhaseConflict(SwarmError):
    """A lifecycle operation was called in the wrong instance phase."""


class PhysicsFault(SwarmError):
    """Collision resolution failed to converge; the arena is over-packed."""


class ProtocolError(SwarmError):
    """A malformed or out-of-grammar message arrived on a connection."""


class ParseError(SwarmError):
    """A session log file is malformed or fails its integrity check."""


class DivergenceError(SwarmError):
    """Replay produced a state that differs from the logged one."""

    def __init__(self, tick: int, detail: str = ""):
        self.tick = tick
        self.detail = detail
        msg = f"replay diverged at tick {tick}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
