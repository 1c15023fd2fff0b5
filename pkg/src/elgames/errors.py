"""Exception hierarchy shared by all modules."""


class ElgamesError(Exception):
    """Base class for all errors raised by this package."""


class ArenaError(ElgamesError):
    """Malformed arena (deadlocks, overlapping ownership, bad colors)."""


class RestrictionError(ElgamesError):
    """Restriction precondition violated: a kept vertex loses all successors."""

    def __init__(self, vertex):
        self.vertex = vertex
        super().__init__(f"vertex {vertex} has no successor inside the restriction set")


class IncompleteDfaError(ElgamesError):
    """A monitor is missing a transition for some (state, color) pair."""


class RegistryMismatchError(ElgamesError):
    """Two objects built over different color registries were combined."""


class FormulaError(ElgamesError):
    """Formula parse or arity problem."""


class StrategyError(ElgamesError):
    """Strategy consulted outside its domain (wrong owner, unknown vertex)."""


class SizeGuardError(ElgamesError):
    """A brute-force routine was asked to enumerate beyond its guard."""


class GameFileError(ElgamesError):
    """Game or strategy file failed to parse or to validate."""


class InternalSoundnessError(ElgamesError):
    """An invariant of the solving construction failed.

    This never indicates bad user input; it means the solver itself is
    inconsistent and the result must not be trusted.
    """
