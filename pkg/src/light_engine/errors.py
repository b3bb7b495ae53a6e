"""Exception types shared across the engine."""


class LightError(Exception):
    """Base class for every error raised by this package."""


# -- world graph ----------------------------------------------------------

class DanglingReference(LightError):
    """A placement or lookup referenced an id that was never declared."""


class DuplicateEntity(LightError):
    """Two entities were declared with the same id."""


class IllegalEdge(LightError):
    """An edge violates the typing rules (e.g. wears on a non-wearable)."""


class CycleDetected(LightError):
    """An edge would make an entity transitively contain itself."""


class MissingPlacement(LightError):
    """A non-location entity ended up without a position parent."""


class UnknownEntity(LightError):
    """The entity id does not exist in the graph."""


class NoMatch(LightError):
    """Name resolution found no entity in scope."""


class Ambiguous(LightError):
    """Name resolution found two or more equally-near entities."""

    def __init__(self, message, candidates=()):
        super().__init__(message)
        self.candidates = tuple(candidates)


# -- command parsing / execution ------------------------------------------

class UnknownVerb(LightError):
    """The first word of a command is not a known action or emote."""


class BadArity(LightError):
    """A command supplied the wrong number of arguments for its verb."""


class PreconditionRace(LightError):
    """Constraints held at check time but no longer hold at execution."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)


class ActionRejected(LightError):
    """An action failed its constraint check; carries every violated rule."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)


# -- episodes ---------------------------------------------------------------

class OutOfTurn(LightError):
    """A participant tried to act when it was not their turn."""


class UnknownViewpoint(LightError):
    """Context serialization was asked for a non-participant."""


# -- agents -----------------------------------------------------------------

class EmptyVocabulary(LightError):
    """Ranking was attempted against corpus statistics with no vocabulary."""


class EmptyBatch(LightError):
    """Training was attempted with no examples."""


class NonFiniteLoss(LightError):
    """Training diverged to a NaN or infinite loss."""


class KinkDetected(LightError):
    """The batch sits on a hinge-loss kink; the gradient check must resample."""


class UnknownKind(LightError):
    """A phrase-registry query used an unregistered kind."""


# -- evaluation -------------------------------------------------------------

class PoolTooSmall(LightError):
    """The distractor pool cannot supply 19 distinct non-gold candidates."""


class GoldNotInPool(LightError):
    """An action example's gold label is missing from its candidate pool."""


class MissingSplit(LightError):
    """A requested data split is absent from the dataset."""


# -- data io ------------------------------------------------------------------

class ManifestMissing(LightError):
    """The dataset manifest file does not exist."""


class VersionMismatch(LightError):
    """A data file declares an unsupported major format version."""


class UnknownCategory(LightError):
    """A location category appears in neither the manifest nor the unseen list."""


class UnrecognizedLayout(LightError):
    """An import source directory does not match the documented layout."""


# -- server -------------------------------------------------------------------

class BindFailure(LightError):
    """The server could not bind its address."""


class WorldLoadFailure(LightError):
    """The server could not load its world file."""


class SessionEnded(LightError):
    """A message arrived for a session that is already over."""


class MalformedMessage(LightError):
    """A wire message failed schema validation."""


class ProtocolViolation(LightError):
    """A bridged agent answered outside the agreed sub-protocol."""


class AgentTimeout(LightError):
    """A bridged agent did not answer within the configured timeout."""
