"""Grounded-dialogue text adventure engine.

A typed entity graph, constraint-checked actions and emotes, a two-character
episode protocol with special-token context serialization, retrieval ranking
baselines, an evaluation harness, and a multi-agent game server.
"""

__version__ = "0.1.0"

from .actions import (  # noqa: F401
    EMOTES,
    ConstraintViolation,
    Emote,
    GameEvent,
    PhysicalAction,
    canonical_text,
    check_constraints,
    enumerate_valid,
    execute,
    parse_command,
)
from .episode import (  # noqa: F401
    Episode,
    EpisodeLog,
    ContextBundle,
    TaskExample,
    TurnRecord,
    make_examples,
    replay_episode,
    serialize_context,
)
from .world import (  # noqa: F401
    Affordances,
    CharacterSheet,
    LocationSpec,
    ObjectSpec,
    WorldGraph,
    build_world,
    load_world,
    resolve_name,
    room_of,
    save_world,
)
