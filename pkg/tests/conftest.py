import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from light_engine.world import (
    Affordances,
    CharacterSheet,
    LocationSpec,
    ObjectSpec,
    WorldGraph,
    build_world,
)

settings.register_profile(
    "ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ci")

_NAME_BANK = [
    "lantern", "rope", "barrel", "iron key", "stew", "cider", "helmet",
    "dagger", "bench", "satchel", "loaf", "banner", "harp", "net",
]
_CHAR_BANK = ["miller", "scribe", "hunter", "ferryman", "weaver", "abbot"]
_AFF_SETS = [
    (),
    ("gettable",),
    ("gettable", "container"),
    ("gettable", "food"),
    ("gettable", "drink"),
    ("gettable", "wearable"),
    ("gettable", "weapon"),
    ("surface",),
    ("container",),
    ("gettable", "container", "surface"),
]


def random_world(rng: np.random.Generator, max_entities: int = 8) -> WorldGraph:
    """A small valid world with varied affordances, nesting and ownership."""
    n_locations = 1 if rng.random() < 0.8 else 2
    n_chars = int(rng.integers(1, 3)) + (1 if n_locations == 2 else 0)
    n_objects = int(rng.integers(0, max(1, max_entities - n_locations - n_chars + 1)))
    locations = [
        LocationSpec(f"room-{i}", f"room {i}", "Countryside", f"An open room numbered {i}.")
        for i in range(n_locations)
    ]
    char_names = list(rng.permutation(_CHAR_BANK)[:n_chars])
    characters = [CharacterSheet(f"char-{i}", name) for i, name in enumerate(char_names)]
    obj_names = list(rng.permutation(_NAME_BANK)[:n_objects])
    objects = [
        ObjectSpec(
            f"obj-{i}", name, f"A well-used {name}.",
            Affordances.of(*_AFF_SETS[int(rng.integers(len(_AFF_SETS)))]),
        )
        for i, name in enumerate(obj_names)
    ]
    placements = []
    for i, char in enumerate(characters):
        room = locations[i % n_locations]
        placements.append((room.id, "contains", char.id))
    holders: list[tuple[str, str]] = []  # (id, kind) containers/surfaces placed so far
    for obj in objects:
        roll = rng.random()
        owner = characters[int(rng.integers(len(characters)))]
        room = locations[int(rng.integers(len(locations)))]
        if roll < 0.25 and obj.affordances.wearable:
            placements.append((owner.id, "wears", obj.id))
        elif roll < 0.35 and obj.affordances.weapon:
            placements.append((owner.id, "wields", obj.id))
        elif roll < 0.6:
            placements.append((owner.id, "carries", obj.id))
        elif roll < 0.75 and holders:
            parent_id, _ = holders[int(rng.integers(len(holders)))]
            placements.append((parent_id, "contains", obj.id))
        else:
            placements.append((room.id, "contains", obj.id))
        if obj.affordances.container or obj.affordances.surface:
            holders.append((obj.id, "contains"))
    return build_world(locations, characters, objects, placements)


@pytest.fixture
def foyer_world():
    from light_engine.sample_data import foyer_world as make

    return make()


@pytest.fixture
def foyer_log():
    from light_engine.sample_data import foyer_episode

    return foyer_episode()


@pytest.fixture
def graveyard():
    from light_engine.sample_data import graveyard_world

    return graveyard_world()


@pytest.fixture(scope="session")
def fixture_dataset():
    from light_engine.data_io import fixtures_dir, load_dataset

    return load_dataset(fixtures_dir() / "manifest.json")
