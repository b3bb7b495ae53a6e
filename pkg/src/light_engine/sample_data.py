"""Bundled fixture dataset: two curated demo worlds plus a seeded synthetic corpus.

Everything here is deterministic so the packaged fixture files can be rebuilt
bit-for-bit (tests rely on that to keep the shipped data honest).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .actions import EMOTES, canonical_text, enumerate_valid
from .data_io import UNSEEN_CATEGORIES, DatasetManifest, _claim_ids, save_manifest
from .episode import Episode, EpisodeLog, save_episode
from .world import (
    Affordances,
    CharacterSheet,
    LocationSpec,
    Neighbor,
    ObjectSpec,
    WorldGraph,
    build_world,
    normalize_name,
    save_world,
)

FOYER_DESCRIPTION = (
    "The main foyer is massive. A grand staircase sits to the back of the foyer "
    "leading to the upstairs. At the front of the foyer stand two servants ready "
    "to help anyone who comes to visit. To the left of the room there is a "
    "doorway leading into a corridor. To the right there is a door leading to "
    "another corridor for the King's servants. At the foot of the stairs there "
    "is a bearskin rug that is staring at you almost as if still hungry. The "
    "walls are lined with portraits of the king and his family."
)

SERVANT_PERSONA = [
    "I come from the lower class.",
    "I do what I am told without question.",
    "I can not read.",
    "I have not seen my family in a long time.",
]

KING_PERSONA = [
    "I am a king of the whole empire.",
    "I give rules and pursuit them.",
    "I am brave and fearless.",
]

# (speaker, utterance, action, emote) for the demo castle episode.
FOYER_TURNS: list[tuple[str, str | None, str | None, str | None]] = [
    ("servant", "my humble king. What am I to do to serve you? ", None, None),
    ("king", "Ahhh. My loyal servant. Polish my scepter. ", "give scepter to servant", None),
    ("servant", "Yes my lord. I will polish it immediately. Am I to return it to you personally? ",
     "put scepter in small bucket", None),
    ("king", "Yes. Yes. Of course. Also check the jewels in my crown. They seem loose.",
     "give crown to servant", None),
    ("servant", "But sire I am not qualified to do that. Would you prefer I take it to someone? ",
     None, None),
    ("king", "Oh fine then. ", None, "gesture sigh"),
    ("servant", "I am sorry sir the rug startled me", "drop crown", None),
    ("king", "Haha! That's bear I slain on my latest hunting trip. He's a mighty beast!",
     None, "gesture laugh"),
    ("servant", "and if I may ask where did you go hunting sire? ", None, None),
    ("king", "The great woods of course. This bear was stealing children in the kingdom. "
     "Surely you heard about it.", None, None),
    ("servant", "sire. I have not been outside of these walls in quiet some time. "
     "I have not seen my family in ages. ", None, None),
    ("king", "Such is the life of a servant I suppose. How's that scepter looking?", None, None),
    ("servant", "it is almost ready sire. and the crown who would you like me to take it to? ",
     "get scepter from small bucket", None),
    ("king", "Here just give it back. I'll have the queen find someone.", None, None),
]

FOYER_EPISODE_ID = "foyer-polish-scepter"


def foyer_world() -> WorldGraph:
    foyer = LocationSpec("", "main foyer", "Inside Castle", FOYER_DESCRIPTION)
    servant = CharacterSheet("", "servant", list(SERVANT_PERSONA), "A servant of the castle.")
    king = CharacterSheet("", "king", list(KING_PERSONA), "The king of the empire.")
    objects = [
        ObjectSpec("", "a duster",
                   "The duster has large gray feathers bound together by a leather wrap.",
                   Affordances.of("gettable")),
        ObjectSpec("", "a small bucket",
                   "The bucket may be small but it gets the job done.",
                   Affordances.of("gettable", "container")),
        ObjectSpec("", "a rag",
                   "The tattered rag was smeared with blood, torn to shreds and left "
                   "unceremoniously in a pile on the floor.",
                   Affordances.of("gettable")),
        ObjectSpec("", "a shirt",
                   "The shirt is tailored from finely woven cotton and is fastened up "
                   "the front by a series of rounded buttons.",
                   Affordances.of("gettable", "wearable")),
        ObjectSpec("", "a crown",
                   "Thought of as a holy item, the crown goes only to those who are worthy enough.",
                   Affordances.of("gettable", "wearable")),
        ObjectSpec("", "a scepter",
                   "On its handle, you see two red gems gleaming like eyes of an animal.",
                   Affordances.of("gettable")),
    ]
    return build_world(
        [foyer], [servant, king], objects,
        [
            ("main-foyer", "contains", "servant"),
            ("main-foyer", "contains", "king"),
            ("servant", "carries", "duster"),
            ("servant", "carries", "small-bucket"),
            ("servant", "carries", "rag"),
            ("servant", "wears", "shirt"),
            ("king", "carries", "crown"),
            ("king", "carries", "scepter"),
        ],
    )


def foyer_episode(split: str = "test_seen") -> EpisodeLog:
    ep = Episode(foyer_world(), ("servant", "king"), split, FOYER_EPISODE_ID)
    for speaker, utterance, action, emote in FOYER_TURNS:
        ep.advance_turn(speaker, utterance, action, emote)
    return ep.log()


def graveyard_world() -> WorldGraph:
    graveyard = LocationSpec(
        "", "graveyard", "Graveyard",
        "Two-and-a-half walls of the finest, whitest stone stand here, weathered by "
        "the passing of countless seasons. There is no roof, nor sign that there ever "
        "was one. All indications are that the work was abruptly abandoned. There is "
        "no door, nor markings on the walls. Nor is there any indication that any "
        "coffin has ever lain here... yet.",
        "Bright white stone was all the fad for funerary architecture, once upon a "
        "time. It's difficult to understand why someone would abandon such a large "
        "and expensive undertaking. Maybe the gravedigger remembers... if he's sober.",
        [
            Neighbor("Dead Tree", "south", "following a dirt trail behind the mausoleum"),
            Neighbor("Fresh Grave", "west", "walking carefully between fallen headstones"),
        ],
    )
    gravedigger = CharacterSheet(
        "", "gravedigger",
        [
            "I am low paid labor in this town.",
            "I do a job that many people shun because of my contact with death.",
            "I am very lonely and wish I had someone to talk to who isn't dead.",
        ],
        "You might want to talk to the gravedigger, specially if your looking for a "
        "friend, he might be odd but you will find a friend in him.",
    )
    thief = CharacterSheet(
        "", "thief",
        [
            "I live alone in a tent in the woods.",
            "I steal food from the townspeople and coal from the blacksmith.",
            "The village police can not find me to put me in jail.",
        ],
        "The thief is a sneaky fellow who takes from the people and does so in a way "
        "that disturbs the livelihood of the others.",
    )
    objects = [
        ObjectSpec("", "shovel",
                   "The shovel is made of metal and silver. It is quite sturdy and appears new.",
                   Affordances.of("gettable", "weapon")),
        ObjectSpec("", "wall",
                   "The wall is pure white, the richest of which you have ever seen.",
                   Affordances()),
        ObjectSpec("", "meat", "A cut of cured meat wrapped in cloth.",
                   Affordances.of("gettable", "food")),
        ObjectSpec("", "potatoes", "A half dozen potatoes still dusted with earth.",
                   Affordances.of("gettable", "food")),
        ObjectSpec("", "coal", "A lump of coal stolen from the blacksmith.",
                   Affordances.of("gettable")),
        ObjectSpec("", "dark tunic", "A tunic dyed so dark it swallows the moonlight.",
                   Affordances.of("gettable", "wearable")),
        ObjectSpec("", "cloak", "A travel cloak with a deep hood.",
                   Affordances.of("gettable", "wearable")),
        ObjectSpec("", "knife", "A short knife with a worn leather grip.",
                   Affordances.of("gettable", "weapon")),
    ]
    return build_world(
        [graveyard], [gravedigger, thief], objects,
        [
            ("graveyard", "contains", "gravedigger"),
            ("graveyard", "contains", "thief"),
            ("gravedigger", "carries", "shovel"),
            ("graveyard", "contains", "wall"),
            ("thief", "carries", "meat"),
            ("thief", "carries", "potatoes"),
            ("thief", "carries", "coal"),
            ("thief", "wears", "dark-tunic"),
            ("thief", "wears", "cloak"),
            ("thief", "wields", "knife"),
        ],
    )


# -- synthetic corpus ----------------------------------------------------------------

_WORLD_BANK = [
    # (room name, category, characters, objects); categories past index 7 are unseen.
    ("dusty tavern", "Tavern",
     [("barkeep", ["I keep the ale flowing.", "I hear every rumor in town.", "I never water the drinks."]),
      ("wandering bard", ["I sing for my supper.", "I collect stories from travelers.", "I owe money in three villages."])],
     [("mug of ale", "A dented pewter mug full of dark ale.", ("gettable", "drink")),
      ("wooden table", "A long table scarred by a hundred knife games.", ("surface",)),
      ("lute", "A travel-worn lute with one new string.", ("gettable",)),
      ("meat pie", "A steaming pie that smells of pepper.", ("gettable", "food")),
      ("iron tankard", "A heavy tankard chained to the bar.", ("drink",))]),
    ("royal stable", "Outside Castle",
     [("stable hand", ["I muck the stalls before dawn.", "I know each horse by name.", "I dream of riding in a tourney."]),
      ("royal guard", ["I guard the king's horses.", "I take my watch seriously.", "I polish my armor nightly."])],
     [("saddle", "A fine leather saddle with brass buckles.", ("gettable",)),
      ("hay bale", "A tight bale of sweet hay.", ("gettable", "surface")),
      ("feed bucket", "A battered bucket for oats.", ("gettable", "container")),
      ("pitchfork", "A long pitchfork with bent tines.", ("gettable", "weapon")),
      ("apple", "A bruised apple saved for the old mare.", ("gettable", "food"))]),
    ("forest clearing", "Forest",
     [("poacher", ["I hunt where I should not.", "I sell pelts in the night market.", "I fear the king's wardens."]),
      ("old hermit", ["I live alone among the trees.", "I speak more to birds than people.", "I brew bitter teas."])],
     [("snare", "A wire snare wound around a stake.", ("gettable",)),
      ("tree stump", "A wide stump used as a table.", ("surface",)),
      ("herb pouch", "A pouch smelling of sage and nettle.", ("gettable", "container")),
      ("bitter tea", "A clay cup of steaming bitter tea.", ("gettable", "drink")),
      ("rabbit pelt", "A soft pelt stretched on a frame.", ("gettable",))]),
    ("castle kitchen", "Inside Castle",
     [("head cook", ["I rule this kitchen like a general.", "I tolerate no wasted salt.", "I once fed three hundred guests alone."]),
      ("scullery maid", ["I scrub pots from dawn to dusk.", "I sneak tastes when no one looks.", "I am saving for a dress."])],
     [("copper pot", "A wide copper pot polished to a shine.", ("gettable", "container")),
      ("carving knife", "A carving knife honed to a whisper.", ("gettable", "weapon")),
      ("fresh bread", "A warm loaf with a cracked crust.", ("gettable", "food")),
      ("wine jug", "A glazed jug of table wine.", ("gettable", "drink")),
      ("apron", "A flour-dusted apron with deep pockets.", ("gettable", "wearable"))]),
    ("desert bazaar", "Bazaar",
     [("spice merchant", ["I trade in saffron and salt.", "I can smell a counterfeit coin.", "I have crossed the dunes nine times."]),
      ("water seller", ["I sell shade and cool water.", "I know every well for fifty miles.", "I never haggle before noon."])],
     [("spice chest", "A cedar chest with a dozen tiny drawers.", ("gettable", "container")),
      ("waterskin", "A taut goatskin sloshing with water.", ("gettable", "drink")),
      ("silk scarf", "A scarf dyed the color of sunset.", ("gettable", "wearable")),
      ("brass scale", "A balance scale with worn weights.", ("gettable",)),
      ("dried figs", "A string of figs dried in the sun.", ("gettable", "food"))]),
    ("harbor dock", "Port",
     [("dock worker", ["I haul crates from first light.", "My back aches but my pay is honest.", "I want my own fishing boat."]),
      ("smuggler", ["I move cargo that never sees a ledger.", "I trust no one on this dock.", "I keep a blade in my boot."])],
     [("cargo crate", "A pine crate stenciled with a foreign mark.", ("gettable", "container")),
      ("boat hook", "A long hook for dragging lines.", ("gettable", "weapon")),
      ("salted fish", "A slab of fish stiff with salt.", ("gettable", "food")),
      ("oilskin coat", "A coat that sheds rain and suspicion.", ("gettable", "wearable")),
      ("mooring post", "A thick post wrapped in rope.", ())]),
    ("graveyard", None, None, None),  # curated world slot
    ("mountain shrine", "Inside Temple",
     [("shrine keeper", ["I tend the lamps that never go out.", "I took a vow of plain speech.", "I remember every pilgrim's face."]),
      ("pilgrim", ["I walked four hundred miles to pray here.", "I carry my village's wishes.", "My boots are worn to paper."])],
     [("prayer bowl", "A bronze bowl filled with folded wishes.", ("gettable", "container")),
      ("oil lamp", "A small lamp burning sweet oil.", ("gettable",)),
      ("pilgrim staff", "A staff notched once for each mile.", ("gettable", "weapon")),
      ("rice cake", "A dense cake wrapped in a leaf.", ("gettable", "food")),
      ("stone altar", "A low altar smoothed by centuries of hands.", ("surface",))]),
    ("glacier hollow", "Frozen Tundra",
     [("ice fisher", ["I cut holes in the blue ice.", "I read the weather in my knuckles.", "I share my catch with the wind."]),
      ("snow tracker", ["I follow trails no one else sees.", "I have slept through white storms.", "I owe my life to my dogs."])],
     [("fishing spear", "A spear with a barbed bone point.", ("gettable", "weapon")),
      ("frozen fish", "A fish frozen mid-curve, hard as wood.", ("gettable", "food")),
      ("fur cloak", "A cloak of layered white pelts.", ("gettable", "wearable")),
      ("ice chest", "A chest cut from clear blue ice.", ("container",)),
      ("melt water", "A skin of glacier melt, achingly cold.", ("gettable", "drink"))]),
    ("obsidian gate", "Netherworld",
     [("gatekeeper shade", ["I count the souls that pass.", "I have forgotten my own name.", "I keep the ledger of the dead."]),
      ("lost soul", ["I do not remember dying.", "I am looking for a door home.", "I barter memories for favors."])],
     [("soul ledger", "A book whose pages turn themselves.", ("gettable",)),
      ("ash urn", "An urn warm to the touch.", ("gettable", "container")),
      ("ember fruit", "A fruit that glows like a dying coal.", ("gettable", "food")),
      ("bone flute", "A flute carved from a nameless bone.", ("gettable",)),
      ("shadow veil", "A veil woven from gate-shadow.", ("gettable", "wearable"))]),
]

_UTTERANCE_TEMPLATES = [
    "have you seen the {obj} anywhere near the {place}?",
    "i could trade you this {obj} for a story.",
    "mind the {obj}, it is worth more than both of us.",
    "the {place} feels colder than it did yesterday.",
    "tell me truly, what brings you to the {place}?",
    "i have carried this {obj} for three long days.",
    "careful with that {obj}, friend.",
    "my master would pay dearly for a {obj} like that.",
    "we should rest here before the road turns dark.",
    "you look as tired as i feel, friend.",
    "rumor says a storm is coming over the hills.",
    "hand me the {obj} and i will show you a trick.",
    "i lost my last {obj} in a wager i should not have made.",
    "the folk of the {place} speak well of you.",
    "keep your voice down, the walls have ears.",
    "would you share a bite before we talk business?",
    "that {obj} has seen better days, has it not?",
    "i promise you, the {obj} is not cursed.",
    "stay a while, the {place} is safer with two.",
    "i will remember this kindness, mark my words.",
]


def _bank_world(entry, rng: np.random.Generator) -> WorldGraph:
    """Instantiate a bank entry; objects split between the room and inventories."""
    room_name, category, chars, objects = entry
    if chars is None:
        return graveyard_world()
    room = LocationSpec("", room_name, category, f"The {room_name} stretches out before you.")
    sheets = [CharacterSheet("", name, list(persona)) for name, persona in chars]
    specs = [ObjectSpec("", name, desc, Affordances.of(*flags)) for name, desc, flags in objects]
    _claim_ids([room, *sheets, *specs])
    placements = [(room.id, "contains", c.id) for c in sheets]
    for spec in specs:
        if spec.affordances.gettable and rng.random() < 0.5:
            owner = sheets[int(rng.integers(len(sheets)))]
            placements.append((owner.id, "carries", spec.id))
        else:
            placements.append((room.id, "contains", spec.id))
    return build_world([room], sheets, specs, placements)


def _utterance(rng: np.random.Generator, graph: WorldGraph, room: str) -> str:
    template = _UTTERANCE_TEMPLATES[int(rng.integers(len(_UTTERANCE_TEMPLATES)))]
    objs = graph.objects_in_room(room)
    obj = graph.name_of(objs[int(rng.integers(len(objs)))]) if objs else "road"
    place = graph.name_of(room)
    return template.format(obj=obj, place=place)


def generate_corpus(seed: int = 11, episode_count: int = 50) -> list[tuple[str, WorldGraph, list[EpisodeLog]]]:
    """Deterministic synthetic corpus: (world name, world, episodes) triples.

    Episodes alternate turns with template utterances; roughly half the turns
    take a sampled valid action and a third add an emote, so every logged
    action replays cleanly by construction.
    """
    rng = np.random.default_rng(seed)
    worlds = [(f"syn-w{idx:02d}", _bank_world(entry, rng)) for idx, entry in enumerate(_WORLD_BANK)]
    out: list[tuple[str, WorldGraph, list[EpisodeLog]]] = [(n, w, []) for n, w in worlds]

    for e_idx in range(episode_count):
        w_idx = e_idx % len(worlds)
        name, world = worlds[w_idx]
        chars = world.characters_in_room(world.locations()[0])
        participants = (chars[0], chars[1])
        ep = Episode(world, participants, "train", f"syn-{e_idx:03d}")
        turn_count = int(rng.integers(10, 15))
        room = world.locations()[0]
        for _ in range(turn_count):
            speaker = ep.expected_speaker
            utterance = _utterance(rng, ep.graph, room)
            action_text = None
            emote_text = None
            if rng.random() < 0.5:
                valid = enumerate_valid(ep.graph, speaker)
                if valid:
                    choice = valid[int(rng.integers(len(valid)))]
                    action_text = canonical_text(ep.graph, choice)
            if rng.random() < 0.35:
                emote_text = EMOTES[int(rng.integers(len(EMOTES)))]
            ep.advance_turn(speaker, utterance, action_text, emote_text)
        out[w_idx][2].append(ep.log())
    return out


def write_fixtures(out_dir) -> None:
    """Write the full bundled dataset (manifest, worlds, episodes) under out_dir."""
    out = Path(out_dir)
    (out / "worlds").mkdir(parents=True, exist_ok=True)
    (out / "episodes").mkdir(parents=True, exist_ok=True)

    manifest = DatasetManifest()
    splits: dict[str, list[str]] = {"train": [], "valid": [], "test_seen": [], "test_unseen": []}

    foyer_rel = "worlds/main_foyer.json"
    save_world(foyer_world(), out / foyer_rel)
    manifest.worlds.append(foyer_rel)
    foyer_ep_rel = "episodes/foyer_polish_scepter.jsonl"
    save_episode(foyer_episode(), out / foyer_ep_rel, foyer_rel)
    splits["test_seen"].append(foyer_ep_rel)
    # standalone copy for `light serve --world ...`; corpus episodes use syn-w06
    save_world(graveyard_world(), out / "worlds" / "graveyard.json")

    unseen = {normalize_name(c) for c in UNSEEN_CATEGORIES}
    seen_cycle = ["train"] * 5 + ["valid"] + ["test_seen"] + ["train"] * 3
    seen_counter = 0
    for name, world, logs in generate_corpus():
        world_rel = f"worlds/{name}.json"
        save_world(world, out / world_rel)
        manifest.worlds.append(world_rel)
        room = world.locations()[0]
        category = world.node(room).category
        is_unseen = normalize_name(category) in unseen
        for log in logs:
            if is_unseen:
                tag = "test_unseen"
            else:
                tag = seen_cycle[seen_counter % len(seen_cycle)]
                seen_counter += 1
            log.split = tag
            ep_rel = f"episodes/{log.episode_id}.jsonl"
            save_episode(log, out / ep_rel, world_rel)
            splits[tag].append(ep_rel)
    manifest.splits = {tag: files for tag, files in splits.items() if files}
    save_manifest(manifest, out / "manifest.json")
