import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from light_engine.agents import (
    EmbeddingModel,
    Hyperparams,
    build_candidate_cache,
    build_corpus_stats,
    embed_rank,
    gradient_check,
    ir_rank,
    load_model,
    nearest_neighbors,
    random_rank,
    save_model,
    score_with_tiebreak,
    tokenize,
    train_embedding,
)
from light_engine.errors import (
    EmptyBatch,
    EmptyVocabulary,
    KinkDetected,
    UnknownKind,
)


# -- tokenizer ---------------------------------------------------------------------


def test_tokenize_punctuation():
    assert tokenize("Polish my scepter.") == ["polish", "my", "scepter"]


def test_tokenize_empty():
    assert tokenize("") == []


@given(st.text(max_size=80))
def test_tokenize_idempotent(s):
    once = tokenize(s)
    assert tokenize(" ".join(once)) == once


# -- tie-break -----------------------------------------------------------------------


def test_argmax_tie_breaks_on_text():
    scored = score_with_tiebreak(["pear", "apple", "plum"], [1.0, 1.0, 0.5])
    assert scored.best == "apple"


# -- random ranker ----------------------------------------------------------------------


def test_random_single_candidate():
    rng = np.random.default_rng(0)
    assert random_rank(rng, ["only"]).best == "only"


def test_random_hit_rate_near_uniform():
    rng = np.random.default_rng(12)
    n, c = 5000, 20
    hits = sum(random_rank(rng, [f"c{i}" for i in range(c)]).argmax_index == 3
               for _ in range(n))
    tolerance = 4 * math.sqrt(0.05 * 0.95 / n)
    assert abs(hits / n - 1 / c) < tolerance


# -- TF-IDF -----------------------------------------------------------------------------


DOCS = [
    "the king wears a golden crown",
    "a servant polishes the crown",
    "wolves hunt in the deep forest",
]


def test_ir_scores_match_hand_computation():
    stats = build_corpus_stats(DOCS)
    context = "who polishes the golden crown"
    candidates = list(DOCS)
    scored = ir_rank(stats, context, [DOCS[1], DOCS[0], DOCS[2]])

    # Hand computation: tf = raw count, idf = ln(3/df), cosine similarity.
    ln3, ln15 = math.log(3.0), math.log(1.5)
    ctx = {"polishes": ln3, "golden": ln3, "crown": ln15}  # who unknown, the idf 0
    c1 = {"a": ln15, "servant": ln3, "polishes": ln3, "crown": ln15}
    c2 = {"king": ln3, "wears": ln3, "a": ln15, "golden": ln3, "crown": ln15}

    def cosine(u, v):
        dot = sum(w * v[t] for t, w in u.items() if t in v)
        nu = math.sqrt(sum(w * w for w in u.values()))
        nv = math.sqrt(sum(w * w for w in v.values()))
        return dot / (nu * nv)

    assert scored.scores[0] == pytest.approx(cosine(ctx, c1), abs=1e-9)
    assert scored.scores[1] == pytest.approx(cosine(ctx, c2), abs=1e-9)
    assert scored.scores[2] == pytest.approx(0.0, abs=1e-9)


def test_rare_word_overlap_wins():
    stats = build_corpus_stats(DOCS + ["a lonely zeppelin drifts"])
    scored = ir_rank(stats, "look, a zeppelin", ["a lonely zeppelin drifts", "the deep forest"])
    assert scored.best == "a lonely zeppelin drifts"


def test_disjoint_candidates_all_zero_lexicographic():
    stats = build_corpus_stats(DOCS)
    scored = ir_rank(stats, "crown", ["yonder mill", "bravo night"])
    assert scored.scores == (0.0, 0.0)
    assert scored.best == "bravo night"


def test_empty_vocabulary_raises():
    stats = build_corpus_stats([])
    with pytest.raises(EmptyVocabulary):
        ir_rank(stats, "anything", ["a"])


def test_ir_cosine_symmetric():
    stats = build_corpus_stats(DOCS)
    rng = np.random.default_rng(3)
    words = "king crown servant wolves forest deep polishes golden".split()
    for _ in range(30):
        a = " ".join(rng.choice(words, size=4))
        b = " ".join(rng.choice(words, size=5))
        sab = ir_rank(stats, a, [b]).scores[0]
        sba = ir_rank(stats, b, [a]).scores[0]
        assert sab == pytest.approx(sba, abs=1e-12)


# -- embedding model ----------------------------------------------------------------------


def _synthetic_pairs(rng, vocab_size=60, count=300, length=(3, 7)):
    words = [f"w{i}" for i in range(vocab_size)]
    pairs = []
    for _ in range(count):
        n = int(rng.integers(*length))
        text = " ".join(words[int(k)] for k in rng.integers(vocab_size, size=n))
        pairs.append((text, text))
    return pairs


def test_zero_epochs_returns_seeded_init():
    rng = np.random.default_rng(8)
    pairs = _synthetic_pairs(rng, count=50)
    hp = Hyperparams(dim=8, epochs=0, seed=5)
    model_a, trace_a = train_embedding(pairs, hp)
    model_b, _ = train_embedding(pairs, hp)
    assert trace_a == []
    assert np.array_equal(model_a.matrix, model_b.matrix)


def test_training_is_bit_deterministic():
    rng = np.random.default_rng(9)
    pairs = _synthetic_pairs(rng, count=120)
    hp = Hyperparams(dim=12, epochs=3, seed=21)
    model_a, trace_a = train_embedding(pairs, hp)
    model_b, trace_b = train_embedding(pairs, hp)
    assert trace_a == trace_b
    assert model_a.matrix.tobytes() == model_b.matrix.tobytes()


def test_loss_trace_finite_and_decreasing():
    rng = np.random.default_rng(10)
    pairs = _synthetic_pairs(rng, count=240)
    hp = Hyperparams(dim=16, epochs=8, lr=0.05, seed=2)
    _, trace = train_embedding(pairs, hp)
    assert all(math.isfinite(x) for x in trace)
    assert trace[-1] < trace[0]


def test_learns_paired_token_mapping():
    # context token a_i must retrieve b_i; impossible without gradient updates.
    rng = np.random.default_rng(11)
    n = 24
    pairs = [(f"a{i}", f"b{i}") for i in range(n)] * 12
    order = rng.permutation(len(pairs))
    pairs = [pairs[int(k)] for k in order]
    hp = Hyperparams(dim=16, epochs=25, lr=0.2, seed=4, batch_size=16)
    model, trace = train_embedding(pairs, hp)
    hits = 0
    for i in range(n):
        candidates = [f"b{j}" for j in range(n)]
        hits += embed_rank(model, f"a{i}", candidates).best == f"b{i}"
    assert hits / n >= 0.9
    assert trace[-1] < trace[0]


def test_empty_batch_raises():
    with pytest.raises(EmptyBatch):
        train_embedding([], Hyperparams())


def test_cache_transparency_small():
    rng = np.random.default_rng(13)
    pairs = _synthetic_pairs(rng, count=120)
    model, _ = train_embedding(pairs, Hyperparams(dim=8, epochs=2, seed=0))
    candidates = [p[1] for p in pairs[:40]]
    cache = build_candidate_cache(model, candidates)
    for context, _ in pairs[:50]:
        with_cache = embed_rank(model, context, candidates, cache)
        without = embed_rank(model, context, candidates)
        assert with_cache.scores == without.scores
        assert with_cache.argmax_index == without.argmax_index


def test_empty_context_scores_zero():
    model, _ = train_embedding([("a b", "a b")], Hyperparams(dim=4, epochs=0, seed=7))
    scored = embed_rank(model, "!!!", ["b a", "a b"])
    assert scored.scores == (0.0, 0.0)
    assert scored.best == "a b"


def test_scale_covariance_of_argmax():
    rng = np.random.default_rng(14)
    pairs = _synthetic_pairs(rng, count=150)
    model, _ = train_embedding(pairs, Hyperparams(dim=8, epochs=2, seed=1))
    scaled = EmbeddingModel(model.vocab, model.dim, model.matrix * np.float32(3.5),
                            model.hyperparams, model.registry)
    candidates = [p[1] for p in pairs[:30]]
    for context, _ in pairs[:40]:
        assert (embed_rank(model, context, candidates).argmax_index
                == embed_rank(scaled, context, candidates).argmax_index)


# -- nearest neighbors -----------------------------------------------------------------------


def _registry_model():
    registry = [
        ("chicken coop", "object"), ("corn sack", "object"), ("old plough", "object"),
        ("farmer", "character"), ("fox", "character"),
        ("chicken pen", "location"), ("corn field", "location"), ("red barn", "location"),
        ("get chicken", "action"), ("hug farmer", "action"),
        ("chicken", "vocabulary"), ("corn", "vocabulary"), ("fox", "vocabulary"),
    ]
    texts = [p for p, _ in registry]
    pairs = [(t, t) for t in texts] * 6
    model, _ = train_embedding(pairs, Hyperparams(dim=12, epochs=4, seed=3), registry)
    return model


def test_nn_k_zero():
    assert nearest_neighbors(_registry_model(), "chicken", 0, "object") == []


def test_nn_self_match_ranks_first():
    model = _registry_model()
    top = nearest_neighbors(model, "chicken pen", 3, "location")
    assert top[0][0] == "chicken pen"


def test_nn_matches_brute_force_scan():
    model = _registry_model()
    query = "chicken"
    got = nearest_neighbors(model, query, 5, "object")
    qvec = model.embed(query)
    expected = sorted(
        ((p, float(qvec @ model.embed(p))) for p, k in model.registry if k == "object"),
        key=lambda item: (-item[1], item[0]),
    )[:5]
    assert got == expected


def test_nn_unknown_kind():
    with pytest.raises(UnknownKind):
        nearest_neighbors(_registry_model(), "chicken", 3, "spell")


# -- gradient check --------------------------------------------------------------------------


def test_gradient_check_small_model():
    rng = np.random.default_rng(15)
    pairs = _synthetic_pairs(rng, vocab_size=50, count=64, length=(2, 6))
    model, _ = train_embedding(pairs, Hyperparams(dim=8, epochs=1, seed=6))
    batch = [(c, g + " w1") for (c, g) in pairs[:16]]  # distinct golds
    err = gradient_check(model, batch, seed=1)
    assert err < 1e-4


def test_gradient_check_zero_gradient_case():
    model, _ = train_embedding(
        [("alpha", "omega"), ("beta", "omega")], Hyperparams(dim=4, epochs=0, seed=9)
    )
    # every in-batch negative equals the gold text, so no pair contributes
    err = gradient_check(model, [("alpha", "omega"), ("beta", "omega")], seed=2)
    assert err == pytest.approx(0.0, abs=1e-10)


def test_gradient_check_detects_kink():
    vocab = {"a": 0, "b": 1, "c": 2, "d": 3}
    matrix = np.array([[1.0], [0.5], [0.0], [0.3]], dtype=np.float32)
    model = EmbeddingModel(vocab, 1, matrix, Hyperparams(dim=1, margin=0.2))
    with pytest.raises(KinkDetected):
        gradient_check(model, [("a", "b"), ("c", "d")])


def test_gradient_check_step_doubling_consistent():
    rng = np.random.default_rng(16)
    pairs = _synthetic_pairs(rng, vocab_size=40, count=48, length=(2, 5))
    model, _ = train_embedding(pairs, Hyperparams(dim=8, epochs=1, seed=12))
    batch = [(c, g + " w2") for (c, g) in pairs[:12]]
    err_h = gradient_check(model, batch, step=1e-5, seed=3)
    err_2h = gradient_check(model, batch, step=2e-5, seed=3)
    # Loss is piecewise quadratic, so central differences are truncation-free;
    # both estimates sit at rounding level and doubling h cannot blow them up
    # faster than the quadratic bound allows.
    assert err_h < 1e-7
    assert err_2h <= 4.5 * err_h + 1e-9


# -- model files -------------------------------------------------------------------------------


def test_model_save_load_roundtrip(tmp_path):
    rng = np.random.default_rng(17)
    pairs = _synthetic_pairs(rng, count=80)
    registry = [("lantern", "object"), ("mill", "location")]
    model, _ = train_embedding(pairs, Hyperparams(dim=8, epochs=1, seed=8), registry)
    path = tmp_path / "model.bin"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.vocab == model.vocab
    assert loaded.dim == model.dim
    assert loaded.matrix.tobytes() == model.matrix.tobytes()
    assert loaded.hyperparams == model.hyperparams
    assert loaded.registry == model.registry
