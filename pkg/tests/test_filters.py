import random

import pytest

from anchorner.filters import (
    FilterConfig,
    FilterTally,
    apply_scarce_discard,
    compute_stats,
    drop_probability,
    filter_no_entity,
    filter_pass_one,
    filter_pass_two,
    probabilistic_filter,
    scarce_categories,
    top_frequent,
)
from anchorner.types import CategoryStats

import helpers


def test_compute_stats_single_sentence():
    stats = compute_stats([helpers.sent([(0, 1, "city"), (2, 3, "ENTITY")])])
    assert stats.counts == {"city": 1, "ENTITY": 1}
    assert stats.total_entities == 2
    assert stats.total_sentences == 1


def test_compute_stats_empty():
    stats = compute_stats([])
    assert stats.counts == {} and stats.total_entities == 0
    assert stats.total_sentences == 0 and stats.total_tokens == 0


def test_compute_stats_fixture_hand_tally():
    stats = compute_stats(helpers.fixture_corpus())
    assert stats.counts == helpers.FIXTURE_COUNTS
    assert stats.total_entities == sum(helpers.FIXTURE_COUNTS.values())
    assert stats.total_sentences == 20


def test_scarce_below_ten():
    stats = CategoryStats(counts={"a": 9, "b": 10, "ENTITY": 3})
    assert scarce_categories(stats, 10) == {"a"}


def test_scarce_threshold_one():
    stats = CategoryStats(counts={"a": 1, "b": 5})
    assert scarce_categories(stats, 1) == set()


def test_scarce_zero_count():
    stats = CategoryStats(counts={"a": 0})
    assert scarce_categories(stats, 10) == {"a"}


def test_scarce_discard_keeps_clean_sentence():
    s = helpers.sent([(0, 1, "city")])
    assert apply_scarce_discard(s, {"vein"}) is s


def test_scarce_discard_drops_touching_sentence():
    s = helpers.sent([(0, 1, "city"), (2, 3, "vein")])
    assert apply_scarce_discard(s, {"vein"}) is None


def test_scarce_discard_no_spans_kept():
    s = helpers.sent([])
    assert apply_scarce_discard(s, {"vein"}) is s


def test_scarce_discard_empty_set_is_identity():
    rng = random.Random(3)
    for s in helpers.random_corpus(rng, 50):
        assert apply_scarce_discard(s, set()) is s


def test_scarce_relabel_mode():
    s = helpers.sent([(0, 2, "vein"), (3, 4, "city")])
    relabeled = apply_scarce_discard(s, {"vein"}, relabel=True)
    assert relabeled.labels[:2] == ["B-ENTITY", "I-ENTITY"]
    assert [sp.category for sp in relabeled.spans] == ["ENTITY", "city"]


def test_filter_no_entity():
    assert not filter_no_entity(helpers.sent([]))
    assert not filter_no_entity(helpers.sent([(0, 1, "ENTITY"), (2, 3, "ENTITY")]))
    assert filter_no_entity(helpers.sent([(0, 1, "ENTITY"), (2, 3, "city")]))


def test_filter_no_entity_never_drops_concrete_span():
    rng = random.Random(5)
    for s in helpers.random_corpus(rng, 200):
        has_concrete = any(sp.category != "ENTITY" for sp in s.spans)
        assert filter_no_entity(s) == has_concrete


def test_top_frequent_by_count():
    stats = CategoryStats(counts={"a": 5, "b": 3, "ENTITY": 9})
    assert top_frequent(stats, 2) == {"ENTITY", "a"}


def test_top_frequent_k_exceeds_categories():
    stats = CategoryStats(counts={"a": 5, "b": 3})
    assert top_frequent(stats, 10) == {"a", "b"}


def test_top_frequent_lexicographic_tiebreak():
    stats = CategoryStats(counts={"a": 5, "b": 5, "c": 1})
    assert top_frequent(stats, 1) == {"a"}


def _entity_heavy(num_entity, extra_cats, source):
    spans = [(2 * i, 2 * i + 1, "ENTITY") for i in range(num_entity)]
    offset = 2 * num_entity
    spans += [(offset + 2 * i, offset + 2 * i + 1, c) for i, c in enumerate(extra_cats)]
    n = offset + 2 * len(extra_cats) + 1
    return helpers.sent(spans, n_tokens=n, source=source)


def test_drop_probability_table():
    config = FilterConfig(seed=1)
    top = {"ENTITY", "city"}
    assert drop_probability(_entity_heavy(3, ["city"], (0, 0)), top, config) == 0.3
    assert drop_probability(_entity_heavy(4, ["city"], (0, 0)), top, config) == 0.5
    assert drop_probability(_entity_heavy(7, ["city"], (0, 0)), top, config) == 0.7
    assert drop_probability(_entity_heavy(2, ["city"], (0, 0)), top, config) == 0.0
    # one span outside the top set defeats the `all` condition
    assert drop_probability(_entity_heavy(7, ["rare"], (0, 0)), top, config) == 0.0


def test_probabilistic_filter_never_drops_unmatched():
    config = FilterConfig(seed=11)
    top = {"ENTITY", "city"}
    for i in range(200):
        assert probabilistic_filter(_entity_heavy(2, ["city"], (1, i)), top, config)
        assert probabilistic_filter(_entity_heavy(7, ["rare"], (1, i)), top, config)


def test_probabilistic_filter_deterministic_and_order_independent():
    config = FilterConfig(seed=42)
    top = {"ENTITY", "city"}
    sentences = [_entity_heavy(3, ["city"], (5, i)) for i in range(500)]
    decisions = {
        s.source: probabilistic_filter(s, top, config) for s in sentences
    }
    shuffled = list(sentences)
    random.Random(0).shuffle(shuffled)
    for s in shuffled:
        assert probabilistic_filter(s, top, config) == decisions[s.source]


def test_probabilistic_filter_empirical_rate_quick():
    config = FilterConfig(seed=7)
    top = {"ENTITY", "city"}
    n = 4000
    dropped = sum(
        not probabilistic_filter(_entity_heavy(3, ["city"], (9, i)), top, config)
        for i in range(n)
    )
    rate = dropped / n
    assert abs(rate - 0.3) < 3 * (0.3 * 0.7 / n) ** 0.5 + 0.01


def test_two_pass_pipeline_tallies():
    config = FilterConfig(scarce_threshold=3, top_k=2, seed=0)
    corpus = [
        helpers.sent([(0, 1, "city")], source=(0, 0)),
        helpers.sent([(0, 1, "vein")], source=(0, 1)),      # scarce -> dropped
        helpers.sent([(0, 1, "ENTITY")], source=(0, 2)),    # only ENTITY -> dropped
        helpers.sent([], source=(0, 3)),                    # no spans -> dropped
        helpers.sent([(0, 1, "city"), (2, 3, "ENTITY")], source=(0, 4)),
        helpers.sent([(0, 1, "city")], source=(0, 5)),
        helpers.sent([(0, 1, "city")], source=(0, 6)),
    ]
    tally = FilterTally()
    stats = compute_stats(corpus)
    scarce = scarce_categories(stats, config.scarce_threshold)
    assert scarce == {"vein"}
    survivors = list(filter_pass_one(corpus, scarce, config, tally))
    assert tally.scarce_dropped == 1
    assert tally.no_entity_dropped == 2
    assert len(survivors) == 4
    top = top_frequent(compute_stats(survivors), config.top_k)
    final = list(filter_pass_two(survivors, top, config, tally))
    # no sentence has 3+ ENTITY spans, so pass two drops nothing
    assert tally.probabilistic_dropped == 0
    assert len(final) == 4


def test_stats_merge_is_associative_reduction():
    rng = random.Random(21)
    corpus = helpers.random_corpus(rng, 120)
    whole = compute_stats(corpus)
    merged = CategoryStats()
    for start in (0, 40, 80):
        merged = merged.merge(compute_stats(corpus[start : start + 40]))
    assert merged == whole


def test_filter_pipeline_order_insensitive():
    # same kept-sentence set regardless of input order
    from anchorner.config import build_config
    from anchorner.pipeline import apply_filters

    rng = random.Random(31)
    corpus = [
        _entity_heavy(rng.randint(0, 6), rng.sample(["city", "river", "poet"], rng.randint(0, 2)), (3, i))
        for i in range(400)
    ]
    config = build_config({"seed": 17, "filter.scarce_threshold": 2})
    kept1, _ = apply_filters(corpus, config)
    shuffled = list(corpus)
    rng.shuffle(shuffled)
    kept2, _ = apply_filters(shuffled, config)
    assert {s.source for s in kept1} == {s.source for s in kept2}


def test_drop_rate_within_three_sigma():
    # binomial 3-sigma envelope at N=10k for each table row
    config = FilterConfig(seed=1234)
    top = {"ENTITY", "city"}
    n = 10_000
    for num_entity, p in ((3, 0.3), (4, 0.5), (6, 0.7)):
        dropped = sum(
            not probabilistic_filter(
                _entity_heavy(num_entity, ["city"], (num_entity, i)), top, config
            )
            for i in range(n)
        )
        bound = 3 * (p * (1 - p) / n) ** 0.5
        assert abs(dropped / n - p) <= bound, (num_entity, dropped / n, bound)


def test_zero_drop_probs_keep_everything():
    config = FilterConfig(drop_prob_3=0.0, drop_prob_4=0.0, drop_prob_gt4=0.0, seed=3)
    top = {"ENTITY", "city"}
    for num in (3, 4, 9):
        for i in range(100):
            assert probabilistic_filter(_entity_heavy(num, ["city"], (2, i)), top, config)


def test_config_validation():
    with pytest.raises(ValueError):
        FilterConfig(scarce_threshold=0)
    with pytest.raises(ValueError):
        FilterConfig(top_k=0)
    with pytest.raises(ValueError):
        FilterConfig(drop_prob_3=1.5)
