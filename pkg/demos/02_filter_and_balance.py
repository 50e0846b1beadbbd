"""
Filtering and category balancing
================================

Shows the three filtering stages on a synthetic skewed corpus, then the
count^alpha resampling that lifts rare categories. The before/after
table at the end is the data behind a balancing plot.
"""

import numpy as np

from anchorner.balance import (
    SamplingConfig,
    build_category_posting,
    before_after_report,
    resample,
    sampling_distribution,
)
from anchorner.filters import (
    FilterConfig,
    FilterTally,
    compute_stats,
    filter_pass_one,
    filter_pass_two,
    scarce_categories,
    top_frequent,
)
from anchorner.tagger import encode_spans
from anchorner.types import Span, TaggedSentence

rng = np.random.default_rng(7)

# a corpus where "city" dominates, "volcano" is rare, "grape" is so scarce
# it gets discarded, and some sentences carry only the ENTITY fallback label
CATEGORY_WEIGHTS = {
    "city": 60, "person": 25, "river": 10, "volcano": 2, "grape": 0.5, "ENTITY": 40,
}
cats = list(CATEGORY_WEIGHTS)
probs = np.array(list(CATEGORY_WEIGHTS.values()), dtype=float)
probs /= probs.sum()

corpus = []
for i in range(2500):
    n_spans = rng.integers(0, 5)
    spans = [
        Span(int(2 * j), int(2 * j + 1), cats[int(rng.choice(len(cats), p=probs))])
        for j in range(n_spans)
    ]
    n_tokens = max(6, 2 * n_spans + 1)
    corpus.append(
        TaggedSentence(
            tokens=[f"w{k}" for k in range(n_tokens)],
            labels=encode_spans(n_tokens, spans),
            source=(0, i),
        )
    )

stats = compute_stats(corpus)
print("raw span counts:", dict(sorted(stats.counts.items())))

# 1. drop sentences touching scarce categories, then entity-less ones
config = FilterConfig(scarce_threshold=30, top_k=3, seed=123)
tally = FilterTally()
scarce = scarce_categories(stats, config.scarce_threshold)
print("scarce categories:", scarce)
survivors = list(filter_pass_one(corpus, scarce, config, tally))

# 2. probabilistic drop for frequent-only, ENTITY-heavy sentences
top = top_frequent(compute_stats(survivors), config.top_k)
final = list(filter_pass_two(survivors, top, config, tally))
print(f"kept {len(final)} of {len(corpus)} sentences; drops: {tally.as_dict()}")

# 3. resample with p(category) ~ count^0.7 and compare entity counts
stats_final = compute_stats(final)
dist = sampling_distribution(stats_final, alpha=0.7)
sentences, posting = build_category_posting(final)
out = list(resample(posting, sentences, dist, SamplingConfig(seed=123)))
print("\ncategory  before  after  after/before")
for cat, before, after in before_after_report(stats_final, out):
    print(f"{cat:>8}  {before:>6}  {after:>5}  {after / before:.2f}")
