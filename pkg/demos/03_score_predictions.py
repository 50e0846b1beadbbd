"""
Span-level scoring
==================

Exact-match span F1 with BIO repair: a prediction counts only when its
(start, end, category) triple matches a gold span exactly.
"""

from anchorner.evaluation import repair_bio, span_f1
from anchorner.types import TaggedSentence

gold = [
    TaggedSentence(
        ["Ada", "Quill", "visited", "Anchorville", "."],
        ["B-poet", "I-poet", "O", "B-city", "O"],
    ),
    TaggedSentence(
        ["The", "Blue", "River", "Dam", "opened", "."],
        ["O", "B-ENTITY", "I-ENTITY", "I-ENTITY", "O", "O"],
    ),
]

# model output with typical mistakes: a truncated span, a category mixup,
# and an invalid I- continuation that needs repair first
predictions = [
    ["B-poet", "I-poet", "O", "B-river", "O"],
    ["O", "I-ENTITY", "I-ENTITY", "I-ENTITY", "O", "O"],
]

print("repaired second sentence:", repair_bio(predictions[1]))

report = span_f1(gold, predictions)
report.write_text(__import__("sys").stdout)
print()
print("machine-readable:", report.summary_line())
