"""
From wiki markup to a labeled corpus
====================================

Walks the ingestion chain end to end on an in-memory two-page dump:
stream pages, strip markup, split sentences, and label anchored spans
from a small entity-type mapping.
"""

import io

from anchorner import (
    load_ontology,
    split_sentences,
    stream_articles,
    tag_sentence,
)
from anchorner.corpus_io import emit_conll

DUMP = b"""<mediawiki>
  <page><title>Blue River</title><ns>0</ns><id>1</id><revision><id>11</id>
    <text>{{Infobox river}}The '''Blue River''' flows through [[Anchorville]].
It was mapped by [[Ada Quill]] in 1801. See the [[Blue River Dam]].</text>
  </revision></page>
  <page><title>Old Redirect</title><ns>0</ns><id>2</id>
    <redirect title="Blue River" />
    <revision><id>12</id><text>#REDIRECT [[Blue River]]</text></revision></page>
</mediawiki>
"""

MAPPING = [
    ("Anchorville", "city"),
    ("Ada Quill", "poet"),
    # "Blue River Dam" is deliberately absent: it will get the ENTITY label
]

index = load_ontology(MAPPING)

# 1. stream articles (the redirect page is skipped automatically)
articles = list(stream_articles(io.BytesIO(DUMP)))
print(f"articles: {[a.title for a in articles]}")
print(f"plain text: {articles[0].plain_text!r}")

# 2. sentences with anchors intact
sentences = split_sentences(articles[0])
for s in sentences:
    print(f"  sentence {s.sentence_index}: {s.text!r}")
    for a in s.anchors:
        print(f"    anchor {a.surface!r} -> {a.target!r}")

# 3. BIO labels: indexed targets get their category, unknown ones ENTITY
tagged = [tag_sentence(s, index) for s in sentences]
buffer = io.StringIO()
emit_conll(tagged, buffer)
print("\nCoNLL output:")
print(buffer.getvalue())
