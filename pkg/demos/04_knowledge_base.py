"""
The collaboration knowledge base
================================

Facts about people, sessions and annotations are triples. The store
answers pattern matches, infers class membership through the subclass
graph, and serializes to a sorted line format that survives a round trip.
"""

from collabbi.kb import (
    ANNOTATION,
    COMMENT,
    IRI,
    KNOWS,
    Literal,
    NAME,
    PERSON,
    QUESTION,
    TYPE,
    Triple,
    KnowledgeBase,
    parse_kb,
    serialize_kb,
)

kb = KnowledgeBase()

jean = IRI("urn:cbi:person:1")
kim = IRI("urn:cbi:person:2")

kb.assert_triple(Triple(jean, TYPE, PERSON))
kb.assert_triple(Triple(jean, NAME, Literal.text("Jean")))
kb.assert_triple(Triple(kim, TYPE, PERSON))
kb.assert_triple(Triple(kim, NAME, Literal.text("Kim")))
kb.assert_triple(Triple(jean, KNOWS, kim))

# set semantics: asserting the same fact twice is a no-op
assert kb.assert_triple(Triple(jean, KNOWS, kim)) is False
print(f"{len(kb)} triples after dedup")

# wildcard match: who does Jean know?
for t in kb.match(subject=jean, predicate=KNOWS):
    print("jean knows", t.object.value)

# two annotations of different concrete kinds
note = IRI("urn:cbi:annotation:1")
probe = IRI("urn:cbi:annotation:2")
kb.assert_triple(Triple(note, TYPE, COMMENT))
kb.assert_triple(Triple(probe, TYPE, QUESTION))

# direct instances only
assert kb.instances_of(ANNOTATION) == []
# the subclass closure pulls in Comment and Question instances
closure = kb.instances_of(ANNOTATION, transitive=True)
assert closure == [note, probe]
print("annotation closure:", [i.value for i in closure])

# serialization is sorted, one triple per line, and parses back losslessly
text = serialize_kb(kb)
print()
print(text, end="")
assert parse_kb(text).triples() == kb.triples()
assert serialize_kb(parse_kb(text)) == text
print("round trip preserved all", len(kb), "triples")
