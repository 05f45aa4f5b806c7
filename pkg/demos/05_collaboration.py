"""
Collaborative sessions and annotations
======================================

Two analysts open a shared session, attach a comment thread to the cube,
and everything lands in the knowledge base with full history. The
platform object wires the pieces together and checkpoints to disk on
every write.
"""

import tempfile

from collabbi.annotations import CubeTarget
from collabbi.platform import CollabPlatform
from collabbi.sessions import UserProfile, VirtualLocation
from collabbi.ssb import GeneratorConfig

scratch = tempfile.mkdtemp(prefix="cbi-demo-")
platform = CollabPlatform(scratch, generator=GeneratorConfig(fact_rows=500))
print("data directory:", scratch)

jean = UserProfile(display_name="Jean", mbox="jean@example.org",
                   organization="Summit Analytics")
kim = UserProfile(display_name="Kim", mbox="kim@example.org")

session = platform.open_session([jean, kim], VirtualLocation("weekly review"))
sid = session.session_id
print("opened", sid.value, "with",
      ", ".join(platform.sessions.person_name(p) for p in session.participants))

jean_iri, kim_iri = session.participants
cube = CubeTarget("Lineorder")

# a question and its answer, linked into a thread
question = platform.add_annotation(sid, jean_iri, cube, "question",
                                   "why is TRUCK the top mode this quarter?")
answer = platform.add_annotation(sid, kim_iri, cube, "answer",
                                 "two bulk contracts shifted to road freight",
                                 in_reply_to=question.annotation_id)
assert answer.in_reply_to == question.annotation_id

platform.add_annotation(sid, kim_iri, cube, "comment",
                        "worth a dashboard chart")

# enlistment is ordered by creation time
for view in platform.enlist_annotations(cube):
    reply = f" (reply to {view.in_reply_to.value})" if view.in_reply_to else ""
    print(f"  [{view.kind}] {view.body}{reply}")

# only the author may edit; edits bump modifiedAt but keep createdAt
edited = platform.edit_annotation(question.annotation_id,
                                  "why is TRUCK the top mode?", jean_iri)
assert edited.created_at == question.created_at
assert edited.modified_at >= question.modified_at

# deleting the question leaves the answer with a tombstone marker
platform.delete_annotation(question.annotation_id, jean_iri)
survivor = platform.enlist_annotations(cube)[0]
assert survivor.kind == "answer"
assert survivor.in_reply_to is None
assert survivor.reply_target_deleted == question.annotation_id.value
print("after delete, the answer records its lost question:",
      survivor.reply_target_deleted)

platform.close_session(sid)
info = platform.session_info(sid)
assert info.closed and info.end is not None
print("session closed at", info.end.isoformat())

# the whole history is on disk; a fresh platform sees the same state
reborn = CollabPlatform(scratch)
assert len(reborn.enlist_annotations(cube)) == 2
print("state survived a restart")
