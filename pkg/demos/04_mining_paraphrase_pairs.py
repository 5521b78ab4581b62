"""Mine aligned sentence pairs from a small multi-outlet document collection.

Two outlets report the same events in different words; a third writes about
something else entirely. The miner segments, indexes, and keeps cross-source
sentence pairs inside the similarity band.

Run: python demos/04_mining_paraphrase_pairs.py
"""

from paragen.miner import Document, MineConfig, align, build_index, query_similar, \
    sentence_records

docs = [
    Document(
        id="gazette-104", source="gazette", title="Flooding",
        body="The river flooded the old town early on monday. "
             "Hundreds of residents were moved to higher ground overnight. "
             "The mayor promised a full review of the flood defences."),
    Document(
        id="courier-932", source="courier", title="River breaks banks",
        body="The river flooded the old town on monday morning. "
             "Hundreds of residents were evacuated to higher ground during the night. "
             "Officials said the cleanup would take several weeks."),
    Document(
        id="foodblog-17", source="foodblog", title="Pasta",
        body="Use fresh basil and good olive oil for this simple sauce. "
             "Cook the pasta until it is just firm to the bite."),
]

records = sentence_records(docs)
print(f"{len(records)} sentences from {len(docs)} documents")

index = build_index(records)
ref = records[0]
print(f"\nnearest other-source sentences to: {ref.text!r}")
for sid, sim in query_similar(ref, index, k=3):
    print(f"  {sim:.3f}  [{index.records[sid].source}] {index.records[sid].text}")

print("\nmined pairs inside the [0.5, 0.95] band:")
pairs = align(docs, MineConfig())
for p in pairs:
    print(f"  similarity {p.similarity:.3f}  ({p.x_source} / {p.y_source})")
    print(f"    x: {p.x}")
    print(f"    y: {p.y}")
print("\nnote: the identical first sentences score 1.0 and are excluded as")
print("syndicated copies; unrelated cooking advice never clears the lower bound")
