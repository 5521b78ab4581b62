"""Anatomy of one decoder step: attention, copy distribution, gate, mixture.

The source sentence contains "zyxxy", a word no vocabulary knows. The final
distribution still assigns it probability, coming entirely from the copy
branch.

Run: python demos/02_pointer_step_anatomy.py
"""

import numpy as np

from paragen.model import ModelDims, ModelParams, attend
from paragen.pointer import full_step
from paragen.vocab import BOS, Vocabulary, encode_source

vocab = Vocabulary(["the", "river", "flooded", "town"])
dims = ModelDims(vocab_size=vocab.size, d_emb=16, d_h=16, d_s=16, d_a=16)
params = ModelParams(dims, seed=7)

tokens = ["the", "zyxxy", "river", "flooded"]
src_ids, ev = encode_source(tokens, vocab)
print("source tokens:", tokens)
print("extended ids: ", src_ids, f"(fixed vocab ends at {vocab.size - 1})")
print("OOV extension:", ev.source_oovs)

states = params.encode_source_ids(src_ids)
state = params.initial_decoder_state(states)

_, attn, _ = attend(states, state, params.attention)
print("\nattention over source positions:", np.round(attn.data, 4),
      "sum =", attn.data.sum())

dist, _ = full_step(BOS, ev, states, state, params)
print("\np_gen (generate vs copy):", round(dist.p_gen.item(), 4))
print("copy distribution mass per id:")
for idx in sorted(set(src_ids)):
    print(f"  id {idx:2d} ({ev.token(idx):8s}): {dist.p_copy.data[idx]:.4f}")

oov_id = ev.lookup("zyxxy")
print("\nfinal P over extended vocabulary sums to", dist.p.data.sum())
print(f"P(zyxxy) = {dist.p.data[oov_id]:.6f}")
print(f"        = (1 - p_gen) * P_copy(zyxxy) "
      f"= {(1 - dist.p_gen.item()) * dist.p_copy.data[oov_id]:.6f}")
print("the vocabulary branch contributes nothing: zyxxy has no fixed id")

forced, _ = full_step(BOS, ev, states, state, params, force_p_gen=1.0)
print("\nwith the gate forced to pure generation, P(zyxxy) =",
      forced.p.data[oov_id], "(structurally zero)")
