"""Tokenization, the fixed vocabulary, and per-sentence extended vocabularies.

The extended vocabulary gives each out-of-vocabulary source word a temporary
id just past the fixed range, so the copy distribution can address it and the
decoder output can be rendered back to the original surface form.
"""

import hashlib
from collections import Counter

from .autograd import Tensor, row
from .errors import ValidationError

PAD, UNK, BOS, EOS = 0, 1, 2, 3
RESERVED_TOKENS = ("<pad>", "<unk>", "<bos>", "<eos>")
N_RESERVED = len(RESERVED_TOKENS)

_PUNCT = set('.,;:!?"()«»')


def tokenize(text):
    """Lowercase, split on Unicode whitespace, detach punctuation tokens.

    Apostrophes stay inside tokens ("l'acqua" is one token); the characters
    . , ; : ! ? " ( ) « » become standalone tokens wherever they occur.
    """
    out = []
    for chunk in text.lower().split():
        run = []
        for ch in chunk:
            if ch in _PUNCT:
                if run:
                    out.append("".join(run))
                    run = []
                out.append(ch)
            else:
                run.append(ch)
        if run:
            out.append("".join(run))
    return out


class Vocabulary:
    """Fixed token<->id bijection with four reserved ids at the front."""

    def __init__(self, tokens):
        self.id_to_token = list(RESERVED_TOKENS) + list(tokens)
        self.token_to_id = {t: i for i, t in enumerate(self.id_to_token)}
        if len(self.token_to_id) != len(self.id_to_token):
            raise ValidationError("duplicate tokens in vocabulary")

    def __len__(self):
        return len(self.id_to_token)

    @property
    def size(self):
        return len(self.id_to_token)

    def lookup(self, token):
        return self.token_to_id.get(token, UNK)

    def token(self, idx):
        if not 0 <= idx < len(self.id_to_token):
            raise ValidationError(f"token id {idx} out of range [0, {len(self.id_to_token)})")
        return self.id_to_token[idx]

    def __contains__(self, token):
        return token in self.token_to_id

    def save(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for tok in self.id_to_token[N_RESERVED:]:
                fh.write(tok + "\n")

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            tokens = [line.rstrip("\n") for line in fh]
        return cls([t for t in tokens if t])

    def fingerprint(self):
        """SHA-256 over the non-reserved token lines; ties checkpoints to a vocab file."""
        h = hashlib.sha256()
        for tok in self.id_to_token[N_RESERVED:]:
            h.update(tok.encode("utf-8"))
            h.update(b"\n")
        return h.digest()


def build_vocab(corpus, max_size=10000, min_count=1):
    """Keep the most frequent tokens, ties broken lexicographically.

    corpus: iterable of token lists. max_size counts the reserved ids too.
    """
    if max_size <= N_RESERVED:
        raise ValidationError(f"max_size must exceed {N_RESERVED}")
    counts = Counter()
    for tokens in corpus:
        counts.update(tokens)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [tok for tok, c in ranked if c >= min_count][: max_size - N_RESERVED]
    return Vocabulary(kept)


class ExtendedVocab:
    """A fixed vocabulary plus the distinct OOV tokens of one source sentence.

    OOV tokens get ids V_fixed, V_fixed+1, ... in first-occurrence order;
    ``source_ids`` holds the full source sentence in this extended id space.
    """

    def __init__(self, base, source_oovs, source_ids):
        self.base = base
        self.source_oovs = list(source_oovs)
        self.source_ids = list(source_ids)
        self._oov_to_id = {tok: base.size + i for i, tok in enumerate(self.source_oovs)}

    @property
    def size(self):
        return self.base.size + len(self.source_oovs)

    def lookup(self, token):
        if token in self.base:
            return self.base.lookup(token)
        return self._oov_to_id.get(token, UNK)

    def token(self, idx):
        if idx < self.base.size:
            return self.base.token(idx)
        if idx < self.size:
            return self.source_oovs[idx - self.base.size]
        raise ValidationError(f"extended id {idx} out of range [0, {self.size})")


def encode_source(tokens, vocab):
    """Map source tokens to extended ids, minting ids for OOV words.

    Returns (ids, ExtendedVocab). A repeated OOV surface form gets one id.
    """
    if not tokens:
        raise ValidationError("encode_source: empty token list")
    oovs = []
    oov_ids = {}
    ids = []
    for tok in tokens:
        if tok in vocab:
            ids.append(vocab.lookup(tok))
        else:
            if tok not in oov_ids:
                oov_ids[tok] = vocab.size + len(oovs)
                oovs.append(tok)
            ids.append(oov_ids[tok])
    return ids, ExtendedVocab(vocab, oovs, ids)


def encode_target(tokens, ev):
    """Map target tokens to extended ids under the paired source's extension.

    A target OOV that also appears in the source gets that extended id; one
    absent from the source maps to UNK, since neither the vocabulary nor the
    copy branch can ever give it probability mass.
    """
    return [ev.lookup(tok) for tok in tokens]


def decode_ids(ids, ev):
    return [ev.token(i) for i in ids]


class EmbeddingTable:
    """Trainable token embeddings; ids outside the fixed range use the UNK row."""

    def __init__(self, vocab_size, dim, rng):
        self.dim = dim
        self.vocab_size = vocab_size
        self.table = Tensor(rng.uniform(-0.1, 0.1, size=(vocab_size, dim)),
                            requires_grad=True)

    def lookup(self, idx):
        if idx < 0:
            raise ValidationError(f"embedding id {idx} negative")
        if idx >= self.vocab_size:
            idx = UNK
        return row(self.table, idx)
