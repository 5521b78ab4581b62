"""Mining aligned sentence pairs from multi-source document collections.

Documents are segmented into sentences, indexed under log-TF-IDF weights,
and each sentence is matched against sentences from *other* sources by exact
cosine ranking. Pairs inside a similarity band become paraphrase candidates:
the lower bound drops unrelated sentences, the upper bound drops verbatim
syndicated copies.
"""

import html.parser
import json
import logging
import math
import time
import urllib.parse
import urllib.request
import urllib.robotparser
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .errors import ValidationError
from .vocab import tokenize

log = logging.getLogger(__name__)

DEFAULT_ABBREVIATIONS = frozenset({
    "sig.", "sig.ra", "dott.", "dr.", "prof.", "ing.", "avv.", "on.",
    "mr.", "mrs.", "ms.", "st.", "jr.", "sr.", "vs.", "etc.", "e.g.", "i.e.",
    "ca.", "col.", "gen.", "sen.", "rep.", "no.", "n.", "p.", "pp.", "art.",
})

_SENTENCE_END = ".!?"
_OPENERS = '"«(\''


@dataclass
class Document:
    id: str
    source: str
    title: str
    body: str
    timestamp: str = ""


@dataclass
class SentenceRecord:
    sid: int
    doc_id: str
    source: str
    text: str
    tokens: list
    weights: dict = field(default_factory=dict)  # term -> L2-normalized tf-idf


@dataclass
class SentencePair:
    x: str
    y: str
    similarity: float
    x_sid: int
    y_sid: int
    x_source: str
    y_source: str
    x_doc: str = ""
    y_doc: str = ""

    def provenance(self):
        return {"x_sid": self.x_sid, "y_sid": self.y_sid,
                "x_source": self.x_source, "y_source": self.y_source,
                "x_doc": self.x_doc, "y_doc": self.y_doc}


@dataclass
class MineConfig:
    k: int = 3
    min_sim: float = 0.5
    max_sim: float = 0.95
    min_tokens: int = 4
    max_tokens: int = 60
    abbreviations: frozenset = DEFAULT_ABBREVIATIONS

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("MineConfig: k must be >= 1")
        if not 0.0 <= self.min_sim <= self.max_sim <= 1.0:
            raise ValidationError("MineConfig: need 0 <= min_sim <= max_sim <= 1")
        if not 1 <= self.min_tokens <= self.max_tokens:
            raise ValidationError("MineConfig: need 1 <= min_tokens <= max_tokens")


def load_abbreviations(path):
    with open(path, encoding="utf-8") as fh:
        return frozenset(line.strip().lower() for line in fh if line.strip())


def segment(doc, min_tokens=4, max_tokens=60, abbreviations=DEFAULT_ABBREVIATIONS):
    """Split a document body into sentences.

    A sentence ends at . ! or ? followed by whitespace and an uppercase
    letter or opening quote, unless the preceding word is a known
    abbreviation. Sentences outside [min_tokens, max_tokens] are dropped.
    """
    body = doc.body
    if not body.strip():
        return []
    sentences = []
    start = 0
    i = 0
    n = len(body)
    while i < n:
        ch = body[i]
        if ch in _SENTENCE_END:
            j = i + 1
            while j < n and body[j].isspace():
                j += 1
            boundary = j > i + 1 and j < n and (body[j].isupper() or body[j] in _OPENERS)
            if boundary and ch == ".":
                word_start = i
                while word_start > start and not body[word_start - 1].isspace():
                    word_start -= 1
                if body[word_start:i + 1].lower() in abbreviations:
                    boundary = False
            if boundary:
                sentences.append(body[start:i + 1])
                start = j
                i = j
                continue
        i += 1
    if start < n:
        sentences.append(body[start:])

    kept = []
    for raw in sentences:
        text = " ".join(raw.split())
        if not text:
            continue
        if min_tokens <= len(tokenize(text)) <= max_tokens:
            kept.append(text)
    return kept


class InvertedIndex:
    """Term-at-a-time scoring over L2-normalized log-TF-IDF sentence vectors."""

    def __init__(self, postings, df, records):
        self.postings = postings  # term -> [(sid, weight)] sorted by sid
        self.df = df
        self.records = records  # sid -> SentenceRecord
        self.n_sentences = len(records)

    def vectorize(self, tokens):
        """Weight an arbitrary token list with this index's statistics.

        Terms unseen by the index get weight zero; an all-unseen query yields
        an empty vector.
        """
        tf = {}
        for tok in tokens:
            tf[tok] = tf.get(tok, 0) + 1
        vec = {}
        for term, count in tf.items():
            d = self.df.get(term)
            if d:
                vec[term] = (1.0 + math.log(count)) * math.log(1.0 + self.n_sentences / d)
        norm = math.sqrt(sum(w * w for w in vec.values()))
        if norm == 0.0:
            return {}
        return {t: w / norm for t, w in vec.items()}

    def scores(self, record):
        """Cosine of ``record`` against every indexed sentence (no exclusions)."""
        weights = record.weights or self.vectorize(record.tokens)
        acc = {}
        for term, qw in weights.items():
            for sid, w in self.postings.get(term, ()):
                acc[sid] = acc.get(sid, 0.0) + qw * w
        return acc


def build_index(records):
    """Weight every sentence record in place and build the inverted index."""
    if not records:
        raise ValidationError("build_index: no sentences")
    df = {}
    for rec in records:
        for term in set(rec.tokens):
            df[term] = df.get(term, 0) + 1
    n = len(records)
    postings = {}
    by_sid = {}
    for rec in records:
        tf = {}
        for tok in rec.tokens:
            tf[tok] = tf.get(tok, 0) + 1
        vec = {t: (1.0 + math.log(c)) * math.log(1.0 + n / df[t]) for t, c in tf.items()}
        norm = math.sqrt(sum(w * w for w in vec.values()))
        if norm == 0.0:
            continue
        rec.weights = {t: w / norm for t, w in vec.items()}
        by_sid[rec.sid] = rec
        for term, w in rec.weights.items():
            postings.setdefault(term, []).append((rec.sid, w))
    for plist in postings.values():
        plist.sort(key=lambda pair: pair[0])
    return InvertedIndex(postings, df, by_sid)


def query_similar(ref, index, k):
    """Exact top-k cosine neighbours of ``ref`` from other sources.

    Sentences sharing the reference's source identifier are excluded (which
    also removes the reference itself). Ties break toward the lower sid.
    """
    if k < 1:
        raise ValidationError("query_similar: k must be >= 1")
    acc = index.scores(ref)
    ranked = sorted(
        ((sid, sim) for sid, sim in acc.items()
         if index.records[sid].source != ref.source),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked[:k]


def sentence_records(docs, cfg=MineConfig()):
    """Segment documents (sorted by id, for stable sids) into records."""
    records = []
    sid = 0
    for doc in sorted(docs, key=lambda d: d.id):
        for text in segment(doc, cfg.min_tokens, cfg.max_tokens, cfg.abbreviations):
            records.append(SentenceRecord(
                sid=sid, doc_id=doc.id, source=doc.source,
                text=text, tokens=tokenize(text)))
            sid += 1
    return records


def align(docs, cfg=MineConfig(), threads=1):
    """Mine aligned sentence pairs from a multi-source document collection.

    Every sentence queries its top-k other-source neighbours; pairs whose
    cosine falls inside [min_sim, max_sim] are kept, canonically ordered by
    sid and deduplicated. Output is independent of document input order.
    """
    sources = {d.source for d in docs}
    if len(sources) < 2:
        raise ValidationError(
            f"align: need documents from at least 2 sources, got {len(sources)}")
    records = sentence_records(docs, cfg)
    if not records:
        return []
    index = build_index(records)
    indexed = [index.records[sid] for sid in sorted(index.records)]

    def neighbours(rec):
        return query_similar(rec, index, cfg.k)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            all_hits = list(pool.map(neighbours, indexed))
    else:
        all_hits = [neighbours(rec) for rec in indexed]

    pairs = {}
    for rec, hits in zip(indexed, all_hits):
        for sid, sim in hits:
            if not cfg.min_sim <= sim <= cfg.max_sim:
                continue
            lo, hi = (rec.sid, sid) if rec.sid < sid else (sid, rec.sid)
            if (lo, hi) not in pairs:
                a, b = index.records[lo], index.records[hi]
                pairs[(lo, hi)] = SentencePair(
                    x=a.text, y=b.text, similarity=sim,
                    x_sid=a.sid, y_sid=b.sid,
                    x_source=a.source, y_source=b.source,
                    x_doc=a.doc_id, y_doc=b.doc_id)
    return [pairs[key] for key in sorted(pairs)]


def write_pairs(pairs, tsv_path, sidecar_path=None):
    """Write the training TSV and a JSON-lines sidecar with provenance."""
    with open(tsv_path, "w", encoding="utf-8", newline="\n") as fh:
        for p in pairs:
            fh.write(f"{p.x}\t{p.y}\n")
    if sidecar_path is not None:
        with open(sidecar_path, "w", encoding="utf-8", newline="\n") as fh:
            for p in pairs:
                rec = {"similarity": p.similarity}
                rec.update(p.provenance())
                fh.write(json.dumps(rec, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# ingestion


def ingest(source):
    """Load documents from a local directory of JSON files or a URL list.

    A string argument is a directory path; a list of URLs switches to fetch
    mode. Items that cannot be read or parsed are logged and skipped.
    """
    if isinstance(source, (list, tuple)):
        return fetch_documents(list(source))
    return load_documents(source)


def load_documents(directory):
    """Read one JSON document per file: {id, source, title, body, timestamp}."""
    import os

    docs = []
    try:
        names = sorted(n for n in os.listdir(directory) if n.endswith(".json"))
    except OSError as exc:
        raise ValidationError(f"ingest: cannot list {directory}: {exc}") from exc
    for name in names:
        path = os.path.join(directory, name)
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
            docs.append(Document(
                id=str(raw["id"]), source=str(raw["source"]),
                title=str(raw.get("title", "")), body=str(raw["body"]),
                timestamp=str(raw.get("timestamp", ""))))
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            log.warning("skipping %s: %s", path, exc)
    docs.sort(key=lambda d: d.id)
    return docs


class _TextExtractor(html.parser.HTMLParser):
    BLOCK_TAGS = {"p", "div", "br", "li", "tr", "h1", "h2", "h3", "h4", "h5", "h6",
                  "section", "article", "blockquote"}
    SKIP_TAGS = {"script", "style", "noscript"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts = []
        self.title_parts = []
        self._skip = 0
        self._in_title = False

    def handle_starttag(self, tag, attrs):
        if tag in self.SKIP_TAGS:
            self._skip += 1
        elif tag in self.BLOCK_TAGS:
            self.parts.append("\n")
        elif tag == "title":
            self._in_title = True

    def handle_endtag(self, tag):
        if tag in self.SKIP_TAGS and self._skip:
            self._skip -= 1
        elif tag in self.BLOCK_TAGS:
            self.parts.append("\n")
        elif tag == "title":
            self._in_title = False

    def handle_data(self, data):
        if self._skip:
            return
        if self._in_title:
            self.title_parts.append(data)
        else:
            self.parts.append(data)


def _extract_text(markup):
    parser = _TextExtractor()
    parser.feed(markup)
    parser.close()
    lines = [" ".join(chunk.split()) for chunk in "".join(parser.parts).split("\n")]
    text = "\n".join(line for line in lines if line)
    title = " ".join("".join(parser.title_parts).split())
    return text, title


def strip_html(markup):
    """Markup to plain text: block boundaries become newlines, tags vanish."""
    return _extract_text(markup)[0]


def fetch_documents(urls, delay=1.0, timeout=10.0):
    """Fetch URLs politely: robots exclusion honored, one request/sec/host."""
    robots = {}
    last_hit = {}
    docs = []
    for url in urls:
        host = urllib.parse.urlsplit(url).netloc
        try:
            rp = robots.get(host)
            if rp is None:
                rp = urllib.robotparser.RobotFileParser()
                rp.set_url(urllib.parse.urljoin(url, "/robots.txt"))
                try:
                    rp.read()
                except OSError:
                    rp.allow_all = True
                robots[host] = rp
            if not rp.can_fetch("paragen", url):
                log.warning("skipping %s: disallowed by robots.txt", url)
                continue
            wait = last_hit.get(host, 0.0) + delay - time.monotonic()
            if wait > 0:
                time.sleep(wait)
            last_hit[host] = time.monotonic()
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                markup = resp.read().decode("utf-8", errors="replace")
            body, title = _extract_text(markup)
            docs.append(Document(
                id=url, source=host, title=title, body=body,
                timestamp=time.strftime("%Y-%m-%dT%H:%M:%S%z")))
        except Exception as exc:  # noqa: BLE001 - any per-item failure is a skip
            log.warning("skipping %s: %s", url, exc)
    docs.sort(key=lambda d: d.id)
    return docs
