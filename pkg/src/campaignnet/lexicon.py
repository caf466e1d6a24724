"""Term selection: base terms, rare/significant word rules, n-gram terms, frequency vectors."""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence

import numpy as np

from .export import atomic_open
from .ingest import CorpusBucket

BASE = "base"
EXTRACTED = "extracted"


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class Term:
    text: str
    arity: int = 1
    is_hashtag: bool = False

    @classmethod
    def parse(cls, text: str) -> "Term":
        parts = text.split(" ")
        return cls(text, len(parts), len(parts) == 1 and text.startswith("#"))


@dataclass
class TermSet:
    """Ordered, duplicate-free list of terms with their corpus-wide counts."""

    terms: List[Term]
    kind: str = EXTRACTED
    counts: Dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        texts = [t.text for t in self.terms]
        if len(set(texts)) != len(texts):
            raise LexiconError("duplicate terms in TermSet")
        if self.kind == BASE and any(t.arity != 1 for t in self.terms):
            raise LexiconError("base term sets hold unigrams only")
        self._index = {t: i for i, t in enumerate(texts)}

    @classmethod
    def from_texts(cls, texts: Iterable[str], kind: str = EXTRACTED, counts: Optional[Mapping[str, int]] = None):
        return cls([Term.parse(t) for t in texts], kind, dict(counts or {}))

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    def __contains__(self, text: str) -> bool:
        return text in self._index

    def index(self, text: str) -> int:
        return self._index[text]

    @property
    def texts(self) -> List[str]:
        return [t.text for t in self.terms]

    def write_csv(self, path) -> None:
        with atomic_open(path) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["term", "arity", "count"])
            for t in self.terms:
                w.writerow([t.text, t.arity, self.counts.get(t.text, 0)])

    @classmethod
    def read_csv(cls, path, kind: str = EXTRACTED) -> "TermSet":
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        return cls([Term.parse(r["term"]) for r in rows], kind, {r["term"]: int(r["count"]) for r in rows})


@dataclass
class ReferenceLexicon:
    """Word frequency list from a reference corpus (a COCA-style list)."""

    entries: Dict[str, int]

    def __post_init__(self):
        bad = [w for w, c in self.entries.items() if c <= 0]
        if bad:
            raise LexiconError(f"reference counts must be > 0: {bad[:5]}")
        self.mean_count = math.fsum(self.entries.values()) / len(self.entries) if self.entries else 0.0

    @classmethod
    def load(cls, path) -> "ReferenceLexicon":
        """Read a UTF-8 ``word,count`` CSV with a header row."""
        path = Path(path)
        if not path.is_file():
            raise LexiconError(f"lexicon file not found: {path}")
        entries: Dict[str, int] = {}
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None or not {"word", "count"} <= set(reader.fieldnames):
                raise LexiconError(f"{path}: expected header 'word,count'")
            for row in reader:
                word = row["word"].strip().lower()
                try:
                    count = int(row["count"])
                except (TypeError, ValueError) as exc:
                    raise LexiconError(f"{path}: bad count for {word!r}") from exc
                entries[word] = entries.get(word, 0) + count
        return cls(entries)

    def write_csv(self, path) -> None:
        with atomic_open(path) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["word", "count"])
            for word, count in self.entries.items():
                w.writerow([word, count])


def ngrams(tokens: Sequence[str], n: int) -> Iterator[str]:
    for i in range(len(tokens) - n + 1):
        yield " ".join(tokens[i:i + n])


def _token_lists(buckets: Iterable[CorpusBucket]) -> Iterator[List[str]]:
    for b in buckets:
        yield from b.token_lists


def unigram_counts(buckets: Iterable[CorpusBucket]) -> Counter:
    counts: Counter = Counter()
    for tokens in _token_lists(buckets):
        counts.update(tokens)
    return counts


def _rank(counts: Mapping[str, int]) -> List[str]:
    return sorted(counts, key=lambda t: (-counts[t], t))


def select_base_terms(buckets: Sequence[CorpusBucket], min_count: int = 100, max_terms: int = 300) -> TermSet:
    """Top ``max_terms`` unigrams with corpus-wide count >= ``min_count``.

    Ties in count are broken lexicographically.
    """
    if not buckets:
        raise LexiconError("no buckets to select base terms from")
    counts = unigram_counts(buckets)
    qualifying = {t: c for t, c in counts.items() if c >= min_count}
    if len(qualifying) < 2:
        raise LexiconError(f"only {len(qualifying)} terms occur >= {min_count} times; need at least 2")
    chosen = _rank(qualifying)[:max_terms]
    return TermSet.from_texts(chosen, BASE, {t: qualifying[t] for t in chosen})


def classify_rare(word: str, ref: ReferenceLexicon, multiplier: float = 25) -> bool:
    """A word is rare if absent from the reference, or counted below ``multiplier`` x mean."""
    count = ref.entries.get(word)
    return count is None or count < multiplier * ref.mean_count


def classify_significant(word: str, corpus_counts: Mapping[str, int], min_occurrences: int = 10,
                         multiplier: float = 25) -> bool:
    """A word is significant if it occurs at least ``min_occurrences`` times and more
    than ``multiplier`` times the mean count per vocabulary type."""
    if not corpus_counts:
        raise LexiconError("empty corpus counts")
    count = corpus_counts.get(word, 0)
    mean = math.fsum(corpus_counts.values()) / len(corpus_counts)
    return count >= min_occurrences and count > multiplier * mean


def extract_terms(buckets: Sequence[CorpusBucket], ref: ReferenceLexicon, rare_multiplier: float = 25,
                  sig_multiplier: float = 25, min_occurrences: int = 10, min_ngram_count: int = 10,
                  min_word_count: int = 1) -> TermSet:
    """Hashtags, eligible (rare or significant) words, and their bigrams/trigrams.

    An n-gram qualifies when all its tokens are eligible, the tokens are adjacent
    inside one document, and the n-gram occurs ``min_ngram_count`` times overall.
    Hashtags are always eligible. Ordering is count descending, then text.
    """
    counts = unigram_counts(buckets)
    if not counts:
        return TermSet([], EXTRACTED)
    mean = math.fsum(counts.values()) / len(counts)
    eligible = set()
    for word, c in counts.items():
        if word.startswith("#"):
            eligible.add(word)
        elif c >= min_word_count and (
                classify_rare(word, ref, rare_multiplier)
                or (c >= min_occurrences and c > sig_multiplier * mean)):
            eligible.add(word)
    terms = {w: counts[w] for w in eligible if counts[w] >= min_word_count}
    gram_counts: Counter = Counter()
    for tokens in _token_lists(buckets):
        flags = [t in eligible for t in tokens]
        for n in (2, 3):
            for i in range(len(tokens) - n + 1):
                if all(flags[i:i + n]):
                    gram_counts[" ".join(tokens[i:i + n])] += 1
    terms.update({g: c for g, c in gram_counts.items() if c >= min_ngram_count})
    ordered = _rank(terms)
    return TermSet.from_texts(ordered, EXTRACTED, {t: terms[t] for t in ordered})


@dataclass
class FrequencyVector:
    terms: TermSet
    counts: np.ndarray
    relative: Optional[np.ndarray] = None

    @property
    def total(self) -> int:
        return int(self.counts.sum())


def count_terms(token_lists: Iterable[Sequence[str]], terms: TermSet) -> np.ndarray:
    """Occurrences of every term over adjacent token runs; overlapping matches all count."""
    counts = np.zeros(len(terms), dtype=np.int64)
    arities = sorted({t.arity for t in terms})
    for tokens in token_lists:
        for n in arities:
            for gram in ngrams(tokens, n):
                i = terms._index.get(gram)
                if i is not None:
                    counts[i] += 1
    return counts


def frequency_vector(bucket: CorpusBucket, terms: TermSet) -> FrequencyVector:
    """Term counts in one bucket, plus rates per bucket token when the bucket has tokens."""
    if len(terms) == 0:
        raise LexiconError("frequency_vector needs a non-empty term set")
    counts = count_terms(bucket.token_lists, terms)
    total = bucket.token_total
    relative = counts / total if total > 0 else None
    return FrequencyVector(terms, counts, relative)
