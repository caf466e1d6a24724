"""Loading, tokenizing and time-bucketing of timestamped document archives."""

from __future__ import annotations

import csv
import json
import logging
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, List, Mapping, NamedTuple, Optional, Sequence

from .export import atomic_open

log = logging.getLogger(__name__)

ALL_AUTHORS = "ALL"
MONTHLY = "monthly"
BIWEEKLY = "biweekly"
GRANULARITIES = (MONTHLY, BIWEEKLY)
DEFAULT_ANCHOR = date(2015, 1, 4)
FIELDS = ("id", "author", "timestamp", "text")


class IngestError(ValueError):
    """Unreadable archive, or a malformed row under strict mode."""


@dataclass(frozen=True)
class Document:
    id: str
    author: str
    timestamp: datetime
    text: str

    def to_json(self) -> dict:
        return {"id": self.id, "author": self.author,
                "timestamp": format_timestamp(self.timestamp), "text": self.text}


@dataclass(frozen=True, order=True)
class TimeWindow:
    """Half-open ``[start, end)`` span of UTC dates."""

    start: date
    end: date
    granularity: str = MONTHLY

    def __post_init__(self):
        if not self.start < self.end:
            raise ValueError(f"window start {self.start} must precede end {self.end}")
        if self.granularity not in GRANULARITIES:
            raise ValueError(f"unknown granularity {self.granularity!r}")

    @property
    def label(self) -> str:
        if self.granularity == MONTHLY:
            return self.start.strftime("%Y-%m")
        return self.start.isoformat()

    def contains(self, ts: datetime) -> bool:
        return self.start <= ts.date() < self.end


@dataclass
class CorpusBucket:
    window: TimeWindow
    author: str
    documents: List[Document] = field(default_factory=list)
    token_lists: List[List[str]] = field(default_factory=list)

    @property
    def is_empty(self) -> bool:
        return not self.documents

    @property
    def label(self) -> str:
        if self.author == ALL_AUTHORS:
            return self.window.label
        return f"{self.author}:{self.window.label}"

    @property
    def token_total(self) -> int:
        return sum(len(t) for t in self.token_lists)


class LoadResult(NamedTuple):
    documents: List[Document]
    skipped: int


def parse_timestamp(value: str) -> datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime, second precision.

    Naive timestamps are taken to be UTC.
    """
    value = value.strip()
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    ts = datetime.fromisoformat(value)
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _rows(path: Path, fmt: str):
    if fmt == "csv":
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            missing = [f for f in FIELDS if f not in (reader.fieldnames or FIELDS)]
            if missing:
                raise IngestError(f"{path}: CSV header lacks columns {missing}")
            for lineno, row in enumerate(reader, start=2):
                yield lineno, row
    elif fmt == "jsonl":
        with path.open(encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    yield lineno, json.loads(line)
                except json.JSONDecodeError as exc:
                    yield lineno, exc
    else:
        raise IngestError(f"unknown format {fmt!r}; expected csv or jsonl")


def _to_document(row) -> Document:
    if isinstance(row, Exception):
        raise ValueError(f"invalid JSON: {row}")
    if not isinstance(row, dict):
        raise ValueError("record is not an object")
    values = {}
    for key in FIELDS:
        value = row.get(key)
        if value is None:
            raise ValueError(f"missing field {key!r}")
        values[key] = str(value)
    if not values["id"]:
        raise ValueError("empty id")
    return Document(values["id"], values["author"], parse_timestamp(values["timestamp"]), values["text"])


def load_documents(path, fmt: str = "jsonl", strict: bool = False) -> LoadResult:
    """Read an archive of documents in file order.

    Malformed rows (missing fields, bad timestamps, duplicate ids) are skipped
    and counted, or raise :class:`IngestError` when ``strict`` is set.
    """
    path = Path(path)
    try:
        if not path.is_file():
            raise IngestError(f"cannot read archive {path}")
        docs: List[Document] = []
        seen = set()
        skipped = 0
        for lineno, row in _rows(path, fmt):
            try:
                doc = _to_document(row)
                if doc.id in seen:
                    raise ValueError(f"duplicate id {doc.id!r}")
            except ValueError as exc:
                if strict:
                    raise IngestError(f"{path}:{lineno}: {exc}") from exc
                log.warning("%s:%d: skipping malformed row (%s)", path, lineno, exc)
                skipped += 1
                continue
            seen.add(doc.id)
            docs.append(doc)
    except (OSError, UnicodeDecodeError) as exc:
        raise IngestError(f"cannot read archive {path}: {exc}") from exc
    log.info("loaded %d documents from %s (%d skipped)", len(docs), path, skipped)
    return LoadResult(docs, skipped)


def write_documents(docs: Iterable[Document], path) -> None:
    with atomic_open(path) as fh:
        for d in docs:
            fh.write(json.dumps(d.to_json(), ensure_ascii=False, sort_keys=True) + "\n")


def drop_duplicate_texts(docs: Sequence[Document]) -> List[Document]:
    """Keep the first document of every exact-text duplicate group."""
    seen = set()
    out = []
    for d in docs:
        if d.text not in seen:
            seen.add(d.text)
            out.append(d)
    return out


@dataclass(frozen=True)
class TokenizerConfig:
    keep_mentions: bool = True
    keep_hashtags: bool = True


_URL = re.compile(r"(?:https?://|www\.)\S+", re.IGNORECASE)
_WORD = r"\w+(?:['\-]\w+)*"
_TOKEN = re.compile(rf"(#|@|(?<!\S)[-\u2013\u2014])?({_WORD})")
_APOSTROPHES = str.maketrans({"’": "'", "‘": "'", "ʼ": "'",
                              "‐": "-", "‑": "-"})


def tokenize(text: str, options: Optional[TokenizerConfig] = None) -> List[str]:
    """Split text into lowercase, unstemmed tokens.

    URLs are dropped. ``#hashtags`` and ``@mentions`` stay single tokens with
    their prefix; apostrophes and hyphens inside a word are kept (``y'all``,
    ``2-party``), as is a leading hyphen on a word that starts a token
    (signature forms such as ``-john``).
    """
    options = options or TokenizerConfig()
    text = _URL.sub(" ", text.translate(_APOSTROPHES))
    tokens = []
    for prefix, word in _TOKEN.findall(text):
        if prefix == "@" and not options.keep_mentions:
            continue
        if prefix == "#" and not options.keep_hashtags:
            prefix = ""
        if prefix in ("\u2013", "\u2014"):
            prefix = "-"
        tokens.append((prefix + word).lower())
    return tokens


def month_start(d: date) -> date:
    return d.replace(day=1)


def add_months(d: date, n: int) -> date:
    y, m = divmod(d.month - 1 + n, 12)
    return date(d.year + y, m + 1, 1)


def window_for(d: date, granularity: str, anchor: date = DEFAULT_ANCHOR) -> TimeWindow:
    if granularity == MONTHLY:
        start = month_start(d)
        return TimeWindow(start, add_months(start, 1), MONTHLY)
    if granularity == BIWEEKLY:
        offset = (d - anchor).days // 14
        start = anchor + timedelta(days=14 * offset)
        return TimeWindow(start, start + timedelta(days=14), BIWEEKLY)
    raise ValueError(f"unknown granularity {granularity!r}")


def next_window(w: TimeWindow, anchor: date = DEFAULT_ANCHOR) -> TimeWindow:
    return window_for(w.end, w.granularity, anchor)


def window_grid(first: date, last: date, granularity: str, anchor: date = DEFAULT_ANCHOR) -> List[TimeWindow]:
    """Consecutive windows covering the dates ``first`` through ``last`` inclusive."""
    w = window_for(first, granularity, anchor)
    grid = [w]
    while w.end <= last:
        w = next_window(w, anchor)
        grid.append(w)
    return grid


def window_index(w: TimeWindow, anchor: date = DEFAULT_ANCHOR) -> int:
    """Ordinal position of a window on its granularity's global grid."""
    if w.granularity == MONTHLY:
        return w.start.year * 12 + w.start.month - 1
    return (w.start - anchor).days // 14


def bucket(documents: Sequence[Document], granularity: str = MONTHLY, anchor: Optional[date] = None,
           per_author: bool = False, range_start: Optional[date] = None, range_end: Optional[date] = None,
           tokenizer: Optional[TokenizerConfig] = None,
           tokens: Optional[Mapping[str, List[str]]] = None) -> List[CorpusBucket]:
    """Group documents into time-window corpora.

    Args:
        documents: documents in any order; each lands in exactly one bucket.
        granularity: ``"monthly"`` (calendar months) or ``"biweekly"``.
        anchor: start of one biweekly window; required for biweekly.
        per_author: one bucket per (window, author) instead of pooling authors.
        range_start, range_end: inclusive date bounds; documents outside are
            excluded (and logged). Default to the observed date range.
        tokens: precomputed token lists by document id; skips tokenizing.

    Returns:
        Buckets sorted by window start then author. Every window of the range
        appears, possibly as an empty bucket.
    """
    if granularity == BIWEEKLY and anchor is None:
        raise ValueError("biweekly bucketing requires an anchor date")
    anchor = anchor or DEFAULT_ANCHOR
    in_range = [d for d in documents
                if (range_start is None or d.timestamp.date() >= range_start)
                and (range_end is None or d.timestamp.date() <= range_end)]
    excluded = len(documents) - len(in_range)
    if excluded:
        log.info("excluded %d documents outside the observation range", excluded)
    if not in_range and (range_start is None or range_end is None):
        return []
    dates = [d.timestamp.date() for d in in_range]
    first = range_start or min(dates)
    last = range_end or max(dates)
    grid = window_grid(first, last, granularity, anchor)
    authors = sorted({d.author for d in in_range}) if per_author else [ALL_AUTHORS]
    slots = {(window_index(w, anchor), a): CorpusBucket(w, a) for w in grid for a in authors}
    for d in sorted(in_range, key=lambda d: (d.timestamp, d.id)):
        w = window_for(d.timestamp.date(), granularity, anchor)
        b = slots[(window_index(w, anchor), d.author if per_author else ALL_AUTHORS)]
        b.documents.append(d)
        b.token_lists.append(tokens[d.id] if tokens is not None else tokenize(d.text, tokenizer))
    return sorted(slots.values(), key=lambda b: (b.window.start, b.author))
