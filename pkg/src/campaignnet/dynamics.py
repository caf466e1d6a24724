"""Topic coverage over time, follow events, follower network, leadership/engagement scores."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from datetime import date
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence

import numpy as np

from .export import atomic_open
from .graph import WeightedGraph, pearson
from .ingest import BIWEEKLY, CorpusBucket, TimeWindow, window_for
from .lexicon import FrequencyVector, TermSet, count_terms
from .topicnet import Topic

DEFAULT_COVERAGE_THRESHOLD = 0.5
SENSITIVITY_THRESHOLDS = (0.3, 0.5, 0.7)
MIN_TOPIC_TERMS = 3


class Coverage(NamedTuple):
    rho: float
    covered: bool


def topic_terms(topic: Topic) -> TermSet:
    return TermSet.from_texts([t for t, _ in topic.ranked_terms()])


def coverage(vector: Optional[FrequencyVector], topic: Topic, threshold: float = DEFAULT_COVERAGE_THRESHOLD) -> Coverage:
    """Correlate a candidate's window term counts with a topic's membership weights.

    ``vector`` must be indexed by the topic's terms (see :func:`topic_terms`);
    ``None`` stands for a candidate with no documents in the window. Topics
    with fewer than three terms, and constant vectors, give an undefined rho.
    """
    if vector is None or len(topic.membership) < MIN_TOPIC_TERMS:
        return Coverage(math.nan, False)
    weights = [topic.membership[t] for t in vector.terms.texts]
    rho = pearson(weights, vector.counts)
    return Coverage(rho, not math.isnan(rho) and rho >= threshold)


@dataclass
class CoverageMatrix:
    """rho[c, t, w] for candidate c, topic t, window w on a contiguous window grid."""

    candidates: List[str]
    topics: List[int]
    windows: List[TimeWindow]
    rho: np.ndarray
    threshold: float = DEFAULT_COVERAGE_THRESHOLD
    covered: np.ndarray = field(default=None)

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        expected = (len(self.candidates), len(self.topics), len(self.windows))
        if self.rho.shape != expected:
            raise ValueError(f"rho shape {self.rho.shape} != {expected}")
        for a, b in zip(self.windows, self.windows[1:]):
            if a.end != b.start:
                raise ValueError(f"windows not contiguous: {a.label} then {b.label}")
        if self.covered is None:
            with np.errstate(invalid="ignore"):
                self.covered = ~np.isnan(self.rho) & (self.rho >= self.threshold)
        else:
            self.covered = np.asarray(self.covered, dtype=bool)
            if np.any(self.covered & np.isnan(self.rho)):
                raise ValueError("covered cell with undefined rho")

    @classmethod
    def from_covered(cls, candidates, topics, windows, covered) -> "CoverageMatrix":
        """Matrix whose rho is 1 where covered and NaN elsewhere (for hand-built scenarios)."""
        covered = np.asarray(covered, dtype=bool)
        return cls(list(candidates), list(topics), list(windows), np.where(covered, 1.0, np.nan))

    def with_threshold(self, threshold: float) -> "CoverageMatrix":
        return CoverageMatrix(self.candidates, self.topics, self.windows, self.rho, threshold)

    def is_covered(self, candidate: str, topic: int, window: int) -> bool:
        return bool(self.covered[self.candidates.index(candidate), self.topics.index(topic), window])

    def write_csv(self, path) -> None:
        with atomic_open(path) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["candidate", "topic", "window_start", "rho", "covered"])
            for ci, c in enumerate(self.candidates):
                for ti, t in enumerate(self.topics):
                    for wi, win in enumerate(self.windows):
                        r = self.rho[ci, ti, wi]
                        w.writerow([c, t, win.start.isoformat(), "" if math.isnan(r) else repr(float(r)),
                                    int(self.covered[ci, ti, wi])])

    @classmethod
    def read_csv(cls, path, threshold: float = DEFAULT_COVERAGE_THRESHOLD, granularity: str = BIWEEKLY):
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        cands = list(dict.fromkeys(r["candidate"] for r in rows))
        topics = list(dict.fromkeys(int(r["topic"]) for r in rows))
        starts = sorted({date.fromisoformat(r["window_start"]) for r in rows})
        windows = [window_for(s, granularity, anchor=starts[0]) for s in starts]
        rho = np.full((len(cands), len(topics), len(windows)), np.nan)
        covered = np.zeros_like(rho, dtype=bool)
        wpos = {s: i for i, s in enumerate(starts)}
        for r in rows:
            i, j, k = cands.index(r["candidate"]), topics.index(int(r["topic"])), wpos[date.fromisoformat(r["window_start"])]
            rho[i, j, k] = float(r["rho"]) if r["rho"] else np.nan
            covered[i, j, k] = r["covered"] == "1"
        return cls(cands, topics, windows, rho, threshold, covered)


def coverage_matrix(buckets: Sequence[CorpusBucket], topics: Sequence[Topic], windows: Sequence[TimeWindow],
                    candidates: Optional[Sequence[str]] = None,
                    threshold: float = DEFAULT_COVERAGE_THRESHOLD) -> CoverageMatrix:
    """Coverage of every topic by every candidate in every window of the grid.

    Args:
        buckets: per-author buckets at the grid's granularity.
        topics: merged topics.
        windows: contiguous window grid.
        candidates: defaults to every author in ``buckets``, sorted.
    """
    by_slot: Dict[tuple, CorpusBucket] = {(b.author, b.window.start): b for b in buckets if not b.is_empty}
    if candidates is None:
        candidates = sorted({b.author for b in buckets})
    rho = np.full((len(candidates), len(topics), len(windows)), np.nan)
    term_sets = [topic_terms(t) for t in topics]
    for ci, c in enumerate(candidates):
        for wi, win in enumerate(windows):
            b = by_slot.get((c, win.start))
            if b is None:
                continue
            for ti, (topic, ts) in enumerate(zip(topics, term_sets)):
                fv = FrequencyVector(ts, count_terms(b.token_lists, ts))
                rho[ci, ti, wi] = coverage(fv, topic, threshold).rho
    return CoverageMatrix(list(candidates), [t.id for t in topics], list(windows), rho, threshold)


@dataclass(frozen=True)
class FollowEvent:
    follower: str
    leaders: tuple
    topic: int
    window: TimeWindow

    def __post_init__(self):
        if not self.leaders:
            raise ValueError("a follow event needs at least one leader")
        if self.follower in self.leaders:
            raise ValueError("follower cannot lead itself")


def detect_follow_events(cov: CoverageMatrix) -> List[FollowEvent]:
    """Candidates that newly cover a topic follow those who covered it one window earlier.

    No event is emitted when nobody covered the topic in the previous window.
    Events are ordered by window, topic, follower.
    """
    if len(cov.windows) < 2:
        raise ValueError("follow detection needs at least two windows")
    events = []
    c = cov.covered
    for wi in range(1, len(cov.windows)):
        for ti, topic in enumerate(cov.topics):
            prev = [cand for ci, cand in enumerate(cov.candidates) if c[ci, ti, wi - 1]]
            for ci, cand in enumerate(cov.candidates):
                if c[ci, ti, wi] and not c[ci, ti, wi - 1]:
                    leaders = tuple(sorted(x for x in prev if x != cand))
                    if leaders:
                        events.append(FollowEvent(cand, leaders, topic, cov.windows[wi]))
    return events


def follower_network(events: Iterable[FollowEvent], candidates: Sequence[str] = ()) -> WeightedGraph:
    """Directed follower -> leader graph weighted by the number of shared events."""
    g = WeightedGraph(nodes=list(candidates), directed=True)
    for e in events:
        for leader in e.leaders:
            g.increment_edge(e.follower, leader, 1.0)
    return g


@dataclass
class Score:
    led: int = 0
    followed: int = 0

    @property
    def leadership(self) -> int:
        return self.led - self.followed

    @property
    def engagement(self) -> int:
        return self.led + self.followed


def scores(events: Sequence[FollowEvent], candidates: Sequence[str] = (), unit: str = "event") -> Dict[str, Score]:
    """Leadership (led minus followed) and engagement (led plus followed) per candidate.

    With ``unit="event"`` every (topic, window) event counts once; with
    ``unit="window"`` a candidate's spans are distinct windows.
    """
    if unit not in ("event", "window"):
        raise ValueError(f"unknown scoring unit {unit!r}")
    led: Dict[str, set] = {c: set() for c in candidates}
    followed: Dict[str, set] = {c: set() for c in candidates}
    for e in events:
        span = e.window.start if unit == "window" else (e.topic, e.window.start, e.follower)
        followed.setdefault(e.follower, set()).add(span)
        led.setdefault(e.follower, set())
        for leader in e.leaders:
            led.setdefault(leader, set()).add(span)
            followed.setdefault(leader, set())
    order = list(candidates) + sorted(c for c in led if c not in set(candidates))
    return {c: Score(len(led[c]), len(followed[c])) for c in order}


def ranked_scores(board: Mapping[str, Score]) -> List[tuple]:
    """(candidate, score) sorted by leadership, then engagement, descending."""
    return sorted(board.items(), key=lambda kv: (-kv[1].leadership, -kv[1].engagement, kv[0]))


def sensitivity(cov: CoverageMatrix, thresholds: Sequence[float] = SENSITIVITY_THRESHOLDS) -> dict:
    out = {}
    for t in thresholds:
        ev = detect_follow_events(cov.with_threshold(t))
        board = scores(ev, cov.candidates)
        out[repr(float(t))] = {"events": len(ev),
                               "scores": {c: {"leadership": s.leadership, "engagement": s.engagement}
                                          for c, s in board.items()}}
    return out


def write_events(events: Iterable[FollowEvent], path) -> None:
    with atomic_open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["window_start", "topic", "follower", "leaders"])
        for e in events:
            w.writerow([e.window.start.isoformat(), e.topic, e.follower, ";".join(e.leaders)])


def read_events(path, windows: Sequence[TimeWindow]) -> List[FollowEvent]:
    by_start = {w.start.isoformat(): w for w in windows}
    with open(path, newline="", encoding="utf-8") as fh:
        return [FollowEvent(r["follower"], tuple(r["leaders"].split(";")), int(r["topic"]), by_start[r["window_start"]])
                for r in csv.DictReader(fh)]


def write_scores(board: Mapping[str, Score], path) -> None:
    with atomic_open(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["candidate", "leadership", "engagement"])
        for c, s in board.items():
            w.writerow([c, s.leadership, s.engagement])
