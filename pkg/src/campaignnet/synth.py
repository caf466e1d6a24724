"""Synthetic corpora with planted structure, used as ground truth in tests.

A spec describes vocabulary regimes shared by all candidates and planted
leader/follower topic adoptions. Vocabulary is abstract; token weights inside a
vocabulary follow a Zipf law, optionally with an emphasis that drifts from
window to window so that neighbouring windows resemble each other most.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from datetime import date, datetime, time, timedelta, timezone
from typing import List, Optional

import numpy as np

from .ingest import BIWEEKLY, DEFAULT_ANCHOR, GRANULARITIES, MONTHLY, Document, TimeWindow, add_months
from .lexicon import ReferenceLexicon

FILLER_COUNT = 1_000_000
TAIL_COUNT = 5
TAIL_PER_FILLER = 40


class SynthError(ValueError):
    pass


@dataclass
class Regime:
    start_window: int
    vocabulary: List[str]


@dataclass
class PlantedFollow:
    leader: str
    follower: str
    topic_vocab: List[str]
    onset_window: int
    lag_windows: int = 1
    duration_windows: Optional[int] = None


@dataclass
class SynthSpec:
    candidates: List[str]
    windows: int
    regimes: List[Regime]
    plant_follow: List[PlantedFollow] = field(default_factory=list)
    noise_rate: float = 0.0
    seed: int = 0
    granularity: str = MONTHLY
    start: Optional[date] = None
    docs_per_window: int = 50
    doc_length: List[int] = field(default_factory=lambda: [8, 30])
    drift: float = 0.0
    drift_width: float = 1.5
    zipf_exponent: float = 1.0
    topic_share: float = 0.3
    filler_size: int = 50

    def __post_init__(self):
        self.regimes = [r if isinstance(r, Regime) else Regime(**r) for r in self.regimes]
        self.plant_follow = [p if isinstance(p, PlantedFollow) else PlantedFollow(**p) for p in self.plant_follow]
        if isinstance(self.start, str):
            self.start = date.fromisoformat(self.start)
        self.validate()

    @classmethod
    def from_json(cls, path) -> "SynthSpec":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        try:
            return cls(**raw)
        except TypeError as exc:
            raise SynthError(f"invalid spec file {path}: {exc}") from exc

    def to_json(self) -> dict:
        d = asdict(self)
        d["start"] = self.first_date.isoformat()
        return d

    @property
    def first_date(self) -> date:
        if self.start is not None:
            return self.start
        return date(2014, 1, 1) if self.granularity == MONTHLY else DEFAULT_ANCHOR

    def validate(self) -> None:
        def fail(name, why):
            raise SynthError(f"{name}: {why}")

        if not self.candidates or len(set(self.candidates)) != len(self.candidates):
            fail("candidates", "must be a non-empty list of unique ids")
        if self.windows < 1:
            fail("windows", "must be >= 1")
        if self.granularity not in GRANULARITIES:
            fail("granularity", f"must be one of {GRANULARITIES}")
        if not self.regimes:
            fail("regimes", "at least one regime required")
        starts = [r.start_window for r in self.regimes]
        if starts[0] != 0:
            fail("regimes", "first regime must start at window 0")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            fail("regimes", "start windows must be strictly increasing")
        if starts[-1] >= self.windows:
            fail("regimes", "a regime starts after the last window")
        if any(not r.vocabulary for r in self.regimes):
            fail("regimes", "vocabulary must be non-empty")
        for p in self.plant_follow:
            if p.leader not in self.candidates or p.follower not in self.candidates:
                fail("plant_follow", f"unknown candidate in {p.leader!r} -> {p.follower!r}")
            if p.leader == p.follower:
                fail("plant_follow", "leader and follower must differ")
            if p.lag_windows < 1:
                fail("plant_follow", "lag_windows must be >= 1")
            if not 0 <= p.onset_window < self.windows:
                fail("plant_follow", f"onset_window {p.onset_window} outside 0..{self.windows - 1}")
            if not p.topic_vocab:
                fail("plant_follow", "topic_vocab must be non-empty")
            if p.duration_windows is not None and p.duration_windows < 1:
                fail("plant_follow", "duration_windows must be >= 1")
        if not 0 <= self.noise_rate < 0.5:
            fail("noise_rate", "must lie in [0, 0.5)")
        if self.docs_per_window < 1:
            fail("docs_per_window", "must be >= 1")
        lo, hi = self.doc_length
        if not 1 <= lo <= hi:
            fail("doc_length", "must be [min, max] with 1 <= min <= max")
        if self.drift < 0:
            fail("drift", "must be >= 0")
        if self.drift_width <= 0:
            fail("drift_width", "must be > 0")
        if not 0 < self.topic_share < 1:
            fail("topic_share", "must lie in (0, 1)")
        if self.filler_size < 1:
            fail("filler_size", "must be >= 1")

    def window(self, w: int) -> TimeWindow:
        if self.granularity == MONTHLY:
            start = add_months(self.first_date.replace(day=1), w)
            return TimeWindow(start, add_months(start, 1), MONTHLY)
        start = self.first_date + timedelta(days=14 * w)
        return TimeWindow(start, start + timedelta(days=14), BIWEEKLY)

    def filler_words(self) -> List[str]:
        return [f"filler{i}" for i in range(self.filler_size)]


def zipf_weights(n: int, exponent: float = 1.0) -> np.ndarray:
    w = 1.0 / np.arange(1, n + 1) ** exponent
    return w / w.sum()


def regime_weights(spec: SynthSpec) -> List[np.ndarray]:
    """Per-window sampling weights of the active regime's vocabulary.

    With ``drift > 0`` a Gaussian emphasis of height ``drift`` and width
    ``drift_width`` (in vocabulary positions) moves one position per window
    around the vocabulary, treated as a ring.
    """
    out: List[np.ndarray] = []
    for w in range(spec.windows):
        regime = _active_regime(spec, w)
        n = len(regime.vocabulary)
        p = zipf_weights(n, spec.zipf_exponent)
        if spec.drift > 0:
            centre = (w - regime.start_window) % n
            d = np.abs(np.arange(n) - centre)
            d = np.minimum(d, n - d)
            p = p * (1.0 + spec.drift * np.exp(-d ** 2 / (2.0 * spec.drift_width ** 2)))
        out.append(p / p.sum())
    return out


def _active_regime(spec: SynthSpec, w: int) -> Regime:
    return [r for r in spec.regimes if r.start_window <= w][-1]


def _active_topics(spec: SynthSpec, candidate: str, w: int) -> List[PlantedFollow]:
    active = []
    for p in spec.plant_follow:
        if candidate == p.leader:
            begin = p.onset_window
        elif candidate == p.follower:
            begin = p.onset_window + p.lag_windows
        else:
            continue
        end = begin + p.duration_windows if p.duration_windows is not None else spec.windows
        if begin <= w < end:
            active.append(p)
    return active


def generate(spec: SynthSpec) -> List[Document]:
    """Sample a document archive from a spec; identical specs give identical archives."""
    spec.validate()
    shared = regime_weights(spec)
    filler = spec.filler_words()
    lo, hi = spec.doc_length
    docs: List[Document] = []
    for ci, cand in enumerate(spec.candidates):
        rng = np.random.default_rng([spec.seed, ci + 1])
        for w in range(spec.windows):
            window = spec.window(w)
            regime = _active_regime(spec, w)
            topics = _active_topics(spec, cand, w)
            topic_total = min(spec.topic_share * len(topics), 0.9)
            span = (window.end - window.start).total_seconds()
            t0 = datetime.combine(window.start, time(), tzinfo=timezone.utc)
            for i in range(spec.docs_per_window):
                u = rng.random()
                if topics and u < topic_total:
                    vocab = topics[int(u / topic_total * len(topics))].topic_vocab
                    weights = zipf_weights(len(vocab), spec.zipf_exponent)
                else:
                    vocab, weights = regime.vocabulary, shared[w]
                length = int(rng.integers(lo, hi + 1))
                picks = rng.choice(len(vocab), size=length, p=weights)
                noise = rng.random(length) < spec.noise_rate
                fill = rng.integers(len(filler), size=length)
                tokens = [filler[f] if n else vocab[k] for k, n, f in zip(picks, noise, fill)]
                ts = t0 + timedelta(seconds=int(rng.integers(0, int(span))))
                docs.append(Document(f"{cand}-{w:03d}-{i:04d}", cand, ts, " ".join(tokens)))
    docs.sort(key=lambda d: (d.timestamp, d.id))
    return docs


def reference_lexicon(spec: SynthSpec) -> ReferenceLexicon:
    """A reference list under which filler and regime words are common and
    planted topic vocabulary is rare.

    Low-count tail entries pull the mean down so that common words stay
    non-rare for any rarity multiplier below ``TAIL_PER_FILLER + 1``.
    """
    common = list(dict.fromkeys(spec.filler_words() + [w for r in spec.regimes for w in r.vocabulary]))
    planted = {w for p in spec.plant_follow for w in p.topic_vocab}
    entries = {w: FILLER_COUNT for w in common if w not in planted}
    for i in range(TAIL_PER_FILLER * len(entries)):
        entries[f"reftail{i}"] = TAIL_COUNT
    return ReferenceLexicon(entries)
