"""Acceptance gate.

Each test checks one primary criterion at its stated tolerance and runtime
budget, and records a single PASS/FAIL line printed in the terminal summary.
"""

import filecmp
import math
import random
import time
from datetime import date, timedelta
from pathlib import Path

import numpy as np

from campaignnet import corpusnet as cn
from campaignnet import dynamics as dyn
from campaignnet.graph import Partition, WeightedGraph, exhaustive_best_partition, jaccard, louvain, modularity, pearson
from campaignnet.ingest import BIWEEKLY, MONTHLY, TimeWindow, bucket, window_for
from campaignnet.lexicon import ReferenceLexicon, classify_rare, classify_significant, select_base_terms
from campaignnet.pipeline import PipelineConfig, manifest_config, run_pipeline
from campaignnet.synth import Regime, SynthSpec, generate

from conftest import ACCEPTANCE_LINES, follow_spec, write_scenario


def verdict(name: str, ok: bool, detail: str, elapsed: float = None, budget: float = None) -> bool:
    timing = ""
    if elapsed is not None:
        timing = f" [{elapsed:.2f}s" + (f" / {budget:g}s budget]" if budget else "]")
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}{timing}")
    return ok


# -- modularity exactness ---------------------------------------------------

def test_modularity_exactness():
    t0 = time.perf_counter()
    tri = WeightedGraph.from_edges([("a", "b", 1), ("b", "c", 1), ("a", "c", 1),
                                    ("d", "e", 1), ("e", "f", 1), ("d", "f", 1)])
    q_two = modularity(tri, Partition.from_groups([["a", "b", "c"], ["d", "e", "f"]]))
    q_one = modularity(tri, Partition.single(tri.nodes))
    edge = WeightedGraph.from_edges([("u", "v", 1.0)])
    q_split = modularity(edge, Partition.singletons(edge.nodes))
    elapsed = time.perf_counter() - t0
    ok = abs(q_two - 0.5) <= 1e-12 and abs(q_one) <= 1e-12 and abs(q_split + 0.5) <= 1e-12 and elapsed < 1.0
    verdict("modularity exactness", ok,
            f"triangles Q={q_two!r}, single community Q={q_one!r}, split edge Q={q_split!r}", elapsed, 1)
    assert ok


# -- Louvain against the exhaustive optimum -----------------------------------

def random_graph_family(count: int = 100, seed: int = 0):
    """Erdos-Renyi graphs, 3..10 nodes, p=0.4, weights U(0.1, 1); edgeless draws are redrawn."""
    rng = random.Random(seed)
    graphs = []
    while len(graphs) < count:
        n = rng.randint(3, 10)
        nodes = [f"n{i}" for i in range(n)]
        edges = [(nodes[i], nodes[j], rng.uniform(0.1, 1.0))
                 for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
        if edges:
            graphs.append(WeightedGraph.from_edges(edges, nodes))
    return graphs


def planted_cliques(seed: int, k: int = 4, size: int = 8):
    """k cliques of ``size`` nodes, one bridge between every clique pair, shuffled node order."""
    rng = random.Random(seed)
    groups = [[f"c{c}_{i}" for i in range(size)] for c in range(k)]
    edges = [(g[i], g[j], 1.0) for g in groups for i in range(size) for j in range(i + 1, size)]
    for a in range(k):
        for b in range(a + 1, k):
            edges.append((rng.choice(groups[a]), rng.choice(groups[b]), 1.0))
    nodes = [n for g in groups for n in g]
    rng.shuffle(nodes)
    rng.shuffle(edges)
    return WeightedGraph.from_edges(edges, nodes), groups


def test_louvain_vs_oracle():
    t0 = time.perf_counter()
    exact, ratios = 0, []
    for trial, g in enumerate(random_graph_family()):
        q_l = modularity(g, louvain(g, seed=trial))
        _, q_opt = exhaustive_best_partition(g)
        if q_l >= q_opt - 1e-9:
            exact += 1
        ratios.append(q_l / q_opt if q_opt > 1e-12 else 1.0)
    within = sum(r >= 0.9 for r in ratios)
    recovered = 0
    for seed in range(100):
        g, groups = planted_cliques(seed)
        p = louvain(g, seed=seed)
        recovered += sorted(map(sorted, p.communities())) == sorted(map(sorted, groups))
    elapsed = time.perf_counter() - t0
    ok = within == 100 and exact >= 90 and recovered == 100 and elapsed < 30
    verdict("louvain vs exhaustive oracle", ok,
            f"ratio>=0.9 in {within}/100 (min {min(ratios):.3f}), exact {exact}/100, "
            f"planted 4-clique recovery {recovered}/100", elapsed, 30)
    assert ok


# -- Pearson / Jaccard oracles ------------------------------------------------

def textbook_pearson(x, y):
    n = len(x)
    mx, my = math.fsum(x) / n, math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


def test_pearson_jaccard_oracles():
    rng = np.random.default_rng(7)
    t0 = time.perf_counter()
    worst, jaccard_exact = 0.0, 0
    for _ in range(1000):
        n = int(rng.integers(2, 60))
        x = rng.normal(size=n).tolist()
        y = (rng.normal(size=n) + rng.uniform(-2, 2) * np.asarray(x)).tolist()
        worst = max(worst, abs(pearson(x, y) - textbook_pearson(x, y)))
        a = set(rng.integers(0, 40, size=int(rng.integers(0, 25))).tolist())
        b = set(rng.integers(0, 40, size=int(rng.integers(0, 25))).tolist())
        expected = len(a & b) / len(a | b) if a | b else 0.0
        jaccard_exact += jaccard(a, b) == expected
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-9 and jaccard_exact == 1000 and elapsed < 5
    verdict("pearson/jaccard oracles", ok,
            f"max |pearson - textbook| = {worst:.2e}, jaccard exact {jaccard_exact}/1000", elapsed, 5)
    assert ok


# -- regime recovery ----------------------------------------------------------

def regime_spec(seed: int) -> SynthSpec:
    return SynthSpec(candidates=["A"], windows=24,
                     regimes=[Regime(0, [f"a{i}" for i in range(20)]), Regime(12, [f"b{i}" for i in range(20)])],
                     noise_rate=0.05, seed=seed, docs_per_window=50, drift=2.0, drift_width=1.5,
                     zipf_exponent=0.5)


def regime_recovered(seed: int):
    buckets = bucket(generate(regime_spec(seed)), MONTHLY)
    net = cn.build_corpus_network(buckets, select_base_terms(buckets))
    p = louvain(net.graph)
    spans = cn.temporal_continuity(net, p)
    ql = cn.quasi_linearity(net).fraction_adjacent
    return p.community_count == 2 and all(s.contiguous for s in spans) and ql >= 0.75, ql


def test_regime_recovery():
    t0 = time.perf_counter()
    results = [regime_recovered(seed) for seed in range(100)]
    elapsed = time.perf_counter() - t0
    hits = sum(ok for ok, _ in results)
    ok = hits >= 95 and elapsed < 60
    verdict("regime recovery", ok,
            f"{hits}/100 seeds give 2 contiguous communities with quasi-linearity >= 0.75 "
            f"(min fraction {min(q for _, q in results):.3f})", elapsed, 60)
    assert ok


# -- term-rule fidelity -------------------------------------------------------

def _reference_mean_200():
    """Reference list with mean count exactly 200 holding words at 4999, 5000 and 6000."""
    entries = {"d": 4999, "e": 5000, "h": 6000}
    entries.update({f"f{i}": 123 for i in range(199)})
    entries["g"] = 124
    ref = ReferenceLexicon(entries)
    assert ref.mean_count == 200.0
    return ref


def _corpus_mean_2():
    """1000 vocabulary types with mean count exactly 2."""
    counts = {"w60": 60, "w40": 40, "w50": 50, "w51": 51, "w9": 9}
    counts.update({f"p{i}": 2 for i in range(795)})
    counts.update({f"q{i}": 1 for i in range(200)})
    assert len(counts) == 1000 and sum(counts.values()) == 2000
    return counts


def term_rule_cases():
    ref = _reference_mean_200()
    small = ReferenceLexicon({"a": 100, "b": 300})
    corpus = _corpus_mean_2()
    ten = {"x": 10, **{f"o{i}": 1 for i in range(99)}}
    nine = {"x": 9, **{f"o{i}": 1 for i in range(99)}}
    rare = lambda w, r, m=25: classify_rare(w, r, m)
    sig = lambda w, c, k=10, m=25: classify_significant(w, c, k, m)
    return [
        ("rare: absent word", rare("zzz", ref), True),
        ("rare: 4999 < 25 x 200", rare("d", ref), True),
        ("rare: 5000 not < 5000", rare("e", ref), False),
        ("rare: 6000 >= 5000", rare("h", ref), False),
        ("rare: 123 < 5000", rare("f0", ref), True),
        ("rare: 5000 < 25.01 x 200", rare("e", ref, 25.01), True),
        ("rare: 5000 not < 24.99 x 200", rare("e", ref, 24.99), False),
        ("rare: {a:100,b:300} a", rare("a", small), True),
        ("rare: {a:100,b:300} b", rare("b", small), True),
        ("rare: 100 not < 0.5 x 200", rare("a", small, 0.5), False),
        ("significant: 60 > 50", sig("w60", corpus), True),
        ("significant: 40 not > 50", sig("w40", corpus), False),
        ("significant: 50 not > 50", sig("w50", corpus), False),
        ("significant: 51 > 50", sig("w51", corpus), True),
        ("significant: 9 occurrences", sig("w9", corpus), False),
        ("significant: absent word", sig("zzz", corpus), False),
        ("significant: exactly ten, low threshold", sig("x", ten, 10, 1), True),
        ("significant: nine, low threshold", sig("x", nine, 10, 1), False),
        ("significant: 60 below raised minimum 61", sig("w60", corpus, 61), False),
        ("significant: 40 > 19 x 2", sig("w40", corpus, 10, 19), True),
    ]


def test_term_rule_fidelity():
    cases = term_rule_cases()
    wrong = [name for name, got, want in cases if got != want]
    ok = len(cases) == 20 and not wrong
    verdict("term-rule fidelity", ok, f"{len(cases) - len(wrong)}/{len(cases)} exact"
            + (f"; wrong: {', '.join(wrong)}" if wrong else ""))
    assert ok


# -- follow-event recovery ----------------------------------------------------

def joining_candidate_events():
    """Topic 10 around 2015-08-02: Sanders and Trump cover the previous span, Clinton joins."""
    anchor = date(2015, 1, 4)
    first = window_for(date(2015, 7, 19), BIWEEKLY, anchor)
    windows = [first, TimeWindow(first.end, first.end + timedelta(days=14), BIWEEKLY)]
    covered = np.zeros((3, 1, 2), dtype=bool)
    covered[1, 0, :] = True   # Sanders
    covered[2, 0, :] = True   # Trump
    covered[0, 0, 1] = True   # Clinton, newly
    cov = dyn.CoverageMatrix.from_covered(["Clinton", "Sanders", "Trump"], [10], windows, covered)
    return dyn.detect_follow_events(cov)


def test_follow_event_recovery(tmp_path):
    t0 = time.perf_counter()
    archive, lexicon = write_scenario(follow_spec(0), tmp_path)
    cfg = PipelineConfig(input=str(archive), lexicon=str(lexicon), granularity=BIWEEKLY, min_count=10)
    out = tmp_path / "artifacts"
    run_pipeline(cfg, out)
    cov = dyn.CoverageMatrix.read_csv(out / "coverage.csv", cfg.coverage_threshold)
    events = dyn.read_events(out / "events.csv", cov.windows)
    g = dyn.follower_network(events, cov.candidates)
    board = dyn.scores(events, cov.candidates)
    planted_ok = (g.edges == {("B", "A"): 3.0} and board["A"].leadership == 3 and board["B"].leadership == -3
                  and board["A"].engagement == 3 and board["B"].engagement == 3)
    row = joining_candidate_events()
    row_ok = (len(row) == 1 and row[0].follower == "Clinton" and row[0].leaders == ("Sanders", "Trump")
              and row[0].topic == 10 and row[0].window.start == date(2015, 8, 2))
    elapsed = time.perf_counter() - t0
    ok = planted_ok and row_ok and elapsed < 10
    verdict("follow-event recovery", ok,
            f"edges {dict(g.edges)}, leadership A={board['A'].leadership:+d} B={board['B'].leadership:+d}, "
            f"engagement A={board['A'].engagement} B={board['B'].engagement}; "
            f"2015-08-02 row -> {[(e.follower, e.leaders) for e in row]}", elapsed, 10)
    assert ok


# -- score conservation -------------------------------------------------------

def random_event_set(rng: np.random.Generator):
    c = int(rng.integers(2, 7))
    t = int(rng.integers(1, 6))
    w = int(rng.integers(2, 11))
    anchor = date(2015, 1, 4)
    windows = [window_for(anchor + timedelta(days=14 * i), BIWEEKLY, anchor) for i in range(w)]
    covered = rng.random((c, t, w)) < rng.uniform(0.1, 0.9)
    cov = dyn.CoverageMatrix.from_covered([f"c{i}" for i in range(c)], list(range(1, t + 1)), windows, covered)
    return cov.candidates, dyn.detect_follow_events(cov)


def test_score_conservation():
    rng = np.random.default_rng(11)
    good = 0
    for _ in range(500):
        candidates, events = random_event_set(rng)
        board = dyn.scores(events, candidates)
        good += (sum(s.followed for s in board.values()) == len(events)
                 and all(s.engagement >= abs(s.leadership) for s in board.values()))
    ok = good == 500
    verdict("score conservation", ok, f"{good}/500 event sets conserve followed spans and bound leadership")
    assert ok


# -- reproducibility ----------------------------------------------------------

def _tree(root: Path):
    return sorted(p.relative_to(root) for p in root.rglob("*") if p.is_file())


def test_reproducibility(tmp_path):
    archive, lexicon = write_scenario(follow_spec(1), tmp_path)
    cfg = PipelineConfig(input=str(archive), lexicon=str(lexicon), granularity=BIWEEKLY, min_count=10)
    first, second = tmp_path / "first", tmp_path / "second"
    run_pipeline(cfg, first)
    run_pipeline(manifest_config(first / "manifest.json"), second)
    files = _tree(first)
    same = files == _tree(second) and all(filecmp.cmp(first / f, second / f, shallow=False) for f in files)
    verdict("reproducibility", same, f"{len(files)} artifacts {'byte-identical' if same else 'differ'} "
                                     "across two runs from one manifest")
    assert same
