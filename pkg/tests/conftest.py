import json
from datetime import datetime, timezone

import pytest

from campaignnet.ingest import BIWEEKLY, Document, write_documents
from campaignnet.synth import PlantedFollow, Regime, SynthSpec, generate, reference_lexicon

# Acceptance verdicts, filled by tests/test_acceptance.py and echoed after the run.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def doc(id, author, ts, text):
    return Document(id, author, datetime.fromisoformat(ts).replace(tzinfo=timezone.utc), text)


def follow_spec(seed: int = 0, onsets=(2, 5, 8)) -> SynthSpec:
    """Two candidates; A adopts three fresh topics, B picks each up one window later."""
    topics = [PlantedFollow("A", "B", [f"t{k}x{j}" for j in range(6)], onset, 1, 4)
              for k, onset in enumerate(onsets)]
    return SynthSpec(candidates=["A", "B"], windows=14, granularity=BIWEEKLY,
                     regimes=[Regime(0, [f"w{i}" for i in range(20)])], plant_follow=topics,
                     noise_rate=0.05, seed=seed, docs_per_window=40, zipf_exponent=0.5, topic_share=0.2)


def write_scenario(spec: SynthSpec, directory) -> tuple:
    """Write a spec's archive and reference lexicon; returns their paths."""
    archive = directory / "docs.jsonl"
    lexicon = directory / "lexicon.csv"
    write_documents(generate(spec), archive)
    reference_lexicon(spec).write_csv(lexicon)
    return archive, lexicon


@pytest.fixture
def follow_scenario(tmp_path):
    return write_scenario(follow_spec(0), tmp_path)


@pytest.fixture(scope="session")
def completed_run(tmp_path_factory):
    """A full pipeline run over the planted follow scenario."""
    from campaignnet.pipeline import PipelineConfig, run_pipeline

    root = tmp_path_factory.mktemp("run")
    archive, lexicon = write_scenario(follow_spec(0), root)
    cfg = PipelineConfig(input=str(archive), lexicon=str(lexicon), granularity=BIWEEKLY, min_count=10)
    out = root / "artifacts"
    run_pipeline(cfg, out)
    return out, cfg


def read_jsonl(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
