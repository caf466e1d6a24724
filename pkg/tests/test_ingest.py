import json
from datetime import date, datetime, timedelta, timezone

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from campaignnet.ingest import (ALL_AUTHORS, BIWEEKLY, MONTHLY, IngestError, TimeWindow, TokenizerConfig, bucket,
                                drop_duplicate_texts, load_documents, parse_timestamp, tokenize, window_for,
                                window_grid, write_documents)

from conftest import doc


class TestTokenize:
    @pytest.mark.parametrize("text,expected", [
        ("Make America Great Again! #MAGA", ["make", "america", "great", "again", "#maga"]),
        ("y'all check https://t.co/x", ["y'all", "check"]),
        ("hello--world", ["hello", "world"]),
        ("\u2014Hillary", ["-hillary"]),
        ("a#b", ["a", "#b"]),
        ("Thanks @JohnDoe, see www.example.com", ["thanks", "@johndoe", "see"]),
        ("2-party system ’tis", ["2-party", "system", "tis"]),
        ("don’t", ["don't"]),
        ("...!!!", []),
    ])
    def test_examples(self, text, expected):
        assert tokenize(text) == expected

    def test_mentions_can_be_dropped(self):
        assert tokenize("hi @bob #x", TokenizerConfig(keep_mentions=False)) == ["hi", "#x"]

    def test_hashtag_prefix_can_be_stripped(self):
        assert tokenize("#Vote now", TokenizerConfig(keep_hashtags=False)) == ["vote", "now"]

    @settings(max_examples=200)
    @given(st.text(alphabet="abcXYZ019 #@-'.,!\u2014’_", max_size=40))
    def test_idempotent(self, text):
        once = tokenize(text)
        assert tokenize(" ".join(once)) == once
        assert all(t == t.lower() and t for t in once)


class TestTimestamps:
    @pytest.mark.parametrize("raw,expected", [
        ("2015-08-02T10:00:00Z", datetime(2015, 8, 2, 10, tzinfo=timezone.utc)),
        ("2015-08-02T12:00:00+02:00", datetime(2015, 8, 2, 10, tzinfo=timezone.utc)),
        ("2015-08-02T10:00:00", datetime(2015, 8, 2, 10, tzinfo=timezone.utc)),
        ("2015-08-02T10:00:00.750Z", datetime(2015, 8, 2, 10, tzinfo=timezone.utc)),
    ])
    def test_parse(self, raw, expected):
        assert parse_timestamp(raw) == expected

    def test_bad_value(self):
        with pytest.raises(ValueError):
            parse_timestamp("yesterday")


class TestLoad:
    def write_jsonl(self, path, rows):
        path.write_text("\n".join(r if isinstance(r, str) else json.dumps(r) for r in rows) + "\n", encoding="utf-8")
        return path

    def test_jsonl_skips_and_counts_bad_rows(self, tmp_path):
        good = {"id": "1", "author": "A", "timestamp": "2015-01-05T00:00:00Z", "text": "hi"}
        path = self.write_jsonl(tmp_path / "a.jsonl", [
            good,
            {"id": "2", "author": "A", "timestamp": "not a date", "text": "x"},
            {"id": "3", "author": "A", "text": "no timestamp"},
            "{broken json",
            dict(good, text="duplicate id"),
        ])
        result = load_documents(path)
        assert [d.id for d in result.documents] == ["1"]
        assert result.skipped == 4

    def test_strict_raises_with_line(self, tmp_path):
        path = self.write_jsonl(tmp_path / "a.jsonl", ['{"id": "1"}'])
        with pytest.raises(IngestError, match=":1:"):
            load_documents(path, strict=True)

    def test_csv(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text('id,author,timestamp,text\n1,A,2015-01-05T00:00:00Z,"hello, ""world"""\n', encoding="utf-8")
        (d,) = load_documents(path, "csv").documents
        assert d.text == 'hello, "world"'

    def test_csv_missing_column(self, tmp_path):
        path = tmp_path / "a.csv"
        path.write_text("id,author,text\n1,A,x\n", encoding="utf-8")
        with pytest.raises(IngestError):
            load_documents(path, "csv")

    def test_missing_file(self, tmp_path):
        with pytest.raises(IngestError):
            load_documents(tmp_path / "nope.jsonl")

    def test_write_round_trip(self, tmp_path):
        docs = [doc("1", "A", "2015-01-05T08:30:00", "hi there"), doc("2", "B", "2015-02-01T00:00:00", "yo")]
        write_documents(docs, tmp_path / "out.jsonl")
        assert load_documents(tmp_path / "out.jsonl").documents == docs

    def test_drop_duplicate_texts_keeps_first(self):
        docs = [doc("1", "A", "2015-01-05T00:00:00", "same"), doc("2", "B", "2015-01-06T00:00:00", "same"),
                doc("3", "B", "2015-01-07T00:00:00", "other")]
        assert [d.id for d in drop_duplicate_texts(docs)] == ["1", "3"]


class TestWindows:
    def test_biweekly_grid_matches_anchor(self):
        w = window_for(date(2015, 8, 5), BIWEEKLY)
        assert (w.start, w.end, w.label) == (date(2015, 8, 2), date(2015, 8, 16), "2015-08-02")

    def test_biweekly_before_anchor(self):
        assert window_for(date(2014, 12, 30), BIWEEKLY).start == date(2014, 12, 21)

    def test_monthly_label(self):
        w = window_for(date(2016, 12, 31), MONTHLY)
        assert (w.label, w.end) == ("2016-12", date(2017, 1, 1))

    def test_grid_is_contiguous(self):
        grid = window_grid(date(2015, 1, 20), date(2015, 6, 1), MONTHLY)
        assert [w.label for w in grid] == ["2015-01", "2015-02", "2015-03", "2015-04", "2015-05", "2015-06"]
        assert all(a.end == b.start for a, b in zip(grid, grid[1:]))

    def test_window_validation(self):
        with pytest.raises(ValueError):
            TimeWindow(date(2015, 2, 1), date(2015, 1, 1))


class TestBucket:
    def test_empty_windows_are_kept(self):
        docs = [doc("1", "A", "2015-01-10T00:00:00", "a"), doc("2", "A", "2015-03-10T00:00:00", "b")]
        buckets = bucket(docs, MONTHLY)
        assert [b.label for b in buckets] == ["2015-01", "2015-02", "2015-03"]
        assert [b.is_empty for b in buckets] == [False, True, False]

    def test_per_author_slots_sorted(self):
        docs = [doc("1", "B", "2015-01-10T00:00:00", "a"), doc("2", "A", "2015-02-10T00:00:00", "b")]
        labels = [b.label for b in bucket(docs, MONTHLY, per_author=True)]
        assert labels == ["A:2015-01", "B:2015-01", "A:2015-02", "B:2015-02"]

    def test_biweekly_requires_anchor(self):
        with pytest.raises(ValueError):
            bucket([doc("1", "A", "2015-01-10T00:00:00", "a")], BIWEEKLY)

    def test_range_excludes_and_extends(self):
        docs = [doc("1", "A", "2014-12-31T23:59:59", "x"), doc("2", "A", "2015-01-10T00:00:00", "y")]
        buckets = bucket(docs, MONTHLY, range_start=date(2015, 1, 1), range_end=date(2015, 2, 28))
        assert [(b.label, len(b.documents)) for b in buckets] == [("2015-01", 1), ("2015-02", 0)]

    def test_precomputed_tokens(self):
        d = doc("1", "A", "2015-01-10T00:00:00", "ignored text")
        (b,) = bucket([d], MONTHLY, tokens={"1": ["given"]})
        assert b.token_lists == [["given"]] and b.token_total == 1

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 400), st.sampled_from("ABC")), min_size=1, max_size=40),
           st.sampled_from([MONTHLY, BIWEEKLY]), st.booleans())
    def test_every_document_lands_in_exactly_one_bucket(self, specs, granularity, per_author):
        docs = [doc(str(i), a, f"{date(2015, 1, 1) + timedelta(days=day)}T12:00:00", "t")
                for i, (day, a) in enumerate(specs)]
        buckets = bucket(docs, granularity, date(2015, 1, 4), per_author)
        placed = [d.id for b in buckets for d in b.documents]
        assert sorted(placed) == sorted(d.id for d in docs)
        for b in buckets:
            assert all(b.window.contains(d.timestamp) for d in b.documents)
            assert b.author == ALL_AUTHORS or all(d.author == b.author for d in b.documents)
        keys = [(b.window.start, b.author) for b in buckets]
        assert keys == sorted(keys)
