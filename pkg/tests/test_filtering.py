"""Filtering tests: rule table, BM25 retrieval, vote logic, full passes."""

import json
import math
import random
import re
import threading

import pytest

from conftest import make_instance
from corgi.filtering import (
    BM25_B,
    BM25_K1,
    DEFAULT_PASSAGES_PER_QUESTION,
    DEFAULT_REQUIRED_YES,
    EXCLUSION_KEYWORDS,
    MIN_WORDS,
    WINDOW_WORDS,
    Bm25Retriever,
    CorpusDocument,
    FilterConfig,
    FilterError,
    FilterStats,
    decide_votes,
    load_corpus,
    retrieval_filter,
    rule_filter,
    run_filters,
    tokenize,
)
from corgi.model import (
    FILTER_DROPPED_RETRIEVAL,
    FILTER_KEPT,
    FILTER_UNFILTERED,
    make_dataset,
)
from corgi.teacher import REFUSAL_TEXT, TeacherError

ORACLE_ROUNDS = 50

CLEAN_ANSWER = "Gravity holds the orbit closed."

COMET_QUESTION = (
    "Suppose you are studying the solar system, and you observe that a comet "
    "is moving in a highly elliptical orbit around the Sun. Construct a "
    "cause-and-effect model to explain the factors that could have "
    "influenced the comet's orbit."
)

KEPLER_TEXT = (
    "Kepler's laws of planetary motion describe the orbits of objects about "
    "the Sun. Following Kepler's laws, each object travels along an ellipse "
    "with the Sun at one focus. Objects closer to the Sun travel more "
    "quickly because they are more affected by the Sun's gravity. On an "
    "elliptical orbit, a body's distance from the Sun varies over the "
    "course of its year, and a comet follows the same rules."
)

# Each row: (text, expected reason when placed in the answer field).
RULE_TABLE = (
    ("An AI assistant would decline.", "answer_keyword:ai assistant"),
    ("As an AI language model, I think so.", "answer_keyword:ai language model"),
    ("Sorry, that is out of scope.", "answer_keyword:sorry, "),
    ("sorry but I must decline here", "answer_keyword:sorry but "),
    ("Sorry for the confusion earlier today.", "answer_keyword:sorry for the confusion "),
    ("I'm unable to verify that claim.", "answer_keyword:i'm unable to "),
    ("Without further data, nothing follows.", "answer_keyword:without further "),
    ("We apologize for the oversight.", "answer_keyword:apologize"),
    ("I cannot answer that question.", "answer_keyword:i cannot"),
    ("Only two", "answer_too_short"),
    ("Exactly three words", None),
    (CLEAN_ANSWER, None),
    ("He said sorry. Then he left quietly.", None),
    ("Sorry for the confusion.", None),
    ("I'm unable to.", None),
)


def instance_with(question="What keeps an orbit closed?", answer=CLEAN_ANSWER, **kw):
    return make_instance("Alpha", "a1", 5, question=question, answer=answer, **kw)


def one_window_corpus():
    return [
        CorpusDocument("solar.txt", "Solar System", KEPLER_TEXT),
        CorpusDocument("cells.txt", "Cell Biology", "The nucleus stores DNA inside the membrane."),
        CorpusDocument("rome.txt", "Roman History", "The senate governed the republic by decree."),
    ]


class SequenceJudgeClient:
    """Pops one scripted verdict per judge call, recording each call."""

    model_name = "sequence-judge"
    max_concurrency = 1

    def __init__(self, verdicts):
        self.verdicts = list(verdicts)
        self.calls = []

    def judge_relevance(self, question, passage_title, passage):
        self.calls.append((question, passage_title, passage))
        verdict = self.verdicts.pop(0)
        if isinstance(verdict, Exception):
            raise verdict
        return verdict


class RuleJudgeClient:
    """Pure judge: yes iff the question contains the word "keep"."""

    model_name = "rule-judge"
    max_concurrency = 2

    def __init__(self, fail_marker=None):
        self.fail_marker = fail_marker
        self.calls = []
        self._lock = threading.Lock()

    def judge_relevance(self, question, passage_title, passage):
        with self._lock:
            self.calls.append(question)
        if self.fail_marker is not None and self.fail_marker in question:
            raise TeacherError("scripted judge outage")
        return "keep" in question


class TestRuleFilter:
    def test_truth_table(self):
        for text, expected in RULE_TABLE:
            reason = rule_filter(instance_with(answer=text))
            assert reason == expected, f"answer {text!r}"

    def test_keywords_apply_to_questions_too(self):
        reason = rule_filter(instance_with(question="Sorry, what was the question?"))
        assert reason == "question_keyword:sorry, "

    def test_question_too_short(self):
        assert rule_filter(instance_with(question="Why though?")) == "question_too_short"

    def test_question_is_checked_before_answer(self):
        bad_both = instance_with(question="Too short", answer="I cannot answer that.")
        assert rule_filter(bad_both) == "question_too_short"

    def test_matching_is_case_insensitive(self):
        assert rule_filter(instance_with(answer="I CANNOT imagine why not.")) is not None

    def test_refusal_boilerplate_is_dropped(self):
        reason = rule_filter(instance_with(answer=REFUSAL_TEXT))
        assert reason == "answer_keyword:ai language model"

    def test_keyword_constants(self):
        assert len(EXCLUSION_KEYWORDS) == 9
        assert MIN_WORDS == 3
        assert sum(1 for kw in EXCLUSION_KEYWORDS if kw.endswith(" ")) == 5


class TestTokenize:
    def test_lowercase_alphanumeric_runs(self):
        assert tokenize("Kepler's 3rd Law—ellipses!") == [
            "kepler", "s", "3rd", "law", "ellipses",
        ]

    def test_empty_text(self):
        assert tokenize("...") == []


class TestWindows:
    def test_non_overlapping_word_windows(self):
        words = [f"w{i}" for i in range(600)]
        retriever = Bm25Retriever(
            [CorpusDocument("d.txt", "Doc", " ".join(words))]
        )
        assert [len(p.text.split()) for p in retriever.windows] == [256, 256, 88]
        assert [p.window_index for p in retriever.windows] == [0, 1, 2]
        rejoined = " ".join(p.text for p in retriever.windows).split()
        assert rejoined == words

    def test_custom_window_size(self):
        doc = CorpusDocument("d.txt", "Doc", " ".join(str(i) for i in range(12)))
        retriever = Bm25Retriever([doc], window_words=5)
        assert [len(p.text.split()) for p in retriever.windows] == [5, 5, 2]

    def test_blank_documents_produce_no_windows(self):
        docs = [
            CorpusDocument("a.txt", "Empty", "   "),
            CorpusDocument("b.txt", "Tiny", "one word here"),
        ]
        retriever = Bm25Retriever(docs, window_words=5)
        assert len(retriever.windows) == 1
        assert retriever.windows[0].doc_id == "b.txt"

    def test_all_blank_corpus_is_an_error(self):
        with pytest.raises(FilterError):
            Bm25Retriever([CorpusDocument("a.txt", "Empty", "")])

    def test_window_words_must_be_positive(self):
        with pytest.raises(FilterError):
            Bm25Retriever(one_window_corpus(), window_words=0)


def naive_tokenize(text):
    return re.findall(r"[a-z0-9]+", text.lower())


def naive_top_windows(documents, question, k, window_words):
    """Exhaustive BM25 scorer written separately from the library."""
    windows = []
    for doc in documents:
        words = doc.text.split()
        for number, start in enumerate(range(0, len(words), window_words)):
            chunk = words[start : start + window_words]
            if chunk:
                tokens = naive_tokenize(" ".join(chunk))
                windows.append((doc.doc_id, number, tokens))
    total = len(windows)
    avgdl = sum(len(tokens) for _, _, tokens in windows) / total
    df = {}
    for _, _, tokens in windows:
        for term in set(tokens):
            df[term] = df.get(term, 0) + 1
    scored = []
    for position, (doc_id, number, tokens) in enumerate(windows):
        score = 0.0
        for term in naive_tokenize(question):
            tf = tokens.count(term)
            if tf == 0 or term not in df:
                continue
            idf = math.log(1.0 + (total - df[term] + 0.5) / (df[term] + 0.5))
            norm = BM25_K1 * (1.0 - BM25_B + BM25_B * len(tokens) / avgdl)
            score += idf * tf * (BM25_K1 + 1.0) / (tf + norm)
        scored.append((score, position, doc_id, number))
    scored.sort(key=lambda row: (-row[0], row[1]))
    return scored[: min(k, total)]


class TestBm25:
    def test_single_term_score_closed_form(self):
        doc = CorpusDocument("d.txt", "Doc", "alpha beta gamma delta epsilon zeta")
        retriever = Bm25Retriever([doc], window_words=3)
        passages = retriever.retrieve("alpha", k=2)
        assert passages[0].window_index == 0
        assert math.isclose(passages[0].score, math.log(2.0), rel_tol=1e-12)
        assert passages[1].score == 0.0

    def test_matches_the_exhaustive_oracle(self):
        vocab = ["sun", "moon", "star", "comet", "orbit", "dust", "gas", "ring"]
        rng = random.Random(0xB25)
        for round_no in range(ORACLE_ROUNDS):
            documents = []
            for d in range(rng.randrange(1, 5)):
                length = rng.randrange(1, 30) if d == 0 else rng.randrange(0, 30)
                text = " ".join(rng.choice(vocab) for _ in range(length))
                documents.append(CorpusDocument(f"doc{d}.txt", f"Doc {d}", text))
            window_words = rng.randrange(3, 8)
            question = " ".join(
                rng.choice(vocab) for _ in range(rng.randrange(1, 6))
            )
            k = rng.randrange(1, 6)
            retriever = Bm25Retriever(documents, window_words=window_words)
            got = retriever.retrieve(question, k=k)
            want = naive_top_windows(documents, question, k, window_words)
            label = f"round {round_no}"
            assert [(p.doc_id, p.window_index) for p in got] == [
                (doc_id, number) for _, _, doc_id, number in want
            ], label
            for passage, (score, _, _, _) in zip(got, want):
                assert math.isclose(passage.score, score, abs_tol=1e-12), label

    def test_ties_break_by_window_order(self):
        docs = [
            CorpusDocument("b.txt", "B", "comet dust"),
            CorpusDocument("a.txt", "A", "comet dust"),
        ]
        passages = Bm25Retriever(docs).retrieve("comet", k=2)
        assert [p.doc_id for p in passages] == ["b.txt", "a.txt"]

    def test_unmatched_query_returns_zero_scores_in_order(self):
        passages = Bm25Retriever(one_window_corpus()).retrieve("xylophone", k=3)
        assert [p.score for p in passages] == [0.0, 0.0, 0.0]
        assert [p.doc_id for p in passages] == ["solar.txt", "cells.txt", "rome.txt"]

    def test_k_is_validated_and_clamped(self):
        retriever = Bm25Retriever(one_window_corpus())
        with pytest.raises(FilterError):
            retriever.retrieve("comet", k=0)
        assert len(retriever.retrieve("comet", k=50)) == 3

    def test_comet_question_retrieves_the_kepler_window(self):
        passages = Bm25Retriever(one_window_corpus()).retrieve(COMET_QUESTION, k=1)
        assert passages[0].doc_id == "solar.txt"
        assert passages[0].title == "Solar System"
        assert "Kepler" in passages[0].text

    def test_default_constants(self):
        assert (BM25_K1, BM25_B) == (1.2, 0.75)
        assert WINDOW_WORDS == 256
        assert DEFAULT_PASSAGES_PER_QUESTION == 3
        assert DEFAULT_REQUIRED_YES == 1


class TestLoadCorpus:
    def test_directory_of_text_files(self, tmp_path):
        (tmp_path / "b.txt").write_text("second doc", encoding="utf-8")
        (tmp_path / "a.txt").write_text("first doc", encoding="utf-8")
        (tmp_path / "notes.md").write_text("ignored", encoding="utf-8")
        documents = load_corpus(str(tmp_path))
        assert [(d.doc_id, d.title, d.text) for d in documents] == [
            ("a.txt", "a", "first doc"),
            ("b.txt", "b", "second doc"),
        ]

    def test_jsonl_file(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        lines = [
            json.dumps({"title": "Solar System", "text": "kepler orbit"}),
            "",
            json.dumps({"title": "Cells", "text": "nucleus membrane"}),
        ]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        documents = load_corpus(str(path))
        assert [d.title for d in documents] == ["Solar System", "Cells"]
        assert documents[1].doc_id == f"{path}:3"

    def test_invalid_json_line(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"title": "A", "text": "x"}\n{broken\n', encoding="utf-8")
        with pytest.raises(FilterError) as err:
            load_corpus(str(path))
        assert ":2:" in str(err.value)

    def test_missing_fields(self, tmp_path):
        path = tmp_path / "corpus.jsonl"
        path.write_text('{"title": "A"}\n', encoding="utf-8")
        with pytest.raises(FilterError) as err:
            load_corpus(str(path))
        assert "title and text" in str(err.value)

    def test_missing_path(self, tmp_path):
        with pytest.raises(FilterError):
            load_corpus(str(tmp_path / "absent"))

    def test_empty_directory(self, tmp_path):
        with pytest.raises(FilterError):
            load_corpus(str(tmp_path))


class TestDecideVotes:
    def test_vote_table(self):
        table = (
            ([True, True, True], True, True),
            ([True, True, False], True, False),
            ([True, False, False], True, False),
            ([False, True, False], True, False),
            ([False, False, True], True, False),
            ([False, False, False], False, False),
            ([True], True, False),
            ([], False, False),
        )
        for votes, want_one, want_three in table:
            assert decide_votes(votes, 1) is want_one, votes
            assert decide_votes(votes, 3) is want_three, votes


class TestRetrievalFilter:
    def test_single_yes_keeps_and_records_all_votes(self):
        retriever = Bm25Retriever(one_window_corpus())
        client = SequenceJudgeClient([False, True, False])
        item = instance_with(question=COMET_QUESTION)
        judged = retrieval_filter(item, retriever, client)
        assert judged.filter_status == FILTER_KEPT
        assert judged.relevance_votes == (False, True, False)
        assert len(client.calls) == 3

    def test_judges_see_the_retrieved_passages(self):
        retriever = Bm25Retriever(one_window_corpus())
        client = SequenceJudgeClient([True, True, True])
        item = instance_with(question=COMET_QUESTION)
        retrieval_filter(item, retriever, client)
        passages = retriever.retrieve(COMET_QUESTION, k=3)
        assert client.calls == [
            (COMET_QUESTION, p.title, p.text) for p in passages
        ]

    def test_all_no_drops(self):
        retriever = Bm25Retriever(one_window_corpus())
        client = SequenceJudgeClient([False, False, False])
        judged = retrieval_filter(instance_with(), retriever, client)
        assert judged.filter_status == FILTER_DROPPED_RETRIEVAL
        assert judged.relevance_votes == (False, False, False)

    def test_required_yes_three(self):
        retriever = Bm25Retriever(one_window_corpus())
        client = SequenceJudgeClient([True, True, False])
        judged = retrieval_filter(
            instance_with(), retriever, client, required_yes=3
        )
        assert judged.filter_status == FILTER_DROPPED_RETRIEVAL

    def test_passages_per_question(self):
        retriever = Bm25Retriever(one_window_corpus())
        client = SequenceJudgeClient([False, True])
        judged = retrieval_filter(
            instance_with(), retriever, client, passages_per_question=2
        )
        assert judged.relevance_votes == (False, True)
        assert len(client.calls) == 2

    def test_judge_failure_leaves_instance_unfiltered(self):
        retriever = Bm25Retriever(one_window_corpus())
        client = SequenceJudgeClient([True, TeacherError("down"), True])
        judged = retrieval_filter(instance_with(), retriever, client)
        assert judged.filter_status == FILTER_UNFILTERED
        assert judged.relevance_votes is None


class TestRunFilters:
    @staticmethod
    def build_dataset():
        items = [
            instance_with(question="Why keep comet records current?"),
            instance_with(question="Why keep orbit charts?", answer="We apologize deeply."),
            instance_with(question="Why keep star maps?", answer="Too short"),
            instance_with(question="Why toss the appendix away?"),
            instance_with(question="Why keep the nucleus model?"),
        ]
        return make_dataset(items, run_id="filter-run")

    def test_full_pass_accounting(self):
        dataset = self.build_dataset()
        client = RuleJudgeClient()
        filtered, stats = run_filters(
            dataset, Bm25Retriever(one_window_corpus()), client
        )
        assert stats.input_count == 5
        assert stats.rule_dropped == 2
        assert stats.retrieval_dropped == 1
        assert stats.kept == 2
        assert stats.retrieval_failures == 0
        assert stats.rule_drop_reasons == {
            "answer_keyword:apologize": 1,
            "answer_too_short": 1,
        }
        assert stats.input_count == (
            stats.rule_dropped + stats.retrieval_dropped + stats.kept
        )
        questions = [item.question for item in filtered.items]
        assert questions == [
            "Why keep comet records current?",
            "Why keep the nucleus model?",
        ]
        assert all(item.filter_status == FILTER_KEPT for item in filtered.items)
        assert all(len(item.relevance_votes) == 3 for item in filtered.items)
        assert filtered.manifest["run_id"] == "filter-run"
        assert filtered.manifest["filter_stats"] == stats.to_dict()

    def test_rule_dropped_instances_are_never_judged(self):
        dataset = self.build_dataset()
        client = RuleJudgeClient()
        run_filters(dataset, Bm25Retriever(one_window_corpus()), client)
        judged_questions = set(client.calls)
        assert "Why keep orbit charts?" not in judged_questions
        assert "Why keep star maps?" not in judged_questions

    def test_refusal_answers_short_circuit(self):
        items = [instance_with(question="Why keep this one?", answer=REFUSAL_TEXT)]
        client = RuleJudgeClient()
        filtered, stats = run_filters(
            make_dataset(items, run_id="r"), Bm25Retriever(one_window_corpus()), client
        )
        assert stats.rule_dropped == 1 and stats.kept == 0
        assert filtered.items == ()
        assert client.calls == []

    def test_systematic_failure_aborts(self):
        dataset = self.build_dataset()
        client = RuleJudgeClient(fail_marker="keep")
        with pytest.raises(FilterError) as err:
            run_filters(dataset, Bm25Retriever(one_window_corpus()), client)
        assert "systematic" in str(err.value)

    def test_failures_at_the_threshold_are_tolerated(self):
        items = [
            instance_with(question="Why keep comet records current?"),
            instance_with(question="Why keep orbit charts updated?"),
            instance_with(question="Why keep star maps fresh?"),
            instance_with(question="Why keep broken things too?"),
        ]
        client = RuleJudgeClient(fail_marker="broken")
        filtered, stats = run_filters(
            make_dataset(items, run_id="r"),
            Bm25Retriever(one_window_corpus()),
            client,
            FilterConfig(max_failure_fraction=0.25),
        )
        assert stats.retrieval_failures == 1
        assert stats.kept == 4
        statuses = [item.filter_status for item in filtered.items]
        assert statuses.count(FILTER_UNFILTERED) == 1
        assert statuses.count(FILTER_KEPT) == 3

    def test_empty_dataset(self):
        filtered, stats = run_filters(
            make_dataset([], run_id="r"),
            Bm25Retriever(one_window_corpus()),
            RuleJudgeClient(),
        )
        assert filtered.items == ()
        assert stats == FilterStats(0, 0, 0, 0, {}, 0)

    def test_worker_count_does_not_change_the_output(self):
        dataset = self.build_dataset()
        retriever = Bm25Retriever(one_window_corpus())
        serial, _ = run_filters(
            dataset, retriever, RuleJudgeClient(), FilterConfig(max_workers=1)
        )
        threaded, _ = run_filters(
            dataset, retriever, RuleJudgeClient(), FilterConfig(max_workers=4)
        )
        assert serial.items == threaded.items
        assert serial.manifest == threaded.manifest
