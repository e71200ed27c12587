import io
import random

import pytest
from hypothesis import given, strategies as st

from enq.evaluation import (AblationRow, ConfusionMatrix, SerpRecord, ablate,
                            baseline_classify, cross_validate,
                            evaluate_baseline, kfold, metrics, read_serp,
                            strip_group, write_ablation, write_report)
from enq.features import FEATURE_GROUPS
from enq.labeler import LABEL_ENCYCLOPEDIC as E, LABEL_OTHER as N, LabeledQuery
from enq.model import PresenceForestClassifier
from enq.querylog import NormalizedQuery


class TestMetrics:
    def test_perfect(self):
        m = metrics(ConfusionMatrix(tp=1, fp=0, tn=1, fn=0))
        assert (m.accuracy, m.precision, m.recall, m.f1) == (1.0, 1.0, 1.0, 1.0)

    def test_never_positive(self):
        m = metrics(ConfusionMatrix(tp=0, fp=0, tn=10, fn=10))
        assert m.accuracy == 0.5
        assert m.precision == 0.0 and m.recall == 0.0 and m.f1 == 0.0

    def test_hand_worked(self):
        m = metrics(ConfusionMatrix(tp=3, fp=1, tn=4, fn=2))
        assert m.accuracy == pytest.approx(0.7)
        assert m.precision == pytest.approx(0.75)
        assert m.recall == pytest.approx(0.6)
        assert m.f1 == pytest.approx(2 * 0.75 * 0.6 / 1.35)

    def test_empty_matrix(self):
        with pytest.raises(ValueError):
            metrics(ConfusionMatrix())

    @given(st.integers(0, 50), st.integers(0, 50),
           st.integers(0, 50), st.integers(0, 50))
    def test_f1_between_precision_and_recall(self, tp, fp, tn, fn):
        if tp + fp + tn + fn == 0:
            return
        m = metrics(ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn))
        if m.precision + m.recall > 0:
            assert min(m.precision, m.recall) <= m.f1 + 1e-12
            assert m.f1 <= max(m.precision, m.recall) + 1e-12


class TestKfold:
    def test_even_division(self):
        splits = kfold(list(range(20)), k=10, seed=0)
        assert [len(test) for _, test in splits] == [2] * 10

    def test_remainder_distribution(self):
        splits = kfold(list(range(23)), k=10, seed=0)
        assert [len(test) for _, test in splits] == [3, 3, 3, 2, 2, 2, 2, 2, 2, 2]

    def test_partition(self):
        items = list(range(37))
        splits = kfold(items, k=10, seed=4)
        seen = []
        for train, test in splits:
            assert set(train) | set(test) == set(items)
            assert not set(train) & set(test)
            seen.extend(test)
        assert sorted(seen) == items

    def test_seed_reproducible(self):
        assert kfold(list(range(30)), k=5, seed=8) == \
            kfold(list(range(30)), k=5, seed=8)

    def test_different_seed_same_sizes(self):
        a = kfold(list(range(33)), k=10, seed=1)
        b = kfold(list(range(33)), k=10, seed=2)
        assert [len(t) for _, t in a] == [len(t) for _, t in b]
        assert a != b

    def test_too_small(self):
        with pytest.raises(ValueError):
            kfold([1, 2, 3], k=10, seed=0)


def toy_corpus(n=40, informative_group="wiki-graph"):
    """Labels decided solely by one group's feature; everything else noise."""
    marker = {"wiki-graph": "graph:signal", "entities": "fb:match",
              "directories": "dir:signal"}[informative_group]
    rng = random.Random(0)
    vectors, labels = [], []
    for i in range(n):
        base = {f"tp:len-{rng.randint(1, 3)}"}
        if i % 2:
            vectors.append(frozenset(base | {marker}))
            labels.append(E)
        else:
            vectors.append(frozenset(base))
            labels.append(N)
    return vectors, labels


class TestCrossValidate:
    def test_fold_matrices_cover_dataset(self):
        vectors, labels = toy_corpus()
        report = cross_validate(vectors, labels,
                                PresenceForestClassifier(n_trees=5, seed=1),
                                k=10, seed=3)
        assert sum(m.total for m in report.fold_matrices) == len(vectors)

    def test_separable_scores_high(self):
        vectors, labels = toy_corpus()
        report = cross_validate(vectors, labels,
                                PresenceForestClassifier(n_trees=5, seed=1),
                                k=10, seed=3)
        assert report.f1 == 1.0

    def test_seeded_rerun_identical(self):
        vectors, labels = toy_corpus()
        clf = PresenceForestClassifier(n_trees=5, seed=1)
        a = cross_validate(vectors, labels, clf, k=10, seed=3)
        b = cross_validate(vectors, labels, clf, k=10, seed=3)
        assert a == b

    def test_workers_do_not_change_result(self):
        vectors, labels = toy_corpus()
        clf = PresenceForestClassifier(n_trees=5, seed=1)
        serial = cross_validate(vectors, labels, clf, k=5, seed=3, workers=1)
        parallel = cross_validate(vectors, labels, clf, k=5, seed=3, workers=3)
        assert serial == parallel


class TestAblate:
    def run_pair(self, group):
        vectors, labels = toy_corpus()
        clf = PresenceForestClassifier(n_trees=5, seed=1)
        baseline = cross_validate(vectors, labels, clf, k=5, seed=2)
        return vectors, ablate(vectors, labels, group, clf, baseline,
                               k=5, seed=2)

    def test_absent_group_no_op(self):
        vectors, row = self.run_pair("ontology")
        assert row.affected_queries == 0
        assert (row.accuracy_diff, row.precision_diff, row.recall_diff,
                row.f1_diff) == (0.0, 0.0, 0.0, 0.0)

    def test_term_patterns_affect_all(self):
        vectors, row = self.run_pair("term-patterns")
        assert row.affected_queries == len(vectors)

    def test_removing_informative_group_hurts(self):
        vectors, row = self.run_pair("wiki-graph")
        assert row.affected_queries == len(vectors) // 2
        assert row.f1_diff < -0.2

    def test_unknown_group(self):
        vectors, labels = toy_corpus()
        clf = PresenceForestClassifier(n_trees=3, seed=1)
        baseline = cross_validate(vectors, labels, clf, k=5, seed=2)
        with pytest.raises(ValueError):
            ablate(vectors, labels, "nonsense", clf, baseline, k=5, seed=2)

    def test_removing_all_groups_empties_vectors(self):
        vectors, labels = toy_corpus()
        for group in FEATURE_GROUPS:
            vectors = strip_group(vectors, group)
        assert all(v == frozenset() for v in vectors)
        clf = PresenceForestClassifier(n_trees=5, seed=1)
        report = cross_validate(vectors, labels, clf, k=5, seed=2)
        # featureless data leaves only majority guessing
        assert report.accuracy <= 0.65


class TestBaseline:
    def test_subdomain_first(self):
        serp = SerpRecord(terms=("piaf",),
                          ranked_hosts=("en.wikipedia.org", "imdb.com"))
        assert baseline_classify(serp) == E

    def test_rank_one_only(self):
        serp = SerpRecord(terms=("piaf",),
                          ranked_hosts=("imdb.com", "en.wikipedia.org"))
        assert baseline_classify(serp) == N

    def test_bare_wikipedia(self):
        serp = SerpRecord(terms=("x",), ranked_hosts=("wikipedia.org",))
        assert baseline_classify(serp) == E

    def test_depends_only_on_first(self):
        rng = random.Random(9)
        hosts = ["a.com", "b.org", "en.wikipedia.org", "wikipedia.org", "c.net"]
        for _ in range(100):
            first = rng.choice(hosts)
            rest = tuple(rng.choice(hosts) for _ in range(rng.randint(0, 4)))
            serp = SerpRecord(terms=("q",), ranked_hosts=(first,) + rest)
            assert baseline_classify(serp) == \
                baseline_classify(SerpRecord(terms=("q",), ranked_hosts=(first,)))

    def test_evaluate_against_dataset(self):
        serps = [SerpRecord(terms=("a",), ranked_hosts=("pt.wikipedia.org",)),
                 SerpRecord(terms=("b",), ranked_hosts=("x.com",))]
        examples = [
            LabeledQuery(NormalizedQuery(terms=("a",)), E, 3),
            LabeledQuery(NormalizedQuery(terms=("b",)), N, 0),
            LabeledQuery(NormalizedQuery(terms=("c",)), N, 0),
        ]
        scores, matrix, missing = evaluate_baseline(serps, examples)
        assert missing == 1
        assert matrix.total == 2
        assert scores.accuracy == 1.0

    def test_serp_round_trip(self):
        text = "edith piaf\ten.wikipedia.org,imdb.com\nx\ty.com\n"
        records = list(read_serp(text.splitlines()))
        assert records[0].terms == ("edith", "piaf")
        assert records[0].ranked_hosts == ("en.wikipedia.org", "imdb.com")
        assert len(records) == 2


class TestReports:
    def test_report_lines_stable(self):
        vectors, labels = toy_corpus()
        clf = PresenceForestClassifier(n_trees=3, seed=1)
        report = cross_validate(vectors, labels, clf, k=5, seed=2)
        a, b = io.StringIO(), io.StringIO()
        write_report(report, a, extra={"algo": "forest"})
        write_report(report, b, extra={"algo": "forest"})
        assert a.getvalue() == b.getvalue()
        assert "accuracy\t" in a.getvalue()

    def test_ablation_tsv_shape(self):
        row = AblationRow("wiki-graph", 12, -0.1, -0.2, 0.05, -0.08)
        buffer = io.StringIO()
        write_ablation([row], buffer)
        fields = buffer.getvalue().strip().split("\t")
        assert fields[0] == "wiki-graph"
        assert fields[1] == "12"
        assert len(fields) == 6
