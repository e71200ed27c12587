from pathlib import Path

import pytest

from enq import kb, labeler, querylog, synthgen
from enq.synthgen import SynthConfig, generate


def read_bytes_tree(root: Path) -> dict[str, bytes]:
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


class TestGenerate:
    def test_query_counts_and_ratios(self, tmp_path):
        config = SynthConfig(seed=3, n_encyclopedic=10, n_other=10, n_mixed=5)
        paths = generate(config, tmp_path / "out")
        with open(paths["log"], encoding="utf-8") as handle:
            records, malformed = querylog.parse_log(handle)
        assert malformed == 0
        rows = [(querylog.normalize(r.query), r.hostname, r.count)
                for r in records]
        profiles = labeler.aggregate(rows)
        ratios = [labeler.ratio(p) for p in profiles.values()]
        # extras on top of the requested 25 queries
        assert len(profiles) >= 25
        assert sum(1 for r in ratios if r == 1.0) >= 10
        assert sum(1 for r in ratios if r == 0.0) >= 10
        assert sum(1 for r in ratios if 0.0 < r < 1.0) == 5

    def test_seed_repeatable_byte_identical(self, tmp_path):
        config = SynthConfig(seed=12, n_encyclopedic=15, n_other=15, n_mixed=4)
        generate(config, tmp_path / "a")
        generate(config, tmp_path / "b")
        assert read_bytes_tree(tmp_path / "a") == read_bytes_tree(tmp_path / "b")

    def test_snapshot_loads(self, tmp_path):
        config = SynthConfig(seed=5, n_encyclopedic=12, n_other=12, n_mixed=3)
        paths = generate(config, tmp_path / "out")
        snapshot = kb.load_snapshot(paths["snapshot"])
        assert len(snapshot.title_lists) == 9
        assert snapshot.gazetteer.latin_suffixes

    def test_mixed_queries_fall_between_thresholds(self, tmp_path):
        config = SynthConfig(seed=8, n_encyclopedic=8, n_other=8, n_mixed=6)
        paths = generate(config, tmp_path / "out")
        with open(paths["log"], encoding="utf-8") as handle:
            records, _ = querylog.parse_log(handle)
        rows = [(querylog.normalize(r.query), r.hostname, r.count)
                for r in records]
        profiles = labeler.aggregate(rows)
        _, _, unlabeled = labeler.split_pools(profiles, labeler.LabelingConfig())
        assert len(unlabeled) == 6

    def test_balanced_dataset_possible(self, tmp_path):
        config = SynthConfig(seed=2, n_encyclopedic=30, n_other=30, n_mixed=5)
        paths = generate(config, tmp_path / "out")
        with open(paths["log"], encoding="utf-8") as handle:
            records, _ = querylog.parse_log(handle)
        rows = [(querylog.normalize(r.query), r.hostname, r.count)
                for r in records]
        profiles = labeler.aggregate(rows)
        dataset = labeler.build_dataset(profiles, labeler.LabelingConfig(seed=1))
        positives = [ex for ex in dataset
                     if ex.label == labeler.LABEL_ENCYCLOPEDIC]
        assert len(dataset) == 60
        assert len(positives) == 30
        assert all(ex.wiki_clicks >= 3 for ex in positives)

    def test_serp_rows_cover_queries(self, tmp_path):
        config = SynthConfig(seed=4, n_encyclopedic=6, n_other=6, n_mixed=2)
        paths = generate(config, tmp_path / "out")
        from enq.evaluation import read_serp
        with open(paths["serp"], encoding="utf-8") as handle:
            serps = list(read_serp(handle))
        assert len(serps) >= 14
        assert all(s.ranked_hosts for s in serps)

    def test_config_validated(self):
        with pytest.raises(ValueError):
            SynthConfig(n_encyclopedic=-1)
        with pytest.raises(ValueError):
            SynthConfig(kb_vocab_size=10)
