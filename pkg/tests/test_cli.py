from pathlib import Path

from enq import cli
from enq.cli import main


def run_pipeline(workdir: Path, seed=7, enc=25, other=25, mixed=5,
                 workers=1, algo="forest"):
    """Full synth -> ingest -> label -> extract -> train -> evaluate run."""
    fixtures = workdir / "fixtures"
    out = workdir / "work"
    out.mkdir(exist_ok=True)
    steps = [
        ["--workers", str(workers), "synth", "--seed", str(seed),
         "--enc", str(enc), "--other", str(other), "--mixed", str(mixed),
         "--out", str(fixtures)],
        ["--workers", str(workers), "ingest", "--log", str(fixtures / "clicks.tsv"),
         "--out", str(out / "normalized.tsv")],
        ["--workers", str(workers), "label", "--in", str(out / "normalized.tsv"),
         "--tau-e", "1.0", "--tau-ne", "0.0", "--min-clicks", "3",
         "--seed", "42", "--out", str(out / "dataset.tsv")],
        ["--workers", str(workers), "extract", "--dataset", str(out / "dataset.tsv"),
         "--snapshot", str(fixtures / "snapshot"),
         "--out", str(out / "features.tsv")],
        ["--workers", str(workers), "train", "--features", str(out / "features.tsv"),
         "--dataset", str(out / "dataset.tsv"), "--algo", algo,
         "--trees", "10", "--seed", "42", "--out", str(out / "model.enq")],
        ["--workers", str(workers), "evaluate", "--features", str(out / "features.tsv"),
         "--dataset", str(out / "dataset.tsv"), "--algo", algo, "--folds", "5",
         "--trees", "10", "--seed", "42", "--out", str(out / "report.tsv")],
    ]
    for argv in steps:
        assert main(argv) == 0, argv
    return fixtures, out


class TestDispatch:
    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "exit codes" in capsys.readouterr().out

    def test_unknown_subcommand(self, capsys):
        assert main(["bogus"]) == 2
        assert capsys.readouterr().err

    def test_missing_required_flag(self, capsys):
        assert main(["ingest", "--log", "x"]) == 2

    def test_missing_file_exit_code(self, tmp_path, capsys):
        code = main(["ingest", "--log", str(tmp_path / "absent.tsv"),
                     "--out", str(tmp_path / "o.tsv")])
        assert code == 3
        assert "enq:" in capsys.readouterr().err


class TestPipeline:
    def test_full_pipeline(self, tmp_path, capsys):
        fixtures, out = run_pipeline(tmp_path)
        for name in ("normalized.tsv", "dataset.tsv", "dataset.tsv.unlabeled",
                     "features.tsv", "model.enq", "report.tsv"):
            assert (out / name).exists(), name
        assert "accuracy" in (out / "report.tsv").read_text()

    def test_predict_encyclopedic_title(self, tmp_path, capsys):
        fixtures, out = run_pipeline(tmp_path)
        # pick a positive training query straight from the dataset
        rows = (out / "dataset.tsv").read_text().splitlines()
        joined = next(r.split("\t")[1] for r in rows if r.startswith("E\t"))
        capsys.readouterr()
        code = main(["predict", "--model", str(out / "model.enq"),
                     "--query", joined, "--snapshot", str(fixtures / "snapshot")])
        assert code == 0
        assert capsys.readouterr().out.strip() in {"E", "N"}

    def test_rerun_overwrites_identically(self, tmp_path):
        _, out = run_pipeline(tmp_path)
        first = {p.name: p.read_bytes() for p in out.iterdir()}
        run_pipeline(tmp_path)
        second = {p.name: p.read_bytes() for p in out.iterdir()}
        assert first == second

    def test_ablate_and_baseline(self, tmp_path, capsys):
        fixtures, out = run_pipeline(tmp_path)
        code = main(["ablate", "--features", str(out / "features.tsv"),
                     "--dataset", str(out / "dataset.tsv"), "--algo", "rf",
                     "--folds", "5", "--trees", "5", "--seed", "42",
                     "--group", "term-patterns",
                     "--out", str(out / "ablation.tsv")])
        assert code == 0
        table = (out / "ablation.tsv").read_text().splitlines()
        assert len(table) == 1 and table[0].startswith("term-patterns\t")
        code = main(["baseline", "--serp", str(fixtures / "serp.tsv"),
                     "--dataset", str(out / "dataset.tsv"),
                     "--out", str(out / "baseline.tsv")])
        assert code == 0
        assert "accuracy" in (out / "baseline.tsv").read_text()

    def test_insufficient_negatives_exit_code(self, tmp_path, capsys):
        log = tmp_path / "log.tsv"
        lines = [f"enc{i} query\ten.wikipedia.org\t5" for i in range(5)]
        lines.append("lonely negative\tsite.com\t2")
        log.write_text("\n".join(lines) + "\n", encoding="utf-8")
        assert main(["ingest", "--log", str(log),
                     "--out", str(tmp_path / "n.tsv")]) == 0
        code = main(["label", "--in", str(tmp_path / "n.tsv"),
                     "--seed", "1", "--out", str(tmp_path / "d.tsv")])
        assert code == 4
        assert "negatives" in capsys.readouterr().err


class TestConfigFile:
    def test_config_supplies_defaults_flags_override(self, tmp_path, capsys):
        config = tmp_path / "enq.conf"
        config.write_text("seed = 9\nenc = 4\nother = 4\nmixed = 2\n",
                          encoding="utf-8")
        out_a = tmp_path / "a"
        assert main(["--config", str(config), "synth", "--out", str(out_a)]) == 0
        out_b = tmp_path / "b"
        assert main(["synth", "--seed", "9", "--enc", "4", "--other", "4",
                     "--mixed", "2", "--out", str(out_b)]) == 0
        files_a = {p.name: p.read_bytes() for p in sorted(out_a.rglob("*"))
                   if p.is_file()}
        files_b = {p.name: p.read_bytes() for p in sorted(out_b.rglob("*"))
                   if p.is_file()}
        assert files_a == files_b
        # a flag beats the config value
        out_c = tmp_path / "c"
        assert main(["--config", str(config), "synth", "--enc", "6",
                     "--out", str(out_c)]) == 0
        log_lines_a = (out_a / "clicks.tsv").read_text().splitlines()
        log_lines_c = (out_c / "clicks.tsv").read_text().splitlines()
        assert len(log_lines_c) > len(log_lines_a)

    def test_global_seed_fallback(self, tmp_path):
        out_a = tmp_path / "a"
        out_b = tmp_path / "b"
        assert main(["--seed", "11", "synth", "--enc", "4", "--other", "4",
                     "--mixed", "2", "--out", str(out_a)]) == 0
        assert main(["synth", "--seed", "11", "--enc", "4", "--other", "4",
                     "--mixed", "2", "--out", str(out_b)]) == 0
        assert (out_a / "clicks.tsv").read_bytes() == \
            (out_b / "clicks.tsv").read_bytes()
