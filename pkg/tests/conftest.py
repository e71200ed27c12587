"""Shared fixtures: a small hand-built KB snapshot and a synthetic corpus."""

import pytest

from enq import kb, synthgen

SNAPSHOT_FILES = {
    "titles_article_en.txt": [
        "Viking Age",
        "Cold War",
        "Taoism",
        "Edith Piaf",
    ],
    "titles_article_pt.txt": [
        "Taoismo",
        "Guerra Fria",
    ],
    "titles_article_es.txt": [
        "Vuelta Espana",
    ],
    "titles_disambiguation_en.txt": [
        "Primate",
        "Mice",
    ],
    "titles_disambiguation_pt.txt": [
        "Prado",
    ],
    "titles_disambiguation_es.txt": [
        "Palma",
    ],
    "titles_category_en.txt": [
        "Historical Continents",
    ],
    "titles_category_pt.txt": [
        "Reis Portugal",
    ],
    "titles_category_es.txt": [
        "Historia Militar",
    ],
    # Child TAB parent, with a cycle back into the chain.
    "graph_edges.tsv": [
        "chinese-philosophy\tphilosophy",
        "philosophy\thumanities",
        "humanities\tknowledge",
        "knowledge\tuniverse",
        "humanities\tphilosophy",
    ],
    "article_cats.tsv": [
        "Taoism\tchinese-philosophy",
        "Viking Age\tscandinavian-history",
    ],
    "ontology.tsv": [
        "Edith Piaf\tPerson",
        "Viking Age\tEvent,Period",
    ],
    "entities.tsv": [
        "Depeche Mode\t/music/",
        "Edith Piaf\t/people/",
    ],
    "lexicon.tsv": [
        "enfermeira\tjob",
        "banco\torganization,place",
    ],
    "months_pt.txt": ["janeiro", "junho", "dezembro"],
    "months_en.txt": ["january", "june", "december"],
    "months_es.txt": ["enero", "junio", "diciembre"],
    "places.txt": ["kazakhstan", "norway", "france", "lisbon",
                   "united kingdom"],
    "latin_suffixes.txt": ["atus", "arium", "icus", "idae", "ensis", "aurea"],
}

MANIFEST = [
    "# fixture snapshot",
    "titles.article.en = titles_article_en.txt",
    "titles.article.pt = titles_article_pt.txt",
    "titles.article.es = titles_article_es.txt",
    "titles.disambiguation.en = titles_disambiguation_en.txt",
    "titles.disambiguation.pt = titles_disambiguation_pt.txt",
    "titles.disambiguation.es = titles_disambiguation_es.txt",
    "titles.category.en = titles_category_en.txt",
    "titles.category.pt = titles_category_pt.txt",
    "titles.category.es = titles_category_es.txt",
    "graph.edges = graph_edges.tsv",
    "graph.article_cats = article_cats.tsv",
    "ontology = ontology.tsv",
    "entities = entities.tsv",
    "lexicon = lexicon.tsv",
    "gazetteer.months.pt = months_pt.txt",
    "gazetteer.months.en = months_en.txt",
    "gazetteer.months.es = months_es.txt",
    "gazetteer.places = places.txt",
    "gazetteer.latin_suffixes = latin_suffixes.txt",
]


def write_snapshot_dir(root, files=None, manifest=None):
    root.mkdir(parents=True, exist_ok=True)
    for name, lines in (files or SNAPSHOT_FILES).items():
        (root / name).write_text("\n".join(lines) + "\n", encoding="utf-8")
    (root / "snapshot.toml").write_text(
        "\n".join(manifest or MANIFEST) + "\n", encoding="utf-8")
    return root


@pytest.fixture(scope="session")
def snapshot_dir(tmp_path_factory):
    return write_snapshot_dir(tmp_path_factory.mktemp("kb") / "snapshot")


@pytest.fixture(scope="session")
def snapshot(snapshot_dir):
    return kb.load_snapshot(snapshot_dir)


@pytest.fixture(scope="session")
def synth_corpus(tmp_path_factory):
    """The separable 200+200 corpus used by the end-to-end checks."""
    out = tmp_path_factory.mktemp("synth")
    config = synthgen.SynthConfig(seed=7, n_encyclopedic=200, n_other=200,
                                  n_mixed=50)
    return config, synthgen.generate(config, out)
