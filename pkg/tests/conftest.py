import json

import pytest

from wikicausal.corpus import ConceptBinding, Document


def make_doc_dict(**overrides) -> dict:
    doc = {
        "id": "100",
        "title": "Flood of 2020",
        "url": "https://en.wikipedia.org/wiki/Flood_of_2020",
        "document_concept": {"qid": "Q1000", "labels": ["Flood of 2020"]},
        "text": "The flood of 2020 was severe.\n\nAftermath\n\nDamage was widespread.",
        "first_section": "The flood of 2020 was severe.",
        "categories": ["Floods"],
        "infobox": {"duration": "3 weeks"},
        "headings": ["Aftermath"],
        "event_concepts": ["Q8068"],
        "timelines": [],
    }
    doc.update(overrides)
    return doc


def make_document(**overrides) -> Document:
    defaults = dict(
        id="100",
        title="Flood of 2020",
        url="https://en.wikipedia.org/wiki/Flood_of_2020",
        document_concept=ConceptBinding("Q1000", ("Flood of 2020",)),
        text="The flood of 2020 was severe.",
        first_section="The flood of 2020 was severe.",
    )
    defaults.update(overrides)
    return Document(**defaults)


@pytest.fixture
def corpus_file(tmp_path):
    def write(lines):
        path = tmp_path / "corpus.jsonl"
        with open(path, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line if isinstance(line, str) else json.dumps(line))
                fh.write("\n")
        return path

    return write
