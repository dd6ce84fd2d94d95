"""Generates corpus100.jsonl, the 100-document round-trip/stats fixture.

Run from the repository root: python tests/data/make_corpus100.py
The file is checked in; regenerate only if the schema changes.
"""

import json
import random
from pathlib import Path

EVENT_POOL = ["Q8068", "Q7944", "Q12184", "Q198", "Q43059"]


def main():
    rng = random.Random(20240401)
    out = Path(__file__).parent / "corpus100.jsonl"
    with open(out, "w", encoding="utf-8") as fh:
        for i in range(1, 101):
            is_redirect = i % 10 == 7
            concept_index = i if i <= 85 else i - 85
            title = f"Event {i}"
            if is_redirect:
                text = ""
                first_section = ""
            else:
                lead = f"Event {i} was a notable occurrence. " * rng.randint(1, 4)
                body = f"Details of event {i} follow. " * rng.randint(2, 20)
                first_section = lead.strip()
                text = f"{first_section}\n\nAftermath\n\n{body.strip()}"
            count = rng.randint(0, 4)
            event_concepts = EVENT_POOL[:count]
            doc = {
                "id": f"p{i:03d}",
                "title": title,
                "url": f"https://en.wikipedia.org/wiki/Event_{i}",
                "document_concept": {
                    "qid": f"Q{5000 + concept_index}",
                    "labels": [title.lower(), f"the {title.lower()}"],
                },
                "text": text,
                "first_section": first_section,
                "categories": [f"Category {i % 7}"],
                "infobox": {"kind": "event"} if not is_redirect else {},
                "headings": ["Aftermath"] if not is_redirect else [],
                "event_concepts": event_concepts,
                "timelines": [f"step {j}" for j in range(i % 3)],
                "is_redirect": is_redirect,
            }
            fh.write(json.dumps(doc, ensure_ascii=False) + "\n")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
