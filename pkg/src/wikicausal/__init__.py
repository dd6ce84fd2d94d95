"""Causal knowledge graph construction and evaluation toolkit.

Builds a JSONL corpus of event-related Wikipedia articles bound to Wikidata
concepts, extracts candidate cause-effect pairs from it, links them to
concepts, and evaluates the resulting graphs: recall against a Base KG of
existing Wikidata causal relations, precision by majority-voted yes/no
probing of a generative model.
"""

__version__ = "0.1.0"
