import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wikicausal.kg import (
    CausalEdge,
    CausalKG,
    ConceptInventory,
    ConceptRef,
    Endpoint,
    KgError,
    Provenance,
    build_base_kg,
    kg_from_dict,
    kg_to_dict,
    linked,
    merge_kgs,
    partition_edges,
    read_relations_tsv,
    unlinked,
)


def inventory(class_qids=("Q1", "Q2", "Q3"), instance_qids=("Q10", "Q11")):
    refs = [ConceptRef(q, "class", (f"label {q}",)) for q in class_qids]
    refs += [ConceptRef(q, "instance", (f"label {q}",)) for q in instance_qids]
    return ConceptInventory(refs)


class TestEndpointsAndEdges:
    def test_endpoint_needs_exactly_one_side(self):
        with pytest.raises(KgError):
            Endpoint()
        with pytest.raises(KgError):
            Endpoint(qid="Q1", phrase="x")

    def test_self_loop_rejected(self):
        with pytest.raises(KgError, match="self-loop"):
            CausalEdge(linked("Q1"), linked("Q1"))

    def test_phrase_same_text_both_sides_allowed(self):
        edge = CausalEdge(unlinked("rain"), unlinked("rain"))
        assert not edge.is_fully_linked

    def test_duplicate_pairs_merge_provenance(self):
        prov_a = Provenance("d1", "evidence a", "pattern", 0.5)
        prov_b = Provenance("d2", "evidence b", "pattern", 0.5)
        kg = CausalKG(
            "k",
            [
                CausalEdge(linked("Q1"), linked("Q2"), (prov_a,)),
                CausalEdge(linked("Q1"), linked("Q2"), (prov_b,)),
                CausalEdge(linked("Q1"), linked("Q2"), (prov_a,)),
            ],
        )
        assert len(kg) == 1
        assert kg.edges[0].provenance == (prov_a, prov_b)


class TestBuildBaseKg:
    def test_single_relation(self):
        kg = build_base_kg(inventory(), [("Q1", "Q2", "P1542")])
        assert kg.name == "base-kg"
        assert kg.linked_pairs() == {("Q1", "Q2")}

    def test_cause_property_reversed(self):
        # "has cause": subject Q1 is the effect, object Q2 the cause
        kg = build_base_kg(inventory(), [("Q1", "Q2", "P828")])
        assert kg.linked_pairs() == {("Q2", "Q1")}

    def test_duplicate_via_two_properties_dedups(self):
        relations = [("Q1", "Q2", "P1542"), ("Q2", "Q1", "P828")]
        kg = build_base_kg(inventory(), relations)
        assert len(kg) == 1
        assert kg.linked_pairs() == {("Q1", "Q2")}

    def test_missing_endpoint_names_qid_and_relation(self):
        with pytest.raises(KgError, match=r"Q99.*not in inventory|Q99"):
            build_base_kg(inventory(), [("Q1", "Q99", "P1542")])

    def test_unknown_property_rejected(self):
        with pytest.raises(KgError, match="P999"):
            build_base_kg(inventory(), [("Q1", "Q2", "P999")])

    def test_scope_excludes_edges_fully_outside(self):
        relations = [("Q1", "Q2", "P1542"), ("Q2", "Q3", "P1542")]
        kg = build_base_kg(inventory(), relations, scope={"Q1"})
        assert kg.linked_pairs() == {("Q1", "Q2")}

    def test_statement_self_loop_dropped(self):
        kg = build_base_kg(inventory(), [("Q1", "Q1", "P1542")])
        assert len(kg) == 0

    def test_order_invariant(self):
        relations = [
            ("Q1", "Q2", "P1542"),
            ("Q2", "Q3", "P1536"),
            ("Q10", "Q1", "P828"),
        ]
        baseline = build_base_kg(inventory(), relations).linked_pairs()
        rng = random.Random(3)
        for _ in range(10):
            shuffled = relations.copy()
            rng.shuffle(shuffled)
            assert build_base_kg(inventory(), shuffled).linked_pairs() == baseline


class TestPartition:
    def test_class_edge(self):
        kg = CausalKG("k", [CausalEdge(linked("Q1"), linked("Q2"))])
        class_only, instance_including = partition_edges(kg, inventory())
        assert len(class_only) == 1 and not instance_including

    def test_instance_edge(self):
        kg = CausalKG("k", [CausalEdge(linked("Q10"), linked("Q2"))])
        class_only, instance_including = partition_edges(kg, inventory())
        assert not class_only and len(instance_including) == 1

    def test_mixed_fixture_partition_sizes(self):
        edges = [
            CausalEdge(linked("Q1"), linked("Q2")),
            CausalEdge(linked("Q2"), linked("Q3")),
            CausalEdge(linked("Q3"), linked("Q1")),
            CausalEdge(linked("Q10"), linked("Q2")),
            CausalEdge(linked("Q1"), linked("Q11")),
        ]
        kg = CausalKG("k", edges)
        class_only, instance_including = partition_edges(kg, inventory())
        assert (len(class_only), len(instance_including)) == (3, 2)
        assert class_only | instance_including == set(kg.edges)
        assert not class_only & instance_including

    def test_phrase_edges_excluded(self):
        kg = CausalKG(
            "k",
            [
                CausalEdge(linked("Q1"), unlinked("storm")),
                CausalEdge(linked("Q1"), linked("Q2")),
            ],
        )
        class_only, instance_including = partition_edges(kg, inventory())
        assert len(class_only) + len(instance_including) == 1

    def test_unresolvable_qid_is_error(self):
        kg = CausalKG("k", [CausalEdge(linked("Q1"), linked("Q77"))])
        with pytest.raises(KgError, match="Q77"):
            partition_edges(kg, inventory())


def small_kg(name, pairs):
    return CausalKG(name, [CausalEdge(linked(c), linked(e)) for c, e in pairs])


class TestMerge:
    def test_merge_with_empty_is_identity(self):
        kg = small_kg("k", [("Q1", "Q2")])
        merged = merge_kgs(kg, CausalKG("empty"))
        assert merged.linked_pairs() == kg.linked_pairs()
        assert merged.name == "k+empty"

    def test_merge_idempotent(self):
        kg = small_kg("k", [("Q1", "Q2"), ("Q2", "Q3")])
        merged = merge_kgs(kg, kg)
        assert merged.linked_pairs() == kg.linked_pairs()
        assert [e.provenance for e in merged.edges] == [e.provenance for e in kg.edges]

    def test_disjoint_union(self):
        a = small_kg("a", [("Q1", "Q2"), ("Q2", "Q3")])
        b = small_kg("b", [("Q3", "Q1"), ("Q10", "Q1"), ("Q11", "Q2")])
        assert len(merge_kgs(a, b)) == 5

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(
            st.tuples(st.sampled_from(["Q1", "Q2", "Q3"]), st.sampled_from(["Q4", "Q5"])),
            max_size=6,
        ),
        st.lists(
            st.tuples(st.sampled_from(["Q1", "Q2", "Q3"]), st.sampled_from(["Q4", "Q5"])),
            max_size=6,
        ),
    )
    def test_merge_commutative_up_to_name(self, pairs_a, pairs_b):
        a, b = small_kg("a", pairs_a), small_kg("b", pairs_b)
        assert merge_kgs(a, b).linked_pairs() == merge_kgs(b, a).linked_pairs()

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(
            st.tuples(st.sampled_from(["Q1", "Q2", "Q3"]), st.sampled_from(["Q4", "Q5"])),
            max_size=4,
        ),
        st.lists(
            st.tuples(st.sampled_from(["Q1", "Q2", "Q3"]), st.sampled_from(["Q4", "Q5"])),
            max_size=4,
        ),
        st.lists(
            st.tuples(st.sampled_from(["Q1", "Q2", "Q3"]), st.sampled_from(["Q4", "Q5"])),
            max_size=4,
        ),
    )
    def test_merge_associative_up_to_name(self, pairs_a, pairs_b, pairs_c):
        a, b, c = small_kg("a", pairs_a), small_kg("b", pairs_b), small_kg("c", pairs_c)
        left = merge_kgs(merge_kgs(a, b), c)
        right = merge_kgs(a, merge_kgs(b, c))
        assert left.linked_pairs() == right.linked_pairs()


class TestSerialization:
    def test_round_trip(self):
        kg = CausalKG(
            "k",
            [
                CausalEdge(
                    linked("Q1"),
                    unlinked("heavy rain"),
                    (Provenance("d1", "evidence", "pattern", 0.5),),
                )
            ],
            version="v2",
        )
        again = kg_from_dict(kg_to_dict(kg))
        assert again.name == kg.name and again.version == kg.version
        assert again.edges == kg.edges

    def test_relations_tsv(self, tmp_path):
        path = tmp_path / "relations.tsv"
        path.write_text(
            "cause_qid\teffect_qid\tproperty\nQ1\tQ2\tP1542\nQ2\tQ1\tP828\n",
            encoding="utf-8",
        )
        assert read_relations_tsv(path) == [
            ("Q1", "Q2", "P1542"),
            ("Q2", "Q1", "P828"),
        ]

    def test_relations_tsv_bad_row(self, tmp_path):
        path = tmp_path / "relations.tsv"
        path.write_text("Q1\tQ2\n", encoding="utf-8")
        with pytest.raises(KgError, match="line 1"):
            read_relations_tsv(path)
