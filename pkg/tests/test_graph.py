"""Core graph type: construction, validation, ordering, serialization."""

import pytest

from swigc.errors import CycleError, DuplicateName, UnknownEndpoint, UnknownNode
from swigc.graph import (
    CausalGraph,
    CompositeRule,
    NodeAttrs,
    NodeId,
    build_graph,
    canonical_json,
    context_value,
    format_assignment,
    format_term,
    graph_from_payload,
    graph_to_payload,
    valid_name,
)


def diamond():
    return build_graph(
        [("A", None), ("B", None), ("C", None), ("D", None)],
        [("A", "B"), ("A", "C"), ("B", "D"), ("C", "D")],
    )


class TestNaming:
    def test_valid_names(self):
        assert valid_name("A")
        assert valid_name("M3")
        assert valid_name("Y_obs")
        assert not valid_name("3M")
        assert not valid_name("")
        assert not valid_name("a b")

    def test_symbolic_assignment_renders_bare(self):
        assert format_assignment("A", "a") == "a"

    def test_concrete_assignment_lowercases_the_variable(self):
        assert format_assignment("M3", 0) == "m3=0"
        assert format_assignment("A", 1) == "a=1"

    def test_term_label_mixes_both(self):
        assert format_term("Y", (("A", "a"), ("M3", 0))) == "Y(a,m3=0)"
        assert format_term("Y", ()) == "Y"

    def test_context_value(self):
        ctx = (("A", 1), ("M", 0))
        assert context_value(ctx, "M") == 0
        assert context_value(ctx, "A") == 1


class TestNodeId:
    def test_random_node_label(self):
        assert NodeId("Y", (("A", "a"), ("M3", "m3"))).label == "Y(a,m3)"
        assert NodeId("A").label == "A"

    def test_fixed_node_label_is_its_assignment(self):
        assert NodeId("A", (("A", "a"),), fixed=True).label == "a"
        assert NodeId("A", (("A", 1),), fixed=True).label == "a=1"

    def test_hashable_and_equal_by_value(self):
        a = NodeId("Y", (("A", "a"),))
        b = NodeId("Y", (("A", "a"),))
        assert a == b and hash(a) == hash(b)
        assert a != NodeId("Y")


class TestCompositeRule:
    def test_guard_zero_passes_source_through(self):
        rule = CompositeRule(source="Y", guard="M", failure=0)
        assert rule.apply(5, 0) == 5

    def test_guard_nonzero_forces_failure(self):
        rule = CompositeRule(source="Y", guard="M", failure=0)
        assert rule.apply(5, 1) == 0


class TestConstruction:
    def test_duplicate_name_rejected(self):
        with pytest.raises(DuplicateName):
            build_graph([("A", None), ("A", None)], [])

    def test_unknown_endpoint_rejected(self):
        with pytest.raises(UnknownEndpoint):
            build_graph([("A", None)], [("A", "B")])

    def test_cycle_rejected_with_witness(self):
        with pytest.raises(CycleError) as exc:
            build_graph(
                [("A", None), ("M", None)],
                [("A", "M"), ("M", "A")],
            )
        assert "A -> M -> A" in str(exc.value)

    def test_unknown_node_lookup(self):
        g = diamond()
        with pytest.raises(UnknownNode):
            g.node("Z")

    def test_graphs_are_unhashable(self):
        assert CausalGraph.__hash__ is None


class TestOrdering:
    def test_topological_order_is_layered_lexicographic(self):
        g = diamond()
        assert [n.label for n in g.topological_order()] == ["A", "B", "C", "D"]

    def test_every_edge_respects_the_order(self):
        g = diamond()
        pos = {n: i for i, n in enumerate(g.topological_order())}
        for u, v in g.edges:
            assert pos[u] < pos[v]

    def test_ancestors_and_descendants(self):
        g = diamond()
        d = g.node("D")
        a = g.node("A")
        assert {n.label for n in g.ancestors(d)} == {"A", "B", "C"}
        assert {n.label for n in g.descendants(a)} == {"B", "C", "D"}
        assert {n.label for n in g.parents(d)} == {"B", "C"}
        assert {n.label for n in g.children(a)} == {"B", "C"}


class TestSerialization:
    def test_payload_round_trip(self):
        g = build_graph(
            [
                ("A", NodeAttrs(role="treatment")),
                ("U", NodeAttrs(role="latent", observed=False)),
                ("Y", NodeAttrs(role="outcome", values=(0, 1, 2))),
            ],
            [("A", "Y"), ("U", "Y")],
        )
        assert graph_from_payload(graph_to_payload(g)) == g

    def test_round_trip_keeps_deterministic_rule(self):
        attrs = NodeAttrs(role="derived", deterministic=CompositeRule("Y", "M", 0))
        g = build_graph(
            [("M", None), ("Y", None), ("U", attrs)],
            [("M", "U"), ("Y", "U")],
        )
        g2 = graph_from_payload(graph_to_payload(g))
        rule = g2.attr(g2.node("U")).deterministic
        assert rule == CompositeRule("Y", "M", 0)

    def test_canonical_json_is_sorted_and_newline_terminated(self):
        text = canonical_json({"b": 1, "a": [2, 3]})
        assert text.index('"a"') < text.index('"b"')
        assert text.endswith("\n")
