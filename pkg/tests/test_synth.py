import networkx as nx
import pytest
from hypothesis import given
from hypothesis import strategies as st

from citeco.graph import NodeRole, build_parent_network, role_counts
from citeco.metrics import compute_metrics
from citeco.synth import GrowthParams, grow_network, oracle_metrics, prototype_network


def as_nx(net):
    g = nx.Graph()
    g.add_nodes_from((n, {"role": net.roles[n].value}) for n in net.nodes)
    g.add_edges_from(net.edges)
    return g


def reference_b():
    """Prototype B drawn independently: a star of six around the parent,
    one descendant fanning out to eleven leaves."""
    g = nx.Graph()
    g.add_node("p", role="parent")
    for i in range(3):
        g.add_node(f"g{i}", role="grandparent")
        g.add_edge("p", f"g{i}")
    for i in range(4):
        g.add_node(f"d{i}", role="descendant")
        g.add_edge("p", f"d{i}")
    for i in range(11):
        g.add_node(f"x{i}", role="exogenous")
        g.add_edge("d3", f"x{i}")
    return g


def test_prototype_b_matches_reference_shape():
    match = nx.algorithms.isomorphism.categorical_node_match("role", None)
    assert nx.is_isomorphic(as_nx(prototype_network("B")), reference_b(), node_match=match)


@pytest.mark.parametrize("variant", "ABCD")
def test_prototypes_are_self_consistent(variant):
    net = prototype_network(variant)
    rebuilt = build_parent_network(0, net.years, net.arcs)
    assert rebuilt == net


def test_unknown_variant():
    with pytest.raises(ValueError):
        prototype_network("E")


@pytest.mark.parametrize(
    "kw",
    [
        dict(exo_ratio=1.5),
        dict(exo_ratio=-0.1),
        dict(steps=-1),
        dict(steps=3, burst_schedule=((4, 10),)),
        dict(steps=3, burst_schedule=((1, -1),)),
        dict(attachment="random"),
    ],
)
def test_invalid_params(kw):
    with pytest.raises(ValueError):
        GrowthParams(**kw)


def test_zero_steps_gives_seed_network():
    net, log = grow_network(GrowthParams(n_grandparents=4))
    assert role_counts(net) == (5, 0, 4, 0)
    assert len(log) == 0


def test_exo_ratio_one_never_cites_existing_nodes():
    net, log = grow_network(GrowthParams(steps=20, refs_per_descendant=4, exo_ratio=1.0, seed=3))
    assert all(s.endo_refs == 0 and s.exo_refs == 4 for s in log.steps)
    assert role_counts(net).X == 80


def test_exo_ratio_zero_adds_no_exogenous_nodes():
    net, log = grow_network(GrowthParams(steps=20, refs_per_descendant=4, exo_ratio=0.0, seed=3))
    assert role_counts(net).X == 0
    assert sum(s.exo_refs for s in log.steps) == 0


def test_burst_adds_exogenous_nodes_and_is_logged():
    params = GrowthParams(steps=10, refs_per_descendant=2, exo_ratio=0.0, burst_schedule=((4, 15),), seed=1)
    net, log = grow_network(params)
    assert log.burst_years() == [1994]
    assert log.steps[3].exo_refs == 15
    assert role_counts(net).X == 15


def test_years_follow_schedule():
    params = GrowthParams(steps=4, years_per_step={1: 1991, 2: 1991, 3: 1995}, start_year=1990)
    _, log = grow_network(params)
    assert [s.year for s in log.steps] == [1991, 1991, 1995, 1994]


def test_log_jsonl_has_one_line_per_step():
    _, log = grow_network(GrowthParams(steps=5, refs_per_descendant=1, exo_ratio=0.5))
    assert len(log.to_jsonl().splitlines()) == 5


def test_grow_from_start_network_needs_arcs():
    net = prototype_network("A")
    more, _ = grow_network(GrowthParams(steps=2, refs_per_descendant=1, exo_ratio=1.0), start=net)
    assert net.nodes < more.nodes
    bare = type(net)(net.parent, net.nodes, net.edges, net.roles, net.years)
    with pytest.raises(ValueError):
        grow_network(GrowthParams(steps=1), start=bare)


params_st = st.builds(
    GrowthParams,
    n_grandparents=st.integers(0, 5),
    steps=st.integers(0, 25),
    refs_per_descendant=st.integers(0, 5),
    exo_ratio=st.floats(0, 1),
    seed=st.integers(0, 2**31),
    attachment=st.sampled_from(["uniform", "preferential"]),
)


@given(params_st)
def test_same_seed_same_network(params):
    a, la = grow_network(params)
    b, lb = grow_network(params)
    assert a.to_json() == b.to_json()
    assert la == lb


@given(params_st)
def test_node_and_reference_conservation(params):
    net, log = grow_network(params)
    n, c, g, x = role_counts(net)
    assert c == params.steps
    assert g == params.n_grandparents
    assert x == sum(s.exo_refs for s in log.steps)
    assert n == 1 + g + sum(s.new_nodes for s in log.steps)
    # one parent citation per descendant, plus its references
    assert len(net.arcs) == g + sum(1 + s.endo_refs + s.exo_refs for s in log.steps)
    for s in log.steps:
        assert s.endo_refs + s.exo_refs <= params.refs_per_descendant


@given(params_st)
def test_grown_networks_agree_with_oracle(params):
    net, _ = grow_network(params)
    m, o = compute_metrics(net), oracle_metrics(net)
    assert (m.N, m.C, m.G, m.X, m.R) == (o.N, o.C, o.G, o.X, o.R)
    assert m.S == pytest.approx(o.S, abs=1e-12)


@given(params_st)
def test_roles_follow_directions(params):
    net, _ = grow_network(params)
    for u, v in net.arcs:
        if v == net.parent:
            assert net.roles[u] is NodeRole.DESCENDANT
        if u == net.parent:
            assert net.roles[v] is NodeRole.GRANDPARENT
