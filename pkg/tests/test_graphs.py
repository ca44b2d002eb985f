import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from consensus_lab.errors import DomainError
from consensus_lab.graphs import (
    DirectedGraph,
    SelectorOracle,
    gamma_iteration_bound,
    gamma_reduce,
    globally_reachable_nodes,
    pairwise_coverage,
    uncovered_pairs,
)


def nx_reachable(g: DirectedGraph) -> set[int]:
    """Oracle: forward BFS from every node via networkx."""
    G = nx.DiGraph()
    G.add_nodes_from(g.nodes)
    G.add_edges_from(g.arrows)
    reach = {v: nx.descendants(G, v) | {v} for v in g.nodes}
    return {w for w in g.nodes if all(w in reach[v] for v in g.nodes)}


def random_graph(rng, n, p):
    arrows = {(j, k) for j in range(1, n + 1) for k in range(1, n + 1) if j != k and rng.random() < p}
    return DirectedGraph(n, frozenset(arrows))


class TestDirectedGraph:
    def test_codes(self):
        g = DirectedGraph.from_codes(4, ["21", "34"])
        assert g.arrows == {(2, 1), (3, 4)}

    def test_self_loop_rejected(self):
        with pytest.raises(DomainError):
            DirectedGraph(2, frozenset({(1, 1)}))

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            DirectedGraph(2, frozenset({(1, 3)}))

    def test_edge_list_roundtrip(self):
        g = DirectedGraph.from_codes(4, ["12", "21", "23", "43"])
        assert DirectedGraph.from_edge_list(4, g.to_edge_list()) == g
        assert g.to_edge_list().splitlines()[0] == "1 -> 2"


class TestReachability:
    @pytest.mark.parametrize("codes, expected", [
        (["12", "21", "23", "32", "34", "43"], {1, 2, 3, 4}),
        (["21", "34"], set()),
        (["12", "21", "23", "34", "43"], {3, 4}),
    ])
    def test_examples(self, codes, expected):
        assert globally_reachable_nodes(DirectedGraph.from_codes(4, codes)) == expected

    def test_single_node(self):
        assert globally_reachable_nodes(DirectedGraph(1)) == {1}

    def test_against_networkx(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 11))
            g = random_graph(rng, n, rng.uniform(0.05, 0.5))
            assert globally_reachable_nodes(g) == nx_reachable(g)

    @given(seed=st.integers(0, 10 ** 6), extra=st.lists(st.tuples(st.integers(1, 6), st.integers(1, 6)), max_size=6))
    def test_monotone_under_arrow_addition(self, seed, extra):
        g = random_graph(np.random.default_rng(seed), 6, 0.25)
        h = g.with_arrows((a, b) for a, b in extra if a != b)
        assert globally_reachable_nodes(g) <= globally_reachable_nodes(h)


class TestCoverage:
    def test_three_agent_example(self):
        assert pairwise_coverage(DirectedGraph.from_codes(3, ["12", "13", "23"]))

    def test_missing_pair(self):
        g = DirectedGraph.from_codes(3, ["12"])
        assert not pairwise_coverage(g)
        assert uncovered_pairs(g) == [(1, 3), (2, 3)]

    def test_single_node(self):
        assert pairwise_coverage(DirectedGraph(1))


def random_oracle(rng, n):
    return SelectorOracle({(i, j): int(rng.integers(1, n + 1))
                           for i, j in itertools.combinations(range(1, n + 1), 2)})


class TestGamma:
    def test_two_nodes(self):
        assert gamma_reduce(2, SelectorOracle({(1, 2): 2})) == 2

    def test_one_node(self):
        assert gamma_reduce(1, SelectorOracle()) == 1

    def test_selector_out_of_range(self):
        with pytest.raises(DomainError):
            gamma_reduce(2, SelectorOracle({(1, 2): 5}))

    def test_oracle_key_order(self):
        o = SelectorOracle({(1, 3): 2})
        assert o[(3, 1)] == 2

    def test_random_oracles_give_reachable_node(self, rng):
        for _ in range(200):
            n = int(rng.integers(1, 9))
            oracle = random_oracle(rng, n)
            node, trace = gamma_reduce(n, oracle, return_trace=True)
            g = oracle.induced_graph(n)
            assert node in nx_reachable(g)
            assert len(trace) - 1 <= gamma_iteration_bound(n) + 1

    def test_odd_leftover_passes(self):
        oracle = SelectorOracle({(1, 2): 1, (1, 3): 3, (2, 3): 3})
        _, trace = gamma_reduce(3, oracle, return_trace=True)
        assert trace == [[1, 2, 3], [1, 3], [3]]
