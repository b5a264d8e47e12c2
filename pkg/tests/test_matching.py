import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import fraction_rank
from wbstream.errors import IntegrityError, UpdateError
from wbstream.harness import brute_force_matching_size
from wbstream.lowrank import MatrixRecoverer
from wbstream.matching import (
    EdgeUpdate,
    LargerThan,
    MatchingSketch,
    MaximumMatching,
    blossom_matching,
    graph_from_tutte,
    max_matching,
    tutte_stream_update,
)

SEED = "f6" * 32


def tutte(n, edges):
    a = np.zeros((n, n), dtype=np.int64)
    for u, v in edges:
        a[u, v], a[v, u] = 1, -1
    return a


def is_valid_matching(matching, edges):
    verts = [x for e in matching for x in e]
    return len(verts) == len(set(verts)) and set(matching) <= set(edges)


graphs = st.integers(1, 10).flatmap(
    lambda n: st.tuples(
        st.just(n),
        st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1))
                 .filter(lambda e: e[0] < e[1]), unique=True, max_size=20),
    )
)


class TestEdgeUpdate:
    @pytest.mark.parametrize("u, v, d", [(2, 1, 1), (1, 1, 1), (0, 1, 2), (0, 1, 0)])
    def test_invalid(self, u, v, d):
        with pytest.raises(UpdateError):
            EdgeUpdate(u, v, d)

    def test_vertex_bound(self):
        with pytest.raises(UpdateError):
            MatchingSketch(4, 1, SEED).update(1, 4)


class TestTutte:
    def test_insert_delete_returns_to_zero(self):
        rec = MatrixRecoverer(4, 2, 1, SEED)
        tutte_stream_update(rec, EdgeUpdate(0, 1, 1))
        tutte_stream_update(rec, EdgeUpdate(0, 1, -1))
        assert not rec.sis.v.any() and not rec.real.acc.any()

    def test_single_edge(self):
        rec = MatrixRecoverer(4, 2, 1, SEED)
        tutte_stream_update(rec, EdgeUpdate(0, 1))
        out = rec.recover()
        expected = np.zeros((4, 4), dtype=np.int64)
        expected[:2, :2] = [[0, 1], [-1, 0]]
        assert out.recovered and np.array_equal(out.value, expected)

    def test_triangle_rank(self):
        assert fraction_rank(tutte(3, [(0, 1), (1, 2), (0, 2)])) == 2

    @given(graphs)
    @settings(max_examples=200)
    def test_rank_at_most_twice_matching(self, g):
        n, edges = g
        assert fraction_rank(tutte(n, edges)) <= 2 * brute_force_matching_size(n, edges)

    def test_graph_from_tutte_integrity(self):
        bad = tutte(3, [(0, 1)])
        bad[0, 1] = 2
        bad[1, 0] = -2
        with pytest.raises(IntegrityError):
            graph_from_tutte(bad)
        asym = tutte(3, [(0, 1)])
        asym[1, 0] = 0
        with pytest.raises(IntegrityError):
            graph_from_tutte(asym)
        assert graph_from_tutte(tutte(3, [(0, 2)])) == [(0, 2)]


class TestBlossom:
    @given(graphs)
    @settings(max_examples=300)
    def test_maximum_and_valid(self, g):
        n, edges = g
        m = blossom_matching(n, edges)
        assert is_valid_matching(m, edges)
        G = nx.Graph()
        G.add_nodes_from(range(n))
        G.add_edges_from(edges)
        assert len(m) == len(nx.max_weight_matching(G, maxcardinality=True))
        assert len(m) == brute_force_matching_size(n, edges)

    def test_odd_cycle_with_tail(self):
        # 5-cycle plus a pendant forces a blossom contraction
        edges = [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4), (4, 5)]
        assert len(blossom_matching(6, edges)) == 3


class TestMaxMatching:
    def test_empty_graph(self):
        assert MatchingSketch(5, 1, SEED).query() == MaximumMatching(frozenset())

    def test_path(self):
        ms = MatchingSketch(4, 2, SEED)
        for u, v in [(0, 1), (1, 2), (2, 3)]:
            ms.update(u, v)
        out = ms.query()
        assert isinstance(out, MaximumMatching) and out.edges == {(0, 1), (2, 3)}

    def test_perfect_matching_is_larger(self):
        ms = MatchingSketch(6, 1, SEED)
        for u, v in [(0, 1), (2, 3), (4, 5)]:
            ms.update(u, v)
        out = ms.query()
        assert out == LargerThan(1) and str(out) == "LARGER_THAN 1"

    def test_exact_matching_beyond_k_prime(self):
        # rank of A' is 4 <= 2k' but the graph is fully known, so size 2 is reported
        ms = MatchingSketch(4, 2, SEED)
        ms.update(0, 1).update(2, 3)
        assert ms.query().size == 2

    def test_function_form(self):
        ms = MatchingSketch(4, 1, SEED).update(0, 2)
        m = ms.matrix
        assert max_matching(m.sis, m.real, 4, 1).edges == {(0, 2)}

    def test_delete_without_insert_is_integrity_error(self):
        ms = MatchingSketch(4, 2, SEED).update(0, 1, -1)
        with pytest.raises(IntegrityError):
            ms.query()

    def test_double_insert_is_refused(self):
        # multiplicity 2 exceeds the unit entry bound, so no graph is reconstructed
        ms = MatchingSketch(4, 2, SEED).update(0, 1).update(0, 1)
        assert ms.query() == LargerThan(2)

    def test_churn_against_brute_force(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 9))
            kp = int(rng.integers(1, 4))
            ms = MatchingSketch(n, kp, SEED)
            live = set()
            for _ in range(int(rng.integers(0, 25))):
                u, v = sorted(rng.choice(n, size=2, replace=False).tolist())
                if (u, v) in live:
                    ms.update(u, v, -1)
                    live.remove((u, v))
                else:
                    ms.update(u, v, 1)
                    live.add((u, v))
            out = ms.query()
            true = brute_force_matching_size(n, live)
            if isinstance(out, LargerThan):
                assert true > kp
            else:
                assert out.size == true and is_valid_matching(out.edges, live)
