import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from parlink.core import ColorArray, CsrGraph, EdgeList, ValidationError, edge_list_to_csr
from parlink.mst import (
    label_propagation,
    min_edge_per_supervertex,
    min_edge_per_vertex,
    solve_mst,
    weight_alteration,
)
from parlink.oracles import component_labels, kruskal_mst

from conftest import random_connected_graph


def alter_key(alt, src, dst):
    """The solver's total order on edges: (altered weight, canonical key)."""
    return (alt, min(src, dst), max(src, dst))


def csr_of(n, triples):
    return edge_list_to_csr(EdgeList.from_pairs(n, triples))


class TestWeightAlteration:
    def test_theta_is_minimum_gap(self):
        g = csr_of(4, [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 4.0)])
        altered = weight_alteration(g, seed=3)
        assert altered.theta == 1.0
        # every altered value stays within [w, w + theta)
        assert (altered.graph.weights >= altered.original_weights).all()
        assert (altered.graph.weights < altered.original_weights + 1.0).all()

    def test_single_edge_graph(self):
        g = csr_of(2, [(0, 1, 7.0)])
        altered = weight_alteration(g, seed=0)
        assert altered.graph.weights[0] >= 7.0
        assert altered.original_weights.tolist() == [7.0, 7.0]

    def test_zero_weight_rejected(self):
        g = csr_of(3, [(0, 1, 0.0), (1, 2, 1.0)])
        with pytest.raises(ValidationError, match="zero"):
            weight_alteration(g)

    def test_all_equal_weights_get_separated(self):
        g = csr_of(4, [(0, 1, 2.0), (1, 2, 2.0), (2, 3, 2.0), (3, 0, 2.0)])
        altered = weight_alteration(g, seed=1)
        us, ud, uw = altered.graph.undirected_edges()
        keys = sorted(alter_key(w, s, d) for s, d, w in zip(us, ud, uw))
        assert altered.theta > 0
        for a, b in zip(keys, keys[1:]):
            assert a < b

    def test_order_distinctness_symmetry_exhaustive(self, rng):
        src, dst, w = random_connected_graph(rng, 40, 160, weights="ties")
        g = edge_list_to_csr(EdgeList(40, src, dst, w))
        altered = weight_alteration(g, seed=9)
        srcs = g.row_sources()
        # symmetry: both directions carry the identical altered value
        both = {}
        for s, d, aw in zip(srcs, g.col_indices, altered.graph.weights):
            key = (min(s, d), max(s, d))
            assert both.setdefault(key, aw) == aw
        # O(E^2): order preservation and pairwise distinctness under the
        # solver's comparator
        items = [
            alter_key(aw, s, d)
            for (s, d), aw in both.items()
        ]
        orig = {(min(s, d), max(s, d)): ow
                for s, d, ow in zip(srcs, g.col_indices, altered.original_weights)}
        origs = [orig[(k[1], k[2])] for k in items]
        for i in range(len(items)):
            for j in range(len(items)):
                if i == j:
                    continue
                assert items[i] != items[j]
                if origs[i] < origs[j]:
                    assert items[i] < items[j]

    def test_seed_determinism(self):
        g = csr_of(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])
        a = weight_alteration(g, seed=5).graph.weights
        b = weight_alteration(g, seed=5).graph.weights
        c = weight_alteration(g, seed=6).graph.weights
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_asymmetric_rejected(self):
        csr = CsrGraph(2, np.array([0, 1, 1]), np.array([1]), np.array([2.0]))
        with pytest.raises(ValidationError, match="symmetric"):
            weight_alteration(csr)


class TestMinEdgePerVertex:
    def test_path_graph(self):
        g = csr_of(3, [(0, 1, 1.0), (1, 2, 2.0)])
        altered = weight_alteration(g, seed=0)
        cand = min_edge_per_vertex(altered, ColorArray(np.arange(3)))
        assert cand.dst.tolist() == [1, 0, 1]
        assert cand.pair(0).index == 1
        assert cand.pair(2).index == 1

    def test_single_color_yields_none(self):
        g = csr_of(3, [(0, 1, 1.0), (1, 2, 2.0)])
        altered = weight_alteration(g, seed=0)
        cand = min_edge_per_vertex(altered, ColorArray(np.zeros(3, dtype=np.int64)))
        assert (cand.position == -1).all()
        assert cand.pair(0) is None

    def test_matches_linear_scan_oracle(self, rng):
        src, dst, w = random_connected_graph(rng, 60, 240)
        g = edge_list_to_csr(EdgeList(60, src, dst, w))
        altered = weight_alteration(g, seed=4)
        reps = np.array([0, 17, 33])
        colors = reps[rng.integers(0, 3, size=60)]
        colors[reps] = reps
        cand = min_edge_per_vertex(altered, ColorArray(colors))
        srcs = g.row_sources()
        for v in range(60):
            best = None
            for p in range(g.row_offsets[v], g.row_offsets[v + 1]):
                u = g.col_indices[p]
                if colors[u] == colors[v]:
                    continue
                key = alter_key(altered.graph.weights[p], v, u)
                if best is None or key < best[0]:
                    best = (key, p)
            if best is None:
                assert cand.position[v] == -1
            else:
                assert cand.position[v] == best[1]


class TestMinEdgePerSupervertex:
    def test_two_singletons_forced(self):
        g = csr_of(2, [(0, 1, 3.0)])
        altered = weight_alteration(g, seed=0)
        colors = ColorArray(np.arange(2))
        batch = min_edge_per_supervertex(min_edge_per_vertex(altered, colors), colors)
        assert list(batch.iter_edges()) == [(0, 1, 3.0)]

    def test_triangle_accepts_two_lightest(self):
        g = csr_of(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)])
        altered = weight_alteration(g, seed=0)
        colors = ColorArray(np.arange(3))
        batch = min_edge_per_supervertex(min_edge_per_vertex(altered, colors), colors)
        assert sorted(w for _, _, w in batch.iter_edges()) == [1.0, 2.0]

    def test_matches_per_color_argmin_oracle(self, rng):
        src, dst, w = random_connected_graph(rng, 50, 300, weights="ties")
        g = edge_list_to_csr(EdgeList(50, src, dst, w))
        altered = weight_alteration(g, seed=11)
        reps = np.array([0, 5, 11, 23])
        colors = reps[rng.integers(0, 4, size=50)]
        colors[reps] = reps
        carr = ColorArray(colors)
        cand = min_edge_per_vertex(altered, carr)
        batch = min_edge_per_supervertex(cand, carr)
        # oracle: per color, the minimum candidate under the solver's order
        expected = {}
        for v in range(50):
            if cand.position[v] < 0:
                continue
            key = alter_key(cand.altered_weight[v], v, cand.dst[v])
            c = colors[v]
            if c not in expected or key < expected[c]:
                expected[c] = key
        want = sorted({(k[1], k[2]) for k in expected.values()})
        got = sorted(zip(batch.src, batch.dst))
        assert got == want
        assert len(set(got)) == len(got)


class TestLabelPropagation:
    def test_min_of_two(self):
        colors = ColorArray(np.array([0, 1, 2, 3, 4, 5]))
        edges = EdgeList.from_pairs(6, [(5, 2, 1.0)])
        out = label_propagation(edges, colors)
        assert out.colors[5] == 2 and out.colors[2] == 2

    def test_transitive_chain(self):
        colors = ColorArray(np.arange(10))
        edges = EdgeList.from_pairs(10, [(9, 7, 1.0), (7, 3, 1.0), (3, 0, 1.0)])
        out = label_propagation(edges, colors)
        for v in (0, 3, 7, 9):
            assert out.colors[v] == 0

    @settings(max_examples=20)
    @given(st.data())
    def test_matches_union_find_oracle(self, data):
        n = data.draw(st.integers(2, 40))
        m = data.draw(st.integers(1, 60))
        seed = data.draw(st.integers(0, 2**32 - 1))
        r = np.random.default_rng(seed)
        src = r.integers(1, n, size=m)
        dst = r.integers(0, src)
        edges = EdgeList(n, src, dst, np.ones(m))
        out = label_propagation(edges, ColorArray(np.arange(n)))
        comp = component_labels(n, src, dst)
        # canonical: each vertex's color is the min vertex id of its component
        for c in np.unique(comp):
            members = np.nonzero(comp == c)[0]
            assert (out.colors[members] == members.min()).all()


class TestSolveMst:
    def test_triangle_unique_mst(self):
        g = csr_of(3, [(0, 1, 1.0), (1, 2, 2.0), (0, 2, 3.0)])
        res = solve_mst(g)
        assert res.n_components == 1
        assert sorted(w for _, _, w in res.edges.iter_edges()) == [1.0, 2.0]
        assert res.edges.weight.sum() == 3.0

    def test_two_disjoint_edges(self):
        g = csr_of(4, [(0, 1, 1.0), (2, 3, 2.0)])
        res = solve_mst(g)
        assert len(res.edges) == 2
        assert res.n_components == 2
        assert len(np.unique(res.colors.colors)) == 2

    def test_equal_weight_cycle(self):
        g = csr_of(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)])
        ref = solve_mst(g, seed=7, threads=1)
        assert len(ref.edges) == 3
        assert ref.edges.weight.sum() == 3.0
        # exhaustive: every spanning tree of the 4-cycle weighs 3.0, so the
        # solver is optimal; fixed seed must be thread-count invariant
        for threads in (2, 8):
            res = solve_mst(g, seed=7, threads=threads)
            assert np.array_equal(res.edges.src, ref.edges.src)
            assert np.array_equal(res.edges.dst, ref.edges.dst)
            assert np.array_equal(res.edges.weight, ref.edges.weight)

    def test_matches_kruskal_on_random_graphs(self, rng):
        for trial in range(20):
            v = int(rng.integers(4, 300))
            e = int(rng.integers(0, 2000))
            mode = ("uniform", "ties", "equal")[trial % 3]
            src, dst, w = random_connected_graph(rng, v, e, weights=mode)
            g = edge_list_to_csr(EdgeList(v, src, dst, w))
            res = solve_mst(g, seed=trial)
            assert len(res.edges) == v - 1
            us, ud, uw = g.undirected_edges()
            _, _, kw = kruskal_mst(v, us, ud, uw)
            total, ktotal = res.edges.weight.sum(), kw.sum()
            assert abs(total - ktotal) <= 1e-9 * max(1.0, abs(ktotal))
            # acyclic: union-find replay never joins two joined vertices
            assert len(np.unique(component_labels(v, res.edges.src, res.edges.dst))) == 1

    def test_forest_law_on_disconnected(self, rng):
        for trial in range(10):
            comps = int(rng.integers(2, 6))
            src_all, dst_all, w_all, off = [], [], [], 0
            for _ in range(comps):
                cv = int(rng.integers(2, 30))
                s, d, w = random_connected_graph(rng, cv, int(rng.integers(0, 40)))
                src_all.append(s + off)
                dst_all.append(d + off)
                w_all.append(w)
                off += cv
            g = edge_list_to_csr(EdgeList(off, np.concatenate(src_all),
                                          np.concatenate(dst_all), np.concatenate(w_all)))
            res = solve_mst(g, seed=trial)
            assert len(res.edges) == off - comps
            assert res.n_components == comps

    def test_maximize_duality(self, rng):
        for trial in range(8):
            src, dst, w = random_connected_graph(rng, 40, 150)
            g = edge_list_to_csr(EdgeList(40, src, dst, w))
            res_max = solve_mst(g, maximize=True, seed=trial)
            neg = CsrGraph(g.n_vertices, g.row_offsets, g.col_indices, -g.weights)
            res_neg = solve_mst(neg, seed=trial)
            assert np.array_equal(res_max.edges.src, res_neg.edges.src)
            assert np.array_equal(res_max.edges.dst, res_neg.edges.dst)
            assert np.allclose(res_max.edges.weight, -res_neg.edges.weight, rtol=0, atol=0)

    def test_cut_safety_of_first_iteration(self, rng):
        src, dst, w = random_connected_graph(rng, 30, 120)
        g = edge_list_to_csr(EdgeList(30, src, dst, w))
        altered = weight_alteration(g, seed=2)
        colors = ColorArray(np.arange(30))
        batch = min_edge_per_supervertex(min_edge_per_vertex(altered, colors), colors)
        # brute force the minimum altered edge crossing every color's cut;
        # the accepted batch must be exactly those minima, deduplicated
        best = {}
        for v, u, aw in zip(g.row_sources(), g.col_indices, altered.graph.weights):
            c = int(colors.colors[v])
            key = alter_key(aw, v, u)
            if c not in best or key < best[c]:
                best[c] = key
        expected = sorted({(k[1], k[2]) for k in best.values()})
        got = sorted(zip(batch.src, batch.dst))
        assert got == expected

    def test_empty_graph_rejected(self):
        with pytest.raises(ValidationError, match="empty"):
            solve_mst(edge_list_to_csr(EdgeList.from_pairs(0, [])))

    def test_non_finite_rejected(self):
        csr = csr_of(2, [(0, 1, 1.0)])
        bad = CsrGraph(2, csr.row_offsets, csr.col_indices, np.array([np.inf, np.inf]))
        with pytest.raises(ValidationError, match="finite"):
            solve_mst(bad)

    def test_edgeless_graph_is_all_singletons(self):
        res = solve_mst(edge_list_to_csr(EdgeList.from_pairs(4, [])))
        assert len(res.edges) == 0
        assert res.n_components == 4
