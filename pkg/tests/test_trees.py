import itertools
import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st
from mpmath import mpf

from afinv.arrangement import Arrangement, dot, grad_P, linear_form
from afinv.trees import (
    POINT,
    OrderCapExceeded,
    TreeShape,
    TreeTerm,
    canonical_code,
    coefficient_table,
    enumerate_trees,
    evaluate_layer,
    evaluate_layer_gradient,
    evaluate_layer_hessian,
    graft,
    q1_direct,
    q2_direct,
    q_layer,
)

SINGLE = Arrangement.from_data([(0, (1,), 1)])
THREE = Arrangement.from_data([(0, (1, 0), 1), (0, (0, 1), Fraction(1, 2)), (-1, (1, 1), Fraction(3, 4))])
UNLABELED_TREES = {1: 1, 2: 1, 3: 1, 4: 2, 5: 3, 6: 6, 7: 11, 8: 23, 9: 47}


def prufer_tree(seq):
    n = len(seq) + 2
    degree = [1] * n
    for v in seq:
        degree[v] += 1
    edges = []
    for v in seq:
        leaf = min(i for i in range(n) if degree[i] == 1)
        edges.append((leaf, v))
        degree[leaf] -= 1
        degree[v] -= 1
    u, w = [i for i in range(n) if degree[i] == 1]
    edges.append((u, w))
    return n, edges


def isomorphic(p, e1, e2):
    target = {frozenset(e) for e in e2}
    return any({frozenset((perm[a], perm[b])) for a, b in e1} == target for perm in itertools.permutations(range(p)))


def relabel(edges, perm):
    return [(perm[a], perm[b]) for a, b in edges]


prufer = st.integers(4, 7).flatmap(lambda n: st.lists(st.integers(0, n - 1), min_size=n - 2, max_size=n - 2))


def test_code_examples():
    path_codes = {canonical_code(3, e) for e in ([(0, 1), (1, 2)], [(1, 0), (0, 2)], [(2, 0), (0, 1)])}
    assert len(path_codes) == 1
    assert canonical_code(4, [(0, 1), (0, 2), (0, 3)]) != canonical_code(4, [(0, 1), (1, 2), (2, 3)])


def test_code_rejects_non_trees():
    with pytest.raises(ValueError):
        canonical_code(3, [(0, 1)])
    with pytest.raises(ValueError):
        canonical_code(3, [(0, 1), (1, 0)])


@given(prufer, st.randoms(use_true_random=False))
def test_code_invariant_under_relabeling(seq, rnd):
    p, edges = prufer_tree(seq)
    perm = list(range(p))
    rnd.shuffle(perm)
    assert canonical_code(p, edges) == canonical_code(p, relabel(edges, perm))


@given(prufer, prufer)
def test_code_equality_is_isomorphism(s1, s2):
    p1, e1 = prufer_tree(s1)
    p2, e2 = prufer_tree(s2)
    if p1 != p2:
        return
    assert (canonical_code(p1, e1) == canonical_code(p2, e2)) == isomorphic(p1, e1, e2)


def test_all_six_vertex_trees_brute_force():
    shapes = enumerate_trees(6)
    assert len(shapes) == 6
    for a, b in itertools.combinations(shapes, 2):
        assert not isomorphic(6, a.edges, b.edges)


def test_representative_is_parent_ordered():
    for p in range(2, 8):
        for s in enumerate_trees(p):
            assert all(a < b for a, b in s.edges)
            assert TreeShape.from_edges(p, s.edges) is s


def test_enumeration_counts():
    for p, count in UNLABELED_TREES.items():
        assert len(enumerate_trees(p)) == count


def test_graft_examples():
    one = TreeTerm(Fraction(1), POINT)
    edge = graft(one, 0, one, 0)
    assert edge.coefficient == 1 and edge.shape.p == 2
    q1 = TreeTerm(Fraction(1, 2), edge.shape)
    for v in (0, 1):
        t = graft(q1, v, one, 0)
        assert t.coefficient == Fraction(-1, 2)
        assert t.shape.code == canonical_code(3, [(0, 1), (1, 2)])
    path = TreeTerm(Fraction(1), TreeShape.from_edges(3, [(0, 1), (1, 2)]))
    middle = path.shape.degrees.index(2)
    assert graft(path, middle, one, 0).coefficient == -2
    with pytest.raises(IndexError):
        graft(path, 3, one, 0)


def test_layer_examples():
    assert q_layer(1).coefficients() == {canonical_code(2, [(0, 1)]): Fraction(1, 2)}
    assert q_layer(2).coefficients() == {canonical_code(3, [(0, 1), (1, 2)]): Fraction(-1, 2)}
    assert q_layer(3).coefficients() == {
        canonical_code(4, [(0, 1), (0, 2), (0, 3)]): Fraction(1, 3),
        canonical_code(4, [(0, 1), (1, 2), (2, 3)]): Fraction(1, 2),
    }
    assert q_layer(4).coefficients() == {
        canonical_code(5, [(0, 1), (1, 2), (2, 3), (3, 4)]): Fraction(-1, 2),
        canonical_code(5, [(0, 1), (1, 2), (2, 3), (1, 4)]): Fraction(-1),
        canonical_code(5, [(0, 1), (0, 2), (0, 3), (0, 4)]): Fraction(-1, 4),
    }


def test_layer_order_cap():
    with pytest.raises(OrderCapExceeded):
        q_layer(9)
    with pytest.raises(ValueError):
        q_layer(-1)
    assert q_layer(0).coefficients() == {POINT.code: 1}


def test_table_examples():
    rows, summary = coefficient_table(5)
    assert [r.coefficient for r in rows if r.m == 2] == [Fraction(-1, 2)]
    five = sorted(r.coefficient for r in rows if r.m == 5)
    assert five == sorted([Fraction(1, 2), 1, 1, Fraction(1, 2), 1, Fraction(1, 5)])
    assert summary[3].signed_sum == Fraction(-7, 4)
    assert [s.shape_count for s in summary] == [1, 1, 2, 3, 6]
    assert all(s.shape_count == s.tree_count for s in summary)


@pytest.mark.parametrize("m", range(1, 9))
def test_sign_pattern_and_catalan_sum(m):
    layer = q_layer(m)
    sign = (-1) ** (m + 1)
    assert all(c * sign > 0 for _, c in layer.terms)
    catalan = Fraction(math.comb(2 * m, m), m + 1)
    assert layer.signed_sum() == sign * catalan / (2 * m)


def test_shape_counts_beyond_five_reported():
    _, summary = coefficient_table(8)
    assert [s.shape_count for s in summary[5:]] == [11, 23, 47]


@pytest.mark.parametrize("m,value", [(1, Fraction(1, 2)), (2, Fraction(-1, 2)), (3, Fraction(5, 6)), (4, Fraction(-7, 4)), (5, Fraction(21, 5))])
def test_single_hyperplane_values(m, value):
    assert evaluate_layer(q_layer(m), SINGLE, (1,)) == value


def test_single_hyperplane_gradients():
    assert evaluate_layer_gradient(q_layer(1), SINGLE, (1,)) == (-1,)
    assert evaluate_layer_gradient(q_layer(2), SINGLE, (1,)) == (2,)
    # homogeneity: Q^[m] ~ z^(-2m)
    z = Fraction(3, 2)
    for m in range(1, 5):
        assert evaluate_layer(q_layer(m), SINGLE, (z,)) == evaluate_layer(q_layer(m), SINGLE, (1,)) * z ** (-2 * m)


def chamber_points(count, seed):
    rnd = random.Random(seed)
    out = []
    while len(out) < count:
        z = (Fraction(rnd.randint(-40, 40), 8), Fraction(rnd.randint(-40, 40), 8))
        if all(abs(linear_form(h, z)) > Fraction(1, 4) for h in THREE.hyperplanes):
            out.append(z)
    return out


@pytest.mark.parametrize("z", chamber_points(4, 11))
def test_first_layers_match_direct_sums(z):
    assert evaluate_layer(q_layer(1), THREE, z) == q1_direct(THREE, z)
    assert evaluate_layer(q_layer(2), THREE, z) == q2_direct(THREE, z)
    assert evaluate_layer(q_layer(2), THREE, z) != q2_direct(THREE, z, repeated_k=True)


@pytest.mark.parametrize("z", chamber_points(3, 5))
def test_numeric_recurrence(z):
    with mpmath.workdps(50):
        zr = tuple(mpf(c.numerator) / c.denominator for c in z)
        grads = [grad_P(THREE, zr)] + [evaluate_layer_gradient(q_layer(m), THREE, zr) for m in range(1, 5)]
        for m in range(1, 6):
            lhs = m * evaluate_layer(q_layer(m), THREE, zr)
            rhs = sum(dot(grads[i], grads[m - 1 - i]) for i in range(m)) / 2
            assert abs(lhs - rhs) <= mpf(10) ** -30 * max(1, abs(lhs))


@pytest.mark.parametrize("z", chamber_points(2, 7))
def test_gradient_and_hessian_match_finite_differences(z):
    with mpmath.workdps(50):
        zr = tuple(mpf(c.numerator) / c.denominator for c in z)
        h = mpf(10) ** -12
        for m in (1, 3):
            layer = q_layer(m)
            g = evaluate_layer_gradient(layer, THREE, zr)
            H = evaluate_layer_hessian(layer, THREE, zr)
            for i in range(2):
                up, dn = list(zr), list(zr)
                up[i] += h
                dn[i] -= h
                fd = (evaluate_layer(layer, THREE, up) - evaluate_layer(layer, THREE, dn)) / (2 * h)
                assert abs(fd - g[i]) < mpf(10) ** -18
                gup = evaluate_layer_gradient(layer, THREE, up)
                gdn = evaluate_layer_gradient(layer, THREE, dn)
                for j in range(2):
                    assert abs((gup[j] - gdn[j]) / (2 * h) - H[j][i]) < mpf(10) ** -18


@given(st.fractions(min_value=Fraction(1, 10), max_value=5, max_denominator=10), st.integers(1, 4))
def test_weight_scaling(s, m):
    z = (Fraction(3), Fraction(-5, 2))
    layer = q_layer(m)
    assert evaluate_layer(layer, THREE.scaled(s), z) == s ** (m + 1) * evaluate_layer(layer, THREE, z)


def test_dot_output():
    shape = q_layer(1).items().__next__()[0]
    dot_text = shape.to_dot("Q1_0", "1/2")
    assert dot_text.startswith("graph Q1_0 {")
    assert 'label="1/2";' in dot_text
    assert "0 -- 1;" in dot_text and "->" not in dot_text
