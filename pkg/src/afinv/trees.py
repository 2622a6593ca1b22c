"""Tree expansion of the Hamilton-Jacobi layers ``Q^[m]``.

The layers obey ``m Q^[m] = 1/2 sum_{i+j=m-1} <grad Q^[i], grad Q^[j]>`` with
``Q^[0] = P``.  Every ``Q^[m]`` (m >= 1) is a rational combination of tree
terms.  A tree on vertices ``v`` with edges ``E`` stands for

    sum over (h_v) in A^(#v) of  prod_v lam_{h_v} * prod_{(a,b) in E} <u_{h_a}, u_{h_b}> / (f_{h_a} f_{h_b}),

so a vertex of degree d carries ``f^-d``.  Differentiating such a vertex
gives ``-d u / f`` times the term, while the single-vertex term ``P`` gives
``+u/f``.  The dot product of two gradients therefore joins one vertex of
each tree by a new edge, weighted by ``eps(d1) eps(d2)`` with ``eps(0) = 1``
and ``eps(d) = -d``: that is :func:`graft`.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .arrangement import Arrangement, OnWallError, coerce, dot, grad_P, hessian_P, linear_form, potential_P

ORDER_CAP = 8
LABELING_BUDGET = 10**7


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, budget: int):
        super().__init__(f"evaluation needs {required} labelings, budget is {budget}")
        self.required = required
        self.budget = budget


class OrderCapExceeded(ValueError):
    pass


# ---------------------------------------------------------------------------
# Shapes and canonical codes


def _adjacency(p: int, edges) -> list[list[int]]:
    adj = [[] for _ in range(p)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    return adj


def _check_tree(p: int, edges) -> None:
    if p < 1:
        raise ValueError("a tree needs at least one vertex")
    if len(edges) != p - 1:
        raise ValueError(f"{p} vertices need {p - 1} edges, got {len(edges)}")
    for a, b in edges:
        if not (0 <= a < p and 0 <= b < p) or a == b:
            raise ValueError(f"bad edge ({a}, {b})")
    adj = _adjacency(p, edges)
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) != p:
        raise ValueError("graph is disconnected (or has a cycle)")


def _centroids(p: int, adj) -> list[int]:
    size = [1] * p
    parent = [-1] * p
    order = [0]
    seen = [False] * p
    seen[0] = True
    for v in order:
        for w in adj[v]:
            if not seen[w]:
                seen[w] = True
                parent[w] = v
                order.append(w)
    for v in reversed(order[1:]):
        size[parent[v]] += size[v]
    best, out = p, []
    for v in range(p):
        heaviest = p - size[v]
        for w in adj[v]:
            if w != parent[v]:
                heaviest = max(heaviest, size[w])
        if heaviest < best:
            best, out = heaviest, [v]
        elif heaviest == best:
            out.append(v)
    return out


def _rooted_code(adj, root: int, parent: int = -1) -> str:
    return "(" + "".join(sorted(_rooted_code(adj, w, root) for w in adj[root] if w != parent)) + ")"


def canonical_code(p: int, edges) -> str:
    """Centroid-rooted parenthesis code; equal for exactly the isomorphic trees."""
    _check_tree(p, edges)
    adj = _adjacency(p, edges)
    return min(_rooted_code(adj, c) for c in _centroids(p, adj))


def _decode(code: str) -> tuple[int, list]:
    edges, stack, p = [], [], 0
    for ch in code:
        if ch == "(":
            if stack:
                edges.append((stack[-1], p))
            stack.append(p)
            p += 1
        else:
            stack.pop()
    return p, edges


def _preorder_labeling(p: int, edges) -> tuple:
    """Relabel so vertex 0 ends a longest path and every other vertex follows its parent.

    Children are visited in order of their subtree codes, making the result
    a function of the isomorphism class only.
    """
    adj = _adjacency(p, edges)
    dist = {0: 0}
    queue = [0]
    for v in queue:
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    far = max(dist.values())
    cands = [v for v, d in dist.items() if d == far]
    root = min(cands, key=lambda v: (_rooted_code(adj, v), v))
    label = {}
    new_edges = []

    def visit(v, parent):
        label[v] = len(label)
        if parent >= 0:
            new_edges.append((label[parent], label[v]))
        kids = sorted((w for w in adj[v] if w != parent), key=lambda w: _rooted_code(adj, w, v))
        for w in kids:
            visit(w, v)

    visit(root, -1)
    return tuple(new_edges)


@dataclass(frozen=True)
class TreeShape:
    """An unlabeled tree with a fixed representative labeling.

    In the representative every vertex ``v > 0`` is joined to exactly one
    earlier vertex, its parent.
    """

    p: int
    edges: tuple
    code: str

    @classmethod
    def from_edges(cls, p: int, edges: Iterable) -> "TreeShape":
        code = canonical_code(p, [tuple(e) for e in edges])
        return shape_for_code(code)

    @property
    def degrees(self) -> tuple:
        deg = [0] * self.p
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return tuple(deg)

    @property
    def parents(self) -> tuple:
        par = [-1] * self.p
        for a, b in self.edges:
            par[b] = a
        return tuple(par)

    @property
    def degree_profile(self) -> tuple:
        return tuple(sorted(self.degrees, reverse=True))

    def to_dot(self, name: str, label: str = "") -> str:
        lines = [f"graph {name} {{"]
        if label:
            lines.append(f'  label="{label}";')
        lines.extend(f"  {v};" for v in range(self.p))
        lines.extend(f"  {a} -- {b};" for a, b in self.edges)
        lines.append("}")
        return "\n".join(lines)


@functools.lru_cache(maxsize=None)
def shape_for_code(code: str) -> TreeShape:
    p, edges = _decode(code)
    edges = _preorder_labeling(p, edges) if p > 1 else ()
    return TreeShape(p, tuple(sorted(edges, key=lambda e: e[1])), code)


POINT = shape_for_code("()")


@functools.lru_cache(maxsize=None)
def enumerate_trees(p: int) -> tuple[TreeShape, ...]:
    """All unlabeled trees on ``p`` vertices, by leaf addition and deduplication."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if p == 1:
        return (POINT,)
    codes = set()
    for t in enumerate_trees(p - 1):
        for v in range(t.p):
            codes.add(canonical_code(p, list(t.edges) + [(v, t.p)]))
    return tuple(shape_for_code(c) for c in sorted(codes))


# ---------------------------------------------------------------------------
# Terms, grafting, layers


@dataclass(frozen=True)
class TreeTerm:
    coefficient: Fraction
    shape: TreeShape


def _eps(d: int) -> int:
    return 1 if d == 0 else -d


def graft(t1: TreeTerm, v1: int, t2: TreeTerm, v2: int) -> TreeTerm:
    """Join ``v1`` of ``t1`` to ``v2`` of ``t2``: one summand of ``<grad t1, grad t2>``."""
    s1, s2 = t1.shape, t2.shape
    if not (0 <= v1 < s1.p and 0 <= v2 < s2.p):
        raise IndexError("marked vertex outside its tree")
    d1, d2 = s1.degrees[v1], s2.degrees[v2]
    p = s1.p + s2.p
    edges = list(s1.edges) + [(a + s1.p, b + s1.p) for a, b in s2.edges] + [(v1, v2 + s1.p)]
    coeff = Fraction(t1.coefficient) * t2.coefficient * _eps(d1) * _eps(d2)
    return TreeTerm(coeff, shape_for_code(canonical_code(p, edges)))


@dataclass(frozen=True)
class QLayer:
    """``Q^[order]`` as canonical code -> exact coefficient (no zero entries).

    ``order == 0`` is the single-vertex term standing for ``P`` itself.
    """

    order: int
    terms: tuple  # ((code, Fraction), ...) sorted by code

    def coefficients(self) -> dict:
        return dict(self.terms)

    def items(self):
        for code, c in self.terms:
            yield shape_for_code(code), c

    def __len__(self) -> int:
        return len(self.terms)

    def signed_sum(self) -> Fraction:
        return sum((c for _, c in self.terms), Fraction(0))


def _layer_terms(layer: QLayer):
    for shape, c in layer.items():
        yield TreeTerm(c, shape)


@functools.lru_cache(maxsize=None)
def _build_layer(m: int) -> QLayer:
    if m == 0:
        return QLayer(0, ((POINT.code, Fraction(1)),))
    acc: dict = {}
    for i in range(m):
        j = m - 1 - i
        for t1 in _layer_terms(_build_layer(i)):
            for t2 in _layer_terms(_build_layer(j)):
                for v1 in range(t1.shape.p):
                    for v2 in range(t2.shape.p):
                        g = graft(t1, v1, t2, v2)
                        acc[g.shape.code] = acc.get(g.shape.code, Fraction(0)) + g.coefficient
    scale = Fraction(1, 2 * m)
    terms = tuple(sorted((code, c * scale) for code, c in acc.items() if c != 0))
    sign = 1 if m % 2 == 1 else -1
    for code, c in terms:
        if (c > 0) - (c < 0) != sign:
            raise RuntimeError(f"layer {m}: coefficient {c} of {code} breaks the sign pattern (-1)^(m+1)")
    return QLayer(m, terms)


def q_layer(m: int, cap: int = ORDER_CAP) -> QLayer:
    """Exact layer ``Q^[m]`` from the recurrence, memoized."""
    if m < 0:
        raise ValueError("layer order must be >= 0")
    if m > cap:
        raise OrderCapExceeded(f"layer {m} exceeds the order cap {cap}")
    return _build_layer(m)


@dataclass(frozen=True)
class TableRow:
    m: int
    code: str
    coefficient: Fraction
    degree_profile: tuple
    edges: tuple


@dataclass(frozen=True)
class LayerSummary:
    m: int
    shape_count: int
    tree_count: int
    signed_sum: Fraction


def coefficient_table(m_max: int, cap: int = ORDER_CAP) -> tuple[list[TableRow], list[LayerSummary]]:
    rows, summary = [], []
    for m in range(1, m_max + 1):
        layer = q_layer(m, cap)
        for shape, c in layer.items():
            rows.append(TableRow(m, shape.code, c, shape.degree_profile, shape.edges))
        summary.append(LayerSummary(m, len(layer), len(enumerate_trees(m + 1)), layer.signed_sum()))
    return rows, summary


# ---------------------------------------------------------------------------
# Numeric evaluation on an arrangement


def _labelings_required(layer: QLayer, nA: int) -> int:
    return sum(nA ** shape.p for shape, _ in layer.items())


class _Factors:
    """Per-point caches: ``1/f_h``, ``lam_h`` and edge factors ``<u_a,u_b>/(f_a f_b)``."""

    def __init__(self, arr: Arrangement, z):
        fs = []
        for i, h in enumerate(arr.hyperplanes):
            f = linear_form(h, z)
            if f == 0:
                raise OnWallError(f"point lies on hyperplane {i}")
            fs.append(f)
        self.inv = [1 / f for f in fs]
        self.lam = [h.lam for h in arr.hyperplanes]
        self.u = [h.u for h in arr.hyperplanes]
        nA = len(fs)
        self.edge = [
            [dot(self.u[a], self.u[b]) * self.inv[a] * self.inv[b] for b in range(nA)] for a in range(nA)
        ]
        # u_h / f_h, the building block of every gradient
        self.uf = [tuple(c * self.inv[h] for c in self.u[h]) for h in range(nA)]


def _labelings(shape: TreeShape, F: _Factors):
    """Yield ``(labels, value)`` for every labeling of the representative tree."""
    nA = len(F.lam)
    parents = shape.parents
    p = shape.p
    labels = [0] * p

    def rec(v, acc):
        if v == p:
            yield labels, acc
            return
        par = parents[v]
        for h in range(nA):
            labels[v] = h
            val = acc * F.lam[h]
            if par >= 0:
                val = val * F.edge[labels[par]][h]
            yield from rec(v + 1, val)

    yield from rec(0, 1)


def _prepare(layer: QLayer, arr: Arrangement, z, budget: int):
    need = _labelings_required(layer, len(arr))
    if need > budget:
        raise BudgetExceeded(need, budget)
    arr, (z,) = coerce(arr, tuple(z))
    return arr, z, _Factors(arr, z)


def evaluate_layer(layer: QLayer, arr: Arrangement, z, budget: int = LABELING_BUDGET):
    """``Q^[m](z)``: exact for rational data, mpf otherwise."""
    if layer.order == 0:
        return potential_P(arr, z)
    arr, z, F = _prepare(layer, arr, z, budget)
    total = 0
    for shape, c in layer.items():
        s = 0
        for _, val in _labelings(shape, F):
            s += val
        total += c * s
    return total


def evaluate_layer_gradient(layer: QLayer, arr: Arrangement, z, budget: int = LABELING_BUDGET) -> tuple:
    """``grad Q^[m](z)``: each labeling contributes ``value * (-sum_v deg(v) u_{h_v} / f_{h_v})``."""
    if layer.order == 0:
        return grad_P(arr, z)
    arr, z, F = _prepare(layer, arr, z, budget)
    n = arr.n
    out = [0] * n
    for shape, c in layer.items():
        deg = shape.degrees
        acc = [0] * n
        for labels, val in _labelings(shape, F):
            for v, h in enumerate(labels):
                w = val * deg[v]
                uf = F.uf[h]
                for i in range(n):
                    acc[i] += w * uf[i]
        for i in range(n):
            out[i] -= c * acc[i]
    return tuple(out)


def evaluate_layer_hessian(layer: QLayer, arr: Arrangement, z, budget: int = LABELING_BUDGET) -> tuple:
    """Second derivatives of ``Q^[m]``.

    Per labeling with ``S = sum_v deg(v) u/f`` the Hessian is
    ``value * (S S^T + sum_v deg(v) (u/f)(u/f)^T)``.
    """
    if layer.order == 0:
        return hessian_P(arr, z)
    arr, z, F = _prepare(layer, arr, z, budget)
    n = arr.n
    out = [[0] * n for _ in range(n)]
    for shape, c in layer.items():
        deg = shape.degrees
        for labels, val in _labelings(shape, F):
            S = [0] * n
            for v, h in enumerate(labels):
                for i in range(n):
                    S[i] += deg[v] * F.uf[h][i]
            for i in range(n):
                for j in range(n):
                    extra = 0
                    for v, h in enumerate(labels):
                        extra += deg[v] * F.uf[h][i] * F.uf[h][j]
                    out[i][j] += c * val * (S[i] * S[j] + extra)
    return tuple(tuple(r) for r in out)


# ---------------------------------------------------------------------------
# Direct double and triple sums for the first two layers


def q1_direct(arr: Arrangement, z):
    """``1/2 sum_{h,k} lam_h lam_k <u_h,u_k> / (f_h f_k)``."""
    arr, (z,) = coerce(arr, tuple(z))
    hs = arr.hyperplanes
    f = [linear_form(h, z) for h in hs]
    total = 0
    for a, ha in enumerate(hs):
        for b, hb in enumerate(hs):
            total += ha.lam * hb.lam * dot(ha.u, hb.u) / (f[a] * f[b])
    return total / 2


def q2_direct(arr: Arrangement, z, repeated_k: bool = False):
    """``-1/2 sum_{h,k,l} lam_h lam_k lam_l <u_h,u_k><u_h,u_l> / (f_h^2 f_k f_l)``.

    ``repeated_k=True`` swaps in the denominator ``f_k f_h^2 f_k``, a variant
    that the recurrence does not produce.
    """
    arr, (z,) = coerce(arr, tuple(z))
    hs = arr.hyperplanes
    f = [linear_form(h, z) for h in hs]
    total = 0
    idx = range(len(hs))
    for h, k, l in itertools.product(idx, idx, idx):
        num = hs[h].lam * hs[k].lam * hs[l].lam * dot(hs[h].u, hs[k].u) * dot(hs[h].u, hs[l].u)
        den = f[k] * f[h] ** 2 * (f[k] if repeated_k else f[l])
        total += num / den
    return -total / 2
