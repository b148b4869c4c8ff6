"""Circuit-to-circuit passes: binarization, normalization, partial
derivatives, depth reduction, and tree expansion.

The depth reducer rewrites a binary, valid circuit band by band over
node degrees.  Degree-one nodes and all derivative gates at degree gap
at most one are realized directly as sums over indicator leaves; band
``i`` then covers degrees in ``(2**i, 2**(i+1)]``.  Within a band, a
node's polynomial is re-expressed as a sum over the *frontier* products
below it (products whose own degree exceeds the band threshold ``m``
while both children stay at or below it)::

    f(v)       = sum over frontier t below v   of  f(t1) * f(t2) * d_t f(v)
    d_w f(u)   = sum over frontier t below u   of  f(t2) * d_w f(t1) * d_t f(u)

where ``d_w f(u)`` is the partial derivative of ``u``'s polynomial with
respect to the polynomial of its descendant ``w``, and the second
expansion uses the frontier at threshold ``m = 2**i + deg(w)`` with
``t1`` the higher-degree child of ``t``.  Every factor on the right is a
gate built by an earlier band (or, for ``f(t2)``, earlier in the same
band), so each band adds two levels and the result has depth
logarithmic in the root degree.  Constant-valued gates are never
materialized: they fold into the edge weights of the sums that use them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .circuit import Circuit, Leaf, Node, Product, Sum, _bits
from .errors import (
    DanglingChild,
    InvalidInput,
    MissingGate,
    NotBinary,
    NotHomogeneous,
    SizeBudgetExceeded,
    TermBudgetExceeded,
    ZeroWeightSum,
)
from .poly import SparsePolynomial, term_budget

#: Default node budget for tree expansion; the worst case is exponential
#: in the depth of the input, so expansion is always pre-counted.
DEFAULT_TREE_BUDGET = 10 ** 7


@dataclass(frozen=True)
class GateKey:
    """Identity of a rebuilt gate: the value of source node ``node`` when
    ``wrt`` is None, otherwise the partial derivative of ``node``'s
    polynomial with respect to descendant ``wrt``."""

    node: int
    wrt: int | None = None

    def __repr__(self) -> str:
        if self.wrt is None:
            return f"value({self.node})"
        return f"derivative({self.node}, {self.wrt})"


@dataclass(frozen=True)
class FrontierSet:
    """Product nodes of degree above ``m`` whose children both have
    degree at most ``m``; the pivot set for the band expansions."""

    m: int
    members: frozenset[int]


@dataclass(frozen=True)
class StageMetrics:
    stage: str
    nodes: int
    edges: int
    depth: int


@dataclass(frozen=True)
class PipelineReport:
    """Size/depth measurements after every pipeline stage."""

    stages: tuple[StageMetrics, ...]
    root_constant: float | None = None

    def to_text(self) -> str:
        lines = []
        for s in self.stages:
            lines.append(f"{s.stage}.nodes={s.nodes}")
            lines.append(f"{s.stage}.edges={s.edges}")
            lines.append(f"{s.stage}.depth={s.depth}")
        if self.root_constant is not None:
            lines.append(f"root_constant={self.root_constant!r}")
        return "\n".join(lines) + "\n"

    def to_csv(self) -> str:
        lines = ["stage,nodes,edges,depth"]
        lines.extend(f"{s.stage},{s.nodes},{s.edges},{s.depth}" for s in self.stages)
        return "\n".join(lines) + "\n"


def stage_metrics(stage: str, c: Circuit) -> StageMetrics:
    s = c.stats()
    return StageMetrics(stage, s.num_nodes, s.num_edges, s.depth)


# ---------------------------------------------------------------------------
# binarize
# ---------------------------------------------------------------------------

def binarize(c: Circuit) -> Circuit:
    """Rewrite every node with more than two children into a chain of
    alternating sum/product intermediates, preserving the polynomial.

    A k-ary node keeps its first child and hands the rest to a chain of
    2(k-1) fresh nodes whose types alternate, so no introduced sum feeds
    a sum and no introduced product feeds a product.  Already-binary
    circuits are returned unchanged.
    """
    report = c.validity()
    if not report.ok:
        raise InvalidInput("binarize requires a decomposable, smooth circuit")
    if c.is_binary():
        return c
    nodes: list[Node] = list(c.nodes)

    def add(node: Node) -> int:
        nodes.append(node)
        return len(nodes) - 1

    for v, node in enumerate(c.nodes):
        if isinstance(node, Leaf) or len(node.children) <= 2:
            continue
        kids = node.children
        if isinstance(node, Sum):
            tail = add(Product((add(Sum((kids[-1],), (node.weights[-1],))),)))
            for j in range(len(kids) - 2, 0, -1):
                tail = add(Product((add(Sum((kids[j], tail), (node.weights[j], 1.0))),)))
            nodes[v] = Sum((kids[0], tail), (node.weights[0], 1.0))
        else:
            tail = add(Sum((add(Product((kids[-1],))),), (1.0,)))
            for j in range(len(kids) - 2, 0, -1):
                tail = add(Sum((add(Product((kids[j], tail))),), (1.0,)))
            nodes[v] = Product((kids[0], tail))
    return Circuit(c.num_vars, nodes, c.root)


# ---------------------------------------------------------------------------
# normalize
# ---------------------------------------------------------------------------

def normalize(c: Circuit) -> tuple[Circuit, float]:
    """Renormalize locally, pushing excess weight upward.

    Every sum's outgoing weights are divided by their (scale-adjusted)
    total, and the total propagates to the parents; the returned constant
    satisfies ``evaluate(old, a) == constant * evaluate(new, a)`` for
    every assignment.
    """
    scale = [1.0] * len(c.nodes)
    nodes: list[Node] = list(c.nodes)
    for v in c.topo_order:
        node = c.nodes[v]
        if isinstance(node, Sum):
            eff = [w * scale[ch] for ch, w in zip(node.children, node.weights)]
            total = sum(eff)
            if total <= 0.0:
                raise ZeroWeightSum(f"sum {v} has no positive outgoing weight")
            nodes[v] = Sum(node.children, tuple(e / total for e in eff))
            scale[v] = total
        elif isinstance(node, Product):
            acc = 1.0
            for ch in node.children:
                acc *= scale[ch]
            scale[v] = acc
    return Circuit(c.num_vars, nodes, c.root), scale[c.root]


# ---------------------------------------------------------------------------
# partial derivatives
# ---------------------------------------------------------------------------

class _LazyPolys:
    """Memoized exact node polynomials, expanded only on demand."""

    def __init__(self, c: Circuit, cap: int):
        self.c = c
        self.cap = cap
        self.memo: dict[int, SparsePolynomial] = {}

    def get(self, s: int) -> SparsePolynomial:
        memo = self.memo
        if s in memo:
            return memo[s]
        c = self.c
        pending = [u for u in _bits(c.descendant_masks[s]) if u not in memo]
        pending.sort(key=c.topo_positions.__getitem__)
        for u in pending:
            node = c.nodes[u]
            if isinstance(node, Leaf):
                p = SparsePolynomial.indicator(c.num_vars, node.var, node.negated)
            elif isinstance(node, Sum):
                p = SparsePolynomial.zero(c.num_vars)
                for ch, w in zip(node.children, node.weights):
                    p = p.add(memo[ch], w)
            else:
                p = SparsePolynomial.constant(c.num_vars, 1.0)
                for ch in node.children:
                    p = p.mul(memo[ch], max_terms=self.cap)
            if len(p.terms) > self.cap:
                raise TermBudgetExceeded(f"node {u} expands past {self.cap} monomials")
            memo[u] = p
        return memo[s]


def _ancestor_derivatives(c: Circuit, w: int, cap: int, gap_limit: int | None = None,
                          within: int | None = None,
                          polys: _LazyPolys | None = None) -> dict[int, SparsePolynomial]:
    """Partial derivatives ``d_w f(u)`` for ancestors ``u`` of ``w``.

    Substitutes an atom for ``w``'s polynomial and propagates the atom's
    linear coefficient upward; the co-factor (the untouched sibling
    polynomial) is expanded lazily, so the cost scales with the size of
    the derivatives rather than of the full polynomials.  ``gap_limit``
    restricts the result to ancestors whose degree exceeds ``deg(w)`` by
    at most that much; ``within`` restricts to a node-id bitmask.
    """
    deg = c.degrees
    desc = c.descendant_masks
    dw = deg[w]
    polys = polys or _LazyPolys(c, cap)
    alpha: dict[int, SparsePolynomial] = {w: SparsePolynomial.constant(c.num_vars, 1.0)}
    candidates = _bits(c.ancestor_masks[w] if within is None else c.ancestor_masks[w] & within)
    candidates.sort(key=c.topo_positions.__getitem__)
    for u in candidates:
        if u == w or (gap_limit is not None and deg[u] - dw > gap_limit):
            continue
        node = c.nodes[u]
        if isinstance(node, Sum):
            p = SparsePolynomial.zero(c.num_vars)
            for ch, wt in zip(node.children, node.weights):
                a = alpha.get(ch)
                if a is not None:
                    p = p.add(a, wt)
        else:
            # product rule; decomposability means at most one child can
            # reach w, but the sum over children stays correct without it
            p = SparsePolynomial.zero(c.num_vars)
            for j, ch in enumerate(node.children):
                a = alpha.get(ch)
                if a is None or a.is_zero():
                    continue
                term = a
                for i, other in enumerate(node.children):
                    if i != j:
                        term = term.mul(polys.get(other), max_terms=cap)
                p = p.add(term)
        alpha[u] = p
    return alpha


def partial_derivative(c: Circuit, v: int, w: int,
                       budget: int | None = None) -> SparsePolynomial:
    """Exact partial derivative of ``v``'s polynomial with respect to the
    polynomial of node ``w`` (the zero polynomial when ``w`` is not a
    descendant of ``v``)."""
    n = len(c.nodes)
    if not 0 <= v < n or not 0 <= w < n:
        raise DanglingChild(f"node ids ({v}, {w}) outside table of {n} nodes")
    if v == w:
        return SparsePolynomial.constant(c.num_vars, 1.0)
    if not c.is_descendant(v, w):
        return SparsePolynomial.zero(c.num_vars)
    cap = term_budget(budget)
    alphas = _ancestor_derivatives(c, w, cap, within=c.descendant_masks[v])
    return alphas.get(v, SparsePolynomial.zero(c.num_vars))


# ---------------------------------------------------------------------------
# degree frontier
# ---------------------------------------------------------------------------

def degree_frontier(c: Circuit, m: int) -> FrontierSet:
    """All products straddling degree threshold ``m``: their own degree
    exceeds ``m`` while neither child's does."""
    if m < 1:
        raise ValueError("threshold m must be >= 1")
    if not c.is_binary():
        raise NotBinary("the degree frontier is defined for binary circuits")
    deg = c.degrees
    members = frozenset(
        v for v, node in enumerate(c.nodes)
        if isinstance(node, Product) and len(node.children) == 2
        and deg[v] > m and max(deg[ch] for ch in node.children) <= m)
    return FrontierSet(m, members)


# ---------------------------------------------------------------------------
# depth reduction
# ---------------------------------------------------------------------------

class _Arena:
    """Append-only node store for the circuit under construction."""

    def __init__(self) -> None:
        self.nodes: list[Node] = []
        self._leaves: dict[tuple[int, bool], int] = {}

    def add(self, node: Node) -> int:
        self.nodes.append(node)
        return len(self.nodes) - 1

    def leaf(self, var: int, negated: bool = False) -> int:
        key = (var, negated)
        if key not in self._leaves:
            self._leaves[key] = self.add(Leaf(var, negated))
        return self._leaves[key]

    def product(self, children: list[int]) -> int:
        return self.add(Product(tuple(children)))

    def sum_(self, pairs: list[tuple[int, float]]) -> int:
        return self.add(Sum(tuple(p for p, _ in pairs), tuple(w for _, w in pairs)))

    def affine_gate(self, p: SparsePolynomial) -> int | float:
        """Realize a polynomial of degree <= 1: constants (including the
        zero polynomial) stay plain floats, linear forms become a sum
        over the matching indicator leaves."""
        if p.is_constant():
            return p.constant_value()
        pairs = []
        for m, coeff in p.sorted_terms():
            if m.bit_count() != 1:
                raise NotHomogeneous("affine gate mixes a constant with linear terms")
            s = m.bit_length() - 1
            pairs.append((self.leaf(s // 2, bool(s % 2)), coeff))
        return self.sum_(pairs)


def _resolve(gates: dict[GateKey, int | float],
             keys: tuple[GateKey, ...]) -> tuple[list[int], float] | None:
    """Split gate references into node children and a folded constant
    weight; None when any factor is the constant zero."""
    weight = 1.0
    kids: list[int] = []
    for key in keys:
        got = gates.get(key)
        if got is None:
            raise MissingGate(f"{key} was not built by an earlier band")
        if isinstance(got, float):
            if got == 0.0:
                return None
            weight *= got
        else:
            kids.append(got)
    return kids, weight


def _order_product_children(a: int, b: int, w: int, deg, desc) -> tuple[int, int]:
    # heavier child first; ties broken toward the child that can reach w,
    # then by id, so the derivative factor flows through the first child
    if deg[a] != deg[b]:
        return (a, b) if deg[a] > deg[b] else (b, a)
    in_a = a == w or bool(desc[a] >> w & 1)
    in_b = b == w or bool(desc[b] >> w & 1)
    if in_a != in_b:
        return (a, b) if in_a else (b, a)
    return (a, b) if a < b else (b, a)


def reduce_depth(circuit: Circuit) -> Circuit:
    """Rebuild a binary valid circuit with the same polynomial and depth
    logarithmic in its root degree (see the module docstring for the
    band construction)."""
    if not circuit.is_binary():
        raise NotBinary("depth reduction requires fan-out <= 2; binarize first")
    report = circuit.validity()
    if not (report.decomposable and report.smooth and report.homogeneous):
        failed = [name for name in ("decomposable", "smooth", "homogeneous")
                  if not getattr(report, name)]
        raise NotHomogeneous(
            f"depth reduction requires a valid homogeneous circuit (failed: {', '.join(failed)})")

    deg = circuit.degrees
    desc = circuit.descendant_masks
    n_nodes = len(circuit.nodes)
    cap = term_budget(None)
    arena = _Arena()
    gates: dict[GateKey, int | float] = {}
    polys = _LazyPolys(circuit, cap)

    # pre-pass values: indicator leaves, then every degree-one node as a
    # sum over the two indicators of its single variable
    lin: dict[int, tuple[float, float, int]] = {}
    for v in circuit.topo_order:
        if deg[v] != 1:
            continue
        node = circuit.nodes[v]
        if isinstance(node, Leaf):
            lin[v] = (0.0, 1.0, node.var) if node.negated else (1.0, 0.0, node.var)
            gates[GateKey(v)] = arena.leaf(node.var, node.negated)
            continue
        if isinstance(node, Sum):
            pos = neg = 0.0
            var = lin[node.children[0]][2]
            for ch, wt in zip(node.children, node.weights):
                pos += wt * lin[ch][0]
                neg += wt * lin[ch][1]
        else:  # a degree-one product is a single-child wire
            pos, neg, var = lin[node.children[0]]
        lin[v] = (pos, neg, var)
        pairs = [(arena.leaf(var, False), pos)] if pos else []
        if neg:
            pairs.append((arena.leaf(var, True), neg))
        gates[GateKey(v)] = arena.sum_(pairs) if pairs else 0.0

    # pre-pass derivative gates: all pairs at degree gap <= 1 (gap zero
    # folds to a constant, gap one is affine over a single variable)
    for w in range(n_nodes):
        dw = deg[w]
        shallow = _ancestor_derivatives(circuit, w, cap, gap_limit=1, polys=polys)
        for u in sorted(shallow):
            if deg[u] >= 2 * dw:
                continue
            gates[GateKey(u, w)] = 1.0 if u == w else arena.affine_gate(shallow[u])

    # frontier candidates, filtered per threshold on demand
    binary_products = [(t, node.children[0], node.children[1])
                       for t, node in enumerate(circuit.nodes)
                       if isinstance(node, Product) and len(node.children) == 2]
    frontier_cache: dict[int, list[tuple[int, int, int]]] = {}

    def frontier(m: int) -> list[tuple[int, int, int]]:
        got = frontier_cache.get(m)
        if got is None:
            got = [(t, a, b) for t, a, b in binary_products
                   if deg[t] > m and deg[a] <= m and deg[b] <= m]
            frontier_cache[m] = got
        return got

    d_root = deg[circuit.root]
    num_bands = (d_root - 1).bit_length() if d_root > 1 else 0
    for i in range(num_bands):
        lo, hi = 1 << i, 2 << i
        # band values
        front = frontier(lo)
        for v in range(n_nodes):
            if not lo < deg[v] <= hi:
                continue
            v_mask = desc[v]
            summands = []
            below = False
            for t, a, b in front:
                if not v_mask >> t & 1:
                    continue
                below = True
                folded = _resolve(gates, (GateKey(a), GateKey(b), GateKey(v, t)))
                if folded is None:
                    continue
                kids, weight = folded
                summands.append((arena.product(kids), weight))
            if not below:
                raise MissingGate(f"no frontier product below node {v} at threshold {lo}")
            gates[GateKey(v)] = arena.sum_(summands) if summands else 0.0
        # band derivative pairs
        for u in range(n_nodes):
            du = deg[u]
            u_mask = desc[u]
            for w in _bits(u_mask):
                gap = du - deg[w]
                if not lo < gap <= hi or du >= 2 * deg[w]:
                    continue
                m2 = lo + deg[w]
                summands = []
                below = False
                for t, a, b in frontier(m2):
                    if not u_mask >> t & 1:
                        continue
                    below = True
                    t1, t2 = _order_product_children(a, b, w, deg, desc)
                    if t1 != w and not desc[t1] >> w & 1:
                        continue  # derivative cannot flow through t1: zero summand
                    folded = _resolve(gates, (GateKey(t2), GateKey(t1, w), GateKey(u, t)))
                    if folded is None:
                        continue
                    kids, weight = folded
                    summands.append((arena.product(kids), weight))
                if not below:
                    raise MissingGate(f"no frontier product below node {u} at threshold {m2}")
                gates[GateKey(u, w)] = arena.sum_(summands) if summands else 0.0

    root_gate = gates.get(GateKey(circuit.root))
    if root_gate is None:
        raise MissingGate("value gate of the root was never built")
    if isinstance(root_gate, float):
        raise MissingGate("root gate folded to a constant")
    return _compact(arena, circuit.num_vars, root_gate)


def _compact(arena: _Arena, num_vars: int, root_id: int) -> Circuit:
    """Keep only the nodes reachable from the root gate, in id order."""
    keep = bytearray(len(arena.nodes))
    keep[root_id] = 1
    stack = [root_id]
    while stack:
        node = arena.nodes[stack.pop()]
        if isinstance(node, Leaf):
            continue
        for ch in node.children:
            if not keep[ch]:
                keep[ch] = 1
                stack.append(ch)
    remap: dict[int, int] = {}
    out: list[Node] = []
    for v, flag in enumerate(keep):
        if not flag:
            continue
        remap[v] = len(out)
        out.append(arena.nodes[v])
    rebuilt: list[Node] = []
    for node in out:
        if isinstance(node, Leaf):
            rebuilt.append(node)
        elif isinstance(node, Sum):
            rebuilt.append(Sum(tuple(remap[ch] for ch in node.children), node.weights))
        else:
            rebuilt.append(Product(tuple(remap[ch] for ch in node.children)))
    return Circuit(num_vars, rebuilt, remap[root_id])


# ---------------------------------------------------------------------------
# tree expansion
# ---------------------------------------------------------------------------

def duplicate_to_tree(c: Circuit, node_budget: int = DEFAULT_TREE_BUDGET) -> Circuit:
    """Clone shared sub-DAGs until every non-root node has exactly one
    parent: a plain recursive copy from the root with memoization
    disabled.  Depth and polynomial are unchanged; the final size (the
    number of root-to-node paths) is counted up front against the budget.
    """
    paths = [0] * len(c.nodes)
    paths[c.root] = 1
    for v in reversed(c.topo_order):  # parents before children
        pv = paths[v]
        if pv:
            for ch in c.children(v):
                paths[ch] += pv
    total = sum(paths)
    if total > node_budget:
        raise SizeBudgetExceeded(f"expanded tree would have {total} nodes (budget {node_budget})")

    out: list[Node] = []
    stack: list[list] = [[c.root, 0, []]]
    root_clone = -1
    while stack:
        frame = stack[-1]
        v, idx, acc = frame
        kids = c.children(v)
        if idx < len(kids):
            frame[1] += 1
            stack.append([kids[idx], 0, []])
            continue
        node = c.nodes[v]
        if isinstance(node, Leaf):
            clone: Node = node
        elif isinstance(node, Sum):
            clone = Sum(tuple(acc), node.weights)
        else:
            clone = Product(tuple(acc))
        out.append(clone)
        nid = len(out) - 1
        stack.pop()
        if stack:
            stack[-1][2].append(nid)
        else:
            root_clone = nid
    return Circuit(c.num_vars, out, root_clone)


# ---------------------------------------------------------------------------
# full pipeline
# ---------------------------------------------------------------------------

def treeify(c: Circuit, normalize_output: bool = False,
            node_budget: int = DEFAULT_TREE_BUDGET) -> tuple[Circuit, PipelineReport]:
    """binarize -> reduce_depth -> duplicate_to_tree (-> normalize),
    recording node/edge/depth metrics after every stage."""
    stages = [stage_metrics("input", c)]
    b = binarize(c)
    stages.append(stage_metrics("binarize", b))
    r = reduce_depth(b)
    stages.append(stage_metrics("reduce_depth", r))
    t = duplicate_to_tree(r, node_budget)
    stages.append(stage_metrics("duplicate", t))
    constant = None
    if normalize_output:
        t, constant = normalize(t)
        stages.append(stage_metrics("normalize", t))
    return t, PipelineReport(tuple(stages), constant)
