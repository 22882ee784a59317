"""Structure-changing maps between tree-shaped and dag-shaped deductions.

``unfold`` copies every shared node once per path, turning a dag into the
equivalent tree at a possibly exponential size (capped). ``compress`` goes
the other way for leveled trees: nodes of one level with equal formulas
merge into a single representative, and where the merged originals were
concluded by different premise groups the representative becomes a
separation node over one dispatch child per group. ``s_eliminate`` removes
separation nodes again once a branch commitment is fixed, keeping only
what the root still reaches.

Compression maps original level h to two output layers: the merge layer
2h holds one representative per distinct formula, the dispatch layer 2h+1
holds the rule-carrying children (a single repetition dispatcher when the
premise groups do not diverge, so the output stays uniformly leveled).
Leaves sit on the last merge layer and get no dispatcher. The thread
image hands each original thread to its representative/dispatcher
rendering, which is exactly the thread-set input the cleansing machinery
expects.
"""

from __future__ import annotations

from collections import deque

from .assignment import Choice, ChoiceError
from .checker import check_local_correctness
from .deduction import (
    Deduction,
    Node,
    Overflow,
    Rule,
    Thread,
    build,
    canonical_map,
    is_tree_like,
    threads,
)
from .formula import formula_key

__all__ = [
    "DEFAULT_NODE_CAP",
    "unfold",
    "level",
    "compress",
    "s_eliminate",
]

DEFAULT_NODE_CAP = 100_000


def unfold(d: Deduction, cap: int = DEFAULT_NODE_CAP) -> Deduction | Overflow:
    """Duplicate shared subdags so every node has one parent.

    The result is tree-like with breadth-first ids and the same root
    formula; thread structure is preserved path for path. Node count can
    blow up exponentially, so construction stops with Overflow once it
    would exceed `cap`.
    """
    nodes: list[Node] = []
    queue = deque(((d.root, 1),))
    next_id = 2
    while queue:
        old_id, new_id = queue.popleft()
        old = d.node(old_id)
        child_ids = []
        for c in old.children:
            if next_id > cap:
                return Overflow(cap)
            child_ids.append(next_id)
            queue.append((c, next_id))
            next_id += 1
        nodes.append(Node(new_id, old.formula, old.rule, old.height, tuple(child_ids)))
    return build(nodes, 1)


def level(t: Deduction) -> Deduction:
    """Pad short branches with repetition chains above their leaves so all
    leaves share the maximal height. Already-leveled trees come back
    untouched."""
    if not is_tree_like(t):
        raise ValueError("level() expects a tree-like deduction")
    bottom = max(n.height for n in t.nodes.values())
    short = [
        n for n in t.nodes.values() if n.rule is Rule.LEAF and n.height < bottom
    ]
    if not short:
        return t

    parent_of = {c: n.id for n in t.nodes.values() for c in n.children}
    nodes = {n.id: n for n in t.nodes.values()}
    next_id = max(nodes) + 1
    for leaf in sorted(short, key=lambda n: n.id):
        chain = list(range(next_id, next_id + bottom - leaf.height))
        next_id += len(chain)
        p = nodes[parent_of[leaf.id]]
        nodes[p.id] = Node(
            p.id,
            p.formula,
            p.rule,
            p.height,
            tuple(chain[0] if c == leaf.id else c for c in p.children),
        )
        links = chain + [leaf.id]
        for offset, (x, below) in enumerate(zip(chain, links[1:])):
            nodes[x] = Node(x, leaf.formula, Rule.R, leaf.height + offset, (below,))
        nodes[leaf.id] = Node(leaf.id, leaf.formula, Rule.LEAF, bottom, ())
    out = build(list(nodes.values()), t.root)
    mapping = canonical_map(out)
    return build(
        [
            Node(
                mapping[n.id],
                n.formula,
                n.rule,
                n.height,
                tuple(mapping[c] for c in n.children),
            )
            for n in out.nodes.values()
        ],
        mapping[out.root],
    )


def compress(t: Deduction) -> tuple[Deduction, tuple[Thread, ...]]:
    """Merge equal-formula nodes per level of a leveled tree.

    Returns the compressed dag and the image of the tree's thread set
    under the merge: each original thread becomes the alternating
    representative/dispatcher path it is carried to. Representatives on
    one merge layer have pairwise distinct formulas; a representative
    whose originals disagree on how they were concluded is a separation
    node over one dispatcher per premise group.
    """
    if not is_tree_like(t):
        raise ValueError("compress() expects a tree-like deduction")
    report = check_local_correctness(t)
    if not report.ok:
        first = report.violations[0]
        raise ValueError(
            f"compress() expects local correctness: condition {first.condition}"
            f" at node {first.node}"
        )
    bottom = max(n.height for n in t.nodes.values())
    for n in t.nodes.values():
        if n.rule is Rule.LEAF and n.height != bottom:
            raise ValueError(f"compress() expects a leveled tree: leaf {n.id} is short")

    by_level: dict[int, list[Node]] = {}
    for n in t.nodes.values():
        by_level.setdefault(n.height, []).append(n)

    nodes: list[Node] = []
    next_id = 1

    def fresh() -> int:
        nonlocal next_id
        value = next_id
        next_id += 1
        return value

    rep_of: dict[int, int] = {}  # original node -> merge-layer id
    disp_of: dict[int, int] = {}  # original non-leaf node -> dispatch-layer id
    for h in range(bottom, -1, -1):
        layer = sorted(by_level[h], key=lambda n: (formula_key(n.formula), n.id))
        for formula in sorted({n.formula for n in layer}, key=formula_key):
            members = [n for n in layer if n.formula == formula]
            if h == bottom:
                rep = fresh()
                nodes.append(Node(rep, formula, Rule.LEAF, 2 * h, ()))
                for m in members:
                    rep_of[m.id] = rep
                continue
            groups: dict[tuple, list[Node]] = {}
            for m in members:
                key: tuple = (m.rule.value, tuple(rep_of[c] for c in m.children))
                if m.rule is Rule.I:
                    key += (formula_key(m.formula.antecedent),)
                groups.setdefault(key, []).append(m)
            rep = fresh()
            dispatchers = []
            for key in sorted(groups):
                disp = fresh()
                head = groups[key][0]
                dispatchers.append(
                    Node(
                        disp,
                        formula,
                        head.rule,
                        2 * h + 1,
                        tuple(rep_of[c] for c in head.children),
                    )
                )
                for m in groups[key]:
                    rep_of[m.id] = rep
                    disp_of[m.id] = disp
            rep_rule = Rule.S if len(dispatchers) > 1 else Rule.R
            nodes.append(Node(rep, formula, rep_rule, 2 * h, tuple(n.id for n in dispatchers)))
            nodes.extend(dispatchers)

    out = build(nodes, rep_of[t.root])
    mapping = canonical_map(out)
    out = build(
        [
            Node(
                mapping[n.id],
                n.formula,
                n.rule,
                n.height,
                tuple(mapping[c] for c in n.children),
            )
            for n in out.nodes.values()
        ],
        mapping[out.root],
    )

    tree_threads = threads(t, cap=len(t.nodes) + 1)
    assert not isinstance(tree_threads, Overflow)  # trees have one thread per leaf
    images = []
    for thread in tree_threads:
        image = []
        for x in thread[:-1]:
            image.append(mapping[rep_of[x]])
            image.append(mapping[disp_of[x]])
        image.append(mapping[rep_of[thread[-1]]])
        images.append(tuple(image))
    return out, tuple(dict.fromkeys(images))


def s_eliminate(d: Deduction, choice: Choice) -> Deduction:
    """Commit each separation edge to its chosen branch and drop the rest.

    Every separation node turns into one repetition node per distinct
    branch index its parents chose (the node keeps its id when all parents
    agree), parents are rewired to their copy, and nodes the root no
    longer reaches are removed. Ids of surviving nodes are kept.

    Parents that disagree add one node per extra branch index, so the
    result can exceed the input in size when commitments diverge; with
    agreeing parents it never grows.
    """
    root = d.node(d.root)
    if root.rule is Rule.S:
        raise ValueError("root is a separation node; no edge commits its branch")

    replacement: dict[tuple[int, int], int] = {}  # (parent, sep) -> copy id
    copies: list[Node] = []
    next_id = max(d.nodes) + 1
    for s in sorted(d.nodes.values(), key=lambda n: n.id):
        if s.rule is not Rule.S:
            continue
        used: dict[int, list[int]] = {}
        for p in d.parents[s.id]:
            key = (p, s.id)
            if key not in choice:
                raise ChoiceError(f"no branch chosen for edge {key}")
            index = choice[key]
            if not 1 <= index <= len(s.children):
                raise ChoiceError(
                    f"edge {key}: branch {index} out of range 1..{len(s.children)}"
                )
            used.setdefault(index, []).append(p)
        copy_ids: dict[int, int] = {}
        for index in sorted(used):
            if len(used) == 1:
                copy_ids[index] = s.id
            else:
                copy_ids[index] = next_id
                next_id += 1
            copies.append(
                Node(copy_ids[index], s.formula, Rule.R, s.height, (s.children[index - 1],))
            )
        for index, parents in used.items():
            for p in parents:
                replacement[(p, s.id)] = copy_ids[index]

    rewired: dict[int, Node] = {n.id: n for n in copies}
    for n in d.nodes.values():
        if n.rule is Rule.S:
            continue
        children = tuple(replacement.get((n.id, c), c) for c in n.children)
        rewired[n.id] = Node(n.id, n.formula, n.rule, n.height, children)

    keep = set()
    queue = deque((d.root,))
    while queue:
        x = queue.popleft()
        if x in keep:
            continue
        keep.add(x)
        queue.extend(rewired[x].children)
    return build([rewired[x] for x in sorted(keep)], d.root)
