"""Set-trie storing lower bounds for example subsets."""
from __future__ import annotations

from typing import Iterable

from .dataset import bits


class _TrieNode:
    __slots__ = ("children", "bound", "max_below")

    def __init__(self):
        self.children: dict[int, _TrieNode] = {}
        self.bound: int | None = None
        # largest bound stored in this subtree, used to skip hopeless branches
        self.max_below = 0


class SetTrie:
    """Maps example-id sets to integer lower bounds.

    Each stored set is a root path through its ids in ascending order. The
    main query asks whether some stored subset of a query set carries a
    bound larger than a budget.
    """

    def __init__(self, max_vertices: int = 2_000_000):
        self.root = _TrieNode()
        self.max_vertices = max_vertices
        self._vertices = 0
        self._sets = 0

    def vertex_count(self) -> int:
        return self._vertices

    def __len__(self) -> int:
        return self._sets

    def insert(self, members: Iterable[int] | int, bound: int) -> bool:
        """Store ``bound`` for ``members``; keeps the maximum on re-insert.

        Returns False when the insert was dropped by the vertex cap.
        """
        ids = list(bits(members)) if isinstance(members, int) else sorted(set(members))
        if not ids:
            raise ValueError("cannot store the empty set")
        missing = 0
        node = self.root
        for x in ids:
            child = node.children.get(x)
            if child is None:
                missing = len(ids) - ids.index(x)
                break
            node = child
        if self._vertices + missing > self.max_vertices:
            return False
        node = self.root
        path = [node]
        for x in ids:
            child = node.children.get(x)
            if child is None:
                child = node.children[x] = _TrieNode()
                self._vertices += 1
            node = child
            path.append(node)
        if node.bound is None:
            self._sets += 1
            node.bound = bound
        else:
            node.bound = max(node.bound, bound)
        for p in path:
            if p.max_below < node.bound:
                p.max_below = node.bound
        return True

    def lookup(self, members: Iterable[int] | int) -> int | None:
        ids = list(bits(members)) if isinstance(members, int) else sorted(set(members))
        node = self.root
        for x in ids:
            node = node.children.get(x)
            if node is None:
                return None
        return node.bound

    def max_subset_bound(self, query: Iterable[int] | int, budget: int | None = None) -> int | None:
        """Bound stored for some subset of ``query``.

        With a budget, returns the first bound found that exceeds it;
        otherwise (or if none exceeds it) the largest bound over all stored
        subsets, or None when no stored set is a subset of ``query``.
        """
        q = query if isinstance(query, int) else sum(1 << x for x in set(query))
        top = q.bit_length() - 1
        best: int | None = None
        stack = [self.root]
        while stack:
            node = stack.pop()
            for x, child in node.children.items():
                if x > top or not (q >> x) & 1:
                    continue
                if best is not None and child.max_below <= best:
                    continue
                if child.bound is not None:
                    if budget is not None and child.bound > budget:
                        return child.bound
                    if best is None or child.bound > best:
                        best = child.bound
                if child.children:
                    stack.append(child)
        return best

    def exceeds(self, query: int, budget: int) -> bool:
        """True iff some stored subset of ``query`` has a bound above ``budget``."""
        top = query.bit_length() - 1
        stack = [self.root]
        while stack:
            node = stack.pop()
            for x, child in node.children.items():
                if child.max_below <= budget or x > top or not (query >> x) & 1:
                    continue
                if child.bound is not None and child.bound > budget:
                    return True
                stack.append(child)
        return False

    def items(self) -> list[tuple[tuple[int, ...], int]]:
        out = []

        def walk(node: _TrieNode, prefix: tuple[int, ...]):
            if node.bound is not None:
                out.append((prefix, node.bound))
            for x in sorted(node.children):
                walk(node.children[x], prefix + (x,))

        walk(self.root, ())
        return out

    def dump(self) -> str:
        return "".join(",".join(map(str, s)) + f":{b}\n" for s, b in self.items())

    @classmethod
    def load(cls, text: str, **kwargs) -> "SetTrie":
        trie = cls(**kwargs)
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            ids, bound = line.rsplit(":", 1)
            trie.insert([int(x) for x in ids.split(",")], int(bound))
        return trie
