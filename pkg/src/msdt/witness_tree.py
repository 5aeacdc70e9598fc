"""Witness trees: the mutable state of the branch-and-bound search.

A witness tree is a decision tree whose leaves each carry a correctly
classified example (its witness). The tree grows only through one-step
refinements ``(v, i, k, e)``: a new inner vertex with cut
``(i, thresholds[i][k])`` is inserted above ``v`` and a new leaf,
witnessed by the dirty example ``e``, becomes its other child.

Refinements are applied in place and undone from a trail, so a search
branch costs no copying.
"""
from __future__ import annotations

from typing import Iterator, NamedTuple

from .dataset import ClassLabel, Cut, DataSet, bits
from .tree import DecisionTree, Leaf, Node


class Refinement(NamedTuple):
    vertex: int
    dim: int
    k: int  # index into ds.thresholds[dim]
    example: int

    def cut(self, ds: DataSet) -> Cut:
        return Cut(self.dim, ds.thresholds[self.dim][self.k])


class _Step(NamedTuple):
    v: int
    old_parent: int
    masks: list  # (vertex, old mask) for the subtree of v
    old_dirty: int
    old_root: int


class WitnessTree:
    """Witness tree over a fixed data set.

    Vertices are integer ids allocated in creation order; undo always
    removes the two most recent ids. ``mask[v]`` is the bitset E[W, v].
    """

    def __init__(self, ds: DataSet, witness: int):
        if not 0 <= witness < ds.n:
            raise ValueError(f"witness {witness} out of range")
        self.ds = ds
        lab = ds.labels[witness]
        self.parent = [-1]
        self.left = [-1]
        self.right = [-1]
        self.cut_dim = [-1]
        self.cut_k = [-1]
        self.cla: list[ClassLabel | None] = [lab]
        self.wit = [witness]
        self.mask = [ds.all_mask]
        self.root = 0
        self.size = 0
        self.witnesses = 1 << witness
        self.dirty = ds.label_masks[lab.other]
        self._trail: list[_Step] = []

    # -- queries -------------------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self.parent)

    def is_leaf(self, v: int) -> bool:
        return self.left[v] < 0

    def is_perfect(self) -> bool:
        return not self.dirty

    def leaves(self) -> list[int]:
        return [v for v in range(len(self.parent)) if self.left[v] < 0]

    def leaf_of(self, e: int) -> int:
        v = self.root
        x = self.ds.rank[e]
        while self.left[v] >= 0:
            # rank <= k  <=>  value <= thresholds[k]
            v = self.left[v] if x[self.cut_dim[v]] <= self.cut_k[v] else self.right[v]
        return v

    def path_to_root(self, v: int) -> list[int]:
        out = []
        while v >= 0:
            out.append(v)
            v = self.parent[v]
        return out

    def subtree(self, v: int) -> list[int]:
        out, stack = [], [v]
        while stack:
            x = stack.pop()
            out.append(x)
            if self.left[x] >= 0:
                stack.append(self.left[x])
                stack.append(self.right[x])
        return out

    def dirty_examples(self) -> list[int]:
        return list(bits(self.dirty))

    def side_of(self, e: int, dim: int, k: int) -> int:
        """Bitset of all examples on e's side of cut (dim, k)."""
        lm = self.ds.left_masks[dim][k]
        return lm if self.ds.rank[e][dim] <= k else self.ds.all_mask & ~lm

    # -- refinements ---------------------------------------------------------

    def is_admissible(self, r: Refinement) -> bool:
        """Membership test for Ref(W)."""
        v, i, k, e = r
        if not (self.dirty >> e) & 1 or not (self.mask[v] >> e) & 1:
            return False
        side = self.mask[v] & self.side_of(e, i, k)
        if side & self.witnesses:
            return False
        w = self.wit[self.leaf_of(e)]
        return not (side >> w) & 1

    def _threshold_range(self, e: int, w: int, i: int) -> range:
        """Indices of thresholds separating e from w, closest to e first."""
        re, rw = self.ds.rank[e][i], self.ds.rank[w][i]
        if re < rw:
            return range(re, rw)
        return range(re - 1, rw - 1, -1)

    def enumerate_refinements(self, e: int) -> Iterator[Refinement]:
        """Ref(W) restricted to dirty example ``e``, in search order.

        Vertices from leaf(e) up to the root; dimensions where e and the
        leaf's witness differ, ascending; thresholds closest to e first.
        Moving away from e only grows e's side, so the first threshold that
        would capture a witness ends the dimension.
        """
        if not (self.dirty >> e) & 1:
            raise ValueError(f"example {e} is not dirty")
        leaf = self.leaf_of(e)
        w = self.wit[leaf]
        re, rw = self.ds.rank[e], self.ds.rank[w]
        dims = [i for i in range(self.ds.d) if re[i] != rw[i]]
        lms = self.ds.left_masks
        v = leaf
        while v >= 0:
            ev = self.mask[v]
            wv = self.witnesses & ev
            for i in dims:
                ei = re[i]
                lm_i = lms[i]
                if ei < rw[i]:
                    for k in range(ei, rw[i]):
                        if lm_i[k] & wv:
                            break
                        yield Refinement(v, i, k, e)
                else:
                    for k in range(ei - 1, rw[i] - 1, -1):
                        if wv & ~lm_i[k]:
                            break
                        yield Refinement(v, i, k, e)
            v = self.parent[v]

    def refinement_count(self, e: int) -> int:
        leaf = self.leaf_of(e)
        w = self.wit[leaf]
        re, rw = self.ds.rank[e], self.ds.rank[w]
        dims = [i for i in range(self.ds.d) if re[i] != rw[i]]
        lms = self.ds.left_masks
        count = 0
        v = leaf
        while v >= 0:
            wv = self.witnesses & self.mask[v]
            for i in dims:
                ei = re[i]
                lm_i = lms[i]
                if ei < rw[i]:
                    for k in range(ei, rw[i]):
                        if lm_i[k] & wv:
                            break
                        count += 1
                else:
                    for k in range(ei - 1, rw[i] - 1, -1):
                        if wv & ~lm_i[k]:
                            break
                        count += 1
            v = self.parent[v]
        return count

    def apply(self, r: Refinement) -> tuple[int, int]:
        """Apply ``r`` in place; returns the ids of the new inner vertex and leaf.

        The caller is responsible for ``r`` being admissible (see
        ``is_admissible``); the search only generates admissible ones.
        """
        v, i, k, e = r
        ds = self.ds
        lm = ds.left_masks[i][k]
        e_left = ds.rank[e][i] <= k
        ev = self.mask[v]
        moved = ev & lm if e_left else ev & ~lm

        u = len(self.parent)
        leaf = u + 1
        p = self.parent[v]
        self.parent += [p, u]
        if e_left:
            self.left += [leaf, -1]
            self.right += [v, -1]
        else:
            self.left += [v, -1]
            self.right += [leaf, -1]
        self.cut_dim += [i, -1]
        self.cut_k += [k, -1]
        lab = ds.labels[e]
        self.cla += [None, lab]
        self.wit += [-1, e]
        self.mask += [ev, moved]

        old_root = self.root
        if p < 0:
            self.root = u
        elif self.left[p] == v:
            self.left[p] = u
        else:
            self.right[p] = u
        self.parent[v] = u

        keep = ~moved
        saved = []
        stack = [v]
        mask = self.mask
        while stack:
            x = stack.pop()
            mx = mask[x]
            if mx & moved:
                saved.append((x, mx))
                mask[x] = mx & keep
                if self.left[x] >= 0:
                    stack.append(self.left[x])
                    stack.append(self.right[x])

        old_dirty = self.dirty
        self.dirty = (old_dirty & keep) | (moved & ds.label_masks[lab.other])
        self.witnesses |= 1 << e
        self.size += 1
        self._trail.append(_Step(v, p, saved, old_dirty, old_root))
        return u, leaf

    def last_changed(self) -> list[int]:
        """Vertices whose example set shrank in the most recent apply."""
        return [x for x, _ in self._trail[-1].masks]

    def undo(self) -> None:
        step = self._trail.pop()
        v, p = step.v, step.old_parent
        u = len(self.parent) - 2
        e = self.wit[u + 1]
        for x, m in step.masks:
            self.mask[x] = m
        self.parent[v] = p
        if p >= 0:
            if self.left[p] == u:
                self.left[p] = v
            else:
                self.right[p] = v
        self.root = step.old_root
        for lst in (self.parent, self.left, self.right, self.cut_dim, self.cut_k,
                    self.cla, self.wit, self.mask):
            del lst[-2:]
        self.dirty = step.old_dirty
        self.witnesses &= ~(1 << e)
        self.size -= 1

    @property
    def depth(self) -> int:
        """Number of applied refinements (the undo stack height)."""
        return len(self._trail)

    # -- export --------------------------------------------------------------

    def to_decision_tree(self) -> DecisionTree:
        def build(v: int) -> DecisionTree:
            if self.left[v] < 0:
                return Leaf(self.cla[v])
            cut = Cut(self.cut_dim[v], self.ds.thresholds[self.cut_dim[v]][self.cut_k[v]])
            return Node(cut, build(self.left[v]), build(self.right[v]))

        return build(self.root)

    def structure(self) -> tuple:
        """Hashable snapshot used to compare trees in tests."""
        return (
            self.root, tuple(self.parent), tuple(self.left), tuple(self.right),
            tuple(self.cut_dim), tuple(self.cut_k), tuple(self.cla), tuple(self.wit),
            tuple(self.mask), self.dirty, self.witnesses, self.size,
        )

    def copy(self) -> "WitnessTree":
        other = WitnessTree.__new__(WitnessTree)
        other.ds = self.ds
        for name in ("parent", "left", "right", "cut_dim", "cut_k", "cla", "wit", "mask"):
            setattr(other, name, list(getattr(self, name)))
        other.root, other.size = self.root, self.size
        other.witnesses, other.dirty = self.witnesses, self.dirty
        other._trail = list(self._trail)
        return other


def initial_tree(ds: DataSet, witness: int) -> WitnessTree:
    return WitnessTree(ds, witness)
