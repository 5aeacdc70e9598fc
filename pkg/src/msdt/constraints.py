"""Subset constraints for symmetry breaking.

A constraint ``C`` owned by vertex ``v`` is violated once no member of ``C``
remains in the subtree of ``v``. Refinements only ever shrink example sets
of existing vertices, so violation is permanent within a search branch and
is detected by intersecting bitsets.

Two families are generated when a refinement ``(v, i, k, e)`` creates the
inner vertex ``u``:

* threshold constraints: ``u`` must keep an example strictly between the
  chosen threshold and an earlier-tried, closer threshold (otherwise the
  closer threshold, explored first, yields the same tree);
* dirty constraints: when ``v`` is inner with ``e`` below child ``v1``, ``u``
  must keep one of the dirty examples of the other child ``v2`` (otherwise
  applying the same cut at ``v1``, explored first, does as well).
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .witness_tree import Refinement, WitnessTree


class ConstraintKind(Enum):
    THRESHOLD = "threshold"
    DIRTY = "dirty"


@dataclass(frozen=True)
class SubsetConstraint:
    owner: int
    members: int  # bitset
    kind: ConstraintKind
    threshold_k: int | None = None  # index of the constraint threshold

    def live_count(self, tree: WitnessTree) -> int:
        return (tree.mask[self.owner] & self.members).bit_count()

    def violated(self, tree: WitnessTree) -> bool:
        return not tree.mask[self.owner] & self.members


def threshold_constraints(
    tree: WitnessTree, r: Refinement, u: int, tried: list[int] | None = None
) -> list[SubsetConstraint]:
    """Threshold constraints for ``r`` just applied, creating inner vertex ``u``.

    ``tried`` lists the threshold indices explored before ``k`` for the same
    vertex, dimension and example; by default all thresholds strictly
    between e's value and ``k``. Members are restricted to E[u].
    """
    v, i, k, e = r
    ds = tree.ds
    lms = ds.left_masks[i]
    ek = ds.rank[e][i]
    e_left = ek <= k
    if tried is None:
        tried = list(range(ek, k)) if e_left else list(range(ek - 1, k, -1))
    eu = tree.mask[u]
    out = []
    for kp in tried:
        if e_left:
            members = eu & lms[k] & ~lms[kp]
        else:
            members = eu & lms[kp] & ~lms[k]
        out.append(SubsetConstraint(u, members, ConstraintKind.THRESHOLD, kp))
    return out


def dirty_constraint(tree: WitnessTree, r: Refinement) -> int | None:
    """Members of the dirty constraint for ``r``, evaluated before applying it.

    Returns None when ``r`` is applied at a leaf. Admissibility of ``r`` at
    ``v`` implies admissibility of the same cut at the child holding ``e``,
    so no further check is needed.
    """
    v, _, _, e = r
    if tree.left[v] < 0:
        return None
    a, b = tree.left[v], tree.right[v]
    other = b if (tree.mask[a] >> e) & 1 else a
    return tree.mask[other] & tree.dirty


class ConstraintStore:
    """Constraints of the current search branch, undone level by level."""

    def __init__(self):
        self.by_owner: dict[int, list[SubsetConstraint]] = {}
        self._levels: list[tuple[int, int]] = []  # (owner, how many added)

    def __len__(self) -> int:
        return sum(len(c) for c in self.by_owner.values())

    def push(self, owner: int, constraints: list[SubsetConstraint]) -> None:
        if constraints:
            self.by_owner.setdefault(owner, []).extend(constraints)
        self._levels.append((owner, len(constraints)))

    def pop(self) -> None:
        owner, count = self._levels.pop()
        if count:
            lst = self.by_owner[owner]
            del lst[-count:]
            if not lst:
                del self.by_owner[owner]

    def constraints(self) -> list[SubsetConstraint]:
        return [c for lst in self.by_owner.values() for c in lst]

    def live_counts(self, tree: WitnessTree) -> list[int]:
        return [c.live_count(tree) for c in self.constraints()]

    def any_violated(self, tree: WitnessTree, owners=None) -> bool:
        """Check ``owners`` (default: every owner) for a violated constraint."""
        mask = tree.mask
        keys = self.by_owner.keys() if owners is None else owners
        for v in keys:
            lst = self.by_owner.get(v)
            if not lst:
                continue
            mv = mask[v]
            for c in lst:
                if not mv & c.members:
                    return True
        return False

    def on_assignment_change(self, tree: WitnessTree) -> bool:
        """Violation check after the most recent apply.

        Only vertices whose example set shrank can turn a constraint
        violated, plus whatever was attached to the newest inner vertex.
        """
        owners = tree.last_changed()
        owners.append(tree.vertex_count - 2)
        return self.any_violated(tree, owners)
