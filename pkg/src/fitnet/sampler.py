"""Dynamic weighted sampling over recyclable slots.

A complete binary tree of partial sums (sum-tree) over a power-of-two slot
array. insert/update/remove/sample all run in O(log capacity); deletion frees
the slot through a free list. Parent nodes are recomputed from their children
on every mutation, and the whole tree is rebuilt from the leaves every
``rebuild_interval`` mutations to keep float drift bounded.

Single-writer: one owner mutates the structure; concurrent use is unsupported.
"""
from __future__ import annotations


class SlotError(KeyError):
    """Operation on a slot that is not live."""


class EmptySamplerError(RuntimeError):
    """sample() with zero total weight."""


class WeightedIndex:
    def __init__(self, capacity: int = 1024, rebuild_interval: int = 1 << 20):
        cap = 1
        while cap < max(capacity, 2):
            cap <<= 1
        self._cap = cap
        self._tree = [0.0] * (2 * cap)
        self._live = bytearray(cap)
        self._free: list[int] = []
        self._next = 0          # first never-used slot
        self._n_live = 0
        self._mutations = 0
        self._rebuild_interval = rebuild_interval

    def __len__(self) -> int:
        return self._n_live

    @property
    def total_weight(self) -> float:
        return self._tree[1]

    @property
    def capacity(self) -> int:
        return self._cap

    def is_live(self, slot: int) -> bool:
        return 0 <= slot < self._cap and bool(self._live[slot])

    def weight(self, slot: int) -> float:
        if not self.is_live(slot):
            raise SlotError(slot)
        return self._tree[self._cap + slot]

    def insert(self, w: float) -> int:
        if w < 0:
            raise ValueError(f"weight must be nonnegative, got {w}")
        if self._free:
            slot = self._free.pop()
        else:
            if self._next == self._cap:
                self._grow()
            slot = self._next
            self._next += 1
        self._live[slot] = 1
        self._n_live += 1
        self._set(slot, w)
        return slot

    def update(self, slot: int, w: float) -> None:
        if not self.is_live(slot):
            raise SlotError(slot)
        if w < 0:
            raise ValueError(f"weight must be nonnegative, got {w}")
        self._set(slot, w)

    def remove(self, slot: int) -> None:
        if not self.is_live(slot):
            raise SlotError(slot)
        self._set(slot, 0.0)
        self._live[slot] = 0
        self._n_live -= 1
        self._free.append(slot)

    def sample(self, rng) -> int:
        """Return a live slot with probability weight / total_weight."""
        tree = self._tree
        cap = self._cap
        total = tree[1]
        if self._n_live == 0 or total <= 0.0:
            raise EmptySamplerError("all weights are zero")
        for _ in range(64):
            r = rng.random() * total
            i = 1
            while i < cap:
                i <<= 1
                left = tree[i]
                if r >= left:
                    r -= left
                    i += 1
            slot = i - cap
            # Float residue can land on a dead or zero-weight leaf; redraw.
            if self._live[slot] and tree[i] > 0.0:
                return slot
        raise EmptySamplerError("sampling failed to hit a live slot")

    def recomputed_total(self) -> float:
        """Independent re-summation of the live leaf weights."""
        base = self._cap
        tree = self._tree
        return sum(tree[base + s] for s in range(self._next) if self._live[s])

    # internal helpers

    def _set(self, slot: int, w: float) -> None:
        tree = self._tree
        i = self._cap + slot
        tree[i] = w
        while i > 1:
            i >>= 1
            j = i << 1
            tree[i] = tree[j] + tree[j + 1]
        self._mutations += 1
        if self._mutations >= self._rebuild_interval:
            self._rebuild()

    def _rebuild(self) -> None:
        tree = self._tree
        for i in range(self._cap - 1, 0, -1):
            j = i << 1
            tree[i] = tree[j] + tree[j + 1]
        self._mutations = 0

    def _grow(self) -> None:
        old_cap = self._cap
        new_cap = old_cap * 2
        tree = [0.0] * (2 * new_cap)
        tree[new_cap:new_cap + old_cap] = self._tree[old_cap:2 * old_cap]
        self._cap = new_cap
        self._tree = tree
        self._live.extend(bytearray(old_cap))
        self._rebuild()
