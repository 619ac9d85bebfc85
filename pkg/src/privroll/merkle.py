"""Fixed-depth append-only Merkle trees over the zero-collapsing node hash.

Empty slots hold 0 and ``hstar(0, 0) == 0``, so an empty subtree is 0 at every
level and no table of "zero hashes" is needed.  Nodes are kept sparsely per
level, which lets a tree resumed from a frontier keep appending and proving
new leaves.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import crypto
from .crypto import Tag

DEFAULT_DEPTH = 32


class TreeFull(Exception):
    pass


class MalformedFrontier(ValueError):
    pass


def hstar(left: int, right: int) -> int:
    if left == 0 and right == 0:
        return 0
    return crypto.tagged(Tag.TREE_NODE, left, right)


@dataclass(frozen=True)
class InclusionProof:
    """``dir[i]`` is True when the running node is the LEFT child at level ``i``."""

    index: int
    dir: tuple[bool, ...]
    path: tuple[int, ...]

    def to_words(self) -> tuple[int, ...]:
        return (self.index, len(self.path), *self.path)

    @classmethod
    def from_words(cls, words) -> InclusionProof:
        index, depth, *path = words
        if len(path) != depth or not 0 <= index < 2**depth:
            raise ValueError("malformed inclusion proof")
        dirs = tuple(not (index >> i) & 1 for i in range(depth))
        return cls(index, dirs, tuple(path))


def walk(leaf: int, dirs, path) -> int:
    tmp = leaf
    for d, sibling in zip(dirs, path):
        tmp = hstar(tmp, sibling) if d else hstar(sibling, tmp)
    return tmp


def verify(root: int, leaf: int, proof: InclusionProof) -> bool:
    depth = len(proof.path)
    if len(proof.dir) != depth or not 0 <= proof.index < 2**depth:
        return False
    if any(d != (not (proof.index >> i) & 1) for i, d in enumerate(proof.dir)):
        return False
    return walk(leaf, proof.dir, proof.path) == root


@dataclass(frozen=True)
class Frontier:
    depth: int
    leaf_count: int
    # nodes[i] is the root of the complete left subtree at level i when bit i
    # of leaf_count is set, else 0
    nodes: tuple[int, ...]

    def __post_init__(self):
        if len(self.nodes) != self.depth or not 0 <= self.leaf_count <= 2**self.depth:
            raise MalformedFrontier("frontier shape does not match depth")
        for i, node in enumerate(self.nodes):
            bit = (self.leaf_count >> i) & 1
            if bit and node == 0:
                raise MalformedFrontier(f"missing frontier node at level {i}")
            if not bit and node != 0:
                raise MalformedFrontier(f"stray frontier node at level {i}")

    def root(self) -> int:
        if self.leaf_count == 2**self.depth:
            # a full tree keeps only its top node, stored one level above the array
            raise MalformedFrontier("full trees have no appendable frontier")
        node = 0
        for i in range(self.depth):
            if (self.leaf_count >> i) & 1:
                node = hstar(self.nodes[i], node)
            else:
                node = hstar(node, 0)
        return node

    def to_words(self) -> tuple[int, ...]:
        return (self.depth, self.leaf_count, *self.nodes)

    @classmethod
    def from_words(cls, words) -> Frontier:
        depth, count, *nodes = words
        return cls(depth, count, tuple(nodes))

    def to_bytes(self) -> bytes:
        return b"".join(crypto.encode(w) for w in self.to_words())

    @classmethod
    def from_bytes(cls, data: bytes) -> Frontier:
        if len(data) % 32:
            raise MalformedFrontier("frontier bytes are not word aligned")
        return cls.from_words([int.from_bytes(data[i : i + 32], "big") for i in range(0, len(data), 32)])


class AppendOnlyTree:
    def __init__(self, depth: int = DEFAULT_DEPTH):
        self.depth = depth
        self.leaf_count = 0
        self._levels: list[dict[int, int]] = [{} for _ in range(depth + 1)]
        self._first_known = 0

    @property
    def root(self) -> int:
        return self._levels[self.depth].get(0, 0)

    def append(self, leaf: int) -> int:
        if leaf == 0:
            raise ValueError("zero is the empty-slot sentinel")
        if self.leaf_count >= 2**self.depth:
            raise TreeFull(f"tree of depth {self.depth} is full")
        index = self.leaf_count
        node, idx = leaf, index
        for level in range(self.depth):
            self._levels[level][idx] = node
            sibling = self._levels[level].get(idx ^ 1, 0)
            node = hstar(node, sibling) if idx % 2 == 0 else hstar(sibling, node)
            idx >>= 1
        self._levels[self.depth][0] = node
        self.leaf_count += 1
        return index

    def extend(self, leaves) -> None:
        for leaf in leaves:
            self.append(leaf)

    def leaf_at(self, index: int) -> int:
        return self._levels[0][index]

    def prove(self, index: int) -> InclusionProof:
        if not self._first_known <= index < self.leaf_count:
            raise IndexError(f"leaf {index} not provable in this tree")
        path, dirs, idx = [], [], index
        for level in range(self.depth):
            path.append(self._levels[level].get(idx ^ 1, 0))
            dirs.append(idx % 2 == 0)
            idx >>= 1
        return InclusionProof(index, tuple(dirs), tuple(path))

    def snapshot_frontier(self) -> Frontier:
        nodes = []
        for i in range(self.depth):
            if (self.leaf_count >> i) & 1:
                nodes.append(self._levels[i][(self.leaf_count >> i) - 1])
            else:
                nodes.append(0)
        return Frontier(self.depth, self.leaf_count, tuple(nodes))

    @classmethod
    def resume(cls, frontier: Frontier) -> AppendOnlyTree:
        tree = cls(frontier.depth)
        tree.leaf_count = frontier.leaf_count
        tree._first_known = frontier.leaf_count
        for i, node in enumerate(frontier.nodes):
            if node:
                tree._levels[i][(frontier.leaf_count >> i) - 1] = node
        tree._levels[tree.depth][0] = frontier.root()
        return tree

    def copy(self) -> AppendOnlyTree:
        other = AppendOnlyTree.__new__(AppendOnlyTree)
        other.depth = self.depth
        other.leaf_count = self.leaf_count
        other._first_known = self._first_known
        other._levels = [dict(level) for level in self._levels]
        return other


def naive_root(leaves, depth: int) -> int:
    """Full-array recomputation; the differential oracle for the incremental tree."""
    layer = list(leaves) + [0] * (2**depth - len(leaves))
    for _ in range(depth):
        layer = [hstar(layer[i], layer[i + 1]) for i in range(0, len(layer), 2)]
    return layer[0]
