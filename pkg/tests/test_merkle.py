from __future__ import annotations

import hashlib
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from privroll import crypto, merkle
from privroll.crypto import Tag
from privroll.merkle import AppendOnlyTree, Frontier, InclusionProof, MalformedFrontier, TreeFull

P = crypto.DEFAULT_PRIME
leaves_st = st.lists(st.integers(1, P - 1), max_size=64)


def oracle_node(left: int, right: int) -> int:
    if left == 0 and right == 0:
        return 0
    data = b"".join(x.to_bytes(32, "big") for x in (int(Tag.TREE_NODE), left, right))
    return int.from_bytes(hashlib.sha256(data).digest(), "big") % P


def oracle_root(leaves, depth: int) -> int:
    """Recursive recomputation over the full 2**depth leaf array."""
    padded = list(leaves) + [0] * (2**depth - len(leaves))

    def subtree(lo: int, size: int) -> int:
        if size == 1:
            return padded[lo]
        half = size // 2
        return oracle_node(subtree(lo, half), subtree(lo + half, half))

    return subtree(0, 2**depth)


def test_empty_pair_collapses_to_zero():
    assert merkle.hstar(0, 0) == 0
    assert merkle.hstar(0, 1) == oracle_node(0, 1) != 0
    assert merkle.hstar(1, 0) != merkle.hstar(0, 1)


def test_empty_tree_root_is_zero():
    assert AppendOnlyTree(8).root == 0
    assert oracle_root([], 8) == 0


@settings(max_examples=500, deadline=None)
@given(leaves_st)
def test_incremental_root_matches_full_recompute(leaves):
    tree = AppendOnlyTree(8)
    for n, leaf in enumerate(leaves):
        tree.append(leaf)
        if n % 16 == 15:
            assert tree.root == oracle_root(leaves[: n + 1], 8)
    assert tree.root == oracle_root(leaves, 8)
    assert merkle.naive_root(leaves, 8) == tree.root


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(1, P - 1), min_size=1, max_size=64), st.data())
def test_proofs_verify_and_mutations_fail(leaves, data):
    tree = AppendOnlyTree(8)
    tree.extend(leaves)
    root = tree.root
    for i, leaf in enumerate(leaves):
        proof = tree.prove(i)
        assert merkle.verify(root, leaf, proof)
    i = data.draw(st.integers(0, len(leaves) - 1))
    proof = tree.prove(i)
    assert not merkle.verify(root, leaves[i] + 1, proof)
    assert not merkle.verify(root + 1, leaves[i], proof)
    level = data.draw(st.integers(0, 7))
    path = list(proof.path)
    path[level] = (path[level] + 1) % P
    assert not merkle.verify(root, leaves[i], InclusionProof(proof.index, proof.dir, tuple(path)))
    dirs = list(proof.dir)
    dirs[level] = not dirs[level]
    assert not merkle.verify(root, leaves[i], InclusionProof(proof.index, tuple(dirs), proof.path))


def test_exhaustive_depth_three():
    leaves = [101 + i for i in range(8)]
    tree = AppendOnlyTree(3)
    tree.extend(leaves)
    assert tree.root == oracle_root(leaves, 3)
    for i in range(8):
        proof = tree.prove(i)
        for j in range(8):
            assert merkle.verify(tree.root, leaves[j], proof) == (i == j)
        # the proof alone reproduces the root through the raw walk
        assert merkle.walk(leaves[i], proof.dir, proof.path) == tree.root


def test_full_tree_raises():
    tree = AppendOnlyTree(3)
    tree.extend(range(1, 9))
    with pytest.raises(TreeFull):
        tree.append(9)


def test_zero_leaf_rejected():
    with pytest.raises(ValueError):
        AppendOnlyTree(3).append(0)


def test_proof_word_round_trip():
    tree = AppendOnlyTree(5)
    tree.extend(range(1, 12))
    proof = tree.prove(6)
    assert InclusionProof.from_words(proof.to_words()) == proof
    with pytest.raises(ValueError):
        InclusionProof.from_words((40, 5, 1, 2, 3, 4, 5))
    with pytest.raises(ValueError):
        InclusionProof.from_words((1, 5, 1, 2, 3))


def test_unprovable_indices():
    tree = AppendOnlyTree(4)
    tree.extend([5, 6])
    with pytest.raises(IndexError):
        tree.prove(2)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, P - 1), max_size=40), st.lists(st.integers(1, P - 1), max_size=20))
def test_resumed_tree_matches_uninterrupted(prefix, suffix):
    full = AppendOnlyTree(6)
    full.extend(prefix)
    frontier = full.snapshot_frontier()
    assert frontier.root() == full.root
    assert Frontier.from_bytes(frontier.to_bytes()) == frontier
    resumed = AppendOnlyTree.resume(frontier)
    assert resumed.root == full.root
    for leaf in suffix:
        full.append(leaf)
        resumed.append(leaf)
        assert resumed.root == full.root
    for i in range(len(prefix), len(prefix) + len(suffix)):
        assert resumed.prove(i) == full.prove(i)
    if prefix:
        with pytest.raises(IndexError):
            resumed.prove(0)


def test_copy_is_independent():
    tree = AppendOnlyTree(4)
    tree.extend([1, 2, 3])
    other = tree.copy()
    other.append(4)
    assert tree.leaf_count == 3 and other.leaf_count == 4
    assert tree.root == oracle_root([1, 2, 3], 4)


def test_malformed_frontiers_rejected():
    with pytest.raises(MalformedFrontier):
        Frontier(3, 1, (0, 0, 0))  # bit 0 set but node missing
    with pytest.raises(MalformedFrontier):
        Frontier(3, 2, (7, 9, 0))  # stray node at level 0
    with pytest.raises(MalformedFrontier):
        Frontier(3, 9, (0, 0, 0))
    with pytest.raises(MalformedFrontier):
        Frontier(3, 0, (0, 0))
    with pytest.raises(MalformedFrontier):
        Frontier.from_bytes(b"\x00" * 33)


def test_random_depth_eight_sequences_against_oracle():
    rng = random.Random(8)
    for _ in range(20):
        leaves = [rng.randrange(1, P) for _ in range(rng.randint(0, 64))]
        tree = AppendOnlyTree(8)
        tree.extend(leaves)
        assert tree.root == oracle_root(leaves, 8)
