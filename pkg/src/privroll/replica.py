"""Replayed L2 state: coin and nullifier trees plus the published checkpoints."""

from __future__ import annotations

from dataclasses import dataclass, field

from .merkle import AppendOnlyTree, Frontier
from .txmodel import Bracket, CrtRef


@dataclass(frozen=True)
class HeaderSummary:
    coin_root: int
    coin_count: int
    nullifier_root: int
    nullifier_count: int
    last_running_fee: int


GENESIS_SUMMARY = HeaderSummary(0, 0, 0, 0, 0)


@dataclass
class Replica:
    depth: int
    coins: AppendOnlyTree = None
    nulls: AppendOnlyTree = None
    # nullifier -> first leaf index; c -> leaf indices
    null_index: dict[int, int] = field(default_factory=dict)
    coin_index: dict[int, list[int]] = field(default_factory=dict)
    checkpoints: dict[int, list[int]] = field(default_factory=dict)
    headers: dict[int, HeaderSummary] = field(default_factory=dict)
    height: int = 0
    # (coin leaves, nullifier leaves) appended per accepted height, for rollback
    history: dict[int, tuple[list[int], list[int]]] = field(default_factory=dict)

    def __post_init__(self):
        if self.coins is None:
            self.coins = AppendOnlyTree(self.depth)
        if self.nulls is None:
            self.nulls = AppendOnlyTree(self.depth)

    def fork(self) -> Replica:
        return Replica(
            depth=self.depth,
            coins=self.coins.copy(),
            nulls=self.nulls.copy(),
            null_index=dict(self.null_index),
            coin_index={c: list(v) for c, v in self.coin_index.items()},
            checkpoints={h: list(v) for h, v in self.checkpoints.items()},
            headers=dict(self.headers),
            height=self.height,
            history=dict(self.history),
        )

    def summary(self, height: int) -> HeaderSummary:
        if height <= 0:
            return GENESIS_SUMMARY
        return self.headers[height]

    def append_coin(self, c: int) -> int:
        idx = self.coins.append(c)
        self.coin_index.setdefault(c, []).append(idx)
        return idx

    def append_nullifier(self, nf: int) -> int:
        idx = self.nulls.append(nf)
        self.null_index.setdefault(nf, idx)
        return idx

    def apply_bracket(self, bracket: Bracket) -> tuple[list[int], list[int]]:
        coins = [c for tx in bracket.txs for c in tx.coin_leaves()]
        nulls = [nf for tx in bracket.txs for nf in tx.nullifiers()]
        for c in coins:
            self.append_coin(c)
        for nf in nulls:
            self.append_nullifier(nf)
        return coins, nulls

    def resolve(self, ref: CrtRef, height: int, current: list[int] | None = None) -> int | None:
        """Checkpointed coin root for ``ref`` as seen from a batch at ``height``.

        ``current`` holds the published post_crt values of the brackets that
        precede the referencing one in that batch.  Returns None for refs that
        do not name an earlier checkpoint.
        """
        if ref.is_genesis:
            return 0
        if ref.height <= 0 or ref.bracket < 0:
            return None
        if ref.height == height:
            if current is None or ref.bracket >= len(current):
                return None
            return current[ref.bracket]
        if ref.height > height or ref.height not in self.checkpoints:
            return None
        roots = self.checkpoints[ref.height]
        return roots[ref.bracket] if ref.bracket < len(roots) else None

    def accept_batch(self, height: int, brackets, running_fee: int) -> None:
        """Record an accepted batch (its leaves must already be applied)."""
        self.checkpoints[height] = [b.post_crt for b in brackets]
        self.headers[height] = HeaderSummary(
            self.coins.root, self.coins.leaf_count,
            self.nulls.root, self.nulls.leaf_count, running_fee,
        )
        self.height = height

    def replay_batch(self, height: int, brackets) -> None:
        coins, nulls = [], []
        for b in brackets:
            cs, ns = self.apply_bracket(b)
            coins += cs
            nulls += ns
        self.history[height] = (coins, nulls)
        fee = brackets[-1].running_fee if brackets else 0
        self.accept_batch(height, brackets, fee)

    def rollback(self, height: int) -> None:
        """Forget every batch at ``height`` and above by replaying from genesis."""
        keep = sorted(h for h in self.history if h < height)
        fresh = Replica(self.depth)
        for h in keep:
            coins, nulls = self.history[h]
            for c in coins:
                fresh.append_coin(c)
            for nf in nulls:
                fresh.append_nullifier(nf)
            fresh.history[h] = self.history[h]
            fresh.checkpoints[h] = self.checkpoints[h]
            fresh.headers[h] = self.headers[h]
        fresh.height = keep[-1] if keep else 0
        self.__dict__.update(fresh.__dict__)

    def coin_frontier(self) -> Frontier:
        return self.coins.snapshot_frontier()

    def nullifier_frontier(self) -> Frontier:
        return self.nulls.snapshot_frontier()
