"""Dispute fuzzer: adversarial (rule, reveals, aux) attempts against honest batches.

Attempts are built the way a cheating verifier would: pick a rule and aux
data (from real positions, neighbouring positions, real frontiers and paths
taken from other points in history, or random junk), then reveal exactly the
words the judge will read, occasionally with one revealed word altered.
Every attempt goes through :meth:`Chain.dispute_block`; a sound judge
reverts all of them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .. import blob, fraud
from ..l1sim import Revert
from ..merkle import AppendOnlyTree
from .actions import Advance, Retrieve
from .scenario import generate_honest, run_scenario


@dataclass
class FuzzTarget:
    chain: object
    heights: list[int]
    # per height, per bracket: [(n_in, n_out)] for each tx
    shapes: dict[int, list]
    # (coin frontier, nullifier frontier) at every bracket boundary
    frontiers: list[tuple]
    # genuine nullifier inclusion proofs from assorted points in history
    paths: list


def honest_target(seed: int = 0, depth: int = 16) -> FuzzTarget:
    """An honest run whose batches all stay disputable (fpp far in the future)."""
    sc = generate_honest(seed, depth=depth, fpp=10_000)
    # the generator waits out the fraud-proof period at the end; keep every batch open instead
    actions = tuple(Advance(1) if isinstance(a, Advance) else a
                    for a in sc.actions if not isinstance(a, Retrieve))
    res = run_scenario(replace(sc, actions=actions))
    chain = res.world.chain
    heights = list(range(1, chain.cur_height + 1))
    if any(chain.block_finalized(h) for h in heights) or res.disputes:
        raise RuntimeError("fuzz target must be honest and entirely non-final")
    shapes, frontiers, paths = {}, [], []
    coins, nulls = AppendOnlyTree(depth), AppendOnlyTree(depth)
    for h in heights:
        batch = blob.parse_batch(chain.blobs[h])
        shapes[h] = [[(len(t.inputs), len(t.outputs)) for t in br.txs] for br in batch.brackets]
        for br in batch.brackets:
            frontiers.append((coins.snapshot_frontier(), nulls.snapshot_frontier()))
            for tx in br.txs:
                coins.extend(tx.coin_leaves())
                nulls.extend(tx.nullifiers())
        for idx in range(0, nulls.leaf_count, max(1, nulls.leaf_count // 8)):
            paths.append(nulls.prove(idx))
    return FuzzTarget(chain, heights, shapes, frontiers, paths)


def _near(rng: random.Random, n: int) -> int:
    """Mostly valid indices below ``n``, sometimes just outside or absurd."""
    r = rng.random()
    if r < 0.8 and n > 0:
        return rng.randrange(n)
    if r < 0.9:
        return n + rng.randint(0, 2)
    return rng.choice([-1, 2**32, 2**255, rng.getrandbits(64)])


def _position(rng, target: FuzzTarget, h: int, need_k: bool):
    shape = target.shapes[h]
    i = _near(rng, len(shape))
    row = shape[i] if 0 <= i < len(shape) else []
    j = _near(rng, len(row))
    slots = max(row[j]) if 0 <= j < len(row) else 1
    k = _near(rng, max(slots, 1))
    return (i, j, k) if need_k else (i, j)


def random_aux(rng: random.Random, target: FuzzTarget, rule: str, h: int, depth: int) -> tuple:
    if rng.random() < 0.05:
        return tuple(rng.getrandbits(rng.choice([3, 64, 256])) for _ in range(rng.randint(0, 6)))
    m = len(target.shapes[h])
    if rule == "1a":
        kind = rng.randrange(5)
        if kind == 0:
            return (0,)
        if kind == 1:
            return (1, rng.randrange(blob.BLOB_WORDS + 2))
        if kind == 2:
            return (2, _near(rng, m))
        return (3, *_position(rng, target, h, False))
    burns = sorted(target.chain.burn_data.get(h, {}))
    if rule in ("3a", "3b") and burns and rng.random() < 0.5:
        return burns[rng.randrange(len(burns))]
    if rule in ("1b", "1c", "1e", "1f", "3a", "3b", "3d", "3f"):
        return _position(rng, target, h, False)
    if rule in ("1d", "1i", "2c"):
        return _position(rng, target, h, True)
    if rule == "1g":
        proof = rng.choice(target.paths)
        path = list(proof.path)
        index = proof.index if rng.random() < 0.7 else rng.randrange(2**depth)
        if rng.random() < 0.2:
            path[rng.randrange(len(path))] ^= 1
        if rng.random() < 0.05:
            path = path[:-1]
        return (*_position(rng, target, h, True), index, *path)
    if rule == "1h":
        a, b = _position(rng, target, h, True), _position(rng, target, h, True)
        if rng.random() < 0.3:
            b = a
        return (*a, *b[1:])
    if rule in ("2a", "2b", "2d"):
        return (_near(rng, m),)
    if rule == "3c":
        return ()
    if rule == "3e":
        return (1,) if rng.random() < 0.3 else (0, _near(rng, m))
    if rule in ("3g", "3h"):
        if rng.random() < 0.3:
            return (1,)
        coin_f, null_f = rng.choice(target.frontiers)
        f = coin_f if rule == "3g" else null_f
        words = list(f.to_words())
        if rng.random() < 0.1:
            words[1] += 1
        return (0, _near(rng, m), *words)
    raise ValueError(rule)


@dataclass
class FuzzStats:
    rule: str
    attempts: int = 0
    accepted: int = 0
    judged_false: int = 0
    bad_reveals: int = 0
    other_reverts: int = 0
    accepted_aux: list = field(default_factory=list)


def fuzz_rule(target: FuzzTarget, rule: str, attempts: int, seed: int = 0) -> FuzzStats:
    rng = random.Random(f"{seed}:{rule}")
    chain = target.chain
    stats = FuzzStats(rule)
    for _ in range(attempts):
        h = rng.choice(target.heights)
        aux = random_aux(rng, target, rule, h, chain.depth)
        ctx = fraud.RecordingContext(chain, h)
        fraud.check(rule, ctx, aux)
        reveals = [(rh, r) for rh in sorted(ctx.views)
                   for r in blob.reveal(chain.blobs[rh], ctx.views[rh].touched)]
        tampered = bool(reveals) and rng.random() < 0.1
        if tampered:
            n = rng.randrange(len(reveals))
            rh, r = reveals[n]
            reveals[n] = (rh, replace(r, word=(r.word + 1) % 2**256))
        elif reveals and rng.random() < 0.05:
            reveals.pop(rng.randrange(len(reveals)))
        proof = fraud.FraudProof(h, rule, tuple(reveals), tuple(aux))
        stats.attempts += 1
        try:
            chain.dispute_block("fuzzer", proof)
        except Revert as e:
            msg = str(e)
            if "commitment" in msg:
                stats.bad_reveals += 1
            elif "not violated" in msg:
                stats.judged_false += 1
            else:
                stats.other_reverts += 1
            continue
        stats.accepted += 1
        stats.accepted_aux.append((h, aux))
    return stats
