"""Attack injection: publish a batch that breaks one chosen rule and watch the dispute.

A mutation targets the first bracket that opens with the transaction kind
its rule is about (see ``NEEDS``) and is applied at the right pipeline
stage: before
hashing, after hashing, after bracket hashing, after signing, after
checkpointing, or on the raw words.  Later stages are redone honestly so
that, where the layout allows it, exactly one rule is violated.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from .. import blob, crypto, txmodel
from ..crypto import SignatureKeyPair
from ..fraud import RULES, rule_reveal_budget
from ..l1sim import BurnRecord
from ..txmodel import Bracket, Kind, TxOutput
from .world import ClientSpec, Config, OperatorSpec, VerifierSpec, build_world

# rules whose injection necessarily trips another rule as well
EXPECTED = {r: frozenset({r}) for r in RULES}
EXPECTED["3d"] = frozenset({"3c", "3d"})  # moving the fee-collect also leaves the batch without one at the end

class InjectionMismatch(ValueError):
    """The pending batch lacks the transactions an injection needs."""


@dataclass
class Rebuild:
    """Honest pipeline stages, applied after a mutation at an earlier stage."""

    base: object  # Replica at height - 1
    keyring: txmodel.KeyRing
    ck_f: int

    @staticmethod
    def rehash(groups):
        return [[tx.with_hash() for tx in g] for g in groups]

    @staticmethod
    def bracket(groups):
        return [Bracket(tuple(g), bracket_hash=txmodel.bracket_hash([t.tx_hash for t in g]))
                for g in groups]

    def sign(self, brs):
        return [txmodel.bracket_sign(b, self.keyring) for b in brs]

    def checkpoint(self, brs):
        state = self.base.fork()
        running, out = 0, []
        for b in brs:
            state.apply_bracket(b)
            running = (running + sum(t.fee for t in b.txs)) % crypto.P
            out.append(replace(
                b, post_crt=state.coins.root, post_ccount=state.coins.leaf_count,
                post_ntr=state.nulls.root, post_ncount=state.nulls.leaf_count, running_fee=running,
            ))
        header = blob.BatchHeader(state.coins.root, state.coins.leaf_count,
                                  state.nulls.root, state.nulls.leaf_count, self.ck_f)
        return header, out

    def full(self, groups):
        return self.checkpoint(self.sign(self.bracket(self.rehash(groups))))


def burn_entries(brackets) -> dict:
    out = {}
    for i, br in enumerate(brackets):
        for j, tx in enumerate(br.txs):
            if tx.kind == Kind.BURN:
                b = tx.body
                out[(i, j)] = BurnRecord(tx.token, b.value, b.coin_fee - tx.fee,
                                         crypto.int_to_address(b.id_l1))
    return out


def _flip(data: bytes) -> bytes:
    return bytes([data[0] ^ 1]) + data[1:]


def _set_tx(groups, i, j, tx):
    groups[i] = list(groups[i])
    groups[i][j] = tx
    return groups


# which transaction kind each rule's mutation works on (None: batch-level)
NEEDS = {
    "1a": Kind.TRANSFER, "1b": Kind.MINT, "1c": Kind.BURN, "1d": Kind.TRANSFER, "1e": Kind.TRANSFER,
    "1f": Kind.TRANSFER, "1g": Kind.MINT, "1h": Kind.MINT, "1i": Kind.TRANSFER,
    "2a": Kind.TRANSFER, "2b": Kind.TRANSFER, "2c": Kind.TRANSFER, "2d": None,
    "3a": Kind.BURN, "3b": Kind.MINT, "3c": None, "3d": None, "3e": Kind.TRANSFER, "3f": None,
    "3g": Kind.TRANSFER, "3h": Kind.TRANSFER,
}


def _find(groups, kind) -> int:
    """Index of the first bracket opening with a ``kind`` transaction."""
    for i, g in enumerate(groups[:-1]):
        if g and g[0].kind == kind:
            return i
    raise InjectionMismatch(f"the batch has no bracket opening with a {kind.name.lower()}")


def mutate(rule: str, header, brackets, rb: Rebuild, prior_mint) -> tuple[list[int], dict]:
    """Return (blob words, burn entries) for the pending batch with ``rule`` broken."""
    if rule not in NEEDS:
        raise ValueError(f"unknown rule {rule!r}")
    groups = [list(b.txs) for b in brackets]
    if rule == "1g" and prior_mint is None:
        raise InjectionMismatch("rule 1g needs a mint from an earlier batch")
    need = NEEDS[rule]
    at = _find(groups, need) if need is not None else None
    tx = groups[at][0] if need is not None else None
    if rule == "1h" and len(groups[at]) >= txmodel.BRACKET_CAPACITY:
        raise InjectionMismatch("rule 1h needs room for a second mint in the bracket")
    entries = None

    if rule == "1a":
        words = list(blob.serialize_batch(header, brackets).words)
        (w,) = blob.locate(words, ("tx", at, 0, "kind"))
        words[w] = 9
        return words, burn_entries(brackets)

    if rule in ("1b", "1c", "1d", "1e", "1g", "1h", "1i", "2d", "3c", "3d", "3f"):
        if rule == "1b":
            b = tx.body
            c = crypto.commit_output(tx.token, b.value, b.coin_fee, (b.k + 1) % crypto.P)
            _set_tx(groups, at, 0, replace(tx, outputs=(TxOutput(c),)))
        elif rule == "1c":
            _set_tx(groups, at, 0, replace(tx, body=replace(tx.body, value=tx.body.value + 1)))
        elif rule == "1d":
            inp = replace(tx.inputs[0], proof=_flip(tx.inputs[0].proof))
            _set_tx(groups, at, 0, replace(tx, inputs=(inp, *tx.inputs[1:])))
        elif rule == "1e":
            _set_tx(groups, at, 0, replace(tx, tx_proof=_flip(tx.tx_proof)))
        elif rule == "1g":
            _set_tx(groups, at, 0, prior_mint)
        elif rule == "1h":
            groups[at] = [tx, tx]
        elif rule == "1i":
            _set_tx(groups, at, 0, replace(tx, crt_ref=txmodel.CrtRef(tx.crt_ref.height, 0)))
        elif rule == "2d":
            groups.insert(len(groups) - 1, [])
        elif rule == "3c":
            groups = groups[:-1]
        elif rule == "3d":
            groups = [groups[-1]] + groups[:-1]
        elif rule == "3f":
            fc = groups[-1][0]
            c = crypto.commit_output(0, 0, (rb.ck_f + 1) % crypto.P, fc.body.k)
            _set_tx(groups, len(groups) - 1, 0, replace(fc, outputs=(TxOutput(c),)))
        header, brs = rb.full(groups)

    elif rule == "1f":
        groups = rb.rehash(groups)
        t = groups[at][0]
        _set_tx(groups, at, 0, replace(t, tx_hash=(t.tx_hash + 1) % crypto.P))
        header, brs = rb.checkpoint(rb.sign(rb.bracket(groups)))

    elif rule in ("2a", "2b", "2c"):
        brs = rb.bracket(rb.rehash(groups))
        if rule == "2a":
            brs[at] = replace(brs[at], bracket_hash=(brs[at].bracket_hash + 1) % crypto.P)
        brs = rb.sign(brs)
        if rule == "2b":
            brs[at] = replace(brs[at], signatures=brs[at].signatures[:-1])
        elif rule == "2c":
            stranger = SignatureKeyPair.generate(random.Random(7))
            msg = txmodel.signing_message(brs[at].bracket_hash)
            sigs = brs[at].signatures
            brs[at] = replace(brs[at], signatures=(stranger.sign(msg), *sigs[1:]))
        header, brs = rb.checkpoint(brs)

    elif rule in ("3a", "3b"):
        header, brs = rb.full(groups)
        entries = burn_entries(brs)
        if rule == "3a":
            e = entries[(at, 0)]
            entries[(at, 0)] = replace(e, value=e.value + 1)
        else:
            entries[(at, 0)] = BurnRecord(tx.token, tx.body.value, 0, crypto.int_to_address(1))

    elif rule in ("3e", "3g", "3h"):
        header, brs = rb.full(groups)
        field_name = {"3e": "running_fee", "3g": "post_crt", "3h": "post_ntr"}[rule]
        b = brs[at]
        brs[at] = replace(b, **{field_name: (getattr(b, field_name) + 1) % crypto.P})

    if entries is None:
        entries = burn_entries(brs)
    return list(blob.serialize_batch(header, brs).words), entries


# --- the target scenario ------------------------------------------------------------


@dataclass
class InjectionResult:
    rule: str
    expected: frozenset
    detected: frozenset
    disputed_rule: str | None
    accepted: bool
    height: int
    cur_height_after: int
    stake_at_risk: int
    slashed: int
    verifier_gain: int
    payload_words: int
    budget: int
    bracket_count: int
    problems: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.problems


TOKEN = 1


def target_world(seed: int = 0, padding: int = 0, config: Config | None = None):
    """Publish a prior batch of mints and queue the target brackets (unsealed)."""
    config = config or Config(depth=32, fpp=4, min_stake=1000, dispute_cost=5)
    clients = [ClientSpec("alice", ((0, 10_000), (TOKEN, 10_000))),
               ClientSpec("bob", ((0, 10_000), (TOKEN, 10_000)))]
    world = build_world(seed, config, clients, [OperatorSpec("operator", 1000, 1000)],
                        [VerifierSpec("verifier", 100)])
    chain, op = world.chain, world.operator
    alice, bob = world.wallets["alice"], world.wallets["bob"]
    alice.join(chain, op, TOKEN, 40, 10, 1)
    alice.join(chain, op, TOKEN, 30, 10, 1)
    op.seal()
    chain.advance_block()
    world.scan_all()
    # leave one stake pending withdrawal so slashing must sweep it too
    chain.unstake_request(op.addr)
    chain.stake(op.addr, config.min_stake)

    bob.join(chain, op, TOKEN, 20, 5, 1)
    coins = sorted(alice.spendable(world.view, TOKEN), key=lambda c: -c.secrets.value)
    op.add_bracket(alice.transfer(world.view, world.backend, bob.address, TOKEN, 15, 2, 1))
    op.add_bracket(alice.leave(world.view, world.backend, coins[1], 2, config.floors.burn))
    for _ in range(padding):
        bob.join(chain, op, TOKEN, 1, 1, 0)
    prior_mint = op.sealed[0].brackets[0].txs[0]
    return world, prior_mint


def run_injection(rule: str, seed: int = 0, padding: int = 0, config: Config | None = None) -> InjectionResult:
    from ..fraud import detect, env_for

    world, prior_mint = target_world(seed, padding, config)
    chain, op, ver = world.chain, world.operator, world.verifiers[0]
    keyring = world.keyring()

    def tamper(header, brackets, entries):
        rb = Rebuild(op.replica, keyring, header.ck_f)
        return mutate(rule, header, brackets, rb, prior_mint)

    op.tamper = tamper
    stake_at_risk = chain.stakes.get(op.addr, 0) + sum(chain.unstake_requests.get(op.addr, {}).values())
    before = chain.native_of(ver.addr)
    h = op.seal()
    op.tamper = None
    parsed = blob.parse_batch(chain.blobs[h])
    bracket_count = chain.blobs[h].words[blob.H_M]
    detected = frozenset(f.rule for f in detect(parsed, h, ver.replica, env_for(chain, h)))
    records = ver.scan()
    rec = records[0] if records else None
    res = InjectionResult(
        rule=rule, expected=EXPECTED[rule], detected=detected,
        disputed_rule=rec.rule if rec else None, accepted=bool(rec and rec.accepted),
        height=h, cur_height_after=chain.cur_height, stake_at_risk=stake_at_risk,
        slashed=rec.slashed if rec else 0, verifier_gain=chain.native_of(ver.addr) - before,
        payload_words=rec.payload_words if rec else 0,
        budget=rule_reveal_budget(rule, chain.depth), bracket_count=bracket_count,
    )
    if detected != res.expected:
        res.problems.append(f"detected {sorted(detected)}, expected {sorted(res.expected)}")
    if not res.accepted or res.disputed_rule not in res.expected:
        res.problems.append(f"dispute under {res.disputed_rule} accepted={res.accepted}")
    if chain.cur_height != h - 1:
        res.problems.append(f"chain at height {chain.cur_height}, expected {h - 1}")
    if res.slashed != stake_at_risk or res.verifier_gain != stake_at_risk - world.config.dispute_cost:
        res.problems.append("stake was not fully transferred to the verifier")
    if res.payload_words > res.budget:
        res.problems.append(f"payload {res.payload_words} words exceeds budget {res.budget}")
    return res
