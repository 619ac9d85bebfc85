"""Rational-security checks: the stake bound and a bribery walk-through.

An operator who steals everything locked in the bridge gains at most TVL.
To keep a theft batch alive it must pay every verifier at least what that
verifier would earn by disputing, which is the slashed stake minus the
dispute cost.  With stake above ``TVL/|V| + c_f`` that exceeds ``TVL/|V|``
per verifier, so the total bribe exceeds the loot.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..l1sim import BurnRecord
from .world import ClientSpec, Config, ConfigRejected, OperatorSpec, VerifierSpec, build_world, total_value_locked

TOKEN = 1


def stake_bound(clients, n_verifiers: int, dispute_cost: int) -> float:
    return total_value_locked(clients) / n_verifiers + dispute_cost


@dataclass
class BriberyOutcome:
    tvl: int
    verifiers: int
    stake: int
    dispute_cost: int
    slashed: int
    reward: int  # slashed stake minus the dispute cost, paid to the disputing verifier
    theft_reverted: bool

    @property
    def per_verifier_share(self) -> float:
        return self.tvl / self.verifiers

    @property
    def bribe_unprofitable(self) -> bool:
        """Buying every verifier's silence costs more than the whole TVL."""
        return self.reward > self.per_verifier_share and self.theft_reverted


def rational_clients() -> list[ClientSpec]:
    return [ClientSpec("alice", ((0, 500), (TOKEN, 2_000))),
            ClientSpec("bob", ((0, 500), (TOKEN, 1_000)))]


def load(stake: int, n_verifiers: int = 3, dispute_cost: int = 5, seed: int = 0):
    """Build a rational-mode world; raises :class:`ConfigRejected` if the stake is too low."""
    config = Config(fpp=4, min_stake=1, dispute_cost=dispute_cost, rational=True)
    verifiers = [VerifierSpec(f"verifier{i}", 100) for i in range(n_verifiers)]
    return build_world(seed, config, rational_clients(), [OperatorSpec("operator", stake)], verifiers)


def bribery_walkthrough(margin: int = 1, n_verifiers: int = 3, dispute_cost: int = 5,
                        seed: int = 0) -> BriberyOutcome:
    """Stake just above the bound, publish a batch that pays the bridge to the operator."""
    clients = rational_clients()
    stake = int(stake_bound(clients, n_verifiers, dispute_cost)) + margin
    world = load(stake, n_verifiers, dispute_cost, seed)
    chain, op = world.chain, world.operator
    alice = world.wallets["alice"]
    alice.join(chain, op, TOKEN, 2_000, 100, 1)
    op.seal()
    chain.advance_block()
    world.scan_all()

    locked = chain.token_of(TOKEN, "bridge")
    bob = world.wallets["bob"]
    bob.join(chain, op, TOKEN, 1_000, 100, 1)

    def theft(header, brackets, entries):
        from .. import blob

        # a withdrawal record for the whole bridge balance, indexed at the mint
        stolen = dict(entries)
        stolen[(0, 0)] = BurnRecord(TOKEN, locked + 1_000, 0, op.addr)
        return blob.serialize_batch(header, brackets), stolen

    op.tamper = theft
    h = op.seal()
    op.tamper = None
    first = world.verifiers[0]
    before = chain.native_of(first.addr)
    records = first.scan()
    accepted = [r for r in records if r.accepted]
    slashed = accepted[0].slashed if accepted else 0
    return BriberyOutcome(
        tvl=total_value_locked(clients), verifiers=n_verifiers, stake=stake,
        dispute_cost=dispute_cost, slashed=slashed,
        reward=chain.native_of(first.addr) - before,
        theft_reverted=chain.cur_height == h - 1 and h not in chain.burn_data,
    )


def bound_is_enforced(n_verifiers: int = 3, dispute_cost: int = 5) -> bool:
    """At the bound the world refuses to load; one unit above it loads."""
    bound = stake_bound(rational_clients(), n_verifiers, dispute_cost)
    try:
        load(int(bound), n_verifiers, dispute_cost)
    except ConfigRejected:
        pass
    else:
        return False
    load(int(bound) + 1, n_verifiers, dispute_cost)
    return True
