"""Scenario configuration, the rational-stake gate and a wired-up protocol stack."""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field

from .. import blob, circuits
from ..l1sim import Chain, ChainConfig
from ..roles import ClientWallet, FeeFloors, Operator, Verifier


class ConfigRejected(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


@dataclass(frozen=True)
class Config:
    depth: int = 32
    fpp: int = 4
    min_stake: int = 10_000
    dispute_cost: int = 5
    floors: FeeFloors = field(default_factory=FeeFloors)
    rational: bool = False


@dataclass(frozen=True)
class ClientSpec:
    name: str
    # token id -> initial L1 balance; token 0 is the native currency
    balances: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class OperatorSpec:
    name: str
    stake: int
    balance: int = 0


@dataclass(frozen=True)
class VerifierSpec:
    name: str
    balance: int = 100


def total_value_locked(clients) -> int:
    """Everything clients could lock in the bridge, counted at one native unit per token unit."""
    return sum(amount for c in clients for _, amount in c.balances)


def validate(config: Config, clients, operators, verifiers) -> None:
    """Raise :class:`ConfigRejected` listing every violated constraint."""
    problems = []
    if config.depth < 1:
        problems.append("tree depth must be positive")
    if config.fpp < 1:
        problems.append("fraud-proof period must be at least one block")
    if not operators:
        problems.append("at least one operator is required")
    if not verifiers:
        problems.append("at least one verifier is required")
    for op in operators:
        if op.stake < config.min_stake:
            problems.append(f"operator {op.name} stakes {op.stake} < minimum {config.min_stake}")
    for v in verifiers:
        if v.balance < config.dispute_cost:
            problems.append(f"verifier {v.name} cannot pay the dispute cost")
    if config.rational and verifiers:
        bound = total_value_locked(clients) / len(verifiers) + config.dispute_cost
        for op in operators:
            if op.stake <= bound:
                problems.append(
                    f"operator {op.name} stake {op.stake} <= TVL/|V| + c_f = {bound:g}"
                )
    names = [c.name for c in clients] + [o.name for o in operators] + [v.name for v in verifiers]
    if len(set(names)) != len(names):
        problems.append("participant names must be unique")
    if problems:
        raise ConfigRejected(problems)


def backend_key(seed: int) -> bytes:
    return hashlib.sha256(b"backend" + seed.to_bytes(8, "big", signed=True)).digest()


@dataclass
class World:
    config: Config
    chain: Chain
    rng: random.Random
    wallets: dict[str, ClientWallet]
    operators: list[Operator]
    verifiers: list[Verifier]

    @property
    def backend(self):
        return self.chain.backend

    @property
    def operator(self) -> Operator:
        return self.operators[0]

    @property
    def view(self):
        """The replica clients read coin positions and roots from."""
        return self.verifiers[0].replica

    def keyring(self):
        """Every client signing key, for tests that re-sign tampered brackets."""
        from ..txmodel import KeyRing

        ring = KeyRing()
        for w in self.wallets.values():
            ring.keys.update(w.keyring.keys)
        return ring

    def scan_all(self):
        """Run every verifier, then let wallets pick up coins from the accepted batches."""
        records = []
        for v in self.verifiers:
            records += v.scan()
        for op in self.operators:
            op.sync()
        view = self.view
        for h in range(1, view.height + 1):
            if h in self._delivered:
                continue
            parsed = blob.parse_batch(self.chain.blobs[h])
            for w in self.wallets.values():
                w.receive(parsed)
            self._delivered.add(h)
        # forget deliveries for heights that were reverted
        self._delivered = {h for h in self._delivered if h <= view.height}
        return records

    def __post_init__(self):
        self._delivered: set[int] = set()


def build_world(seed: int, config: Config, clients, operators, verifiers,
                backend=None) -> World:
    validate(config, clients, operators, verifiers)
    rng = random.Random(seed)
    backend = backend or circuits.ReferenceBackend(key=backend_key(seed))
    chain = Chain(backend, ChainConfig(config.depth, config.fpp, config.min_stake, config.dispute_cost))
    wallets = {}
    for spec in clients:
        w = ClientWallet(spec.name, rng)
        for token, amount in spec.balances:
            if token == 0:
                chain.credit_native(w.id_l1, amount)
            else:
                chain.credit_token(token, w.id_l1, amount)
        wallets[spec.name] = w
    ops = []
    for spec in operators:
        chain.credit_native(spec.name, spec.stake + spec.balance)
        chain.stake(spec.name, spec.stake)
        ops.append(Operator(spec.name, chain, rng, config.floors))
    vers = []
    for spec in verifiers:
        chain.credit_native(spec.name, spec.balance)
        vers.append(Verifier(spec.name, chain))
    return World(config, chain, rng, wallets, ops, vers)
