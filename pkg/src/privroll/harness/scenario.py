"""Scenarios: generation, loading, execution against the full stack, and the conservation ledger."""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import asdict, dataclass, field

from .. import blob
from ..l1sim import BRIDGE, Revert
from ..roles import BracketRejected, FeeFloors
from ..txmodel import TransferRefused
from . import inject
from .actions import (
    Advance, Burn, Inject, Join, Replay, Retrieve, Scan, Seal, Transfer,
    action_from_dict, action_to_dict,
)
from .reference import ReferenceState
from .world import ClientSpec, Config, OperatorSpec, VerifierSpec, World, build_world, validate

SCHEMA = "privroll-scenario/1"
REPORT_SCHEMA = "privroll-report/1"


@dataclass(frozen=True)
class Scenario:
    seed: int
    config: Config
    clients: tuple[ClientSpec, ...]
    operators: tuple[OperatorSpec, ...]
    verifiers: tuple[VerifierSpec, ...]
    actions: tuple = ()

    def validate(self) -> None:
        validate(self.config, self.clients, self.operators, self.verifiers)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "seed": self.seed,
            "config": asdict(self.config),
            "clients": [{"name": c.name, "balances": [list(b) for b in c.balances]} for c in self.clients],
            "operators": [asdict(o) for o in self.operators],
            "verifiers": [asdict(v) for v in self.verifiers],
            "actions": [action_to_dict(a) for a in self.actions],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> Scenario:
        if d.get("schema") != SCHEMA:
            raise ValueError(f"unsupported scenario schema {d.get('schema')!r}")
        cfg = dict(d["config"])
        cfg["floors"] = FeeFloors(**cfg.get("floors", {}))
        return cls(
            seed=d["seed"],
            config=Config(**cfg),
            clients=tuple(ClientSpec(c["name"], tuple(tuple(b) for b in c["balances"])) for c in d["clients"]),
            operators=tuple(OperatorSpec(**o) for o in d["operators"]),
            verifiers=tuple(VerifierSpec(**v) for v in d["verifiers"]),
            actions=tuple(action_from_dict(a) for a in d["actions"]),
        )

    @classmethod
    def loads(cls, text: str) -> Scenario:
        return cls.from_dict(json.loads(text))


# --- generation -------------------------------------------------------------------------


def generate_honest(seed: int, depth: int = 32, fpp: int = 4) -> Scenario:
    """A random honest scenario: 3-8 clients, 2-3 tokens, 20-60 transfers, at least two batches."""
    rng = random.Random(seed)
    n_clients = rng.randint(3, 8)
    n_tokens = rng.randint(2, 3)
    n_transfers = rng.randint(20, 60)
    names = [f"client{i}" for i in range(n_clients)]
    tokens = list(range(1, n_tokens + 1))
    clients = tuple(ClientSpec(n, ((0, 5_000), *((t, 5_000) for t in tokens)))  for n in names)
    config = Config(depth=depth, fpp=fpp, min_stake=10_000, dispute_cost=5)
    ref = ReferenceState(fpp, config.floors.transfer, config.floors.burn,
                         l1=ReferenceState.l1_balances(clients))
    actions: list = []

    def act(a) -> bool:
        if ref.try_apply(a):
            ref.apply(len(actions), a)
            actions.append(a)
            return True
        return False

    def publish():
        act(Seal())
        act(Advance(1))
        act(Scan())

    for name in names:
        for token in rng.sample(tokens, rng.randint(1, len(tokens))):
            act(Join(name, token, rng.randint(50, 300), rng.randint(20, 60), rng.randint(0, 2)))
    publish()

    done, since_seal, stalls = 0, 0, 0
    while done < n_transfers:
        holders = [(n, t) for n in names for t in tokens if ref.live(n, t)]
        if rng.random() < 0.1 and holders:
            n, t = rng.choice(holders)
            if act(Burn(n, t, rng.randint(1, 2))):
                since_seal += 1
                continue
        ok = False
        if holders:
            sender, token = rng.choice(holders)
            balance = sum(c.value for c in ref.live(sender, token))
            recipient = rng.choice([n for n in names if n != sender])
            value = rng.randint(1, max(1, balance // 2))
            ok = act(Transfer(sender, recipient, token, value, rng.randint(0, 3), rng.randint(1, 2)))
        if ok:
            done += 1
            since_seal += 1
            stalls = 0
        else:
            stalls += 1
            if stalls % 3 == 0:
                publish()
                since_seal = 0
            if stalls > 12:
                name = rng.choice(names)
                act(Join(name, rng.choice(tokens), rng.randint(50, 300), rng.randint(20, 60), 1))
                stalls = 0
        if since_seal >= rng.randint(6, 15):
            publish()
            since_seal = 0
    publish()
    # let everything but the newest batch finalize, then publish once more to sweep
    act(Advance(fpp + 1))
    publish()
    for name in names:
        act(Retrieve(name))
    return Scenario(seed, config, clients, (OperatorSpec("operator", 10_000),),
                    (VerifierSpec("verifier", 100),), tuple(actions))


# --- execution ----------------------------------------------------------------------------


@dataclass
class RunResult:
    scenario: Scenario
    world: World
    reference: ReferenceState
    rejections: list[tuple[int, str]] = field(default_factory=list)
    disputes: list = field(default_factory=list)
    # action index of every bracket submission, keyed by (height, bracket index) once sealed
    origins: dict[tuple[int, int], int] = field(default_factory=dict)
    errors: list[str] = field(default_factory=list)

    def conservation(self) -> dict[int, dict[str, int]]:
        return conservation(self.world, self.scenario)

    def report(self) -> dict:
        return build_report(self)

    def report_text(self) -> str:
        return json.dumps(self.report(), sort_keys=True, indent=1, default=str)


def _operator_for(world: World, turn: int):
    return world.operators[turn % len(world.operators)]


def run_scenario(scenario: Scenario, backend=None) -> RunResult:
    scenario.validate()
    world = build_world(scenario.seed, scenario.config, scenario.clients, scenario.operators,
                        scenario.verifiers, backend)
    ref = ReferenceState(scenario.config.fpp, scenario.config.floors.transfer, scenario.config.floors.burn,
                         l1=ReferenceState.l1_balances(scenario.clients))
    res = RunResult(scenario, world, ref)
    chain, floors = world.chain, scenario.config.floors
    turn = 0
    last_spend: dict[str, object] = {}
    queued: list[int] = []  # action indices of brackets in the current operator's mempool

    for idx, a in enumerate(scenario.actions):
        ref.apply(idx, a)
        op = _operator_for(world, turn)
        try:
            if isinstance(a, Join):
                world.wallets[a.client].join(chain, op, a.token, a.value, a.g, a.fee)
                queued.append(idx)
            elif isinstance(a, Transfer):
                w = world.wallets[a.sender]
                br = w.transfer(world.view, world.backend, world.wallets[a.recipient].address,
                                a.token, a.value, a.out_fee, a.tx_fee)
                op.add_bracket(br)
                last_spend[a.sender] = br
                queued.append(idx)
            elif isinstance(a, Burn):
                w = world.wallets[a.client]
                coin = w.pick_burn(world.view, a.token, a.fee)
                br = w.leave(world.view, world.backend, coin, a.fee, floors.burn)
                op.add_bracket(br)
                last_spend[a.client] = br
                queued.append(idx)
            elif isinstance(a, Replay):
                br = last_spend.get(a.client)
                if br is None:
                    raise TransferRefused("nothing to replay")
                op.pending.append(op._apply(br))
                queued.append(idx)
            elif isinstance(a, Inject):
                op.tamper = _scenario_tamper(world, op, a.rule)
            elif isinstance(a, Seal):
                try:
                    h = op.seal()
                except inject.InjectionMismatch as e:
                    # the batch cannot carry this injection: record it and publish honestly
                    res.errors.append(f"action {idx}: {e}")
                    op.tamper = None
                    h = op.seal()
                op.tamper = None
                for i, origin in enumerate(queued):
                    res.origins[(h, i)] = origin
                queued = []
                turn += 1
            elif isinstance(a, Advance):
                chain.advance_block(a.blocks)
            elif isinstance(a, Scan):
                res.disputes += world.scan_all()
            elif isinstance(a, Retrieve):
                world.wallets[a.client].retrieve_all(chain)
        except (TransferRefused, BracketRejected, Revert) as e:
            res.rejections.append((idx, str(e)))
    return res


def _scenario_tamper(world: World, op, rule: str):
    keyring = world.keyring()

    def tamper(header, brackets, entries):
        prior = next((b.txs[0] for s in op.sealed for b in s.brackets if b.txs[0].kind == 1), None)
        rb = inject.Rebuild(op.replica, keyring, header.ck_f)
        return inject.mutate(rule, header, brackets, rb, prior)

    return tamper


# --- ledgers and reports --------------------------------------------------------------------


def conservation(world: World, scenario: Scenario | None = None) -> dict[int, dict[str, int]]:
    """Per-token ledger: deposits = withdrawals + L2 coins + pending withdrawals + fees."""
    view, chain = world.view, world.chain
    tokens = {0}
    for w in world.wallets.values():
        tokens |= set(w.deposited)
    out = {}
    for t in sorted(tokens):
        deposits = sum(w.deposited.get(t, 0) for w in world.wallets.values())
        withdrawals = sum(w.withdrawn.get(t, 0) for w in world.wallets.values())
        remaining = 0
        for w in world.wallets.values():
            for c in w.coins.values():
                if c.c in w.spent or c.c not in view.coin_index:
                    continue
                if t == 0:
                    remaining += c.secrets.fee
                elif c.secrets.token == t:
                    remaining += c.secrets.value
        pending = 0
        for h, entries in chain.burn_data.items():
            for rec in entries.values():
                pending += rec.fee if t == 0 else (rec.value if rec.token == t else 0)
        fees = 0
        if t == 0:
            fees = sum(s.fee for op in world.operators for s in op.fee_coins)
            fees += view.summary(view.height).last_running_fee if view.height else 0
            fees += sum(op.running_fee for op in world.operators)
        row = {"deposits": deposits, "withdrawals": withdrawals, "l2_remaining": remaining,
               "pending_withdrawals": pending, "fees": fees}
        row["holds"] = deposits == withdrawals + remaining + pending + fees
        bridge = chain.native_of(BRIDGE) if t == 0 else chain.token_of(t, BRIDGE)
        row["bridge_solvent"] = bridge == deposits - withdrawals
        out[t] = row
    return out


def wallet_holdings(world: World) -> dict[str, Counter]:
    out = {}
    for name, w in world.wallets.items():
        cnt = Counter()
        for c in w.coins.values():
            if c.c not in w.spent:
                cnt[(c.secrets.token, c.secrets.value, c.secrets.fee)] += 1
        if cnt:
            out[name] = cnt
    return out


def reference_holdings(ref: ReferenceState) -> dict[str, Counter]:
    out = {}
    for c in ref.coins:
        out.setdefault(c.owner, Counter())[(c.token, c.value, c.fee)] += 1
    return out


def build_report(res: RunResult) -> dict:
    world, chain = res.world, res.world.chain
    ledger = res.conservation()
    ref_ledger = res.reference.conservation()
    matches = wallet_holdings(world) == reference_holdings(res.reference)
    for t, row in ledger.items():
        r = ref_ledger.get(t)
        if r is None or any(r[k] != row[k] for k in ("deposits", "withdrawals", "l2_remaining",
                                                      "pending_withdrawals", "fees")):
            matches = False
    return {
        "schema": REPORT_SCHEMA,
        "seed": res.scenario.seed,
        "block": chain.block,
        "height": chain.cur_height,
        "finalized": [h for h in range(1, chain.cur_height + 1) if chain.block_finalized(h)],
        "events": [{"kind": e.kind, "block": e.block, **{k: v for k, v in e.data}} for e in chain.events],
        "disputes": [asdict(d) for d in res.disputes],
        "rejections": [list(r) for r in res.rejections],
        "reference_rejections": [list(r) for r in res.reference.rejected],
        "conservation": {str(t): row for t, row in ledger.items()},
        "reference_match": matches,
        "errors": res.errors,
        "balances": {
            name: {"native": chain.native_of(w.id_l1),
                   **{str(t): chain.token_of(t, w.id_l1) for t in sorted(w.deposited) if t}}
            for name, w in sorted(world.wallets.items())
        },
    }
