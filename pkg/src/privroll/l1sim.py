"""Deterministic simulated L1: ledgers plus the bridge-in, inbox, judge and bridge-out contracts.

Every entry point validates first and mutates afterwards, so a :class:`Revert`
leaves the chain exactly as it was.  Addresses are strings; the contracts
use the fixed names below and users use their ``id_l1`` hex address.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from . import blob as blobmod
from . import fraud

BRIDGE = "bridge"
JUDGE = "judge"
BRIDGE_OUT = "bridge-out"
GAS_SINK = "gas-sink"
NATIVE = 0
AMOUNT_LIMIT = 2**64


class Revert(Exception):
    """An L1 call failed; chain state is unchanged."""


@dataclass(frozen=True)
class MintRecord:
    pk_sig: int
    token: int
    value: int
    fee: int
    block: int


@dataclass(frozen=True)
class BurnRecord:
    token: int
    value: int
    fee: int
    id_l1: str


@dataclass(frozen=True)
class Event:
    kind: str
    block: int
    data: tuple[tuple[str, object], ...]

    def get(self, key: str):
        return dict(self.data)[key]


@dataclass(frozen=True)
class ChainConfig:
    depth: int = 32
    fpp: int = 10
    min_stake: int = 1000
    dispute_cost: int = 1


@dataclass
class Chain:
    backend: object
    config: ChainConfig = field(default_factory=ChainConfig)
    block: int = 0
    native: dict[str, int] = field(default_factory=dict)
    tokens: dict[tuple[int, str], int] = field(default_factory=dict)
    allowances: dict[tuple[int, str, str], int] = field(default_factory=dict)
    events: list[Event] = field(default_factory=list)
    # bridge-in
    cur_nonce: int = 0
    nonces: dict[int, MintRecord] = field(default_factory=dict)
    # inbox
    commitments: dict[int, int] = field(default_factory=dict)
    publishers: dict[int, str] = field(default_factory=dict)
    blobs: dict[int, blobmod.Blob] = field(default_factory=dict)
    cur_height: int = 0
    hnb: int = 1
    block_fin: dict[int, int] = field(default_factory=dict)
    burn_data: dict[int, dict[tuple[int, int], BurnRecord]] = field(default_factory=dict)
    published_at: dict[int, int] = field(default_factory=dict)
    # judge
    stakes: dict[str, int] = field(default_factory=dict)
    unstake_requests: dict[str, dict[int, int]] = field(default_factory=dict)

    @property
    def depth(self) -> int:
        return self.config.depth

    # --- ledgers ----------------------------------------------------------------

    def _emit(self, kind: str, **data) -> None:
        self.events.append(Event(kind, self.block, tuple(sorted(data.items()))))

    def credit_native(self, addr: str, amount: int) -> None:
        """Test-setup mint of native currency."""
        self.native[addr] = self.native.get(addr, 0) + amount

    def credit_token(self, token: int, addr: str, amount: int) -> None:
        """Test-setup mint of an ERC-20-like token."""
        self.tokens[(token, addr)] = self.tokens.get((token, addr), 0) + amount

    def native_of(self, addr: str) -> int:
        return self.native.get(addr, 0)

    def token_of(self, token: int, addr: str) -> int:
        return self.tokens.get((token, addr), 0)

    def approve(self, token: int, owner: str, spender: str, amount: int) -> None:
        self.allowances[(token, owner, spender)] = amount

    def _move_native(self, src: str, dst: str, amount: int) -> None:
        self.native[src] = self.native.get(src, 0) - amount
        self.native[dst] = self.native.get(dst, 0) + amount

    def _move_token(self, token: int, src: str, dst: str, amount: int) -> None:
        self.tokens[(token, src)] = self.tokens.get((token, src), 0) - amount
        self.tokens[(token, dst)] = self.tokens.get((token, dst), 0) + amount

    def advance_block(self, n: int = 1) -> None:
        if n < 0:
            raise ValueError("blocks only move forward")
        self.block += n

    def snapshot(self) -> Chain:
        """Deep copy used by atomicity tests (the backend is shared)."""
        return copy.deepcopy(self, {id(self.backend): self.backend})

    def state_eq(self, other: Chain) -> bool:
        return all(
            getattr(self, f) == getattr(other, f)
            for f in self.__dataclass_fields__
            if f != "backend"
        )

    # --- bridge-in ----------------------------------------------------------------

    def to_l2(self, caller: str, token: int, value: int, pk_sig: int, g: int) -> int:
        if token == NATIVE:
            raise Revert("token 0 is the fee token; use fee_to_l2")
        if not (0 <= value < AMOUNT_LIMIT and 0 <= g < AMOUNT_LIMIT):
            raise Revert("amount out of range")
        if self.allowances.get((token, caller, BRIDGE), 0) < value:
            raise Revert("insufficient allowance")
        if self.token_of(token, caller) < value:
            raise Revert("insufficient token balance")
        if self.native_of(caller) < g:
            raise Revert("insufficient native balance")
        key = (token, caller, BRIDGE)
        self.allowances[key] = self.allowances.get(key, 0) - value
        self._move_token(token, caller, BRIDGE, value)
        return self._record_deposit(caller, token, value, pk_sig, g)

    def fee_to_l2(self, caller: str, pk_sig: int, g: int) -> int:
        if not 0 <= g < AMOUNT_LIMIT:
            raise Revert("amount out of range")
        if self.native_of(caller) < g:
            raise Revert("insufficient native balance")
        return self._record_deposit(caller, NATIVE, 0, pk_sig, g)

    def _record_deposit(self, caller, token, value, pk_sig, g) -> int:
        self._move_native(caller, BRIDGE, g)
        self.cur_nonce += 1
        self.nonces[self.cur_nonce] = MintRecord(pk_sig, token, value, g, self.block)
        self._emit("LOCK", nonce=self.cur_nonce, token=token, value=value, fee=g, sender=caller)
        return self.cur_nonce

    def get_mint_data(self, nonce: int) -> MintRecord | None:
        return self.nonces.get(nonce)

    # --- inbox --------------------------------------------------------------------

    def tip_commitment(self) -> int:
        return self.commitments.get(self.cur_height, 0) if self.cur_height else 0

    def new_batch(self, caller: str, blobs, burn_data, prev_commitment: int) -> int:
        blobs = list(blobs)
        if not self.has_staked(caller):
            raise Revert("publisher has not staked")
        if prev_commitment != self.tip_commitment():
            raise Revert("stale previous-batch commitment")
        if len(blobs) != 1:
            raise Revert("exactly one blob must be attached")
        (b,) = blobs
        if not isinstance(b, blobmod.Blob):
            raise Revert("attachment is not a blob")
        entries = dict(burn_data)
        for key, rec in entries.items():
            if not isinstance(rec, BurnRecord) or len(key) != 2:
                raise Revert("malformed burn data")
        # sweep before appending: a batch is never final at birth
        while self.hnb <= self.cur_height and self.block_fin[self.hnb] < self.block:
            del self.block_fin[self.hnb]
            self.hnb += 1
        self.cur_height += 1
        h = self.cur_height
        self.commitments[h] = blobmod.commit(b)
        self.publishers[h] = caller
        self.blobs[h] = b
        self.burn_data[h] = entries
        self.block_fin[h] = self.block + self.config.fpp
        self.published_at[h] = self.block
        self._emit("NEW_BATCH", height=h, publisher=caller, commitment=self.commitments[h])
        return h

    def block_finalized(self, height: int) -> bool:
        return 1 <= height < self.hnb and height in self.commitments

    def consume_burn_data(self, caller: str, height: int, bracket: int, tx: int) -> BurnRecord:
        if caller != BRIDGE_OUT:
            raise Revert("only the bridge-out contract may consume burn data")
        rec = self.burn_data.get(height, {}).get((bracket, tx))
        if rec is None:
            raise Revert("no burn data")
        del self.burn_data[height][(bracket, tx)]
        return rec

    def _non_final(self, height: int) -> bool:
        return height in self.block_fin and self.block_fin[height] >= self.block

    def revert_l2_chain(self, caller: str, height: int) -> None:
        if caller != JUDGE:
            raise Revert("only the judge may revert the chain")
        if not self._non_final(height):
            raise Revert("height is finalized or unknown")
        self._revert_from(height)

    def _revert_from(self, height: int) -> None:
        for h in range(height, self.cur_height + 1):
            for table in (self.block_fin, self.commitments, self.burn_data, self.blobs,
                          self.publishers, self.published_at):
                table.pop(h, None)
        self.cur_height = height - 1
        self._emit("REVERT", height=height)

    # --- judge ------------------------------------------------------------------------

    def stake(self, caller: str, amount: int) -> None:
        if amount <= 0 or self.native_of(caller) < amount:
            raise Revert("cannot stake that amount")
        self._move_native(caller, JUDGE, amount)
        self.stakes[caller] = self.stakes.get(caller, 0) + amount

    def has_staked(self, addr: str) -> bool:
        return self.stakes.get(addr, 0) >= self.config.min_stake

    def unstake_request(self, caller: str) -> int:
        amount = self.stakes.get(caller, 0)
        if amount == 0:
            raise Revert("nothing staked")
        unlock = self.block + self.config.fpp
        self.stakes[caller] = 0
        pending = self.unstake_requests.setdefault(caller, {})
        pending[unlock] = pending.get(unlock, 0) + amount
        return unlock

    def unstake(self, caller: str, unlock: int) -> int:
        amount = self.unstake_requests.get(caller, {}).get(unlock, 0)
        if amount == 0:
            raise Revert("no such unstake request")
        if self.block < unlock:
            raise Revert("stake still locked")
        del self.unstake_requests[caller][unlock]
        self._move_native(JUDGE, caller, amount)
        return amount

    def _slash(self, loser: str, winner: str) -> int:
        amount = self.stakes.pop(loser, 0)
        amount += sum(self.unstake_requests.pop(loser, {}).values())
        self._move_native(JUDGE, winner, amount)
        self._emit("SLASH", loser=loser, winner=winner, amount=amount)
        return amount

    def dispute_block(self, caller: str, proof: fraud.FraudProof) -> int:
        """Judge a one-step fraud proof; returns the slashed amount on success."""
        h = proof.height
        if not self._non_final(h):
            raise Revert("height is finalized or unknown")
        if self.native_of(caller) < self.config.dispute_cost:
            raise Revert("caller cannot pay the dispute cost")
        for rh, r in proof.reveals:
            if rh not in self.commitments or rh > h:
                raise Revert("reveal names an unknown height")
            if not blobmod.verify_reveal(self.commitments[rh], r):
                raise Revert("reveal does not match the blob commitment")
        ctx = fraud.RevealContext(self, h, proof.reveals)
        if not fraud.check(proof.rule, ctx, proof.aux):
            raise Revert(f"rule {proof.rule} not violated")
        self._move_native(caller, GAS_SINK, self.config.dispute_cost)
        loser = self.publishers[h]
        self._emit("DISPUTE", height=h, rule=proof.rule, verifier=caller,
                   payload_words=proof.payload_words)
        self._revert_from(h)
        return self._slash(loser, caller)

    # --- bridge-out ---------------------------------------------------------------------

    def retrieve(self, caller: str, height: int, bracket: int, tx: int) -> BurnRecord:
        if not self.block_finalized(height):
            raise Revert("batch not finalized")
        rec = self.burn_data.get(height, {}).get((bracket, tx))
        if rec is None:
            raise Revert("no burn data")
        # the beneficiary is checked before the record is consumed
        if rec.id_l1 != caller:
            raise Revert("caller is not the burn beneficiary")
        if self.token_of(rec.token, BRIDGE) < rec.value or self.native_of(BRIDGE) < rec.fee:
            raise Revert("bridge is insolvent")
        self.consume_burn_data(BRIDGE_OUT, height, bracket, tx)
        if rec.value:
            self._move_token(rec.token, BRIDGE, caller, rec.value)
        self._move_native(BRIDGE, caller, rec.fee)
        self._emit("RETRIEVE", height=height, bracket=bracket, tx=tx, to=caller,
                   token=rec.token, value=rec.value, fee=rec.fee)
        return rec
