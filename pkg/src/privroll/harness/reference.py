"""Naive reference interpreter: plain coin multisets, no trees, blobs or proofs.

It applies the same action script as the full stack, so a scenario run can be
checked differentially: unspent coins per owner, withdrawals and the fee tally
must agree exactly on honest runs.
"""

from __future__ import annotations

import copy
from collections import Counter
from dataclasses import dataclass, field

from .actions import Advance, Burn, Inject, Join, Replay, Retrieve, Scan, Seal, Transfer

QUEUED, SEALED, LIVE = "queued", "sealed", "live"
MAX_INPUTS = 6


@dataclass
class PlainCoin:
    owner: str
    token: int
    value: int
    fee: int
    state: str = QUEUED


@dataclass
class PlainBurn:
    owner: str
    token: int
    value: int
    fee: int  # native amount paid out on retrieval
    batch: int | None = None
    retrieved: bool = False


@dataclass
class ReferenceState:
    fpp: int
    transfer_floor: int = 1
    burn_floor: int = 1
    block: int = 0
    coins: list[PlainCoin] = field(default_factory=list)
    burns: list[PlainBurn] = field(default_factory=list)
    deposits: Counter = field(default_factory=Counter)
    withdrawals: Counter = field(default_factory=Counter)
    queued_fees: int = 0
    fees: int = 0
    batch_blocks: list[int] = field(default_factory=list)
    rejected: list[tuple[int, str]] = field(default_factory=list)
    spent_log: dict[str, list[PlainCoin]] = field(default_factory=dict)
    # (client, token) -> L1 balance; None leaves deposits unchecked
    l1: Counter | None = None

    @staticmethod
    def l1_balances(clients) -> Counter:
        return Counter({(c.name, t): amount for c in clients for t, amount in c.balances})

    # --- queries ------------------------------------------------------------------------

    def live(self, owner: str, token: int) -> list[PlainCoin]:
        coins = [c for c in self.coins if c.owner == owner and c.token == token and c.state == LIVE]
        return sorted(coins, key=lambda c: (-c.value, -c.fee))

    def holdings(self) -> dict[str, Counter]:
        """owner -> multiset of (token, value, fee) over sealed-or-live coins."""
        out: dict[str, Counter] = {}
        for c in self.coins:
            if c.state != QUEUED:
                out.setdefault(c.owner, Counter())[(c.token, c.value, c.fee)] += 1
        return out

    def finalized(self, batch: int) -> bool:
        fin = self.batch_blocks[batch] + self.fpp
        return any(b > fin for b in self.batch_blocks[batch + 1:])

    def try_apply(self, action) -> bool:
        """Dry run: would ``action`` be accepted now?"""
        trial = copy.deepcopy(self)
        return trial.apply(-1, action)

    # --- actions -------------------------------------------------------------------------

    def apply(self, index: int, action) -> bool:
        handler = {
            Join: self._join, Transfer: self._transfer, Burn: self._burn, Seal: self._seal,
            Scan: self._scan, Advance: self._advance, Retrieve: self._retrieve,
            Replay: self._replay, Inject: lambda a: None,
        }[type(action)]
        reason = handler(action)
        if reason:
            self.rejected.append((index, reason))
            return False
        return True

    def _join(self, a: Join):
        if a.fee > a.g:
            return "mint fee exceeds deposit"
        if a.token == 0 and a.value:
            return "the fee token carries no value"
        if self.l1 is not None:
            if a.token and self.l1[(a.client, a.token)] < a.value:
                return "insufficient token balance"
            if self.l1[(a.client, 0)] < a.g:
                return "insufficient native balance"
            self.l1[(a.client, a.token)] -= a.value
            self.l1[(a.client, 0)] -= a.g
        self.deposits[a.token] += a.value
        self.deposits[0] += a.g
        self.coins.append(PlainCoin(a.client, a.token, a.value, a.g - a.fee))
        self.queued_fees += a.fee
        return None

    def _transfer(self, a: Transfer):
        if a.tx_fee < self.transfer_floor:
            return "fee below floor"
        chosen, v, g = [], 0, 0
        for c in self.live(a.sender, a.token):
            if v >= a.value and g >= a.out_fee + a.tx_fee:
                break
            chosen.append(c)
            v += c.value
            g += c.fee
        if v < a.value or g < a.out_fee + a.tx_fee or len(chosen) > MAX_INPUTS:
            return "insufficient funds"
        for c in chosen:
            self.coins.remove(c)
        self.spent_log.setdefault(a.sender, []).extend(chosen)
        self.coins.append(PlainCoin(a.recipient, a.token, a.value, a.out_fee))
        change_v, change_g = v - a.value, g - a.out_fee - a.tx_fee
        if change_v or change_g:
            self.coins.append(PlainCoin(a.sender, a.token, change_v, change_g))
        self.queued_fees += a.tx_fee
        return None

    def _burn(self, a: Burn):
        if a.fee < self.burn_floor:
            return "fee below floor"
        for c in self.live(a.client, a.token):
            if c.fee >= a.fee:
                self.coins.remove(c)
                self.spent_log.setdefault(a.client, []).append(c)
                self.burns.append(PlainBurn(a.client, c.token, c.value, c.fee - a.fee))
                self.queued_fees += a.fee
                return None
        return "no coin can pay the burn"

    def _replay(self, a: Replay):
        return "double spend"

    def _seal(self, a: Seal):
        batch = len(self.batch_blocks)
        self.batch_blocks.append(self.block)
        for c in self.coins:
            if c.state == QUEUED:
                c.state = SEALED
        for b in self.burns:
            if b.batch is None:
                b.batch = batch
        self.fees += self.queued_fees
        self.queued_fees = 0
        return None

    def _scan(self, a: Scan):
        for c in self.coins:
            if c.state == SEALED:
                c.state = LIVE
        return None

    def _advance(self, a: Advance):
        self.block += a.blocks
        return None

    def _retrieve(self, a: Retrieve):
        for b in self.burns:
            if b.owner == a.client and not b.retrieved and b.batch is not None and self.finalized(b.batch):
                b.retrieved = True
                self.withdrawals[b.token] += b.value
                self.withdrawals[0] += b.fee
                if self.l1 is not None:
                    self.l1[(b.owner, b.token)] += b.value
                    self.l1[(b.owner, 0)] += b.fee
        return None

    # --- ledger ----------------------------------------------------------------------------

    def conservation(self) -> dict[int, dict[str, int]]:
        tokens = sorted(set(self.deposits) | {0})
        out = {}
        for t in tokens:
            remaining = sum(c.value if t else c.fee for c in self.coins if t == 0 or c.token == t)
            pending = sum((b.value if t else b.fee) for b in self.burns
                          if not b.retrieved and (t == 0 or b.token == t))
            fees = self.fees + self.queued_fees if t == 0 else 0
            out[t] = {
                "deposits": self.deposits[t],
                "withdrawals": self.withdrawals[t],
                "l2_remaining": remaining,
                "pending_withdrawals": pending,
                "fees": fees,
            }
        return out
