"""Participant state machines: client wallets, operators and verifiers."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from . import blob, crypto, fraud, txmodel
from .circuits import M_SLOTS
from .crypto import CoinKeyPair, CoinSecrets, EncKeyPair, SignatureKeyPair
from .l1sim import BRIDGE, BurnRecord, Chain, Revert
from .replica import Replica
from .txmodel import Bracket, CrtRef, Kind, OutSpec, Spend, TransferRefused


# leaves room for a payment output and a change output
MAX_INPUTS = M_SLOTS - 2


@dataclass(frozen=True)
class FeeFloors:
    mint: int = 0
    transfer: int = 1
    burn: int = 1

    def floor(self, kind: Kind) -> int:
        return {Kind.MINT: self.mint, Kind.TRANSFER: self.transfer, Kind.BURN: self.burn}.get(kind, 0)


class BracketRejected(ValueError):
    def __init__(self, reason: str, findings=()):
        super().__init__(reason)
        self.reason = reason
        self.findings = tuple(findings)


def _sync_replica(replica: Replica, seen: dict[int, int], chain: Chain) -> None:
    """Roll ``replica`` back past any height whose commitment changed on L1."""
    for h in sorted(seen):
        if chain.commitments.get(h) != seen[h]:
            replica.rollback(h)
            for stale in [x for x in seen if x >= h]:
                del seen[stale]
            return


# --- verifier ---------------------------------------------------------------------


@dataclass
class DisputeRecord:
    height: int
    rule: str
    aux: tuple[int, ...]
    payload_words: int
    accepted: bool
    slashed: int = 0


@dataclass
class Verifier:
    """Replays every published batch and disputes the first provable violation."""

    addr: str
    chain: Chain
    replica: Replica = None
    seen: dict[int, int] = field(default_factory=dict)
    disputes: list[DisputeRecord] = field(default_factory=list)
    undisputable: list[tuple[int, str]] = field(default_factory=list)

    def __post_init__(self):
        if self.replica is None:
            self.replica = Replica(self.chain.depth)

    def scan(self) -> list[DisputeRecord]:
        """Check every unseen height; dispute at most one violation per call."""
        _sync_replica(self.replica, self.seen, self.chain)
        submitted = []
        for h in range(self.replica.height + 1, self.chain.cur_height + 1):
            parsed = blob.parse_batch(self.chain.blobs[h])
            findings = fraud.detect(parsed, h, self.replica, fraud.env_for(self.chain, h))
            for f in findings:
                proof = fraud.build_proof(self.chain, h, f)
                if proof is None:
                    self.undisputable.append((h, f.rule))
                    continue
                rec = DisputeRecord(h, f.rule, f.aux, proof.payload_words, False)
                try:
                    rec.slashed = self.chain.dispute_block(self.addr, proof)
                    rec.accepted = True
                except Revert:
                    pass
                self.disputes.append(rec)
                submitted.append(rec)
                if rec.accepted:
                    _sync_replica(self.replica, self.seen, self.chain)
                    return submitted
            if isinstance(parsed, blob.ParseFault):
                return submitted  # cannot replay an unparseable batch
            self.replica.replay_batch(h, parsed.brackets)
            self.seen[h] = self.chain.commitments[h]
        return submitted


# --- operator ---------------------------------------------------------------------


@dataclass
class SealedBatch:
    height: int
    header: blob.BatchHeader
    brackets: tuple[Bracket, ...]
    burn_entries: dict


@dataclass
class Operator:
    """Collects brackets FIFO, fills in checkpoints and publishes batches.

    ``tamper`` (when set) receives ``(header, brackets, burn_entries)`` just
    before publication and returns ``(blob_words_or_batch, burn_entries)``;
    the injection harness uses it to publish deliberately bad batches.
    """

    addr: str
    chain: Chain
    rng: random.Random
    floors: FeeFloors = field(default_factory=FeeFloors)
    coin_keys: CoinKeyPair = None
    replica: Replica = None
    seen: dict[int, int] = field(default_factory=dict)
    pending: list[Bracket] = field(default_factory=list)
    work: Replica = None
    running_fee: int = 0
    used_words: int = 0
    tamper: object = None
    fee_coins: list[CoinSecrets] = field(default_factory=list)
    sealed: list[SealedBatch] = field(default_factory=list)

    def __post_init__(self):
        if self.coin_keys is None:
            self.coin_keys = CoinKeyPair.generate(self.rng)
        if self.replica is None:
            self.replica = Replica(self.chain.depth)
        self._reset_work()

    def _reset_work(self) -> None:
        self.work = self.replica.fork()
        self.pending = []
        self.running_fee = 0
        self.used_words = blob.HEADER_FIXED + self._fee_bracket_words()

    @staticmethod
    def _fee_bracket_words() -> int:
        fc = txmodel.build_fee_collect(0, 1)
        return 1 + len(blob.encode_bracket(txmodel.bracket_make([fc])))

    @property
    def next_height(self) -> int:
        return self.chain.cur_height + 1

    def sync(self) -> None:
        """Follow L1: adopt batches published by others and drop reverted ones."""
        before = self.replica.height
        _sync_replica(self.replica, self.seen, self.chain)
        changed = self.replica.height != before
        for h in range(self.replica.height + 1, self.chain.cur_height + 1):
            parsed = blob.parse_batch(self.chain.blobs[h])
            if isinstance(parsed, blob.ParseFault):
                break
            self.replica.replay_batch(h, parsed.brackets)
            self.seen[h] = self.chain.commitments[h]
            changed = True
        if changed:
            requeue = self.pending
            self._reset_work()
            for br in requeue:
                try:
                    self.add_bracket(br, auto_seal=False)
                except BracketRejected:
                    pass

    def _env(self) -> fraud.Env:
        return fraud.Env(self.chain.backend, self.chain.get_mint_data, self.chain.block, {})

    def validate(self, br: Bracket) -> None:
        height = self.next_height
        for tx in br.txs:
            if tx.fee < self.floors.floor(tx.kind):
                raise BracketRejected(f"fee {tx.fee} below the {tx.kind.name} floor")
            if tx.crt_ref is not None and tx.crt_ref.height >= height:
                raise BracketRejected("coin-root reference to an unpublished batch")
        roots = [b.post_crt for b in self.pending]
        findings = fraud.ingress_findings(self.work, br, height, self._env(), roots)
        if findings:
            raise BracketRejected(f"bracket violates rule {findings[0].rule}", findings)

    def add_bracket(self, br: Bracket, auto_seal: bool = True) -> str:
        """Accept ``br`` into the mempool, sealing first if it would not fit."""
        size = 1 + len(blob.encode_bracket(br))
        sealed = False
        if self.used_words + size > blob.BLOB_WORDS:
            if not self.pending or not auto_seal:
                raise BracketRejected("bracket does not fit in an empty blob")
            self.seal()
            sealed = True
        self.validate(br)
        self.pending.append(self._apply(br))
        self.used_words += size
        return "batch-sealed" if sealed else "accepted"

    def _apply(self, br: Bracket) -> Bracket:
        self.work.apply_bracket(br)
        self.running_fee = (self.running_fee + sum(tx.fee for tx in br.txs)) % crypto.P
        return replace(
            br,
            post_crt=self.work.coins.root,
            post_ccount=self.work.coins.leaf_count,
            post_ntr=self.work.nulls.root,
            post_ncount=self.work.nulls.leaf_count,
            running_fee=self.running_fee,
        )

    def burn_entries(self, brackets) -> dict[tuple[int, int], BurnRecord]:
        out = {}
        for i, br in enumerate(brackets):
            for j, tx in enumerate(br.txs):
                if tx.kind == Kind.BURN:
                    b = tx.body
                    out[(i, j)] = BurnRecord(
                        tx.token, b.value, b.coin_fee - tx.fee, crypto.int_to_address(b.id_l1)
                    )
        return out

    def build_batch(self) -> tuple[blob.BatchHeader, tuple[Bracket, ...], dict]:
        """Close the mempool with the fee-collecting bracket (does not publish)."""
        ck_f = self.replica.summary(self.next_height - 1).last_running_fee
        p = crypto.random_fe(self.rng)
        fee_secrets = CoinSecrets(0, 0, ck_f, p)
        k = crypto.coin_identity(p, self.coin_keys.pk_coin)
        fc = txmodel.build_fee_collect(ck_f, k)
        brackets = (*self.pending, self._apply(txmodel.bracket_make([fc])))
        header = blob.BatchHeader(
            self.work.coins.root, self.work.coins.leaf_count,
            self.work.nulls.root, self.work.nulls.leaf_count, ck_f,
        )
        self._pending_fee_coin = fee_secrets
        return header, brackets, self.burn_entries(brackets)

    def seal(self) -> int:
        """Publish the mempool as the next batch and return its height."""
        self.sync()
        # closing the batch touches the working replica; keep it intact if publishing fails
        saved = (self.work, self.running_fee)
        self.work = self.work.fork()
        try:
            header, brackets, entries = self.build_batch()
            if self.tamper is not None:
                payload, entries = self.tamper(header, brackets, entries)
                b = payload if isinstance(payload, blob.Blob) else blob.Blob(tuple(payload))
            else:
                b = blob.serialize_batch(header, brackets)
            h = self.chain.new_batch(self.addr, [b], entries, self.chain.tip_commitment())
        except Exception:
            self.work, self.running_fee = saved
            raise
        self.replica.replay_batch(h, brackets)
        self.seen[h] = self.chain.commitments[h]
        if self._pending_fee_coin.fee:
            self.fee_coins.append(self._pending_fee_coin)
        self.sealed.append(SealedBatch(h, header, brackets, entries))
        self._reset_work()
        return h


# --- client wallet -------------------------------------------------------------------


@dataclass(frozen=True)
class Address:
    """What a payer needs to create a coin for someone."""

    pk_coin: int
    pk_enc: bytes


@dataclass
class OwnedCoin:
    secrets: CoinSecrets
    c: int


def coin_order(coin: OwnedCoin):
    """Largest value first, then largest fee budget; equal keys are interchangeable."""
    return (-coin.secrets.value, -coin.secrets.fee)


@dataclass
class ClientWallet:
    name: str
    rng: random.Random
    coin_keys: CoinKeyPair = None
    enc_keys: EncKeyPair = None
    l1_keys: SignatureKeyPair = None
    encrypt_change: bool = True
    coins: dict[int, OwnedCoin] = field(default_factory=dict)
    spent: set[int] = field(default_factory=set)
    # coin commitments created for self without a ciphertext
    local_log: dict[int, CoinSecrets] = field(default_factory=dict)
    pending_mints: dict[int, CoinSecrets] = field(default_factory=dict)
    used_p: set[int] = field(default_factory=set)
    deposited: dict[int, int] = field(default_factory=dict)
    withdrawn: dict[int, int] = field(default_factory=dict)
    keyring: txmodel.KeyRing = field(default_factory=txmodel.KeyRing)

    def __post_init__(self):
        self.coin_keys = self.coin_keys or CoinKeyPair.generate(self.rng)
        self.enc_keys = self.enc_keys or EncKeyPair.generate(self.rng)
        self.l1_keys = self.l1_keys or SignatureKeyPair.generate(self.rng)

    @property
    def id_l1(self) -> str:
        return self.l1_keys.id_l1

    @property
    def address(self) -> Address:
        return Address(self.coin_keys.pk_coin, self.enc_keys.pk_enc)

    def fresh_p(self) -> int:
        while True:
            p = crypto.random_fe(self.rng)
            if p not in self.used_p:
                self.used_p.add(p)
                return p

    def _sig_key(self) -> SignatureKeyPair:
        return self.keyring.add(SignatureKeyPair.generate(self.rng))

    def _commit(self, secrets: CoinSecrets) -> int:
        return crypto.output_commitment(secrets, self.coin_keys.pk_coin)

    # join ------------------------------------------------------------------------------

    def join(self, chain: Chain, operator: Operator, token: int, value: int, g: int, fee: int) -> int:
        """Deposit on L1 and submit the matching mint; returns the bridge nonce."""
        if fee > g:
            raise TransferRefused("mint fee exceeds the deposited fee budget")
        sig = self._sig_key()
        if token == 0:
            if value:
                raise TransferRefused("the fee token carries no value")
            nonce = chain.fee_to_l2(self.id_l1, sig.pk_sig, g)
        else:
            chain.approve(token, self.id_l1, BRIDGE, value)
            nonce = chain.to_l2(self.id_l1, token, value, sig.pk_sig, g)
        self.deposited[token] = self.deposited.get(token, 0) + value
        self.deposited[0] = self.deposited.get(0, 0) + g
        secrets = CoinSecrets(token, value, g - fee, self.fresh_p())
        tx = txmodel.build_mint(secrets, self.coin_keys.pk_coin, nonce, sig.pk_sig, fee)
        br = txmodel.bracket_sign(txmodel.bracket_make([tx]), self.keyring)
        self.pending_mints[nonce] = secrets
        self.coins[tx.outputs[0].c] = OwnedCoin(secrets, tx.outputs[0].c)
        operator.add_bracket(br)
        return nonce

    # receive ---------------------------------------------------------------------------

    def receive(self, batch: blob.Batch) -> list[OwnedCoin]:
        """Trial-decrypt every output; keep coins that open to our key."""
        found = []
        for br in batch.brackets:
            for tx in br.txs:
                for out in tx.outputs:
                    if out.c in self.coins:
                        continue
                    secrets = self.local_log.get(out.c)
                    if secrets is None and out.enc is not None:
                        secrets = crypto.decrypt_note(self.enc_keys, out.enc)
                    if secrets is not None and self._commit(secrets) == out.c:
                        self.coins[out.c] = OwnedCoin(secrets, out.c)
                        found.append(self.coins[out.c])
        return found

    # spending ----------------------------------------------------------------------------

    def spendable(self, view: Replica, token: int | None = None) -> list[OwnedCoin]:
        return [
            c for c in self.coins.values()
            if c.c not in self.spent and c.c in view.coin_index
            and (token is None or c.secrets.token == token)
        ]

    def balance(self, token: int) -> int:
        return sum(c.secrets.value for c in self.coins.values()
                   if c.c not in self.spent and c.secrets.token == token)

    def fee_balance(self) -> int:
        return sum(c.secrets.fee for c in self.coins.values() if c.c not in self.spent)

    @staticmethod
    def _tip_ref(view: Replica) -> tuple[CrtRef, int]:
        h = view.height
        if h == 0:
            return txmodel.GENESIS_REF, 0
        return CrtRef(h, len(view.checkpoints[h]) - 1), view.coins.root

    def _spend(self, view: Replica, coin: OwnedCoin) -> Spend:
        idx = view.coin_index[coin.c][0]
        return Spend(coin.secrets, self.coin_keys, self._sig_key(), view.coins.prove(idx))

    def _pick(self, view: Replica, token: int, value: int, fee_needed: int, max_inputs: int):
        chosen, v, g = [], 0, 0
        for coin in sorted(self.spendable(view, token), key=coin_order):
            if v >= value and g >= fee_needed:
                break
            chosen.append(coin)
            v += coin.secrets.value
            g += coin.secrets.fee
        if v < value or g < fee_needed or len(chosen) > max_inputs:
            raise TransferRefused("not enough spendable coins")
        return chosen, v, g

    def transfer(self, view: Replica, backend, to: Address, token: int, value: int,
                 out_fee: int, tx_fee: int) -> Bracket:
        """Pay ``value`` of ``token`` plus a coin fee budget to ``to``; returns a signed bracket."""
        chosen, v, g = self._pick(view, token, value, out_fee + tx_fee, MAX_INPUTS)
        outs = [OutSpec(CoinSecrets(token, value, out_fee, self.fresh_p()), to.pk_coin, to.pk_enc)]
        change_v, change_g = v - value, g - out_fee - tx_fee
        change = None
        if change_v or change_g:
            change = CoinSecrets(token, change_v, change_g, self.fresh_p())
            pk_enc = self.enc_keys.pk_enc if self.encrypt_change else None
            outs.append(OutSpec(change, self.coin_keys.pk_coin, pk_enc))
        spends = [self._spend(view, c) for c in chosen]
        ref, crt = self._tip_ref(view)
        tx = txmodel.build_transfer(spends, outs, tx_fee, ref, crt, backend, self.rng)
        br = txmodel.bracket_sign(txmodel.bracket_make([tx]), self.keyring)
        self.spent.update(c.c for c in chosen)
        if change is not None:
            c = self._commit(change)
            if not self.encrypt_change:
                self.local_log[c] = change
            self.coins[c] = OwnedCoin(change, c)
        return br

    def pick_burn(self, view: Replica, token: int, fee: int) -> OwnedCoin:
        """The largest spendable coin of ``token`` whose fee budget covers ``fee``."""
        for coin in sorted(self.spendable(view, token), key=coin_order):
            if coin.secrets.fee >= fee:
                return coin
        raise TransferRefused(f"no coin of token {token} can pay a burn fee of {fee}")

    def leave(self, view: Replica, backend, coin: OwnedCoin, fee: int, floor: int = 0) -> Bracket:
        """Burn one coin towards this wallet's L1 address; returns a signed bracket."""
        if coin.c in self.spent:
            raise TransferRefused("coin already spent")
        ref, crt = self._tip_ref(view)
        tx = txmodel.build_burn(self._spend(view, coin), self.id_l1, fee, ref, crt, backend, floor)
        br = txmodel.bracket_sign(txmodel.bracket_make([tx]), self.keyring)
        self.spent.add(coin.c)
        return br

    def retrieve_all(self, chain: Chain) -> list[BurnRecord]:
        """Collect every finalized withdrawal addressed to this wallet."""
        got = []
        for h in sorted(chain.burn_data):
            if not chain.block_finalized(h):
                continue
            for (i, j), rec in sorted(chain.burn_data[h].items()):
                if rec.id_l1 != self.id_l1:
                    continue
                chain.retrieve(self.id_l1, h, i, j)
                self.withdrawn[rec.token] = self.withdrawn.get(rec.token, 0) + rec.value
                self.withdrawn[0] = self.withdrawn.get(0, 0) + rec.fee
                got.append(rec)
        return got
