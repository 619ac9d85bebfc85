"""Transaction kinds, brackets, hashing, signing and honest-client builders."""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from enum import IntEnum

from . import circuits, crypto
from .crypto import CoinKeyPair, CoinSecrets, SignatureKeyPair, Tag
from .merkle import InclusionProof

BRACKET_CAPACITY = 16


class Kind(IntEnum):
    MINT = 1
    TRANSFER = 2
    BURN = 3
    FEE_COLLECT = 4


class TransferRefused(ValueError):
    """An honest client refuses to build an invalid transaction."""


@dataclass(frozen=True)
class CrtRef:
    """Locates a checkpointed coin-tree root: bracket ``bracket`` of batch ``height``.

    ``CrtRef(0, -1)`` is the genesis root 0.
    """

    height: int
    bracket: int

    def to_word(self) -> int:
        return (self.height << 32) | (self.bracket + 1)

    @classmethod
    def from_word(cls, word: int) -> CrtRef:
        return cls(word >> 32, (word & 0xFFFFFFFF) - 1)

    @property
    def is_genesis(self) -> bool:
        return self.height == 0 and self.bracket == -1


GENESIS_REF = CrtRef(0, -1)


@dataclass(frozen=True)
class TxInput:
    crt: int
    sn: int
    cm: int
    pk_sig: int
    proof: bytes

    def statement(self) -> circuits.InputStatement:
        return circuits.InputStatement(self.crt, self.sn, self.cm, self.pk_sig)


@dataclass(frozen=True)
class TxOutput:
    c: int
    enc: bytes | None = None

    @property
    def has_enc(self) -> bool:
        return self.enc is not None


@dataclass(frozen=True)
class MintBody:
    value: int
    coin_fee: int
    k: int
    nonce: int
    pk_sig: int


@dataclass(frozen=True)
class BurnBody:
    value: int
    coin_fee: int
    pk_auth: int
    id_l1: int


@dataclass(frozen=True)
class FeeCollectBody:
    k: int


Body = MintBody | BurnBody | FeeCollectBody | None


@dataclass(frozen=True)
class Transaction:
    kind: Kind
    token: int
    inputs: tuple[TxInput, ...]
    outputs: tuple[TxOutput, ...]
    fee: int
    crt_ref: CrtRef | None = None
    tx_proof: bytes | None = None
    body: Body = None
    tx_hash: int = 0

    def signers(self) -> list[int]:
        if self.kind == Kind.MINT:
            return [self.body.pk_sig]
        if self.kind in (Kind.TRANSFER, Kind.BURN):
            return [i.pk_sig for i in self.inputs]
        return []

    def nullifiers(self) -> list[int]:
        if self.kind == Kind.MINT:
            return [crypto.mint_nullifier(self.body.nonce)]
        return [i.sn for i in self.inputs]

    def coin_leaves(self) -> list[int]:
        return [o.c for o in self.outputs]

    def compute_hash(self) -> int:
        from . import blob  # blob owns the byte layout

        return blob.tx_hash_of_words(blob.encode_tx(self))

    def with_hash(self) -> Transaction:
        return replace(self, tx_hash=self.compute_hash())

    def tx_statement(self, m: int = circuits.M_SLOTS) -> circuits.TxStatement:
        return circuits.slot_statement(
            [i.cm for i in self.inputs], [o.c for o in self.outputs], self.fee, m
        )


@dataclass(frozen=True)
class Bracket:
    txs: tuple[Transaction, ...]
    signatures: tuple[bytes, ...] = ()
    bracket_hash: int = 0
    # checkpoint fields, filled in by the operator
    post_crt: int = 0
    post_ccount: int = 0
    post_ntr: int = 0
    post_ncount: int = 0
    running_fee: int = 0

    def signers(self) -> list[int]:
        return [pk for tx in self.txs for pk in tx.signers()]


def bracket_hash(tx_hashes) -> int:
    return crypto.tagged(Tag.BRACKET_HASH, *tx_hashes)


def signing_message(bh: int) -> bytes:
    return b"bracket" + crypto.encode(bh)


def bracket_make(txs, capacity: int = BRACKET_CAPACITY) -> Bracket:
    txs = tuple(txs)
    if not 1 <= len(txs) <= capacity:
        raise ValueError(f"bracket must hold 1..{capacity} transactions")
    return Bracket(txs=txs, bracket_hash=bracket_hash([t.tx_hash for t in txs]))


def bracket_sign(bracket: Bracket, keys) -> Bracket:
    """Sign with one key per signer slot; ``keys`` maps pk_sig -> SignatureKeyPair."""
    msg = signing_message(bracket.bracket_hash)
    sigs = []
    for pk in bracket.signers():
        if pk not in keys:
            raise KeyError(f"no signing key for signer {pk:#x}")
        sigs.append(keys[pk].sign(msg))
    return replace(bracket, signatures=tuple(sigs))


def bracket_verify(bracket: Bracket) -> bool:
    if bracket.bracket_hash != bracket_hash([t.tx_hash for t in bracket.txs]):
        return False
    signers = bracket.signers()
    if len(signers) != len(bracket.signatures):
        return False
    msg = signing_message(bracket.bracket_hash)
    return all(crypto.verify(pk, msg, s) for pk, s in zip(signers, bracket.signatures))


# --- honest builders ------------------------------------------------------


@dataclass(frozen=True)
class Spend:
    """Everything a wallet needs to spend one coin."""

    secrets: CoinSecrets
    coin_keys: CoinKeyPair
    sig_keys: SignatureKeyPair
    proof: InclusionProof

    @property
    def c(self) -> int:
        return crypto.output_commitment(self.secrets, self.coin_keys.pk_coin)


@dataclass(frozen=True)
class OutSpec:
    secrets: CoinSecrets
    pk_coin: int
    pk_enc: bytes | None = None


@dataclass
class BuiltInput:
    tx_input: TxInput
    pk_auth: int


def build_input(spend: Spend, crt: int, backend) -> BuiltInput:
    s, keys = spend.secrets, spend.coin_keys
    pk_sig = spend.sig_keys.pk_sig
    pk_auth = crypto.authorize(keys.sk_coin, pk_sig)
    cm = crypto.input_commitment(s.token, s.value, s.fee, pk_auth)
    sn = crypto.serial_number(s.p, keys.sk_coin)
    stmt = circuits.InputStatement(crt, sn, cm, pk_sig)
    wit = circuits.InputWitness(
        pk_auth=pk_auth,
        c=spend.c,
        dir=spend.proof.dir,
        path=spend.proof.path,
        token=s.token,
        value=s.value,
        fee=s.fee,
        p=s.p,
        pk_coin=keys.pk_coin,
        sk_coin=keys.sk_coin,
    )
    proof = circuits.prove_input(backend, stmt, wit)
    return BuiltInput(TxInput(crt, sn, cm, pk_sig, proof.data), pk_auth)


def build_mint(
    secrets: CoinSecrets, pk_coin: int, nonce: int, pk_sig: int, fee: int
) -> Transaction:
    k = crypto.coin_identity(secrets.p, pk_coin)
    body = MintBody(secrets.value, secrets.fee, k, nonce, pk_sig)
    out = TxOutput(crypto.output_commitment(secrets, pk_coin))
    tx = Transaction(Kind.MINT, secrets.token, (), (out,), fee, body=body)
    return tx.with_hash()


def _check_transfer(spends, outs, fee: int, m: int) -> int:
    if not spends:
        raise TransferRefused("a transfer needs at least one input")
    if len(spends) + len(outs) > m:
        raise TransferRefused(f"{len(spends) + len(outs)} slots exceed the limit of {m}")
    tokens = {s.secrets.token for s in spends} | {o.secrets.token for o in outs}
    tokens.discard(0)
    if len(tokens) > 1:
        raise TransferRefused("a transfer may carry only one non-fee token")
    if sum(s.secrets.value for s in spends) != sum(o.secrets.value for o in outs):
        raise TransferRefused("input and output values differ")
    if sum(s.secrets.fee for s in spends) != sum(o.secrets.fee for o in outs) + fee:
        raise TransferRefused("input fees do not cover output fees plus the transaction fee")
    for o in outs:
        if o.secrets.value >= 2**circuits.RANGE_BITS or o.secrets.fee >= 2**circuits.RANGE_BITS:
            raise TransferRefused("output amount out of range")
    return tokens.pop() if tokens else 0


def build_transfer(
    spends,
    outs,
    fee: int,
    crt_ref: CrtRef,
    crt: int,
    backend,
    rng: random.Random,
    m: int = circuits.M_SLOTS,
) -> Transaction:
    token = _check_transfer(spends, outs, fee, m)
    # the circuit compares every token against slot 0, so lead with a value-token input
    spends = sorted(spends, key=lambda s: s.secrets.token == 0)
    built = [build_input(s, crt, backend) for s in spends]
    outputs = []
    for o in outs:
        enc = crypto.encrypt_note(o.pk_enc, o.secrets, rng) if o.pk_enc is not None else None
        outputs.append(TxOutput(crypto.output_commitment(o.secrets, o.pk_coin), enc))

    tokens = [s.secrets.token for s in spends] + [o.secrets.token for o in outs]
    values = [s.secrets.value for s in spends] + [o.secrets.value for o in outs]
    fees = [s.secrets.fee for s in spends] + [o.secrets.fee for o in outs]
    cmr = [b.pk_auth for b in built] + [crypto.coin_identity(o.secrets.p, o.pk_coin) for o in outs]
    pad = m - len(tokens)
    stmt = circuits.slot_statement(
        [b.tx_input.cm for b in built], [o.c for o in outputs], fee, m
    )
    wit = circuits.TxWitness(
        token=tuple(tokens + [0] * pad),
        value=tuple(values + [0] * pad),
        value_decomp=tuple(circuits.bits(v) for v in values + [0] * pad),
        fee=tuple(fees + [0] * pad),
        fee_decomp=tuple(circuits.bits(g) for g in fees + [0] * pad),
        cmr=tuple(cmr + [0] * pad),
    )
    proof = circuits.prove_tx(backend, stmt, wit)
    tx = Transaction(
        Kind.TRANSFER,
        0,  # transfers keep their token private
        tuple(b.tx_input for b in built),
        tuple(outputs),
        fee,
        crt_ref=crt_ref,
        tx_proof=proof.data,
    )
    return tx.with_hash()


def build_burn(
    spend: Spend, id_l1: str, fee: int, crt_ref: CrtRef, crt: int, backend, fee_floor: int = 0
) -> Transaction:
    s = spend.secrets
    if fee < fee_floor:
        raise TransferRefused(f"burn fee {fee} below the floor {fee_floor}")
    if fee > s.fee:
        raise TransferRefused("burn fee exceeds the coin's fee budget")
    b = build_input(spend, crt, backend)
    body = BurnBody(s.value, s.fee, b.pk_auth, crypto.address_to_int(id_l1))
    tx = Transaction(Kind.BURN, s.token, (b.tx_input,), (), fee, crt_ref=crt_ref, body=body)
    return tx.with_hash()


def build_fee_collect(ck_f: int, k: int) -> Transaction:
    out = TxOutput(crypto.commit_output(0, 0, ck_f, k))
    tx = Transaction(Kind.FEE_COLLECT, 0, (), (out,), 0, body=FeeCollectBody(k))
    return tx.with_hash()


@dataclass
class KeyRing:
    """pk_sig -> SignatureKeyPair lookup used when signing brackets."""

    keys: dict[int, SignatureKeyPair] = field(default_factory=dict)

    def add(self, kp: SignatureKeyPair) -> SignatureKeyPair:
        self.keys[kp.pk_sig] = kp
        return kp

    def __contains__(self, pk: int) -> bool:
        return pk in self.keys

    def __getitem__(self, pk: int) -> SignatureKeyPair:
        return self.keys[pk]
