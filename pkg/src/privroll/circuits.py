"""Constraint evaluators for the input and transaction circuits, plus proof backends.

The reference backend is a designated-verifier stand-in for a SNARK: a proof is
an HMAC expansion over (circuit id, statement) under a secret backend key,
released only after the constraint evaluator accepts the witness.  The key
doubles as the simulation trapdoor: with ``trapdoor=True`` the backend can
``forge`` proofs for statements that have no witness.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass, field

from . import crypto
from .crypto import Tag
from .merkle import hstar

M_SLOTS = 8
RANGE_BITS = 64
PROOF_WORDS = 8
PROOF_BYTES = PROOF_WORDS * crypto.WORD_BYTES

INPUT_CIRCUIT = "input"
TX_CIRCUIT = "tx"


class ProofRefused(Exception):
    """The honest prover will not prove a statement whose witness fails."""


class ConfigurationError(Exception):
    pass


@dataclass(frozen=True)
class InputStatement:
    crt: int
    sn: int
    cm: int
    pk_sig: int

    def to_fields(self) -> tuple[int, ...]:
        return (self.crt, self.sn, self.cm, self.pk_sig)


@dataclass(frozen=True)
class InputWitness:
    pk_auth: int
    c: int
    dir: tuple[bool, ...]
    path: tuple[int, ...]
    token: int
    value: int
    fee: int
    p: int
    pk_coin: int
    sk_coin: int
    r: int = 0  # listed among the circuit inputs but never constrained

    def __post_init__(self):
        if len(self.dir) != len(self.path):
            raise ValueError("dir and path must have the same depth")


def eval_input(stmt: InputStatement, wit: InputWitness) -> bool:
    ok = wit.c == crypto.commit_output(
        wit.token, wit.value, wit.fee, crypto.coin_identity(wit.p, wit.pk_coin)
    )
    ok &= stmt.sn == crypto.serial_number(wit.p, wit.sk_coin)
    ok &= wit.pk_coin == crypto.hash([wit.sk_coin])
    ok &= wit.pk_auth == crypto.authorize(wit.sk_coin, stmt.pk_sig)
    ok &= stmt.cm == crypto.input_commitment(wit.token, wit.value, wit.fee, wit.pk_auth)
    # walk all D levels: the path has one sibling per level
    tmp = wit.c
    for d, sibling in zip(wit.dir, wit.path):
        tmp = hstar(tmp, sibling) if d else hstar(sibling, tmp)
    return ok and tmp == stmt.crt


@dataclass(frozen=True)
class TxStatement:
    C: tuple[int, ...]
    is_connected: tuple[bool, ...]
    is_input: tuple[bool, ...]
    fee: int

    def __post_init__(self):
        if not len(self.C) == len(self.is_connected) == len(self.is_input):
            raise ValueError("statement arrays must share one length")

    def to_fields(self) -> tuple[int, ...]:
        return (*self.C, *map(int, self.is_connected), *map(int, self.is_input), self.fee)


@dataclass(frozen=True)
class TxWitness:
    token: tuple[int, ...]
    value: tuple[int, ...]
    value_decomp: tuple[tuple[bool, ...], ...]
    fee: tuple[int, ...]
    fee_decomp: tuple[tuple[bool, ...], ...]
    cmr: tuple[int, ...]


def bits(x: int, width: int = RANGE_BITS) -> tuple[bool, ...]:
    return tuple(bool((x >> j) & 1) for j in range(width))


def _recompose(decomp) -> int:
    return sum(1 << j for j, b in enumerate(decomp) if b)


def eval_tx(stmt: TxStatement, wit: TxWitness) -> bool:
    """Balance, range and token-uniformity constraints of the transaction circuit.

    Input slots are recomputed under the input-commitment tag and output slots
    under the output-commitment tag; ranges are checked on outputs only.
    """
    m = len(stmt.C)
    arrays = (wit.token, wit.value, wit.value_decomp, wit.fee, wit.fee_decomp, wit.cmr)
    if any(len(a) != m for a in arrays):
        return False
    p = crypto.P
    bal_v = bal_g = 0
    ok = True
    for i in range(m):
        if stmt.is_connected[i]:
            tag = Tag.INPUT_COMMITMENT if stmt.is_input[i] else Tag.OUTPUT_COMMITMENT
            ok &= stmt.C[i] == crypto.tagged(tag, wit.token[i], wit.value[i], wit.fee[i], wit.cmr[i])
            if stmt.is_input[i]:
                bal_v += wit.value[i]
                bal_g += wit.fee[i]
            else:
                bal_v -= wit.value[i]
                bal_g -= wit.fee[i]
                vd, gd = wit.value_decomp[i], wit.fee_decomp[i]
                ok &= len(vd) == RANGE_BITS and len(gd) == RANGE_BITS
                ok &= _recompose(vd) == wit.value[i] and _recompose(gd) == wit.fee[i]
        if wit.token[i] == 0:
            ok &= wit.value[i] == 0
        else:
            ok &= wit.token[i] == wit.token[0]
    bal_g -= stmt.fee
    return ok and bal_g % p == 0 and bal_v % p == 0


@dataclass(frozen=True)
class Proof:
    backend_id: str
    data: bytes

    def __post_init__(self):
        if len(self.data) != PROOF_BYTES:
            raise ValueError("proof has the wrong length")


def _statement_bytes(circuit: str, stmt) -> bytes:
    return circuit.encode() + b"\x00" + b"".join(crypto.encode(x % 2**256) for x in stmt.to_fields())


@dataclass
class ReferenceBackend:
    key: bytes = field(repr=False)
    trapdoor: bool = False
    backend_id: str = "ref-hmac"
    audit_log: list = field(default_factory=list, repr=False)

    def setup(self, circuit: str) -> bytes:
        return hmac.new(self.key, b"setup:" + circuit.encode(), hashlib.sha256).digest()

    def _tag(self, circuit: str, stmt) -> bytes:
        ck = self.setup(circuit)
        msg = _statement_bytes(circuit, stmt)
        out = b"".join(
            hmac.new(ck, bytes([i]) + msg, hashlib.sha256).digest() for i in range(PROOF_WORDS)
        )
        return out

    def prove(self, circuit: str, stmt, wit) -> Proof:
        evaluator = eval_input if circuit == INPUT_CIRCUIT else eval_tx
        if not evaluator(stmt, wit):
            raise ProofRefused(f"{circuit} witness does not satisfy the circuit")
        return Proof(self.backend_id, self._tag(circuit, stmt))

    def verify(self, circuit: str, stmt, proof: Proof | bytes) -> bool:
        data = proof.data if isinstance(proof, Proof) else proof
        if len(data) != PROOF_BYTES:
            return False
        return hmac.compare_digest(data, self._tag(circuit, stmt))

    def forge(self, circuit: str, stmt) -> Proof:
        if not self.trapdoor:
            raise ConfigurationError("forging requires a trapdoor-enabled backend")
        self.audit_log.append(("forged", circuit, stmt))
        return Proof(self.backend_id, self._tag(circuit, stmt))


def prove_input(backend, stmt: InputStatement, wit: InputWitness) -> Proof:
    return backend.prove(INPUT_CIRCUIT, stmt, wit)


def verify_input(backend, stmt: InputStatement, proof) -> bool:
    return backend.verify(INPUT_CIRCUIT, stmt, proof)


def prove_tx(backend, stmt: TxStatement, wit: TxWitness) -> Proof:
    return backend.prove(TX_CIRCUIT, stmt, wit)


def verify_tx(backend, stmt: TxStatement, proof) -> bool:
    return backend.verify(TX_CIRCUIT, stmt, proof)


def slot_statement(input_cms, output_cs, fee: int, m: int = M_SLOTS) -> TxStatement:
    """Canonical slot layout: inputs first, then outputs, then empty slots."""
    n_in, n_out = len(input_cms), len(output_cs)
    if n_in + n_out > m:
        raise ValueError("too many slots")
    pad = m - n_in - n_out
    return TxStatement(
        C=(*input_cms, *output_cs, *([0] * pad)),
        is_connected=(True,) * (n_in + n_out) + (False,) * pad,
        is_input=(True,) * n_in + (False,) * (n_out + pad),
        fee=fee,
    )
