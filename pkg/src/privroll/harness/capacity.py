"""Blob capacity: how many transactions of one kind fit in a single batch.

Counts are measured, not computed from a formula: real transactions are
built (proved, encrypted, signed), packed 16 to a bracket, closed with the
fee-collecting bracket, and added until :func:`blob.fits` refuses.  A
transfer here is the common wallet shape: one input, a payment output and a
change output, both encrypted.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .. import blob, crypto, txmodel
from ..circuits import PROOF_WORDS, ReferenceBackend
from ..crypto import CoinKeyPair, CoinSecrets, EncKeyPair, SignatureKeyPair
from ..merkle import AppendOnlyTree
from ..txmodel import BRACKET_CAPACITY, CrtRef, Kind, OutSpec, Spend

# reference maxima the measurement is compared against
TARGETS = {"mint": 269, "burn": 167, "transfer": 86}
TOLERANCE = 0.25
KINDS = ("mint", "burn", "transfer")


def layout_table() -> list[tuple[str, int]]:
    """Word widths of the serialization (one field element or count per word)."""
    return [
        ("field element / count / kind", 1),
        ("proof", PROOF_WORDS),
        ("signature", crypto.SIG_WORDS),
        ("ciphertext", crypto.CT_WORDS),
        ("header (fixed)", blob.HEADER_FIXED),
        ("bracket (fixed)", blob.BRACKET_FIXED),
        ("transaction (fixed)", blob.TX_FIXED),
        ("input", blob.INPUT_WORDS),
        ("blob", blob.BLOB_WORDS),
    ]


class _Factory:
    """Builds honest transactions of one kind plus the keys to sign them."""

    def __init__(self, seed: int, depth: int = 8):
        self.rng = random.Random(seed)
        self.backend = ReferenceBackend(self.rng.randbytes(32))
        self.keyring = txmodel.KeyRing()
        self.depth = depth
        self.nonce = 0

    def _secrets(self, token: int = 1) -> CoinSecrets:
        return CoinSecrets(token, self.rng.randrange(1, 2**32), self.rng.randrange(10, 2**20),
                           crypto.random_fe(self.rng))

    def _spend(self) -> tuple[Spend, int]:
        keys = CoinKeyPair.generate(self.rng)
        secrets = self._secrets()
        sig = self.keyring.add(SignatureKeyPair.generate(self.rng))
        tree = AppendOnlyTree(self.depth)
        tree.append(crypto.output_commitment(secrets, keys.pk_coin))
        return Spend(secrets, keys, sig, tree.prove(0)), tree.root

    def mint(self) -> txmodel.Transaction:
        self.nonce += 1
        sig = self.keyring.add(SignatureKeyPair.generate(self.rng))
        pk_coin = CoinKeyPair.generate(self.rng).pk_coin
        return txmodel.build_mint(self._secrets(), pk_coin, self.nonce, sig.pk_sig, 1)

    def burn(self) -> txmodel.Transaction:
        spend, crt = self._spend()
        return txmodel.build_burn(spend, spend.sig_keys.id_l1, 1, CrtRef(1, 0), crt, self.backend)

    def transfer(self) -> txmodel.Transaction:
        spend, crt = self._spend()
        s = spend.secrets
        pay = s.value // 2
        outs = []
        for value, fee in ((pay, 1), (s.value - pay, s.fee - 2)):
            out = CoinSecrets(s.token, value, fee, crypto.random_fe(self.rng))
            keys, enc = CoinKeyPair.generate(self.rng), EncKeyPair.generate(self.rng)
            outs.append(OutSpec(out, keys.pk_coin, enc.pk_enc))
        return txmodel.build_transfer([spend], outs, 1, CrtRef(1, 0), crt, self.backend, self.rng)

    def fee_collect(self) -> txmodel.Transaction:
        return txmodel.build_fee_collect(0, crypto.random_fe(self.rng))

    def bracket(self, txs) -> txmodel.Bracket:
        return txmodel.bracket_sign(txmodel.bracket_make(txs), self.keyring)


def max_homogeneous(kind: str, seed: int = 0) -> int:
    """Largest number of ``kind`` transactions a single batch blob can carry."""
    f = _Factory(seed)
    make = getattr(f, kind)
    header = blob.BatchHeader()
    closing = f.bracket([f.fee_collect()])
    full: list[txmodel.Bracket] = []
    current: list[txmodel.Transaction] = []
    count = 0
    while True:
        tx = make()
        trial = current + [tx]
        brackets = [*full, f.bracket(trial), closing]
        if not blob.fits(header, brackets):
            if not current:
                return count
            # the partial bracket is as full as it gets; try opening a new one
            full.append(f.bracket(current))
            current = []
            if not blob.fits(header, [*full, f.bracket([tx]), closing]):
                return count
            current = [tx]
        else:
            current = trial
        count += 1
        if len(current) == BRACKET_CAPACITY:
            full.append(f.bracket(current))
            current = []


@dataclass(frozen=True)
class CapacityRow:
    kind: str
    measured: int
    target: int

    @property
    def ratio(self) -> float:
        return self.measured / self.target

    @property
    def within_tolerance(self) -> bool:
        return abs(self.ratio - 1) <= TOLERANCE


def capacity_report(seed: int = 0) -> list[CapacityRow]:
    return [CapacityRow(k, max_homogeneous(k, seed), TARGETS[k]) for k in KINDS]


def ordering_holds(rows: list[CapacityRow]) -> bool:
    by = {r.kind: r.measured for r in rows}
    return by["mint"] > by["burn"] > by["transfer"]


def format_report(rows: list[CapacityRow]) -> str:
    lines = ["layout (words):"]
    lines += [f"  {name:<30} {w}" for name, w in layout_table()]
    lines.append("homogeneous batch maxima:")
    for r in rows:
        mark = "ok" if r.within_tolerance else "OUT"
        lines.append(f"  {r.kind:<9} {r.measured:>4}  vs {r.target:>4}  ratio {r.ratio:.3f}  {mark}")
    lines.append(f"  ordering mint > burn > transfer: {'ok' if ordering_holds(rows) else 'FAILED'}")
    return "\n".join(lines)
