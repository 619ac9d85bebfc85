"""Word-exact batch serialization, structural parsing, locators and word commitments.

A blob is ``BLOB_WORDS`` 32-byte words.  Layout (word offsets; ``rel`` means
relative to the enclosing bracket or transaction start)::

    header   coin_root coin_count nullifier_root nullifier_count ck_f m length
             bracket_offset[m]                      (absolute)
    bracket  bracket_hash post_crt post_ccount post_ntr post_ncount running_fee
             n s sig_offset(rel) tx_offset[n](rel) tx[n] signature[s](2 words)
    tx       tx_hash kind token n_in n_out input_offset[n_in](rel)
             output_offset[n_out](rel) [crt_ref] fee [tx_proof(8)]
             input[n_in] output[n_out] body
    input    crt sn cm pk_sig proof(8)
    output   has_enc c [ciphertext(CT_WORDS)]
    body     mint: value coin_fee k nonce pk_sig | burn: value coin_fee pk_auth id_l1
             fee-collect: k | transfer: (none)

``crt_ref`` is present for transfers and burns, ``tx_proof`` for transfers only.
Words past ``length`` are zero.  Parsing is a conjunction of local structural
predicates (header, padding word, bracket, transaction), each of which reads a
bounded number of words; the same predicates back rule 1a disputes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import crypto
from .circuits import M_SLOTS, PROOF_BYTES, PROOF_WORDS
from .crypto import CT_BYTES, CT_WORDS, SIG_BYTES, SIG_WORDS, Tag
from .txmodel import (
    Bracket,
    BurnBody,
    CrtRef,
    FeeCollectBody,
    Kind,
    MintBody,
    Transaction,
    TxInput,
    TxOutput,
)

BLOB_WORDS = 4096
BLOB_DEPTH = 12
WORD = crypto.WORD_BYTES

H_COIN_ROOT, H_COIN_COUNT, H_NULL_ROOT, H_NULL_COUNT, H_CK_F, H_M, H_LENGTH = range(7)
HEADER_FIXED = 7
HEADER_FIELDS = ("coin_root", "coin_count", "nullifier_root", "nullifier_count", "ck_f", "m", "length")

B_HASH, B_CRT, B_CCOUNT, B_NTR, B_NCOUNT, B_FEE, B_N, B_S, B_SIGOFF = range(9)
BRACKET_FIXED = 9
BRACKET_FIELDS = (
    "bracket_hash", "post_crt", "post_ccount", "post_ntr", "post_ncount",
    "running_fee", "n", "s", "sig_offset",
)

T_HASH, T_KIND, T_TOKEN, T_NIN, T_NOUT = range(5)
TX_FIXED = 5
TX_FIELDS = ("tx_hash", "kind", "token", "n_in", "n_out")

I_CRT, I_SN, I_CM, I_PK, I_PROOF = range(5)
INPUT_WORDS = 4 + PROOF_WORDS
INPUT_FIELDS = ("crt", "sn", "cm", "pk_sig")

O_HASENC, O_C, O_CT = range(3)

BODY_FIELDS = {
    Kind.MINT: ("value", "coin_fee", "k", "nonce", "pk_sig"),
    Kind.TRANSFER: (),
    Kind.BURN: ("value", "coin_fee", "pk_auth", "id_l1"),
    Kind.FEE_COLLECT: ("k",),
}


def output_words(has_enc: int) -> int:
    return 2 + CT_WORDS * has_enc


def shape_ok(kind: int, n_in: int, n_out: int) -> bool:
    if kind == Kind.MINT or kind == Kind.FEE_COLLECT:
        return n_in == 0 and n_out == 1
    if kind == Kind.BURN:
        return n_in == 1 and n_out == 0
    if kind == Kind.TRANSFER:
        return n_in >= 1 and n_in + n_out <= M_SLOTS
    return False


@dataclass(frozen=True)
class TxLayout:
    """Relative word positions of a transaction's fixed-position fields."""

    kind: Kind
    n_in: int
    n_out: int
    crt_ref: int | None
    fee: int
    proof: int | None
    inputs: int
    outputs: int

    def input_at(self, k: int) -> int:
        return self.inputs + INPUT_WORDS * k


def tx_layout(kind: int, n_in: int, n_out: int) -> TxLayout:
    pos = TX_FIXED + n_in + n_out
    crt_ref = None
    if kind in (Kind.TRANSFER, Kind.BURN):
        crt_ref, pos = pos, pos + 1
    fee, pos = pos, pos + 1
    proof = None
    if kind == Kind.TRANSFER:
        proof, pos = pos, pos + PROOF_WORDS
    inputs = pos
    outputs = pos + INPUT_WORDS * n_in
    return TxLayout(Kind(kind), n_in, n_out, crt_ref, fee, proof, inputs, outputs)


# --- encoding -------------------------------------------------------------


def bytes_to_words(data: bytes) -> list[int]:
    return [int.from_bytes(data[i : i + WORD], "big") for i in range(0, len(data), WORD)]


def words_to_bytes(words) -> bytes:
    return b"".join(w.to_bytes(WORD, "big") for w in words)


def _body_words(tx: Transaction) -> list[int]:
    b = tx.body
    if tx.kind == Kind.MINT:
        return [b.value, b.coin_fee, b.k, b.nonce, b.pk_sig]
    if tx.kind == Kind.BURN:
        return [b.value, b.coin_fee, b.pk_auth, b.id_l1]
    if tx.kind == Kind.FEE_COLLECT:
        return [b.k]
    return []


def encode_tx(tx: Transaction) -> list[int]:
    n_in, n_out = len(tx.inputs), len(tx.outputs)
    lay = tx_layout(tx.kind, n_in, n_out)
    words = [tx.tx_hash, int(tx.kind), tx.token, n_in, n_out]
    words += [lay.input_at(k) for k in range(n_in)]
    pos, out_offsets, out_blocks = lay.outputs, [], []
    for o in tx.outputs:
        out_offsets.append(pos)
        block = [int(o.has_enc), o.c]
        if o.has_enc:
            if len(o.enc) != CT_BYTES:
                raise ValueError("ciphertext has the wrong length")
            block += bytes_to_words(o.enc)
        out_blocks.append(block)
        pos += len(block)
    words += out_offsets
    if lay.crt_ref is not None:
        words.append(tx.crt_ref.to_word())
    words.append(tx.fee)
    if lay.proof is not None:
        if tx.tx_proof is None or len(tx.tx_proof) != PROOF_BYTES:
            raise ValueError("transfer needs a fixed-length transaction proof")
        words += bytes_to_words(tx.tx_proof)
    for i in tx.inputs:
        if len(i.proof) != PROOF_BYTES:
            raise ValueError("input proof has the wrong length")
        words += [i.crt, i.sn, i.cm, i.pk_sig, *bytes_to_words(i.proof)]
    for block in out_blocks:
        words += block
    words += _body_words(tx)
    return words


def tx_hash_of_words(words) -> int:
    """Hash of every transaction word after the hash word itself (raw bytes, not reduced)."""
    return crypto.hash_bytes(crypto.encode(int(Tag.TX_HASH)) + words_to_bytes(words[1:]))


def encode_bracket(br: Bracket) -> list[int]:
    txs = [encode_tx(t) for t in br.txs]
    n = len(txs)
    rel, offsets = BRACKET_FIXED + n, []
    for w in txs:
        offsets.append(rel)
        rel += len(w)
    words = [
        br.bracket_hash, br.post_crt, br.post_ccount, br.post_ntr, br.post_ncount,
        br.running_fee, n, len(br.signatures), rel,
    ]
    words += offsets
    for w in txs:
        words += w
    for s in br.signatures:
        if len(s) != SIG_BYTES:
            raise ValueError("signature has the wrong length")
        words += bytes_to_words(s)
    return words


@dataclass(frozen=True)
class BatchHeader:
    coin_root: int = 0
    coin_count: int = 0
    nullifier_root: int = 0
    nullifier_count: int = 0
    ck_f: int = 0


@dataclass(frozen=True)
class Batch:
    header: BatchHeader
    brackets: tuple[Bracket, ...]


class BlobOverflow(Exception):
    def __init__(self, bracket_index: int, needed: int):
        super().__init__(f"bracket {bracket_index} does not fit ({needed} > {BLOB_WORDS} words)")
        self.bracket_index = bracket_index
        self.needed = needed


@dataclass(frozen=True)
class Blob:
    words: tuple[int, ...]
    _tree: list = field(default_factory=list, compare=False, repr=False)

    def __post_init__(self):
        if len(self.words) != BLOB_WORDS:
            raise ValueError(f"a blob has exactly {BLOB_WORDS} words")

    def to_bytes(self) -> bytes:
        return words_to_bytes(self.words)

    @classmethod
    def from_bytes(cls, data: bytes) -> Blob:
        if len(data) != BLOB_WORDS * WORD:
            raise ValueError("blob bytes have the wrong length")
        return cls(tuple(bytes_to_words(data)))

    @property
    def length(self) -> int:
        return self.words[H_LENGTH]

    def tree(self) -> WordTree:
        if not self._tree:
            self._tree.append(WordTree(self.words))
        return self._tree[0]


def batch_words(header: BatchHeader, brackets) -> list[int]:
    encoded = [encode_bracket(b) for b in brackets]
    m = len(encoded)
    pos, offsets = HEADER_FIXED + m, []
    for w in encoded:
        offsets.append(pos)
        pos += len(w)
    words = [
        header.coin_root, header.coin_count, header.nullifier_root,
        header.nullifier_count, header.ck_f, m, pos,
    ]
    words += offsets
    for i, w in enumerate(encoded):
        words += w
        if len(words) > BLOB_WORDS:
            raise BlobOverflow(i, len(words))
    return words


def serialize_batch(header: BatchHeader, brackets) -> Blob:
    words = batch_words(header, brackets)
    return Blob(tuple(words + [0] * (BLOB_WORDS - len(words))))


def fits(header: BatchHeader, brackets) -> bool:
    try:
        batch_words(header, brackets)
    except BlobOverflow:
        return False
    return True


# --- views ------------------------------------------------------------------


class Malformed(Exception):
    def __init__(self, index: int, expected: str):
        super().__init__(f"word {index}: expected {expected}")
        self.index = index
        self.expected = expected


class MissingWord(Exception):
    """A judge-side view was asked for a word that was not revealed."""


class ListView:
    def __init__(self, words):
        self.words = words

    def __call__(self, i: int) -> int:
        return self.words[i]


class RecordingView(ListView):
    """Full-blob view that remembers every index read (prover side)."""

    def __init__(self, words):
        super().__init__(words)
        self.touched: set[int] = set()

    def __call__(self, i: int) -> int:
        self.touched.add(i)
        return self.words[i]


class RevealedView:
    """Judge-side view over revealed words only."""

    def __init__(self, revealed: dict[int, int]):
        self.revealed = revealed

    def __call__(self, i: int) -> int:
        try:
            return self.revealed[i]
        except KeyError:
            raise MissingWord(i) from None


def rd(v, i: int) -> int:
    if not 0 <= i < BLOB_WORDS:
        raise Malformed(i, "an index inside the blob")
    return v(i)


def rd_field(v, i: int, what: str) -> int:
    w = rd(v, i)
    if w >= crypto.P:
        raise Malformed(i, f"{what} as a field element")
    return w


# --- structural predicates -------------------------------------------------


def check_header(v) -> None:
    for i, name in enumerate(HEADER_FIELDS[:5]):
        rd_field(v, i, name)
    m, length = rd(v, H_M), rd(v, H_LENGTH)
    if length > BLOB_WORDS:
        raise Malformed(H_LENGTH, f"length at most {BLOB_WORDS}")
    if HEADER_FIXED + m > length:
        raise Malformed(H_M, "a bracket table inside length")
    if m == 0 and length != HEADER_FIXED:
        raise Malformed(H_LENGTH, "header-only length for an empty batch")


def check_padding(v, w: int) -> None:
    if w >= rd(v, H_LENGTH) and 0 <= w < BLOB_WORDS and rd(v, w) != 0:
        raise Malformed(w, "zero padding past length")


def bracket_end(v, b: int) -> int:
    return b + rd(v, b + B_SIGOFF) + SIG_WORDS * rd(v, b + B_S)


def tx_size(v, x: int) -> int:
    """Word count of the transaction at absolute position ``x``."""
    kind, n_in, n_out = rd(v, x + T_KIND), rd(v, x + T_NIN), rd(v, x + T_NOUT)
    if kind not in Kind.__members__.values():
        raise Malformed(x + T_KIND, "a known transaction kind")
    if not shape_ok(kind, n_in, n_out):
        raise Malformed(x + T_NIN, f"an input/output shape valid for kind {kind}")
    lay = tx_layout(kind, n_in, n_out)
    if n_out == 0:
        body = lay.outputs
    else:
        last = rd(v, x + TX_FIXED + n_in + n_out - 1)
        has = rd(v, x + last + O_HASENC)
        if has not in (0, 1):
            raise Malformed(x + last, "has_enc in {0, 1}")
        body = last + output_words(has)
    return body + len(BODY_FIELDS[lay.kind])


def check_bracket_head(v, i: int) -> None:
    m = rd(v, H_M)
    if not 0 <= i < m:
        return
    length = rd(v, H_LENGTH)
    b = rd(v, HEADER_FIXED + i)
    expected = HEADER_FIXED + m if i == 0 else bracket_end(v, rd(v, HEADER_FIXED + i - 1))
    if b != expected:
        raise Malformed(HEADER_FIXED + i, f"bracket {i} to start at word {expected}")
    if b + BRACKET_FIXED > length:
        raise Malformed(HEADER_FIXED + i, "a bracket inside length")
    for f in range(B_N):
        rd_field(v, b + f, BRACKET_FIELDS[f])
    n, s, so = rd(v, b + B_N), rd(v, b + B_S), rd(v, b + B_SIGOFF)
    if BRACKET_FIXED + n > so:
        raise Malformed(b + B_SIGOFF, "signatures after the transaction table")
    end = b + so + SIG_WORDS * s
    if end > length:
        raise Malformed(b + B_S, "signatures inside length")
    if i == m - 1 and end != length:
        raise Malformed(H_LENGTH, "length to equal the end of the last bracket")


def check_bracket_tail(v, i: int) -> None:
    m = rd(v, H_M)
    if not 0 <= i < m:
        return
    b = rd(v, HEADER_FIXED + i)
    n, so = rd(v, b + B_N), rd(v, b + B_SIGOFF)
    if n == 0:
        expected = BRACKET_FIXED
    else:
        last = rd(v, b + BRACKET_FIXED + n - 1)
        expected = last + tx_size(v, b + last)
    if so != expected:
        raise Malformed(b + B_SIGOFF, f"signatures to start right after the last transaction ({expected})")


def check_bracket(v, i: int) -> None:
    check_bracket_head(v, i)
    check_bracket_tail(v, i)


def check_tx(v, i: int, j: int) -> None:
    m = rd(v, H_M)
    if not 0 <= i < m:
        return
    b = rd(v, HEADER_FIXED + i)
    n = rd(v, b + B_N)
    if not 0 <= j < n:
        return
    rel = rd(v, b + BRACKET_FIXED + j)
    if j == 0:
        expected = BRACKET_FIXED + n
    else:
        prev = rd(v, b + BRACKET_FIXED + j - 1)
        expected = prev + tx_size(v, b + prev)
    if rel != expected:
        raise Malformed(b + BRACKET_FIXED + j, f"transaction {j} to start at relative word {expected}")
    x = b + rel
    rd_field(v, x + T_HASH, "tx_hash")
    kind = rd(v, x + T_KIND)
    if kind not in Kind.__members__.values():
        raise Malformed(x + T_KIND, "a known transaction kind")
    rd_field(v, x + T_TOKEN, "token")
    n_in, n_out = rd(v, x + T_NIN), rd(v, x + T_NOUT)
    if not shape_ok(kind, n_in, n_out):
        raise Malformed(x + T_NIN, f"an input/output shape valid for kind {kind}")
    lay = tx_layout(kind, n_in, n_out)
    for k in range(n_in):
        if rd(v, x + TX_FIXED + k) != lay.input_at(k):
            raise Malformed(x + TX_FIXED + k, f"input {k} at relative word {lay.input_at(k)}")
    pos = lay.outputs
    for k in range(n_out):
        at = x + TX_FIXED + n_in + k
        if rd(v, at) != pos:
            raise Malformed(at, f"output {k} at relative word {pos}")
        has = rd(v, x + pos + O_HASENC)
        if has not in (0, 1):
            raise Malformed(x + pos, "has_enc in {0, 1}")
        rd_field(v, x + pos + O_C, "output commitment")
        if has:
            rd(v, x + pos + O_CT + CT_WORDS - 1)
        pos += output_words(has)
    if lay.crt_ref is not None:
        rd_field(v, x + lay.crt_ref, "crt_ref")
    rd_field(v, x + lay.fee, "fee")
    for k in range(n_in):
        base = x + lay.input_at(k)
        for f, name in enumerate(INPUT_FIELDS):
            rd_field(v, base + f, name)
        rd(v, base + INPUT_WORDS - 1)
    for f, name in enumerate(BODY_FIELDS[lay.kind]):
        rd_field(v, x + pos + f, name)


SCOPE_HEADER, SCOPE_PADDING, SCOPE_BRACKET, SCOPE_TX = range(4)


def check_scope(v, scope) -> None:
    """Evaluate one structural predicate; raises :class:`Malformed` if it fails."""
    kind, *args = scope
    if kind == SCOPE_HEADER and not args:
        check_header(v)
    elif kind == SCOPE_PADDING and len(args) == 1:
        check_padding(v, args[0])
    elif kind == SCOPE_BRACKET and len(args) == 1:
        check_bracket(v, args[0])
    elif kind == SCOPE_TX and len(args) == 2:
        check_tx(v, *args)
    else:
        raise ValueError("unknown scope")


# --- parsing ------------------------------------------------------------------


@dataclass(frozen=True)
class ParseFault:
    scope: tuple[int, ...] | None
    index: int
    expected: str


def _first_fault(v):
    def run(scope, fn, *args):
        try:
            fn(v, *args)
        except Malformed as e:
            return ParseFault(scope, e.index, e.expected)
        return None

    fault = run((SCOPE_HEADER,), check_header)
    if fault:
        return fault
    m = v(H_M)
    for i in range(m):
        fault = run((SCOPE_BRACKET, i), check_bracket_head, i)
        if fault:
            return fault
        b = v(HEADER_FIXED + i)
        for j in range(v(b + B_N)):
            fault = run((SCOPE_TX, i, j), check_tx, i, j)
            if fault:
                return fault
        fault = run((SCOPE_BRACKET, i), check_bracket_tail, i)
        if fault:
            return fault
    for w in range(v(H_LENGTH), BLOB_WORDS):
        if v(w):
            return ParseFault((SCOPE_PADDING, w), w, "zero padding past length")
    return None


def decode_tx(v, x: int) -> Transaction:
    kind, token, n_in, n_out = Kind(v(x + T_KIND)), v(x + T_TOKEN), v(x + T_NIN), v(x + T_NOUT)
    lay = tx_layout(kind, n_in, n_out)
    inputs = []
    for k in range(n_in):
        base = x + lay.input_at(k)
        words = [v(base + f) for f in range(INPUT_WORDS)]
        inputs.append(TxInput(*words[:4], words_to_bytes(words[4:])))
    outputs = []
    pos = lay.outputs
    for k in range(n_out):
        has = v(x + pos)
        enc = None
        if has:
            enc = words_to_bytes([v(x + pos + O_CT + w) for w in range(CT_WORDS)])
        outputs.append(TxOutput(v(x + pos + O_C), enc))
        pos += output_words(has)
    body_words = [v(x + pos + f) for f in range(len(BODY_FIELDS[kind]))]
    body = {
        Kind.MINT: lambda: MintBody(*body_words),
        Kind.BURN: lambda: BurnBody(*body_words),
        Kind.FEE_COLLECT: lambda: FeeCollectBody(*body_words),
        Kind.TRANSFER: lambda: None,
    }[kind]()
    crt_ref = CrtRef.from_word(v(x + lay.crt_ref)) if lay.crt_ref is not None else None
    proof = None
    if lay.proof is not None:
        proof = words_to_bytes([v(x + lay.proof + w) for w in range(PROOF_WORDS)])
    return Transaction(
        kind, token, tuple(inputs), tuple(outputs), v(x + lay.fee),
        crt_ref=crt_ref, tx_proof=proof, body=body, tx_hash=v(x + T_HASH),
    )


def decode_bracket(v, b: int) -> Bracket:
    n, s, so = v(b + B_N), v(b + B_S), v(b + B_SIGOFF)
    txs = tuple(decode_tx(v, b + v(b + BRACKET_FIXED + j)) for j in range(n))
    sigs = tuple(
        words_to_bytes([v(b + so + SIG_WORDS * k + w) for w in range(SIG_WORDS)]) for k in range(s)
    )
    return Bracket(
        txs=txs, signatures=sigs, bracket_hash=v(b + B_HASH), post_crt=v(b + B_CRT),
        post_ccount=v(b + B_CCOUNT), post_ntr=v(b + B_NTR), post_ncount=v(b + B_NCOUNT),
        running_fee=v(b + B_FEE),
    )


def parse_batch(blob) -> Batch | ParseFault:
    """Total parser: returns the batch or the first structural fault."""
    if isinstance(blob, (bytes, bytearray)):
        if len(blob) % WORD or len(blob) != BLOB_WORDS * WORD:
            return ParseFault(None, min(len(blob) // WORD, BLOB_WORDS), f"{BLOB_WORDS} whole words")
        words = bytes_to_words(blob)
    elif isinstance(blob, Blob):
        words = blob.words
    else:
        words = list(blob)
        if len(words) != BLOB_WORDS or any(not 0 <= w < 2**256 for w in words):
            return ParseFault(None, min(len(words), BLOB_WORDS), f"{BLOB_WORDS} 256-bit words")
    v = ListView(words)
    fault = _first_fault(v)
    if fault is not None:
        return fault
    header = BatchHeader(*(v(i) for i in range(5)))
    brackets = tuple(decode_bracket(v, v(HEADER_FIXED + i)) for i in range(v(H_M)))
    return Batch(header, brackets)


# --- locators -------------------------------------------------------------------


class LocateError(LookupError):
    pass


class Reader:
    """Field accessors over any word view; raises :class:`LocateError` on bad paths."""

    def __init__(self, view):
        self.v = view

    def w(self, i: int) -> int:
        try:
            return rd(self.v, i)
        except Malformed as e:
            raise LocateError(str(e)) from None

    @property
    def m(self) -> int:
        return self.w(H_M)

    def bracket(self, i: int) -> int:
        if not 0 <= i < self.m:
            raise LocateError(f"no bracket {i}")
        return self.w(HEADER_FIXED + i)

    def n(self, i: int) -> int:
        return self.w(self.bracket(i) + B_N)

    def tx(self, i: int, j: int) -> int:
        b = self.bracket(i)
        if not 0 <= j < self.w(b + B_N):
            raise LocateError(f"no transaction {j} in bracket {i}")
        return b + self.w(b + BRACKET_FIXED + j)

    def layout(self, i: int, j: int) -> tuple[int, TxLayout]:
        x = self.tx(i, j)
        kind, n_in, n_out = self.w(x + T_KIND), self.w(x + T_NIN), self.w(x + T_NOUT)
        if kind not in Kind.__members__.values() or not shape_ok(kind, n_in, n_out):
            raise LocateError(f"transaction ({i}, {j}) has no valid layout")
        return x, tx_layout(kind, n_in, n_out)

    def input(self, i: int, j: int, k: int) -> int:
        x, lay = self.layout(i, j)
        if not 0 <= k < lay.n_in:
            raise LocateError(f"no input {k}")
        return x + self.w(x + TX_FIXED + k)

    def output(self, i: int, j: int, k: int) -> tuple[int, int]:
        """(start, has_enc) of output k."""
        x, lay = self.layout(i, j)
        if not 0 <= k < lay.n_out:
            raise LocateError(f"no output {k}")
        o = x + self.w(x + TX_FIXED + lay.n_in + k)
        return o, self.w(o + O_HASENC)

    def body(self, i: int, j: int) -> int:
        x, lay = self.layout(i, j)
        if lay.n_out == 0:
            return x + lay.outputs
        o, has = self.output(i, j, lay.n_out - 1)
        return o + output_words(has)

    def tx_extent(self, i: int, j: int) -> range:
        x, lay = self.layout(i, j)
        return range(x, self.body(i, j) + len(BODY_FIELDS[lay.kind]))

    def signature(self, i: int, k: int) -> int:
        b = self.bracket(i)
        if not 0 <= k < self.w(b + B_S):
            raise LocateError(f"no signature {k} in bracket {i}")
        return b + self.w(b + B_SIGOFF) + SIG_WORDS * k


def locate(view, path) -> range:
    """Word range of a symbolic field path.

    Paths: ``("header", name)``, ``("header", "offset", i)``,
    ``("bracket", i, name)``, ``("bracket", i, "tx_offset", j)``,
    ``("bracket", i, "signature", k)``, ``("tx", i, j)``, ``("tx", i, j, name)``,
    ``("input", i, j, k[, name])``, ``("output", i, j, k[, name])``,
    ``("body", i, j, name)``.
    """
    if isinstance(view, Blob):
        view = ListView(view.words)
    elif not callable(view):
        view = ListView(view)
    r = Reader(view)
    head, *rest = path

    def one(i):
        return range(i, i + 1)

    if head == "header":
        if rest[0] == "offset":
            i = rest[1]
            r.bracket(i)
            return one(HEADER_FIXED + i)
        return one(HEADER_FIELDS.index(rest[0]))
    if head == "bracket":
        i, name, *more = rest
        b = r.bracket(i)
        if name == "tx_offset":
            r.tx(i, more[0])
            return one(b + BRACKET_FIXED + more[0])
        if name == "signature":
            s = r.signature(i, more[0])
            return range(s, s + SIG_WORDS)
        return one(b + BRACKET_FIELDS.index(name))
    if head == "tx":
        i, j, *more = rest
        if not more:
            return r.tx_extent(i, j)
        x, lay = r.layout(i, j)
        name = more[0]
        if name in TX_FIELDS:
            return one(x + TX_FIELDS.index(name))
        if name == "crt_ref" and lay.crt_ref is not None:
            return one(x + lay.crt_ref)
        if name == "fee":
            return one(x + lay.fee)
        if name == "tx_proof" and lay.proof is not None:
            return range(x + lay.proof, x + lay.proof + PROOF_WORDS)
        if name == "body":
            start = r.body(i, j)
            return range(start, start + len(BODY_FIELDS[lay.kind]))
        raise LocateError(f"transaction has no field {name!r}")
    if head == "input":
        i, j, k, *more = rest
        base = r.input(i, j, k)
        if not more:
            return range(base, base + INPUT_WORDS)
        if more[0] == "proof":
            return range(base + I_PROOF, base + INPUT_WORDS)
        return one(base + INPUT_FIELDS.index(more[0]))
    if head == "output":
        i, j, k, *more = rest
        o, has = r.output(i, j, k)
        if not more:
            return range(o, o + output_words(has))
        if more[0] == "has_enc":
            return one(o)
        if more[0] == "c":
            return one(o + O_C)
        if more[0] == "enc" and has:
            return range(o + O_CT, o + O_CT + CT_WORDS)
        raise LocateError(f"output has no field {more[0]!r}")
    if head == "body":
        i, j, name = rest
        x, lay = r.layout(i, j)
        fields = BODY_FIELDS[lay.kind]
        if name not in fields:
            raise LocateError(f"{lay.kind.name} body has no field {name!r}")
        return one(r.body(i, j) + fields.index(name))
    raise LocateError(f"unknown path head {head!r}")


# --- word commitment ----------------------------------------------------------


def _leaf(word: int) -> int:
    return crypto.hash_bytes(crypto.encode(int(Tag.BLOB_WORD_TREE)) + bytes(WORD) + crypto.encode(word))


def _node(left: int, right: int) -> int:
    return crypto.hash_bytes(
        crypto.encode(int(Tag.BLOB_WORD_TREE)) + (1).to_bytes(WORD, "big")
        + crypto.encode(left) + crypto.encode(right)
    )


class WordTree:
    """Depth-12 Merkle tree over blob words; all-zero suffixes use cached subtrees."""

    _zero_cache: dict[int, list[int]] = {}

    @classmethod
    def zeros(cls) -> list[int]:
        key = crypto.P
        if key not in cls._zero_cache:
            z = [_leaf(0)]
            for _ in range(BLOB_DEPTH):
                z.append(_node(z[-1], z[-1]))
            cls._zero_cache[key] = z
        return cls._zero_cache[key]

    def __init__(self, words):
        zeros = self.zeros()
        used = len(words)
        while used and words[used - 1] == 0:
            used -= 1
        level = [_leaf(w) for w in words[:used]]
        self.levels = [level]
        for d in range(BLOB_DEPTH):
            if len(level) % 2:
                level = level + [zeros[d]]
            level = [_node(level[i], level[i + 1]) for i in range(0, len(level), 2)]
            self.levels.append(level)
        self.root = level[0] if level else zeros[BLOB_DEPTH]

    def path(self, index: int) -> tuple[int, ...]:
        zeros = self.zeros()
        out = []
        for d in range(BLOB_DEPTH):
            sib = index ^ 1
            lvl = self.levels[d]
            out.append(lvl[sib] if sib < len(lvl) else zeros[d])
            index >>= 1
        return tuple(out)


@dataclass(frozen=True)
class WordReveal:
    index: int
    word: int
    path: tuple[int, ...]

    def to_words(self) -> tuple[int, ...]:
        return (self.index, self.word, *self.path)


def commit(blob: Blob) -> int:
    return blob.tree().root


def reveal(blob: Blob, indices) -> list[WordReveal]:
    tree = blob.tree()
    out = []
    for i in sorted(set(indices)):
        if not 0 <= i < BLOB_WORDS:
            raise IndexError(f"word index {i} outside the blob")
        out.append(WordReveal(i, blob.words[i], tree.path(i)))
    return out


def verify_reveal(root: int, r: WordReveal) -> bool:
    if not 0 <= r.index < BLOB_WORDS or len(r.path) != BLOB_DEPTH or not 0 <= r.word < 2**256:
        return False
    node, idx = _leaf(r.word), r.index
    for sib in r.path:
        node = _node(node, sib) if idx % 2 == 0 else _node(sib, node)
        idx >>= 1
    return node == root


# --- annotated dump ----------------------------------------------------------------


def annotate(blob: Blob) -> list[tuple[int, str, int]]:
    """(word index, field name, value) for every used word; raw listing on parse faults."""
    words = blob.words
    parsed = parse_batch(blob)
    if isinstance(parsed, ParseFault):
        used = max((i + 1 for i, w in enumerate(words) if w), default=0)
        return [(i, "raw", words[i]) for i in range(used)]
    v = ListView(words)
    r = Reader(v)
    names: dict[int, str] = {}
    for f, name in enumerate(HEADER_FIELDS):
        names[f] = f"header.{name}"
    for i in range(r.m):
        names[HEADER_FIXED + i] = f"header.offset[{i}]"
        b = r.bracket(i)
        for f, name in enumerate(BRACKET_FIELDS):
            names[b + f] = f"bracket[{i}].{name}"
        n = v(b + B_N)
        for j in range(n):
            names[b + BRACKET_FIXED + j] = f"bracket[{i}].tx_offset[{j}]"
            x, lay = r.layout(i, j)
            p = f"tx[{i},{j}]"
            for f, name in enumerate(TX_FIELDS):
                names[x + f] = f"{p}.{name}"
            for k in range(lay.n_in):
                names[x + TX_FIXED + k] = f"{p}.input_offset[{k}]"
                base = r.input(i, j, k)
                for f, name in enumerate(INPUT_FIELDS):
                    names[base + f] = f"{p}.input[{k}].{name}"
                for w in range(PROOF_WORDS):
                    names[base + I_PROOF + w] = f"{p}.input[{k}].proof[{w}]"
            for k in range(lay.n_out):
                names[x + TX_FIXED + lay.n_in + k] = f"{p}.output_offset[{k}]"
                o, has = r.output(i, j, k)
                names[o] = f"{p}.output[{k}].has_enc"
                names[o + O_C] = f"{p}.output[{k}].c"
                for w in range(CT_WORDS * has):
                    names[o + O_CT + w] = f"{p}.output[{k}].enc[{w}]"
            if lay.crt_ref is not None:
                names[x + lay.crt_ref] = f"{p}.crt_ref"
            names[x + lay.fee] = f"{p}.fee"
            if lay.proof is not None:
                for w in range(PROOF_WORDS):
                    names[x + lay.proof + w] = f"{p}.tx_proof[{w}]"
            body = r.body(i, j)
            for f, name in enumerate(BODY_FIELDS[lay.kind]):
                names[body + f] = f"{p}.body.{name}"
        for k in range(v(b + B_S)):
            s = r.signature(i, k)
            for w in range(SIG_WORDS):
                names[s + w] = f"bracket[{i}].signature[{k}][{w}]"
    return [(i, names.get(i, "?"), words[i]) for i in range(v(H_LENGTH))]
