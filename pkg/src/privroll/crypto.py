"""Field arithmetic, hashing, key material, commitments, signatures and note encryption.

Field elements are plain ints in ``[0, P)``.  Every hash is SHA-256 over the
32-byte big-endian encodings of its inputs, reduced mod ``P``; protocol call
sites prepend a distinct :class:`Tag` so values from different contexts can
never collide.
"""

from __future__ import annotations

import contextlib
import hashlib
import random
from dataclasses import dataclass, field
from enum import IntEnum

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import ChaCha20Poly1305
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from cryptography.hazmat.primitives.serialization import Encoding, PublicFormat

# BLS12-381 scalar field order (255 bits): one element fits in one 32-byte word.
DEFAULT_PRIME = 0x73EDA753299D7D483339D80809A1D80553BDA402FFFE5BFEFFFFFFFF00000001
P = DEFAULT_PRIME

WORD_BYTES = 32
SIG_BYTES = 64
SIG_WORDS = 2
# note plaintext: token, value and fee as 8-byte integers (value and fee are range-bounded
# to 64 bits), then p as one field element
AMOUNT_BYTES = 8
_NOTE_BYTES = 3 * AMOUNT_BYTES + WORD_BYTES
# ephemeral X25519 key (32) + note (56) + Poly1305 tag (16) = 104, padded to 4 words
CT_WORDS = 4
CT_BYTES = CT_WORDS * WORD_BYTES
_CT_USED = 32 + _NOTE_BYTES + 16
ADDRESS_BYTES = 20


class Tag(IntEnum):
    OUTPUT_COMMITMENT = 1
    INPUT_COMMITMENT = 2
    SERIAL_NUMBER = 3
    AUTHORIZER = 4
    TREE_NODE = 5
    TX_HASH = 6
    BRACKET_HASH = 7
    BLOB_WORD_TREE = 8
    COIN_IDENTITY = 9
    MINT_NULLIFIER = 10


@contextlib.contextmanager
def use_prime(p: int):
    """Temporarily run with a different field prime (tests only)."""
    global P
    if not 2 < p < 2**256:
        raise ValueError("field prime must fit in one 32-byte word")
    old, P = P, p
    try:
        yield p
    finally:
        P = old


def fe(x: int) -> int:
    return x % P


def encode(x: int) -> bytes:
    return x.to_bytes(WORD_BYTES, "big")


def hash_bytes(data: bytes) -> int:
    return int.from_bytes(hashlib.sha256(data).digest(), "big") % P


def hash(parts) -> int:  # noqa: A001 - protocol name
    if not parts:
        raise ValueError("hash needs at least one part")
    return hash_bytes(b"".join(encode(x % P) for x in parts))


def tagged(tag: Tag, *parts: int) -> int:
    return hash([int(tag), *parts])


def random_fe(rng: random.Random) -> int:
    while True:
        x = rng.getrandbits(256)
        if x < P:
            return x


# --- coins ---------------------------------------------------------------


@dataclass(frozen=True)
class CoinSecrets:
    token: int
    value: int
    fee: int
    p: int

    def __post_init__(self):
        for name in ("token", "value", "fee", "p"):
            v = getattr(self, name)
            if not 0 <= v < P:
                raise ValueError(f"{name} out of field range")
        if self.token == 0 and self.value != 0:
            raise ValueError("the fee token cannot carry value")

    def to_fields(self) -> tuple[int, int, int, int]:
        return (self.token, self.value, self.fee, self.p)


def coin_identity(p: int, pk_coin: int) -> int:
    return tagged(Tag.COIN_IDENTITY, p, pk_coin)


def commit_output(token: int, value: int, fee: int, k: int) -> int:
    return tagged(Tag.OUTPUT_COMMITMENT, token, value, fee, k)


def output_commitment(secrets: CoinSecrets, pk_coin: int) -> int:
    return commit_output(secrets.token, secrets.value, secrets.fee, coin_identity(secrets.p, pk_coin))


def input_commitment(token: int, value: int, fee: int, pk_auth: int) -> int:
    return tagged(Tag.INPUT_COMMITMENT, token, value, fee, pk_auth)


def serial_number(p: int, sk_coin: int) -> int:
    return tagged(Tag.SERIAL_NUMBER, p, sk_coin)


def authorize(sk_coin: int, pk_sig: int) -> int:
    return tagged(Tag.AUTHORIZER, sk_coin, pk_sig)


def mint_nullifier(nonce: int) -> int:
    return tagged(Tag.MINT_NULLIFIER, nonce)


# --- keys ----------------------------------------------------------------


@dataclass(frozen=True)
class CoinKeyPair:
    sk_coin: int
    pk_coin: int

    @classmethod
    def from_secret(cls, sk_coin: int) -> CoinKeyPair:
        return cls(sk_coin, hash([sk_coin]))

    @classmethod
    def generate(cls, rng: random.Random) -> CoinKeyPair:
        return cls.from_secret(random_fe(rng))


def address_of(pk_sig: int) -> str:
    digest = hashlib.sha3_256(encode(pk_sig)).digest()
    return "0x" + digest[-ADDRESS_BYTES:].hex()


def address_to_int(addr: str) -> int:
    return int(addr, 16)


def int_to_address(x: int) -> str:
    return "0x" + x.to_bytes(ADDRESS_BYTES, "big").hex()


@dataclass(frozen=True)
class SignatureKeyPair:
    seed: bytes = field(repr=False)
    pk_sig: int
    id_l1: str

    @classmethod
    def from_seed(cls, seed: bytes) -> SignatureKeyPair | None:
        pk = Ed25519PrivateKey.from_private_bytes(seed).public_key()
        pk_int = int.from_bytes(pk.public_bytes(Encoding.Raw, PublicFormat.Raw), "big")
        if pk_int >= P:
            return None
        return cls(seed, pk_int, address_of(pk_int))

    @classmethod
    def generate(cls, rng: random.Random) -> SignatureKeyPair:
        # Ed25519 keys are 256-bit strings; grind until the key is a field element.
        while True:
            kp = cls.from_seed(rng.randbytes(32))
            if kp is not None:
                return kp

    def sign(self, message: bytes) -> bytes:
        return sign(self.seed, message)


def sign(seed: bytes, message: bytes) -> bytes:
    return Ed25519PrivateKey.from_private_bytes(seed).sign(message)


def verify(pk_sig: int, message: bytes, signature: bytes) -> bool:
    if not 0 <= pk_sig < 2**256 or len(signature) != SIG_BYTES:
        return False
    try:
        Ed25519PublicKey.from_public_bytes(encode(pk_sig)).verify(signature, message)
    except (InvalidSignature, ValueError):
        return False
    return True


@dataclass(frozen=True)
class EncKeyPair:
    sk_enc: bytes = field(repr=False)
    pk_enc: bytes

    @classmethod
    def generate(cls, rng: random.Random) -> EncKeyPair:
        sk = rng.randbytes(32)
        pk = X25519PrivateKey.from_private_bytes(sk).public_key()
        return cls(sk, pk.public_bytes(Encoding.Raw, PublicFormat.Raw))


def _note_key(shared: bytes, eph_pk: bytes, pk_enc: bytes) -> bytes:
    return HKDF(
        algorithm=hashes.SHA256(), length=32, salt=None, info=b"note" + eph_pk + pk_enc
    ).derive(shared)


_ZERO_NONCE = bytes(12)


def _pack_note(secrets: CoinSecrets) -> bytes:
    try:
        amounts = b"".join(x.to_bytes(AMOUNT_BYTES, "big") for x in secrets.to_fields()[:3])
    except OverflowError:
        raise ValueError("token, value and fee must fit in 64 bits to be encrypted") from None
    return amounts + encode(secrets.p)


def _unpack_note(plaintext: bytes) -> CoinSecrets:
    a = AMOUNT_BYTES
    token, value, fee = (int.from_bytes(plaintext[i * a : (i + 1) * a], "big") for i in range(3))
    return CoinSecrets(token, value, fee, int.from_bytes(plaintext[3 * a :], "big"))


def encrypt_note(pk_enc: bytes, secrets: CoinSecrets, rng: random.Random) -> bytes:
    """Ephemeral-static X25519 + ChaCha20-Poly1305; fixed ``CT_BYTES`` output."""
    eph = X25519PrivateKey.from_private_bytes(rng.randbytes(32))
    eph_pk = eph.public_key().public_bytes(Encoding.Raw, PublicFormat.Raw)
    shared = eph.exchange(X25519PublicKey.from_public_bytes(pk_enc))
    plaintext = _pack_note(secrets)
    # every ephemeral key is used once, so a constant nonce is safe
    body = ChaCha20Poly1305(_note_key(shared, eph_pk, pk_enc)).encrypt(_ZERO_NONCE, plaintext, None)
    out = eph_pk + body
    return out + bytes(CT_BYTES - len(out))


def decrypt_note(enc: EncKeyPair, ciphertext: bytes) -> CoinSecrets | None:
    if len(ciphertext) != CT_BYTES:
        return None
    eph_pk, body = ciphertext[:32], ciphertext[32:_CT_USED]
    try:
        shared = X25519PrivateKey.from_private_bytes(enc.sk_enc).exchange(
            X25519PublicKey.from_public_bytes(eph_pk)
        )
        plaintext = ChaCha20Poly1305(_note_key(shared, eph_pk, enc.pk_enc)).decrypt(
            _ZERO_NONCE, body, None
        )
        return _unpack_note(plaintext)
    except (InvalidTag, ValueError):
        return None


def random_ciphertext(rng: random.Random) -> bytes:
    """Uniform bytes shaped like a real note ciphertext (simulation only)."""
    return rng.randbytes(_CT_USED) + bytes(CT_BYTES - _CT_USED)
