from __future__ import annotations

import random

import pytest
from batchgen import random_batch

from privroll import blob, crypto
from privroll.blob import Batch, BatchHeader, LocateError, ParseFault
from privroll.txmodel import Bracket, Kind, Transaction, TxOutput, FeeCollectBody


def test_round_trip_500_random_batches():
    rng = random.Random(6)
    sizes = []
    for _ in range(500):
        header, brackets = random_batch(rng)
        b = blob.serialize_batch(header, brackets)
        assert blob.parse_batch(b) == Batch(header, brackets)
        assert blob.parse_batch(b.to_bytes()) == Batch(header, brackets)
        assert blob.Blob.from_bytes(b.to_bytes()) == b
        sizes.append(b.length)
    assert max(sizes) > 500  # the generator reaches multi-bracket blobs


def test_empty_batch():
    b = blob.serialize_batch(BatchHeader(), ())
    assert b.length == blob.HEADER_FIXED
    assert blob.parse_batch(b) == Batch(BatchHeader(), ())


def _corrupt(rng: random.Random, data: bytes) -> bytes:
    mode = rng.randrange(5)
    if mode == 0:
        return data[: rng.randrange(len(data))]
    buf = bytearray(data)
    if mode == 1:
        for _ in range(rng.randint(1, 4)):
            i = rng.randrange(len(buf))
            buf[i] ^= 1 << rng.randrange(8)
    elif mode == 2:
        # overwrite a whole word in the used region with a hostile value
        used = max(1, int.from_bytes(data[6 * 32 : 7 * 32], "big"))
        w = rng.randrange(min(used, blob.BLOB_WORDS))
        val = rng.choice([0, 1, 2**256 - 1, crypto.P, rng.randrange(2**256), rng.randrange(64)])
        buf[32 * w : 32 * w + 32] = val.to_bytes(32, "big")
    elif mode == 3:
        i = rng.randrange(blob.HEADER_FIXED * 32, len(buf))
        buf[i] = rng.randrange(1, 256)
    else:
        return bytes(buf) + b"\x00" * rng.randint(1, 40)
    return bytes(buf)


def test_corruption_fuzz_never_crashes():
    rng = random.Random(7)
    faults = parsed = 0
    for n in range(1000):
        header, brackets = random_batch(rng)
        data = blob.serialize_batch(header, brackets).to_bytes()
        out = blob.parse_batch(_corrupt(rng, data))
        if isinstance(out, ParseFault):
            faults += 1
            assert isinstance(out.expected, str) and out.expected
            assert 0 <= out.index <= blob.BLOB_WORDS
        else:
            assert isinstance(out, Batch)
            parsed += 1
    assert faults > 300 and parsed > 0


def test_out_of_range_word_lists_are_faults():
    words = [0] * blob.BLOB_WORDS
    words[5] = 2**256
    assert isinstance(blob.parse_batch(words), ParseFault)
    assert isinstance(blob.parse_batch([0] * 10), ParseFault)


def test_specific_faults_name_the_offending_word():
    rng = random.Random(3)
    while True:
        header, brackets = random_batch(rng)
        if brackets and brackets[0].txs:
            break
    words = list(blob.serialize_batch(header, brackets).words)
    bad = list(words)
    bad[blob.H_LENGTH] += 1
    fault = blob.parse_batch(bad)
    assert isinstance(fault, ParseFault)
    bad = list(words)
    bad[blob.H_COIN_ROOT] = crypto.P
    assert blob.parse_batch(bad) == ParseFault((blob.SCOPE_HEADER,), blob.H_COIN_ROOT, "coin_root as a field element")
    bad = list(words)
    bad[words[blob.H_LENGTH]] = 5
    fault = blob.parse_batch(bad)
    assert fault.scope == (blob.SCOPE_PADDING, words[blob.H_LENGTH])
    x = blob.locate(words, ("tx", 0, 0, "kind"))[0]
    bad = list(words)
    bad[x] = 9
    fault = blob.parse_batch(bad)
    assert fault.index == x and fault.scope == (blob.SCOPE_TX, 0, 0)


def _field_checks(header, brackets):
    """(path, expected words) for every addressable field of a batch."""
    yield ("header", "coin_root"), [header.coin_root]
    yield ("header", "ck_f"), [header.ck_f]
    yield ("header", "m"), [len(brackets)]
    for i, br in enumerate(brackets):
        yield ("bracket", i, "bracket_hash"), [br.bracket_hash]
        yield ("bracket", i, "post_crt"), [br.post_crt]
        yield ("bracket", i, "running_fee"), [br.running_fee]
        yield ("bracket", i, "n"), [len(br.txs)]
        yield ("bracket", i, "s"), [len(br.signatures)]
        for k, sig in enumerate(br.signatures):
            yield ("bracket", i, "signature", k), blob.bytes_to_words(sig)
        for j, tx in enumerate(br.txs):
            yield ("tx", i, j), blob.encode_tx(tx)
            yield ("tx", i, j, "tx_hash"), [tx.tx_hash]
            yield ("tx", i, j, "kind"), [int(tx.kind)]
            yield ("tx", i, j, "fee"), [tx.fee]
            if tx.crt_ref is not None:
                yield ("tx", i, j, "crt_ref"), [tx.crt_ref.to_word()]
            if tx.tx_proof is not None:
                yield ("tx", i, j, "tx_proof"), blob.bytes_to_words(tx.tx_proof)
            for k, inp in enumerate(tx.inputs):
                yield ("input", i, j, k), [inp.crt, inp.sn, inp.cm, inp.pk_sig, *blob.bytes_to_words(inp.proof)]
                yield ("input", i, j, k, "sn"), [inp.sn]
                yield ("input", i, j, k, "pk_sig"), [inp.pk_sig]
                yield ("input", i, j, k, "proof"), blob.bytes_to_words(inp.proof)
            for k, out in enumerate(tx.outputs):
                yield ("output", i, j, k, "c"), [out.c]
                yield ("output", i, j, k, "has_enc"), [int(out.has_enc)]
                if out.has_enc:
                    yield ("output", i, j, k, "enc"), blob.bytes_to_words(out.enc)
            for name in blob.BODY_FIELDS[tx.kind]:
                yield ("body", i, j, name), [getattr(tx.body, name)]


def test_locator_soundness_over_50_batches():
    rng = random.Random(50)
    checked = 0
    for _ in range(50):
        header, brackets = random_batch(rng)
        b = blob.serialize_batch(header, brackets)
        for path, expected in _field_checks(header, brackets):
            span = blob.locate(b, path)
            assert [b.words[w] for w in span] == expected, path
            checked += 1
        m = len(brackets)
        with pytest.raises(LocateError):
            blob.locate(b, ("bracket", m, "n"))
        with pytest.raises(LocateError):
            blob.locate(b, ("header", "offset", m))
        for i, br in enumerate(brackets):
            with pytest.raises(LocateError):
                blob.locate(b, ("tx", i, len(br.txs)))
            with pytest.raises(LocateError):
                blob.locate(b, ("bracket", i, "signature", len(br.signatures)))
    assert checked > 2000


def test_annotate_names_every_used_word():
    rng = random.Random(11)
    for _ in range(20):
        header, brackets = random_batch(rng)
        b = blob.serialize_batch(header, brackets)
        rows = blob.annotate(b)
        assert len(rows) == b.length
        assert all(name != "?" for _, name, _ in rows)


def test_locator_rejects_unknown_fields():
    fc = Transaction(Kind.FEE_COLLECT, 0, (), (TxOutput(5),), 0, body=FeeCollectBody(9), tx_hash=1)
    b = blob.serialize_batch(BatchHeader(), [Bracket((fc,))])
    assert list(blob.locate(b, ("body", 0, 0, "k"))) == [blob.locate(b, ("tx", 0, 0))[-1]]
    with pytest.raises(LocateError):
        blob.locate(b, ("body", 0, 0, "nonce"))
    with pytest.raises(LocateError):
        blob.locate(b, ("tx", 0, 0, "tx_proof"))
    with pytest.raises(LocateError):
        blob.locate(b, ("output", 0, 0, 0, "enc"))
    with pytest.raises(LocateError):
        blob.locate(b, ("widget",))


def test_overflow_is_reported():
    rng = random.Random(1)
    header, brackets = random_batch(rng, max_brackets=2)
    huge = Bracket((), tuple(bytes(crypto.SIG_BYTES) for _ in range(2100)))
    assert not blob.fits(header, [*brackets, huge])
    with pytest.raises(blob.BlobOverflow) as exc:
        blob.serialize_batch(header, [*brackets, huge])
    assert exc.value.bracket_index == len(brackets)


def test_word_reveals():
    rng = random.Random(4)
    header, brackets = random_batch(rng)
    b = blob.serialize_batch(header, brackets)
    root = blob.commit(b)
    idx = [0, 1, b.length - 1, b.length, blob.BLOB_WORDS - 1]
    reveals = blob.reveal(b, idx)
    assert [r.index for r in reveals] == sorted(set(idx))
    for r in reveals:
        assert blob.verify_reveal(root, r)
        assert not blob.verify_reveal(root, blob.WordReveal(r.index, r.word + 1, r.path))
        if b.words[r.index ^ 1] != r.word:
            assert not blob.verify_reveal(root, blob.WordReveal(r.index ^ 1, r.word, r.path))
    with pytest.raises(IndexError):
        blob.reveal(b, [blob.BLOB_WORDS])
    other = blob.serialize_batch(header, brackets[:-1]) if brackets else blob.serialize_batch(BatchHeader(1), ())
    assert blob.commit(other) != root


def test_word_tree_matches_naive_fold():
    rng = random.Random(5)
    header, brackets = random_batch(rng)
    b = blob.serialize_batch(header, brackets)
    layer = [blob._leaf(w) for w in b.words]
    while len(layer) > 1:
        layer = [blob._node(layer[i], layer[i + 1]) for i in range(0, len(layer), 2)]
    assert layer[0] == blob.commit(b)


def test_tx_hash_covers_every_word():
    rng = random.Random(8)
    from batchgen import random_tx

    tx = random_tx(rng)
    words = blob.encode_tx(tx)
    h = blob.tx_hash_of_words(words)
    assert blob.tx_hash_of_words([h + 1, *words[1:]]) == h  # the hash word itself is excluded
    for i in range(1, len(words)):
        bumped = list(words)
        bumped[i] ^= 1
        assert blob.tx_hash_of_words(bumped) != h
