from __future__ import annotations

import dataclasses
import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from privroll import blob, circuits, crypto, txmodel
from privroll.crypto import CoinKeyPair, CoinSecrets, EncKeyPair, SignatureKeyPair
from privroll.merkle import AppendOnlyTree
from privroll.txmodel import CrtRef, Kind, OutSpec, Spend, TransferRefused

BACKEND = circuits.ReferenceBackend(key=b"t" * 32)
REF = CrtRef(1, 0)


class Owner:
    def __init__(self, seed: int):
        rng = random.Random(seed)
        self.coin = CoinKeyPair.from_secret(rng.randrange(1, crypto.P))
        self.sig = SignatureKeyPair.generate(rng)
        self.enc = EncKeyPair.generate(rng)


def coins_in_tree(owner: Owner, secrets_list):
    tree = AppendOnlyTree(6)
    tree.append(999)
    spends = []
    for s in secrets_list:
        tree.append(crypto.output_commitment(s, owner.coin.pk_coin))
    for n, s in enumerate(secrets_list):
        spends.append(Spend(s, owner.coin, owner.sig, tree.prove(n + 1)))
    return tree, spends


@given(st.integers(0, 2**31), st.integers(-1, 2**31 - 2))
def test_crt_ref_word_round_trip(height, bracket):
    ref = CrtRef(height, bracket)
    assert CrtRef.from_word(ref.to_word()) == ref
    assert CrtRef.from_word(txmodel.GENESIS_REF.to_word()).is_genesis


def test_mint_carries_a_matching_commitment():
    alice = Owner(1)
    s = CoinSecrets(5, 40, 3, 77)
    tx = txmodel.build_mint(s, alice.coin.pk_coin, nonce=4, pk_sig=alice.sig.pk_sig, fee=1)
    assert tx.outputs[0].c == crypto.commit_output(5, 40, 3, tx.body.k)
    assert tx.nullifiers() == [crypto.mint_nullifier(4)]
    assert tx.signers() == [alice.sig.pk_sig]
    assert tx.tx_hash == blob.tx_hash_of_words(blob.encode_tx(tx))


def test_transfer_builds_verifiable_proofs():
    alice, bob = Owner(1), Owner(2)
    tree, spends = coins_in_tree(alice, [CoinSecrets(5, 30, 4, 1), CoinSecrets(0, 0, 6, 2)])
    outs = [OutSpec(CoinSecrets(5, 25, 3, 11), bob.coin.pk_coin, bob.enc.pk_enc),
            OutSpec(CoinSecrets(5, 5, 5, 12), alice.coin.pk_coin, alice.enc.pk_enc)]
    tx = txmodel.build_transfer(spends, outs, 2, REF, tree.root, BACKEND, random.Random(0))
    assert tx.kind == Kind.TRANSFER and tx.token == 0
    assert tx.inputs[0].cm == crypto.input_commitment(5, 30, 4, crypto.authorize(alice.coin.sk_coin, alice.sig.pk_sig))
    for inp in tx.inputs:
        assert circuits.verify_input(BACKEND, inp.statement(), inp.proof)
    assert circuits.verify_tx(BACKEND, tx.tx_statement(), tx.tx_proof)
    assert crypto.decrypt_note(bob.enc, tx.outputs[0].enc) == outs[0].secrets
    assert crypto.decrypt_note(bob.enc, tx.outputs[1].enc) is None
    # the public shape hides the token but fixes the public fee
    assert not circuits.verify_tx(BACKEND, dataclasses.replace(tx, fee=3).tx_statement(), tx.tx_proof)


@pytest.mark.parametrize("outs,fee", [
    ([(5, 31, 10)], 0),
    ([(5, 30, 10)], 1),
    ([(6, 30, 10)], 0),
])
def test_honest_builder_refuses(outs, fee):
    alice = Owner(1)
    tree, spends = coins_in_tree(alice, [CoinSecrets(5, 30, 10, 1)])
    specs = [OutSpec(CoinSecrets(*o, 9), alice.coin.pk_coin) for o in outs]
    with pytest.raises(TransferRefused):
        txmodel.build_transfer(spends, specs, fee, REF, tree.root, BACKEND, random.Random(0))


def test_out_of_range_outputs_refused():
    alice = Owner(1)
    tree, spends = coins_in_tree(alice, [CoinSecrets(5, 2**64, 10, 1)])
    outs = [OutSpec(CoinSecrets(5, 2**64, 10, 9), alice.coin.pk_coin)]
    with pytest.raises(TransferRefused, match="range"):
        txmodel.build_transfer(spends, outs, 0, REF, tree.root, BACKEND, random.Random(0))


def test_transfer_needs_inputs_and_slot_room():
    alice = Owner(1)
    tree, spends = coins_in_tree(alice, [CoinSecrets(5, 8, 8, 1)])
    with pytest.raises(TransferRefused):
        txmodel.build_transfer([], [], 0, REF, tree.root, BACKEND, random.Random(0))
    outs = [OutSpec(CoinSecrets(5, 1, 1, n), alice.coin.pk_coin) for n in range(8)]
    with pytest.raises(TransferRefused):
        txmodel.build_transfer(spends, outs, 0, REF, tree.root, BACKEND, random.Random(0))


def test_fee_input_first_is_reordered():
    alice = Owner(3)
    tree, spends = coins_in_tree(alice, [CoinSecrets(0, 0, 4, 1), CoinSecrets(5, 10, 0, 2)])
    outs = [OutSpec(CoinSecrets(5, 10, 3, 3), alice.coin.pk_coin)]
    tx = txmodel.build_transfer(spends, outs, 1, REF, tree.root, BACKEND, random.Random(0))
    assert tx.inputs[0].sn == crypto.serial_number(2, alice.coin.sk_coin)


def test_burn_exposes_only_what_the_bridge_needs():
    alice = Owner(4)
    tree, (spend,) = coins_in_tree(alice, [CoinSecrets(5, 30, 6, 1)])
    tx = txmodel.build_burn(spend, alice.sig.id_l1, 2, REF, tree.root, BACKEND, fee_floor=1)
    assert tx.body.value == 30 and tx.body.coin_fee == 6
    assert crypto.int_to_address(tx.body.id_l1) == alice.sig.id_l1
    assert tx.inputs[0].cm == crypto.input_commitment(5, 30, 6, tx.body.pk_auth)
    with pytest.raises(TransferRefused):
        txmodel.build_burn(spend, alice.sig.id_l1, 0, REF, tree.root, BACKEND, fee_floor=1)
    with pytest.raises(TransferRefused):
        txmodel.build_burn(spend, alice.sig.id_l1, 7, REF, tree.root, BACKEND)


def test_spending_a_coin_not_under_the_root_is_refused():
    alice = Owner(5)
    tree, (spend,) = coins_in_tree(alice, [CoinSecrets(5, 30, 6, 1)])
    with pytest.raises(circuits.ProofRefused):
        txmodel.build_burn(spend, alice.sig.id_l1, 2, REF, tree.root + 1, BACKEND)


def test_bracket_sign_and_verify():
    alice, bob = Owner(6), Owner(7)
    m1 = txmodel.build_mint(CoinSecrets(5, 1, 1, 1), alice.coin.pk_coin, 1, alice.sig.pk_sig, 0)
    m2 = txmodel.build_mint(CoinSecrets(5, 2, 1, 2), bob.coin.pk_coin, 2, bob.sig.pk_sig, 0)
    ring = txmodel.KeyRing()
    ring.add(alice.sig)
    ring.add(bob.sig)
    br = txmodel.bracket_sign(txmodel.bracket_make([m1, m2]), ring)
    assert txmodel.bracket_verify(br)
    assert br.bracket_hash == txmodel.bracket_hash([m1.tx_hash, m2.tx_hash])
    assert not txmodel.bracket_verify(dataclasses.replace(br, signatures=br.signatures[::-1]))
    assert not txmodel.bracket_verify(dataclasses.replace(br, signatures=br.signatures[:1]))
    assert not txmodel.bracket_verify(dataclasses.replace(br, bracket_hash=br.bracket_hash + 1))
    with pytest.raises(KeyError):
        txmodel.bracket_sign(br, txmodel.KeyRing())
    with pytest.raises(ValueError):
        txmodel.bracket_make([])
    with pytest.raises(ValueError):
        txmodel.bracket_make([m1] * 17)


def test_fee_collect_shape():
    tx = txmodel.build_fee_collect(ck_f=40, k=123)
    assert tx.outputs[0].c == crypto.commit_output(0, 0, 40, 123)
    assert tx.signers() == [] and tx.nullifiers() == []
