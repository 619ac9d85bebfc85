from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from privroll.harness import lind
from privroll.harness.lind import ADVERSARY, HONEST, Burn, CreateAddress, Mint, Out, PegIn, Seal, Transfer


def funded_game(b=0, seed=5):
    """Three honest addresses and one unspent coin (token 1, value 10, fee 5) per side."""
    script, _, _ = lind.challenge_script(random.Random(0))
    return lind.play(script[:6], b, seed)


def pay(x, fee=1, to=HONEST):
    return Transfer((0,), (Out(to, 1, 1, x, 2), Out(HONEST, 0, 1, 10 - x, 2)), fee)


@pytest.mark.parametrize("q0,q1,ok", [
    (pay(3), pay(7), True),
    (pay(3), pay(3, fee=2), False),
    (pay(3, to=ADVERSARY), pay(7, to=ADVERSARY), False),
    (pay(3, to=ADVERSARY), pay(3, to=ADVERSARY), True),
    (Transfer((0,), (Out(HONEST, 1, 1, 3, 2),), 1), pay(3), False),
    (PegIn(0, 1, 10, 5), PegIn(0, 1, 11, 5), False),
    (Mint(0, 9, 0), Mint(0, 9, 0), True),
    (Seal(), CreateAddress(), False),
    (Burn(0, "@0", 1), Burn(0, "@0", 1), True),
    (Burn(0, "@0", 1), Burn(0, "@1", 1), False),
    (Burn(0, "@0", 1), Burn(0, "@0", 2), False),
])
def test_public_consistency(q0, q1, ok):
    game = funded_game()
    a, b = game.instances[0].client, game.instances[1].client
    # "@n" stands for the L1 address of the n-th honest address
    ids = [addr.id_l1 for addr in a.addresses]
    q0, q1 = (Burn(q.cid, ids[int(q.id_l1[1:])], q.fee) if isinstance(q, Burn) else q for q in (q0, q1))
    assert lind.check_public_consistency(q0, q1, a, b) is ok


def test_inconsistent_pairs_are_answered_with_rejection():
    game = funded_game()
    before = len(game.transcript)
    assert lind.submit(game, pay(3), pay(3, fee=2)) == ("rejected",)
    assert game.rejected == 1 and len(game.transcript) == before + 1


def test_both_invalid_pairs_are_consistent():
    game = funded_game()
    spent_twice = Transfer((0, 0), (Out(HONEST, 1, 1, 20, 4),), 1)
    a, b = game.instances[0].client, game.instances[1].client
    assert a.reject_reason(spent_twice) is not None
    assert lind.check_public_consistency(spent_twice, spent_twice, a, b)
    assert not lind.check_public_consistency(spent_twice, pay(3), a, b)


@pytest.mark.parametrize("n", range(12))
def test_transcripts_do_not_depend_on_the_hidden_bit(n):
    script = lind.random_consistent_script(random.Random(n))
    equal, g0, g1 = lind.transcripts_equal(script, n)
    assert equal
    assert not g0.lost and g0.rejected == g1.rejected == 0
    assert {"Mint", "Seal"} <= {name for name, _, _ in g0.transcript}


def test_leaky_control_breaks_equality():
    diffs = sum(not lind.transcripts_equal(lind.random_consistent_script(random.Random(n)), n, leaky=True)[0]
                for n in range(12))
    assert diffs > 0


def test_challenge_game_is_honest_and_hidden():
    st_ = lind.run_lind_game("plaintext", 30, seed=2)
    assert st_.lost == 0 and st_.rejected == 0
    assert 0.2 < st_.rate < 0.8
    leaky = lind.run_lind_game("plaintext", 30, seed=2, leaky=True)
    assert leaky.rate == 1.0


def test_linkage_distinguisher_only_wins_when_leaky():
    assert lind.run_lind_game("linkage", 30, seed=3, leaky=True).rate == 1.0
    assert lind.run_lind_game("linkage", 30, seed=3).rate < 0.8


def test_wilson_interval_known_values():
    lo, hi = lind.wilson_interval(50, 100)
    assert lo == pytest.approx(0.4038, abs=1e-4) and hi == pytest.approx(0.5962, abs=1e-4)
    lo, hi = lind.wilson_interval(0, 10)
    assert lo == pytest.approx(0.0, abs=1e-12) and hi == pytest.approx(0.2775, abs=1e-4)
    assert lind.wilson_interval(0, 0) == (0.0, 1.0)


@given(st.integers(1, 5000), st.data())
def test_wilson_interval_brackets_the_rate(n, data):
    wins = data.draw(st.integers(0, n))
    lo, hi = lind.wilson_interval(wins, n)
    eps = 1e-12
    assert -eps <= lo <= wins / n + eps and wins / n - eps <= hi <= 1 + eps


def test_random_scripts_pose_real_challenges():
    private = differing = 0
    for n in range(50):
        for q0, q1 in lind.random_consistent_script(random.Random(n)):
            if isinstance(q0, lind.CLIENT_QUERIES):
                private += 1
                differing += q0 != q1
    # a sizeable share of private queries differ between the two sides
    assert differing * 10 > private
