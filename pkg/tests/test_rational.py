from __future__ import annotations

import pytest

from privroll.harness import rational
from privroll.harness.world import ConfigRejected, total_value_locked


def test_tvl_counts_every_client_balance():
    assert total_value_locked(rational.rational_clients()) == 500 + 2_000 + 500 + 1_000


@pytest.mark.parametrize("n_verifiers,dispute_cost", [(1, 5), (3, 5), (4, 0), (7, 11)])
def test_stake_at_or_below_bound_is_refused(n_verifiers, dispute_cost):
    bound = rational.stake_bound(rational.rational_clients(), n_verifiers, dispute_cost)
    for stake in (1, int(bound) - 1, int(bound)):
        with pytest.raises(ConfigRejected):
            rational.load(stake, n_verifiers, dispute_cost)
    rational.load(int(bound) + 1, n_verifiers, dispute_cost)
    assert rational.bound_is_enforced(n_verifiers, dispute_cost)


@pytest.mark.parametrize("n_verifiers", [1, 3, 5])
def test_theft_batch_is_reverted_and_reward_beats_the_bribe(n_verifiers):
    out = rational.bribery_walkthrough(n_verifiers=n_verifiers)
    assert out.theft_reverted
    assert out.slashed == out.stake
    assert out.reward == out.slashed - out.dispute_cost
    assert out.reward > out.per_verifier_share
    assert out.bribe_unprofitable
