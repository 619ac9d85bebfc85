"""Acceptance criteria 1 to 10, one test each.

Every test prints a single ``criterion N PASS|FAIL`` line to the terminal
(bypassing capture) so a plain ``pytest tests/test_acceptance.py`` run shows
the verdicts even without ``-v`` or ``-s``.
"""

from __future__ import annotations

import itertools
import random
import time
from contextlib import contextmanager
from dataclasses import replace

import pytest
from batchgen import random_batch
from test_blob import _corrupt, _field_checks
from test_circuits import honest_input, honest_tx, naive_tx_ok
from test_merkle import oracle_root

from privroll import blob, circuits, crypto, fraud, merkle
from privroll.harness import capacity, fuzz, inject, lind, rational
from privroll.harness.scenario import generate_honest, run_scenario
from privroll.harness.world import ConfigRejected, total_value_locked
from privroll.merkle import AppendOnlyTree, InclusionProof
from privroll.txmodel import Kind


@pytest.fixture
def criterion(capsys):
    @contextmanager
    def report(n: int, title: str):
        ok = False
        try:
            yield
            ok = True
        finally:
            with capsys.disabled():
                print(f"\ncriterion {n:2d} {'PASS' if ok else 'FAIL'}  {title}")

    return report


def test_criterion_01_honest_runs(criterion):
    with criterion(1, "100 honest seeds: no disputes, batches finalized, exact conservation, < 60 s"):
        start = time.perf_counter()
        for seed in range(100):
            res = run_scenario(generate_honest(seed))
            report = res.report()
            assert report["disputes"] == [] and report["errors"] == [], seed
            assert report["rejections"] == [] and report["reference_match"], seed
            for row in report["conservation"].values():
                assert row["holds"] and row["bridge_solvent"], (seed, row)
            chain = res.world.chain
            # every batch is final except the closing sweep, which only collects fees
            assert report["finalized"] == list(range(1, chain.cur_height)), seed
            last = blob.parse_batch(chain.blobs[chain.cur_height])
            assert [tx.kind for br in last.brackets for tx in br.txs] == [Kind.FEE_COLLECT], seed
        elapsed = time.perf_counter() - start
        assert elapsed < 60, elapsed


def test_criterion_02_every_injection_is_disputed(criterion):
    with criterion(2, "21/21 injected violations disputed, reverted to h-1, full stake to the verifier"):
        results = [inject.run_injection(rule) for rule in fraud.RULES]
        assert len(results) == 21
        for r in results:
            assert r.passed, (r.rule, r.problems)
            assert r.accepted and r.disputed_rule in r.expected
            assert r.cur_height_after == r.height - 1
            assert r.slashed == r.stake_at_risk and r.verifier_gain == r.slashed - 5


def test_criterion_03_fuzzed_disputes_fail(criterion):
    with criterion(3, "1000 fuzzed disputes per rule on an honest chain, none accepted"):
        target = fuzz.honest_target(0)
        target.chain.credit_native("fuzzer", 10**9)
        for rule in fraud.RULES:
            stats = fuzz.fuzz_rule(target, rule, 1000, seed=3)
            assert stats.attempts == 1000 and stats.accepted == 0, (rule, stats.accepted_aux[:3])
            assert stats.other_reverts == 0, rule


def test_criterion_04_circuits(criterion):
    with criterion(4, "eval_tx exhaustive at M=2 against a naive oracle; eval_input mutations fail"):
        patterns = list(itertools.product((False, True), repeat=2))
        amounts = range(4)
        cases = 0
        for connected, is_input in itertools.product(patterns, patterns):
            for token in itertools.product((0, 1, 2), repeat=2):
                for value in itertools.product(amounts, repeat=2):
                    for fee in itertools.product(amounts, repeat=2):
                        for public_fee in amounts:
                            stmt, wit = honest_tx(connected, is_input, token, value, fee, public_fee)
                            expected = naive_tx_ok(connected, is_input, token, value, fee, public_fee)
                            assert circuits.eval_tx(stmt, wit) == expected
                            cases += 1
        assert cases == 147_456
        assert circuits.eval_input(*honest_input())
        stmt, wit = honest_input()
        mutations = [
            honest_input(c_override=98765),  # commitment opening
            (replace(stmt, sn=stmt.sn + 1), wit),  # serial number
            honest_input(pk_coin_delta=1),  # coin key
            honest_input(pk_auth_delta=1),  # authorizer
            (replace(stmt, cm=stmt.cm + 1), wit),  # input commitment
        ]
        for stmt, wit in mutations:
            assert not circuits.eval_input(stmt, wit)


def test_criterion_05_merkle(criterion):
    with criterion(5, "Merkle D=8: 500 sequences match the oracle, proofs verify, mutations fail"):
        assert merkle.hstar(0, 0) == 0
        rng = random.Random(5)
        P = crypto.P
        for _ in range(500):
            leaves = [rng.randrange(1, P) for _ in range(rng.randint(0, 64))]
            tree = AppendOnlyTree(8)
            tree.extend(leaves)
            root = tree.root
            assert root == oracle_root(leaves, 8)
            for i, leaf in enumerate(leaves):
                proof = tree.prove(i)
                assert merkle.verify(root, leaf, proof)
            if not leaves:
                continue
            i = rng.randrange(len(leaves))
            proof = tree.prove(i)
            level = rng.randrange(8)
            path, dirs = list(proof.path), list(proof.dir)
            path[level] = (path[level] + 1) % P
            dirs[level] = not dirs[level]
            assert not merkle.verify(root, (leaves[i] + 1) % P, proof)
            assert not merkle.verify((root + 1) % P, leaves[i], proof)
            assert not merkle.verify(root, leaves[i], InclusionProof(proof.index, proof.dir, tuple(path)))
            assert not merkle.verify(root, leaves[i], InclusionProof(proof.index, tuple(dirs), proof.path))


def test_criterion_06_blob(criterion):
    with criterion(6, "blob round-trips 500 batches, survives 1000 corruptions, locator is sound"):
        rng = random.Random(60)
        for _ in range(500):
            header, brackets = random_batch(rng)
            assert blob.parse_batch(blob.serialize_batch(header, brackets).to_bytes()) == blob.Batch(header, brackets)
        for _ in range(1000):
            header, brackets = random_batch(rng)
            out = blob.parse_batch(_corrupt(rng, blob.serialize_batch(header, brackets).to_bytes()))
            assert isinstance(out, (blob.Batch, blob.ParseFault))
        for _ in range(50):
            header, brackets = random_batch(rng)
            b = blob.serialize_batch(header, brackets)
            for path, expected in _field_checks(header, brackets):
                assert [b.words[w] for w in blob.locate(b, path)] == expected, path


def test_criterion_07_capacity(criterion):
    with criterion(7, "capacity mint > burn > transfer, each within 25% of 269/167/86"):
        rows = capacity.capacity_report()
        assert capacity.ordering_holds(rows)
        for r in rows:
            assert r.within_tolerance, (r.kind, r.measured, r.target)


def test_criterion_08_payload_constancy(criterion):
    with criterion(8, "dispute payload word counts identical at 4, 10 and 80 brackets"):
        sizes = {}
        for padding in (0, 6, 76):
            results = [inject.run_injection(rule, padding=padding) for rule in fraud.RULES]
            assert all(r.passed for r in results)
            sizes[results[0].bracket_count] = {r.rule: r.payload_words for r in results}
        assert sorted(sizes) == [4, 10, 80]
        assert sizes[4] == sizes[10] == sizes[80]


def test_criterion_09_l2_ind(criterion):
    with criterion(9, "L2-IND: identical transcripts on 100 scripts, random guess ~1/2, leaky control > 0.9"):
        for n in range(100):
            script = lind.random_consistent_script(random.Random(f"acceptance:{n}"))
            equal, _, _ = lind.transcripts_equal(script, n)
            assert equal, n
        guess = lind.run_lind_game("random", 1000, seed=9)
        assert guess.lost == 0 and guess.rejected == 0
        assert 0.45 <= guess.rate <= 0.55, guess.summary()
        leaky = lind.run_lind_game("plaintext", 200, seed=9, leaky=True)
        assert leaky.rate > 0.9, leaky.summary()


def test_criterion_10_rational_bound(criterion):
    with criterion(10, "stake <= TVL/|V| + c_f refused at load; slashed - c_f > TVL/|V|"):
        bound = rational.stake_bound(rational.rational_clients(), 3, 5)
        with pytest.raises(ConfigRejected):
            rational.load(int(bound), 3, 5)
        assert rational.bound_is_enforced(3, 5)
        out = rational.bribery_walkthrough(n_verifiers=3, dispute_cost=5)
        assert out.theft_reverted
        assert out.slashed - out.dispute_cost > total_value_locked(rational.rational_clients()) / 3
