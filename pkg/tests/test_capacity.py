from __future__ import annotations

from privroll import blob, txmodel
from privroll.harness import capacity


def test_homogeneous_maxima_are_ordered_and_near_target():
    rows = capacity.capacity_report()
    assert [r.kind for r in rows] == ["mint", "burn", "transfer"]
    assert capacity.ordering_holds(rows)
    for r in rows:
        assert r.within_tolerance, (r.kind, r.measured, r.target)
    assert {r.kind: r.target for r in rows} == {"mint": 269, "burn": 167, "transfer": 86}


def test_maxima_are_tight():
    # one more transaction of the same shape would not fit, packed 16 to a bracket
    for kind in capacity.KINDS:
        n = capacity.max_homogeneous(kind)
        f = capacity._Factory(0)
        txs = [getattr(f, kind)() for _ in range(n + 1)]
        fc = f.bracket([f.fee_collect()])

        def packed(k):
            cap = txmodel.BRACKET_CAPACITY
            return [*(f.bracket(txs[i:min(i + cap, k)]) for i in range(0, k, cap)), fc]

        assert blob.fits(blob.BatchHeader(), packed(n))
        assert not blob.fits(blob.BatchHeader(), packed(n + 1))


def test_layout_table_matches_encoder():
    table = dict(capacity.layout_table())
    assert all(isinstance(w, int) and w > 0 for w in table.values())
    assert "OUT" not in capacity.format_report(capacity.capacity_report())
