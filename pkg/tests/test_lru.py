import collections
import random
import threading

import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from adlist import AdList, BaselineList, ExtendedList
from adlist.lru import _Dummy

from oracles import random_program
from replay import KeyLink, KeyNode, replay_adlist, replay_baseline, replay_extended, replay_ref


def client_keys(lst):
    return [n.key for n in lst]


def test_single_dummy_matches_plain_front_insert():
    plain, ext = AdList(), ExtendedList(1, seed=3)
    for i in range(50):
        plain.insert_at_front(KeyNode(i)).unpin()
        ext.insert_at_head(KeyNode(i)).unpin()
    assert client_keys(ext) == client_keys(plain) == list(range(49, -1, -1))
    assert ext.dummy_positions() == [0]


def _anchor_counts(ext):
    counts = collections.Counter()
    current = None
    for node in ext.check_links():
        if isinstance(node, _Dummy):
            current = node.index
        else:
            counts[current] += 1
    return counts


def test_anchor_choice_is_uniform():
    ext = ExtendedList(64, seed=11)
    for i in range(6400):
        ext.insert_at_head(KeyNode(i)).unpin()
    counts = _anchor_counts(ext)
    assert set(counts) == set(range(64))
    observed = [counts[i] for i in range(64)]
    assert stats.chisquare(observed).pvalue > 1e-3


def test_head_inserts_precede_older_nodes():
    ext = ExtendedList(16, seed=2)
    for i in range(20):
        ext.append(KeyNode(("old", i))).unpin()
    for i in range(200):
        ext.insert_at_head(KeyNode(("new", i))).unpin()
    ks = client_keys(ext)
    assert [k[0] for k in ks] == ["new"] * 200 + ["old"] * 20
    assert [k[1] for k in ks[200:]] == list(range(20))


def test_rebalance_on_fresh_list_keeps_membership():
    ext = ExtendedList(8, seed=1)
    assert ext.rebalance()
    assert ext.dummy_positions() == list(range(8))
    assert client_keys(ext) == []


def _churn(ext, evictions):
    # evict from the tail and reinsert behind a random dummy, LRU style
    for i in range(500):
        ext.insert_at_head(KeyNode(i)).unpin()
    for i in range(evictions):
        node = ext.dequeue()
        assert node is not None and not isinstance(node, _Dummy)
        # the final victim stays out so the list is left as eviction left it
        if i < evictions - 1:
            ext.insert_at_head(node).unpin()


def test_evictions_trigger_rebalance():
    ext = ExtendedList(8, seed=4, rebalance_every=1024)
    _churn(ext, 10 * 1024)
    assert ext.dummy_positions() == list(range(8))


def test_rebalance_after_ten_thousand_evictions():
    ext = ExtendedList(8, seed=5, rebalance_every=0)
    _churn(ext, 10_000)
    # without rebalancing the dummies have drifted into the client region
    assert ext.dummy_positions() != list(range(8))
    before = sorted(n.key for n in ext.client_nodes())
    ext.rebalance()
    assert ext.dummy_positions() == list(range(8))
    assert sorted(n.key for n in ext.client_nodes()) == before


def test_rebalance_concurrent_with_inserts_and_evictions(fast_switch):
    ext = ExtendedList(16, seed=6, rebalance_every=50)
    live = [0]
    escaped = []
    errors = []

    def worker(tid):
        try:
            rng = random.Random(tid)
            mine = [KeyNode((tid, i)) for i in range(300)]
            for node in mine:
                ext.insert_at_head(node).unpin()
            for _ in range(1500):
                r = rng.random()
                if r < 0.5:
                    node = ext.dequeue()
                    if node is not None:
                        if isinstance(node, _Dummy):
                            escaped.append(node)
                        ext.insert_at_head(node).unpin()
                elif r < 0.6:
                    ext.rebalance()
                else:
                    for node in ext:
                        if isinstance(node, _Dummy):
                            escaped.append(node)
                        break
        except BaseException as exc:
            errors.append(exc)

    ts = [threading.Thread(target=worker, args=(i,), daemon=True) for i in range(6)]
    for t in ts:
        t.start()
    for t in ts:
        t.join(120)
        assert not t.is_alive()
    assert not errors and not escaped
    clients = ext.client_nodes()
    assert len(clients) == 6 * 300
    assert all(n.refcount()[1] == 0 for n in clients)
    assert all(d.refcount()[:2] == (1, 1) for d in ext.dummies)
    assert len(ext.dummy_positions()) == 16
    ext.rebalance()
    assert ext.dummy_positions() == list(range(16))


def test_dummies_never_returned():
    ext = ExtendedList(4, seed=7)
    assert ext.first() is None and ext.last() is None
    assert ext.pop() is None and ext.dequeue() is None
    assert list(ext) == []
    ext.insert_at_head(KeyNode("a")).unpin()
    assert client_keys(ext) == ["a"]
    assert list(ext.iter(forward=False))[0].key == "a"


def test_zero_dummies_rejected():
    with pytest.raises(ValueError):
        ExtendedList(0)


# -- baseline ---------------------------------------------------------------------

def test_baseline_empty_removals():
    b = BaselineList()
    assert b.pop() is None and b.dequeue() is None
    assert b.evict_tail(3) == []
    assert b.first() is None and b.last() is None


def test_baseline_move_sole_element():
    b = BaselineList()
    x = b.insert_head(KeyLink("x"))
    assert b.move_to_head(x)
    assert [n.key for n in b] == ["x"] and len(b) == 1


def test_baseline_move_and_evict():
    b = BaselineList()
    nodes = [b.append(KeyLink(i)) for i in range(5)]
    assert b.move_to_head(nodes[3])
    assert [n.key for n in b] == [3, 0, 1, 2, 4]
    evicted = []
    assert [n.key for n in b.evict_tail(2, evicted.append)] == [4, 2]
    assert [n.key for n in evicted] == [4, 2]
    assert not b.move_to_head(nodes[4])
    assert not b.remove(nodes[2])
    assert len(b) == 3


@pytest.mark.parametrize("shape", ["ABC", "A", ""])
def test_baseline_matches_adlist_on_basic_shapes(shape):
    b, a = BaselineList(), AdList()
    for k in shape:
        b.append(KeyLink(k))
        a.append(KeyNode(k)).unpin()
    assert [n.key for n in b] == client_keys(a)
    x, y = b.pop(), a.pop()
    assert (x and x.key) == (y and y.key)
    x, y = b.dequeue(), a.dequeue()
    assert (x and x.key) == (y and y.key)


@settings(max_examples=200, deadline=None)
@given(st.randoms(use_true_random=False), st.integers(1, 40), st.sampled_from([1, 4, 64]))
def test_differential_all_implementations(rng, length, dummies):
    program = random_program(rng, length)
    expected = replay_ref(program)
    assert replay_baseline(program) == expected
    assert replay_adlist(program) == expected
    assert replay_extended(program, dummy_count=dummies) == expected


def test_head_insert_membership_matches_baseline():
    rng = random.Random(9)
    ext, base = ExtendedList(8, seed=9), BaselineList()
    enodes, bnodes = {}, {}
    for i in range(400):
        if rng.random() < 0.7 or not enodes:
            enodes[i] = ext.insert_at_head(KeyNode(i))
            enodes[i].unpin()
            bnodes[i] = base.insert_head(KeyLink(i))
        else:
            e, b = ext.dequeue(), None
            b = bnodes.pop(e.key)
            del enodes[e.key]
            base.remove(b)
    assert sorted(client_keys(ext)) == sorted(n.key for n in base)
