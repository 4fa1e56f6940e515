"""Lists compared by the LRU benchmarks.

``ExtendedList`` spreads head inserts over a set of hidden dummy nodes so
that concurrent inserters rarely collide on one lock.  ``BaselineList`` is a
plain doubly-linked list under one mutex; it doubles as the sequential
reference for the concurrent list.
"""

import itertools
import random
import threading

from .core import AdList, Node, remove_do, remove_waitonpincount

DEFAULT_DUMMIES = 64
DEFAULT_REBALANCE_EVERY = 1024


class _Dummy(Node):
    __slots__ = ("index",)

    def __init__(self, index):
        Node.__init__(self)
        self.index = index

    def __repr__(self):
        return f"<dummy {self.index}>"


class ExtendedList(AdList):
    """``AdList`` with permanently hidden dummy nodes in its head region.

    ``insert_at_head`` links a node after a random dummy rather than after
    the head sentinel.  Dummies are masked and hold one permanent pin, so
    walkers step over them and clients can neither see nor delete them.
    Evictions slowly walk the dummies towards the tail, so every
    ``rebalance_every`` dequeues they are unlinked and relinked at the head.
    """

    def __init__(self, dummy_count=DEFAULT_DUMMIES, seed=None,
                 rebalance_every=DEFAULT_REBALANCE_EVERY):
        if dummy_count < 1:
            raise ValueError("dummy_count must be positive")
        AdList.__init__(self)
        self.dummy_count = dummy_count
        self.rebalance_every = rebalance_every
        self.dummies = [_Dummy(i) for i in range(dummy_count)]
        for d in self.dummies:
            self._link_after(self.head, d, False)
        self._seed = seed
        self._seeds = itertools.count()
        self._tls = threading.local()
        self._evictions = itertools.count(1)
        self._rebalancing = threading.Lock()

    def _rng(self):
        try:
            return self._tls.rng
        except AttributeError:
            if self._seed is None:
                rng = random.Random()
            else:
                rng = random.Random(self._seed * 1_000_003 + next(self._seeds))
            self._tls.rng = rng
            return rng

    def insert_at_head(self, fresh):
        """Link ``fresh`` after a random dummy.  ``fresh`` is left pinned."""
        rng = self._rng()
        dummies = self.dummies
        for _ in range(len(dummies)):
            d = dummies[rng.randrange(len(dummies))]
            # the forced pin fails only while a rebalance has the dummy unlinked
            if d._force_pin():
                try:
                    self.insert_after(d, fresh)
                finally:
                    d.unpin()
                return fresh
        return self.insert_after(self.head, fresh)

    def dequeue(self):
        node = AdList.dequeue(self)
        if node is not None and self.rebalance_every:
            if next(self._evictions) % self.rebalance_every == 0:
                self.rebalance()
        return node

    def rebalance(self):
        """Move every dummy back to the front.  Skipped if one is running."""
        if not self._rebalancing.acquire(blocking=False):
            return False
        try:
            for d in self.dummies:
                # the dummy is already masked; drop its permanent pin and let
                # other forced pins drain before unlinking it
                remove_waitonpincount(d)
                remove_do(d)
                self._link_after(self.head, d, False)
        finally:
            self._rebalancing.release()
        return True

    def dummy_positions(self):
        """Indices of the dummies in a raw walk of a quiescent list."""
        return [i for i, n in enumerate(self.check_links()) if isinstance(n, _Dummy)]

    def client_nodes(self):
        """Non-dummy nodes of a quiescent list, front to back."""
        return [n for n in self.check_links() if not isinstance(n, _Dummy)]


class Link:
    """Node of a ``BaselineList``."""

    __slots__ = ("next", "prev", "linked")

    def __init__(self):
        self.next = None
        self.prev = None
        self.linked = False


class BaselineList:
    """Doubly-linked list serialised by a single mutex."""

    def __init__(self):
        self.lock = threading.Lock()
        self.head = Link()
        self.tail = Link()
        self.head.next = self.tail
        self.tail.prev = self.head
        self.size = 0

    # Unlocked primitives; callers hold ``self.lock``.

    def _link(self, prv, node):
        nxt = prv.next
        node.prev = prv
        node.next = nxt
        prv.next = node
        nxt.prev = node
        node.linked = True
        self.size += 1

    def _unlink(self, node):
        node.prev.next = node.next
        node.next.prev = node.prev
        node.next = node.prev = None
        node.linked = False
        self.size -= 1

    def insert_at_front(self, node):
        with self.lock:
            self._link(self.head, node)
        return node

    insert_head = insert_at_front

    def append(self, node):
        with self.lock:
            self._link(self.tail.prev, node)
        return node

    def insert_after(self, anchor, node):
        with self.lock:
            self._link(anchor, node)
        return node

    def insert_before(self, anchor, node):
        with self.lock:
            self._link(anchor.prev, node)
        return node

    def remove(self, node):
        """Unlink ``node``; False if it is not on the list."""
        with self.lock:
            if not node.linked:
                return False
            self._unlink(node)
            return True

    delete = remove

    def pop(self):
        with self.lock:
            node = self.head.next
            if node is self.tail:
                return None
            self._unlink(node)
            return node

    def dequeue(self):
        with self.lock:
            node = self.tail.prev
            if node is self.head:
                return None
            self._unlink(node)
            return node

    def move_to_head(self, node):
        """Move a linked node to the front; False if it is not on the list."""
        with self.lock:
            if not node.linked:
                return False
            if self.head.next is not node:
                self._unlink(node)
                self._link(self.head, node)
            return True

    def evict_tail(self, k, on_evict=None):
        """Unlink up to ``k`` nodes from the back, holding the lock throughout.

        ``on_evict(node)`` runs under the lock for each evicted node, which is
        where eviction cost is modelled.
        """
        out = []
        with self.lock:
            for _ in range(k):
                node = self.tail.prev
                if node is self.head:
                    break
                self._unlink(node)
                if on_evict is not None:
                    on_evict(node)
                out.append(node)
        return out

    def first(self):
        with self.lock:
            node = self.head.next
            return None if node is self.tail else node

    def last(self):
        with self.lock:
            node = self.tail.prev
            return None if node is self.head else node

    def next(self, node):
        with self.lock:
            nxt = node.next
            return None if nxt is self.tail else nxt

    def prev(self, node):
        with self.lock:
            prv = node.prev
            return None if prv is self.head else prv

    def __iter__(self):
        with self.lock:
            nodes = []
            node = self.head.next
            while node is not self.tail:
                nodes.append(node)
                node = node.next
        return iter(nodes)

    def __len__(self):
        return self.size
