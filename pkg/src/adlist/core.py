"""Concurrent doubly-linked list with per-node locks and pin counts.

Each node carries a fair reader-writer ``LWLock`` guarding its ``next`` and
``prev`` links, plus a refcount word (mask bit, pin count, waiter queue):

* the mask bit hides a node.  Clearing it publishes an insert and setting it
  claims a delete; exactly one thread wins the claim.
* a pin keeps a node on the list.  Every node returned to a caller is pinned
  and the caller must ``unpin`` it (iterators do that themselves).  A claimed
  node is only unlinked once its pin count has drained to zero.
* the refcount waiter queue holds the deleter while pins drain, or backward
  walkers that must wait for an unlink already under way.

Locks are taken in ``next`` order.  Anything that needs the lock of a node's
predecessor while holding the node's own lock uses ``async_lock``: if that
queues, the thread drops its own lock, waits for the grant, relocks its node
and checks that the predecessor is still the same node before going on.

Any node passed to a list method must be kept on the list by the caller,
either by a pin or by owning its mask (being its deleter).
"""

import enum

from .layout import (
    LOCK_FREE, LOW_MASK, MASK, MAX_PINS, NULLID, PIN_ONE, PINS_MASK,
    WAITQ_MASK, WAITQ_SHIFT, WLOCKED, decode_refcount,
)
from .lwlock import LockStateError, LWLock
from .waiter import current_waiter, default_domain

_table = default_domain.table

# mask set, pincount 0, empty waitq: the state of a node off any list
_DETACHED = MASK | WAITQ_MASK
# a fresh node during insert: masked and pinned by the inserter
_INSERTING = MASK | PIN_ONE | WAITQ_MASK
# sentinels and dummies: masked for good, with a pin that is never dropped
_PERMANENT = MASK | PIN_ONE | WAITQ_MASK
# write-held with nobody queued
_SOLE_WRITER = LOCK_FREE | WLOCKED

# Schedule hook for deterministic interleaving tests.  When set it is called
# as ``probe(point, node)`` at a few named points inside the list operations.
probe = None


class PinError(RuntimeError):
    """Pin count would overflow, or unpin of a node with no pins."""


class RemoveStatus(enum.Enum):
    NOT_REMOVABLE = 0
    READY = 1
    MUST_WAIT = 2


class Node(LWLock):
    """List element header: links, the link lock, and the refcount word.

    Client records subclass ``Node`` (declare ``__slots__`` to keep them
    small).  The list never allocates nodes and forgets a node as soon as
    its removal returns.
    """

    __slots__ = ("next", "prev", "refword")

    def __init__(self):
        LWLock.__init__(self)
        self.next = None
        self.prev = None
        self.refword = _DETACHED

    def refcount(self):
        """Decoded ``(mask, pincount, waitq)`` snapshot."""
        return decode_refcount(self.refword)

    @property
    def masked(self):
        return bool(self.refword & MASK)

    def pin(self):
        """Pin the node unless it is masked.  Returns whether it was pinned."""
        cas = self._cas
        while True:
            o = self.refword
            if o & MASK:
                return False
            if o & PINS_MASK == PINS_MASK:
                raise PinError(f"pin count would exceed {MAX_PINS}")
            with cas:
                if self.refword == o:
                    self.refword = o + PIN_ONE
                    return True

    def unpin(self):
        cas = self._cas
        while True:
            o = self.refword
            if not o & PINS_MASK:
                raise PinError("unpin of a node whose pin count is zero")
            n = o - PIN_ONE
            wake = NULLID
            if not n & PINS_MASK and o & MASK:
                # only a deleter can be queued while pins are held
                wake = o >> WAITQ_SHIFT
                n |= WAITQ_MASK
            with cas:
                if self.refword == o:
                    self.refword = n
                    break
        if wake != NULLID:
            _table[wake].event.signal()

    def _force_pin(self):
        # Pin even when masked, as long as the count has not drained to zero.
        cas = self._cas
        while True:
            o = self.refword
            if not o & PINS_MASK:
                return False
            if o & PINS_MASK == PINS_MASK:
                raise PinError(f"pin count would exceed {MAX_PINS}")
            with cas:
                if self.refword == o:
                    self.refword = o + PIN_ONE
                    return True

    def _unmask(self):
        with self._cas:
            self.refword &= ~MASK

    def _park_behind_delete(self, w):
        # Queue ``w`` until the in-flight unlink of this node finishes.  The
        # caller must hold the lock of a neighbour so the unlink cannot have
        # happened yet.
        cas = self._cas
        while True:
            o = self.refword
            if o & PINS_MASK or not o & MASK:
                return False
            w.next = o >> WAITQ_SHIFT
            n = (o & LOW_MASK) | (w.id << WAITQ_SHIFT)
            with cas:
                if self.refword == o:
                    self.refword = n
                    w.parked = True
                    return True

    def _wake_parked(self):
        with self._cas:
            o = self.refword
            self.refword = o | WAITQ_MASK
        wid = o >> WAITQ_SHIFT
        while wid != NULLID:
            w = _table[wid]
            wid = w.next
            w.next = NULLID
            w.event.signal()

    def __repr__(self):
        mask, pins, waitq = decode_refcount(self.refword)
        return f"<{type(self).__name__} at {id(self):#x} mask={mask} pins={pins}>"


# Free functions over nodes, in the names of the original C API.

def node_pin(node):
    return node.pin()


def node_unpin(node):
    node.unpin()


def remove_start(node):
    """Claim ``node`` for deletion by setting its mask.

    The caller must hold a pin.  ``READY`` means the caller's pin was the last
    one and has been dropped; ``MUST_WAIT`` means other pins remain and the
    caller's pin is still held; ``NOT_REMOVABLE`` means someone else owns the
    delete and nothing changed.
    """
    cas = node._cas
    while True:
        o = node.refword
        if o & MASK:
            return RemoveStatus.NOT_REMOVABLE
        pins = o & PINS_MASK
        if not pins:
            raise PinError("remove_start needs the caller to hold a pin")
        if pins == PIN_ONE:
            n, status = (o | MASK) - PIN_ONE, RemoveStatus.READY
        else:
            n, status = o | MASK, RemoveStatus.MUST_WAIT
        with cas:
            if node.refword == o:
                node.refword = n
                return status


def remove_waitonpincount(node):
    """Drop the caller's pin and block until all other pins are gone.

    Do not call this while pinning any other node: two deleters waiting on
    each other's pins would deadlock.
    """
    w = current_waiter()
    cas = node._cas
    while True:
        o = node.refword
        if not o & PINS_MASK:
            raise PinError("remove_waitonpincount needs the caller's pin")
        n = o - PIN_ONE
        queued = bool(n & PINS_MASK)
        if queued:
            assert o >> WAITQ_SHIFT == NULLID, "second waiter on a pinned node"
            w.next = NULLID
            n = (n & LOW_MASK) | (w.id << WAITQ_SHIFT)
        with cas:
            if node.refword == o:
                node.refword = n
                break
    if queued:
        w.parked = True
        w.wait()


def _lock_with_prev(node, w):
    """Exclusively lock ``node`` and its current predecessor; return the latter."""
    node.lock(True)
    while True:
        prv = node.prev
        if prv._async_lock(w, True):
            return prv
        node.unlock()
        if probe is not None:
            probe("async_wait", node)
        w.wait()
        node.lock(True)
        if node.prev is prv:
            return prv
        # predecessor was unlinked, or nodes were inserted in between
        prv.unlock()


def remove_do(node):
    """Unlink a claimed node whose pins have drained.

    On return no other thread holds or waits for anything on ``node`` and
    the caller may reuse it.
    """
    w = current_waiter()
    prv = _lock_with_prev(node, w)
    if probe is not None:
        probe("remove_do.have_prev", node)
    nxt = node.next
    nxt.lock(True)
    prv.next = nxt
    nxt.prev = prv
    node.next = node.prev = None
    nxt.unlock()
    prv.unlock()
    # Clear the node: wake parked backward walkers, then cycle the lock
    # through everyone still queued on it until it comes back to us.  Anyone
    # who could still reach the node queued on it before we took the
    # neighbour locks, so an empty queue now stays empty.
    node._wake_parked()
    if node.lockword == _SOLE_WRITER:
        node.unlock()
        return
    if not node._async_lock(w, True):
        node.unlock()
        w.wait()
    node.unlock()


def node_delete(node):
    """Delete a node the caller has pinned.  False if another thread owns the delete."""
    status = remove_start(node)
    if status is RemoveStatus.NOT_REMOVABLE:
        return False
    if status is RemoveStatus.MUST_WAIT:
        remove_waitonpincount(node)
    remove_do(node)
    return True


class AdList:
    """Doubly-linked list between two permanent sentinel nodes."""

    def __init__(self):
        self.head = Node()
        self.tail = Node()
        self.head.next = self.tail
        self.tail.prev = self.head
        self.head.refword = _PERMANENT
        self.tail.refword = _PERMANENT

    # -- traversal -------------------------------------------------------

    def next(self, node):
        """Pinned nearest unmasked node after ``node``, or None."""
        tail = self.tail
        cur = node
        cur.lock(False)
        while True:
            nxt = cur.next
            if nxt is tail:
                cur.unlock()
                return None
            if nxt.pin():
                cur.unlock()
                return nxt
            # masked: hold its lock instead of a pin while stepping over it
            nxt.lock(False)
            cur.unlock()
            cur = nxt

    def prev(self, node):
        """Pinned nearest unmasked node before ``node``, or None."""
        head = self.head
        cur = node
        forced = False
        while True:
            cur.lock(False)
            prv = cur.prev
            if prv is head:
                cur.unlock()
                result = None
                break
            if prv.pin():
                cur.unlock()
                result = prv
                break
            if prv._force_pin():
                # step onto the masked node and keep going from there
                cur.unlock()
                if forced:
                    cur.unpin()
                cur = prv
                forced = True
                continue
            # the delete of prv has drained its pins: wait for the unlink
            w = current_waiter()
            parked = prv._park_behind_delete(w)
            cur.unlock()
            if parked:
                if probe is not None:
                    probe("prev.parked", prv)
                w.wait()
        if forced:
            cur.unpin()
        return result

    def first(self):
        return self.next(self.head)

    def last(self):
        return self.prev(self.tail)

    # -- insertion -------------------------------------------------------

    def insert_after(self, anchor, fresh):
        """Link ``fresh`` after ``anchor``.  ``fresh`` is left pinned."""
        if anchor is self.tail:
            raise ValueError("cannot insert after the tail sentinel")
        self._link_after(anchor, fresh, True)
        return fresh

    def _link_after(self, anchor, fresh, publish):
        # ``publish`` False links a permanent node (masked, one pin for good).
        # Until it is linked it keeps no pins so a forced pin cannot land on it.
        fresh.lockword = LOCK_FREE
        fresh.refword = _INSERTING if publish else _DETACHED
        anchor.lock(True)
        if probe is not None:
            probe("insert_after.have_anchor", anchor)
        nxt = anchor.next
        nxt.lock(True)
        fresh.prev = anchor
        fresh.next = nxt
        anchor.next = fresh
        nxt.prev = fresh
        if publish:
            fresh._unmask()
        else:
            # nobody can see the node before the neighbour locks drop
            with fresh._cas:
                fresh.refword = _PERMANENT
        nxt.unlock()
        anchor.unlock()

    def insert_before(self, anchor, fresh):
        """Link ``fresh`` before ``anchor``.  ``fresh`` is left pinned."""
        if anchor is self.head:
            raise ValueError("cannot insert before the head sentinel")
        fresh.lockword = LOCK_FREE
        fresh.refword = _INSERTING
        w = current_waiter()
        prv = _lock_with_prev(anchor, w)
        fresh.prev = prv
        fresh.next = anchor
        prv.next = fresh
        anchor.prev = fresh
        fresh._unmask()
        prv.unlock()
        anchor.unlock()
        return fresh

    def insert_at_front(self, fresh):
        return self.insert_after(self.head, fresh)

    def append(self, fresh):
        return self.insert_before(self.tail, fresh)

    append_at_end = append

    # -- removal ---------------------------------------------------------

    delete = staticmethod(node_delete)

    def _remove_end(self, front):
        while True:
            node = self.first() if front else self.last()
            if node is None:
                return None
            if node_delete(node):
                return node
            node.unpin()

    def pop(self):
        """Remove and return the first node (unpinned), or None if empty."""
        return self._remove_end(True)

    def dequeue(self):
        """Remove and return the last node (unpinned), or None if empty."""
        return self._remove_end(False)

    # -- iteration -------------------------------------------------------

    def iter(self, forward=True):
        return Iterator(self, forward)

    def __iter__(self):
        it = Iterator(self, True)
        try:
            node = it.next()
            while node is not None:
                yield node
                node = it.next()
        finally:
            it.destroy()

    def is_empty(self):
        node = self.first()
        if node is None:
            return True
        node.unpin()
        return False

    def check_links(self):
        """Walk the raw links of a quiescent list and return its nodes.

        Raises ``AssertionError`` if forward and backward links disagree.
        """
        nodes = []
        prv = self.head
        cur = prv.next
        while cur is not self.tail:
            assert cur is not None, "broken next link"
            assert cur.prev is prv, f"{cur!r}.prev does not point back"
            nodes.append(cur)
            prv, cur = cur, cur.next
        assert self.tail.prev is prv, "tail.prev does not point at the last node"
        return nodes


class Iterator:
    """Cursor over an ``AdList`` holding a pin on its current node."""

    __slots__ = ("list", "forward", "current", "done")

    def __init__(self, lst, forward=True):
        self.list = lst
        self.forward = forward
        self.current = None
        self.done = False

    def next(self):
        """Advance and return the new current node, or None past the end."""
        if self.done:
            return None
        cur = self.current
        lst = self.list
        if self.forward:
            nxt = lst.next(cur if cur is not None else lst.head)
        else:
            nxt = lst.prev(cur if cur is not None else lst.tail)
        if cur is not None:
            cur.unpin()
        self.current = nxt
        if nxt is None:
            self.done = True
        return nxt

    def __iter__(self):
        return self

    def __next__(self):
        node = self.next()
        if node is None:
            raise StopIteration
        return node

    def pop(self):
        """Delete the current node and advance; returns the new current node.

        If another thread already owns the delete of the current node it is
        left to that thread and the iterator simply advances.
        """
        cur = self.current
        if cur is None:
            raise LookupError("iterator has no current node")
        status = remove_start(cur)
        if status is RemoveStatus.NOT_REMOVABLE:
            return self.next()
        if status is RemoveStatus.MUST_WAIT:
            remove_waitonpincount(cur)
        lst = self.list
        nxt = lst.next(cur) if self.forward else lst.prev(cur)
        remove_do(cur)
        self.current = nxt
        if nxt is None:
            self.done = True
        return nxt

    def destroy(self):
        cur = self.current
        if cur is not None:
            self.current = None
            cur.unpin()
        self.done = True

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.destroy()


__all__ = [
    "AdList", "Iterator", "LockStateError", "Node", "PinError", "RemoveStatus",
    "node_delete", "node_pin", "node_unpin", "remove_do", "remove_start",
    "remove_waitonpincount",
]
