"""Per-thread waiters, the id table that names them, and their events.

Every blocking operation in the package parks the calling thread on its own
waiter.  A thread can only block on one thing at a time, so one waiter per
thread is enough, and queues of blocked threads are chains of 16-bit waiter
ids threaded through ``Waiter.next``.
"""

import threading

from .layout import NULLID

DEFAULT_CAPACITY = 4096


class WaiterDomainExhausted(RuntimeError):
    """Raised when every waiter slot of a domain is in use."""


class Event:
    """One-shot latched signal.

    ``signal`` before ``wait`` is remembered, so the next ``wait`` returns at
    once.  Calls come in ``signal``/``wait`` pairs; a second ``signal`` before
    the matching ``wait`` is a caller bug.
    """

    __slots__ = ("signal_pending", "waiter_waiting", "_mutex", "_gate")

    def __init__(self):
        self.signal_pending = False
        self.waiter_waiting = False
        self._mutex = threading.Lock()
        self._gate = threading.Lock()
        self._gate.acquire()

    def signal(self):
        with self._mutex:
            self.signal_pending = True
            if self.waiter_waiting:
                self.waiter_waiting = False
                self._gate.release()

    def wait(self):
        mutex = self._mutex
        while True:
            with mutex:
                if self.signal_pending:
                    self.signal_pending = False
                    return
                self.waiter_waiting = True
            self._gate.acquire()

    def poll(self):
        """Return whether a signal is pending, without consuming it."""
        return self.signal_pending


class Waiter:
    __slots__ = ("id", "next", "prev", "app_data", "event", "parked", "__weakref__")

    def __init__(self, wid):
        self.id = wid
        self.next = NULLID
        self.prev = NULLID
        self.app_data = 0
        self.event = Event()
        # set while the waiter sits on a queue awaiting its grant
        self.parked = False

    def wait(self):
        self.event.wait()
        self.parked = False

    def __repr__(self):
        return f"<Waiter id={self.id} next={self.next}>"


class _Lease:
    # Lives in thread-local storage; collected when the owning thread exits.
    __slots__ = ("domain", "waiter")

    def __init__(self, domain, waiter):
        self.domain = domain
        self.waiter = waiter

    def __del__(self):
        self.domain.free_waiter(self.waiter)


class WaiterDomain:
    """Fixed-capacity table of waiters addressed by 16-bit ids."""

    def __init__(self, capacity=DEFAULT_CAPACITY):
        if not 0 < capacity < NULLID + 1:
            raise ValueError(f"capacity must be in 1..{NULLID}, got {capacity}")
        self.capacity = capacity
        # slots are created lazily but never replaced, so lookups need no lock
        self.table = [None] * capacity
        self._free = []
        self._next_fresh = 0
        self._mutex = threading.Lock()
        self._tls = threading.local()

    def alloc_waiter(self):
        with self._mutex:
            if self._free:
                w = self._free.pop()
            elif self._next_fresh < self.capacity:
                w = Waiter(self._next_fresh)
                self.table[self._next_fresh] = w
                self._next_fresh += 1
            else:
                raise WaiterDomainExhausted(
                    f"all {self.capacity} waiters are assigned")
        w.next = w.prev = NULLID
        w.app_data = 0
        w.parked = False
        return w

    def free_waiter(self, waiter):
        assert not waiter.parked, "freeing a waiter that is still queued"
        if waiter.event.signal_pending:
            waiter.event = Event()
        with self._mutex:
            self._free.append(waiter)

    def get_waiter(self):
        """Return the calling thread's waiter, assigning one on first use."""
        try:
            return self._tls.lease.waiter
        except AttributeError:
            lease = _Lease(self, self.alloc_waiter())
            self._tls.lease = lease
            return lease.waiter

    def id2waiter(self, wid):
        assert wid != NULLID, "NULLID names no waiter"
        w = self.table[wid]
        assert w is not None, f"waiter id {wid} was never allocated"
        return w

    def in_use(self):
        with self._mutex:
            return self._next_fresh - len(self._free)

    def waitq_size(self, wid):
        """Count the waiters chained through ``next`` from ``wid`` to NULLID."""
        table = self.table
        count = 0
        while wid != NULLID:
            wid = table[wid].next
            count += 1
        return count


default_domain = WaiterDomain()
current_waiter = default_domain.get_waiter
id2waiter = default_domain.id2waiter
waitq_size = default_domain.waitq_size
