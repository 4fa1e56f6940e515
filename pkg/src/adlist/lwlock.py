"""Fair 4-byte reader-writer lock with asynchronous acquisition.

The whole lock state is one packed 32-bit word (see ``layout``): a read-bias
bit, a write bit, a 14-bit reader count and the id of the newest queued
waiter.  Queued waiters form a reversed chain through ``Waiter.next``, so a
new waiter joins with a single compare-and-swap and the oldest waiter is the
one whose ``next`` is NULLID.  Unlocking hands the lock directly to the oldest
writer, or to the oldest contiguous run of readers; a woken thread owns the
lock without touching the word again.

``async_lock`` is the enqueue-now, block-later half of ``lock``.  When it
returns False the caller is guaranteed the lock at some point and must call
``wait()`` on its waiter before doing anything else that could queue that
waiter.  This is what lets list code take locks against the canonical order.
"""

import threading

from .layout import (
    LOCK_FREE, LOW_MASK, MAX_READERS, NULLID, RD_BIAS, READER_ONE,
    READER_SHIFT, READERS_MASK, WAITQ_MASK, WAITQ_SHIFT, WLOCKED, decode_lock,
)
from .waiter import current_waiter, default_domain, waitq_size

_HELD = WLOCKED | READERS_MASK
# any word at or above this has an empty waiter queue
_NO_QUEUE = NULLID << WAITQ_SHIFT
_table = default_domain.table


class LockStateError(RuntimeError):
    """Unlock of a free lock, or a counter that would overflow its bits."""


class LWLock:
    __slots__ = ("lockword", "_cas")

    def __init__(self, rd_bias=False):
        self.lockword = LOCK_FREE | (RD_BIAS if rd_bias else 0)
        # stands in for the hardware CAS on ``lockword``
        self._cas = threading.Lock()

    def _cas_lockword(self, old, new):
        with self._cas:
            if self.lockword != old:
                return False
            self.lockword = new
            return True

    def _async_lock(self, w, exclusive):
        assert not w.parked, "waiter reused before its pending grant was waited for"
        cas = self._cas
        while True:
            o = self.lockword
            if exclusive:
                if not o & _HELD:
                    n = o | WLOCKED
                    queued = False
                else:
                    w.app_data = 1
                    w.next = o >> WAITQ_SHIFT
                    n = (o & LOW_MASK) | (w.id << WAITQ_SHIFT)
                    queued = True
            elif not o & WLOCKED and ((o >> WAITQ_SHIFT) == NULLID or o & RD_BIAS):
                if o & READERS_MASK == READERS_MASK:
                    raise LockStateError(f"more than {MAX_READERS} readers")
                n = o + READER_ONE
                queued = False
            else:
                w.app_data = 0
                w.next = o >> WAITQ_SHIFT
                n = (o & LOW_MASK) | (w.id << WAITQ_SHIFT)
                queued = True
            with cas:
                if self.lockword == o:
                    self.lockword = n
                    break
        if queued:
            w.parked = True
            return False
        return True

    def async_lock(self, exclusive=True):
        """Take the lock or join its queue; True means it is held now."""
        return self._async_lock(current_waiter(), exclusive)

    def lock(self, exclusive=True):
        o = self.lockword
        if exclusive:
            fast = not o & _HELD
            n = o | WLOCKED
        else:
            fast = (not o & WLOCKED and (o >= _NO_QUEUE or o & RD_BIAS)
                    and o & READERS_MASK != READERS_MASK)
            n = o + READER_ONE
        if fast:
            with self._cas:
                if self.lockword == o:
                    self.lockword = n
                    return
        w = current_waiter()
        if not self._async_lock(w, exclusive):
            w.wait()

    def trylock(self, exclusive=True):
        """Take the lock only if that needs no queueing."""
        while True:
            o = self.lockword
            if exclusive:
                if o & _HELD:
                    return False
                n = o | WLOCKED
            else:
                if o & WLOCKED or not ((o >> WAITQ_SHIFT) == NULLID or o & RD_BIAS):
                    return False
                if o & READERS_MASK == READERS_MASK:
                    return False
                n = o + READER_ONE
            if self._cas_lockword(o, n):
                return True

    def unlock(self):
        """Release one hold and, if the lock became free, hand it on fairly."""
        cas = self._cas
        while True:
            o = self.lockword
            if o & WLOCKED:
                n = o & ~WLOCKED
            elif o & READERS_MASK:
                n = o - READER_ONE
            else:
                raise LockStateError("unlock of an lwlock that is not held")
            if n & _HELD or n >= _NO_QUEUE:
                with cas:
                    if self.lockword == o:
                        self.lockword = n
                        return
                continue
            pw, granted = _oldest_set_of_waiters(n >> WAITQ_SHIFT)
            if pw is None:
                n |= WAITQ_MASK
            wtw = granted[0]
            if wtw.app_data:
                n |= WLOCKED
            else:
                n += waitq_size(wtw.id) << READER_SHIFT
            with cas:
                if self.lockword == o:
                    self.lockword = n
                    break
        if pw is not None:
            pw.next = NULLID
        for g in granted:
            g.next = NULLID
        for g in granted:
            g.event.signal()

    unlock_fair = unlock

    def state(self):
        """Decoded ``(rd_bias, wlocked, readers, waitq)`` snapshot."""
        return decode_lock(self.lockword)

    def waiters(self):
        """Queued waiter ids, newest first.  Only meaningful while quiescent."""
        out = []
        wid = self.lockword >> WAITQ_SHIFT
        while wid != NULLID:
            out.append(wid)
            wid = _table[wid].next
        return out


def _oldest_set_of_waiters(head):
    """Pick the waiters an unlock should grant.

    Returns ``(pw, granted)``: ``granted`` lists the waiters to wake from the
    newest of them to the oldest (a lone writer, or the longest run of readers
    ending at the oldest waiter) and ``pw`` is the waiter queued just before
    that run, or None when the whole queue is granted.
    """
    chain = []
    wid = head
    while wid != NULLID:
        w = _table[wid]
        chain.append(w)
        wid = w.next
    i = len(chain) - 1
    if not chain[i].app_data:
        while i > 0 and not chain[i - 1].app_data:
            i -= 1
    return (chain[i - 1] if i else None), chain[i:]
