"""Concurrent doubly-linked list built on compact per-node locks.

``AdList`` lets threads work on disjoint parts of a list at the same time;
``ExtendedList`` adds hidden dummy nodes that spread head inserts out.
"""

from .core import (
    AdList, Iterator, Node, PinError, RemoveStatus, node_delete, node_pin,
    node_unpin, remove_do, remove_start, remove_waitonpincount,
)
from .layout import NULLID, check_layout
from .lru import BaselineList, ExtendedList, Link
from .lwlock import LockStateError, LWLock
from .waiter import (
    Event, Waiter, WaiterDomain, WaiterDomainExhausted, current_waiter, id2waiter,
    waitq_size,
)

__all__ = [
    "AdList", "BaselineList", "Event", "ExtendedList", "Iterator", "LWLock",
    "Link", "LockStateError", "NULLID", "Node", "PinError", "RemoveStatus",
    "Waiter", "WaiterDomain", "WaiterDomainExhausted", "check_layout",
    "current_waiter", "id2waiter", "node_delete", "node_pin", "node_unpin",
    "remove_do", "remove_start", "remove_waitonpincount", "waitq_size",
]
