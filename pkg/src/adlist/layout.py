"""Packed word layouts shared by the lock and the node refcount.

Both synchronization words are 32-bit integers.  Bits are numbered from the
least significant end in declaration order, which is also how the C compiler
lays out the ``ctypes`` bitfield structures below; the structures exist so the
sizes can be checked and words can be decoded for debugging.
"""

import ctypes

NULLID = 0xFFFF

WAITQ_SHIFT = 16
WAITQ_MASK = 0xFFFF << WAITQ_SHIFT
LOW_MASK = 0xFFFF

# lwlock word: rd_bias:1 | wlocked:1 | readers:14 | waitq:16
RD_BIAS = 1 << 0
WLOCKED = 1 << 1
READER_SHIFT = 2
READER_ONE = 1 << READER_SHIFT
MAX_READERS = (1 << 14) - 1
READERS_MASK = MAX_READERS << READER_SHIFT
LOCK_FREE = NULLID << WAITQ_SHIFT

# refcount word: mask:1 | pincount:15 | waitq:16
MASK = 1 << 0
PIN_SHIFT = 1
PIN_ONE = 1 << PIN_SHIFT
MAX_PINS = (1 << 15) - 1
PINS_MASK = MAX_PINS << PIN_SHIFT


class LockWord(ctypes.Structure):
    _fields_ = [
        ("rd_bias", ctypes.c_uint32, 1),
        ("wlocked", ctypes.c_uint32, 1),
        ("readers", ctypes.c_uint32, 14),
        ("waitq", ctypes.c_uint32, 16),
    ]


class RefcountWord(ctypes.Structure):
    _fields_ = [
        ("mask", ctypes.c_uint32, 1),
        ("pincount", ctypes.c_uint32, 15),
        ("waitq", ctypes.c_uint32, 16),
    ]


class NodeHeader(ctypes.Structure):
    pass


NodeHeader._fields_ = [
    ("next", ctypes.POINTER(NodeHeader)),
    ("prev", ctypes.POINTER(NodeHeader)),
    ("lock", LockWord),
    ("refcnt", RefcountWord),
]


def decode_lock(word):
    """Return ``(rd_bias, wlocked, readers, waitq)`` for a lock word."""
    return (word & RD_BIAS, (word & WLOCKED) >> 1,
            (word & READERS_MASK) >> READER_SHIFT, word >> WAITQ_SHIFT)


def decode_refcount(word):
    """Return ``(mask, pincount, waitq)`` for a refcount word."""
    return word & MASK, (word & PINS_MASK) >> PIN_SHIFT, word >> WAITQ_SHIFT


def encode_lock(rd_bias=0, wlocked=0, readers=0, waitq=NULLID):
    return (rd_bias | (wlocked << 1) | (readers << READER_SHIFT)
            | (waitq << WAITQ_SHIFT))


def encode_refcount(mask=0, pincount=0, waitq=NULLID):
    return mask | (pincount << PIN_SHIFT) | (waitq << WAITQ_SHIFT)


def check_layout():
    """Raise ``AssertionError`` unless the packed sizes are 4, 4 and 24 bytes."""
    assert ctypes.sizeof(LockWord) == 4, ctypes.sizeof(LockWord)
    assert ctypes.sizeof(RefcountWord) == 4, ctypes.sizeof(RefcountWord)
    assert ctypes.sizeof(NodeHeader) == 24, ctypes.sizeof(NodeHeader)
    sync = ctypes.sizeof(NodeHeader) - 2 * ctypes.sizeof(ctypes.c_void_p)
    assert sync == 8, sync


check_layout()
