"""Uniform-access and LRU workloads over the three list implementations.

Each run builds its list and elements, releases ``threads`` workers through a
barrier, and times from the release until the last worker finishes.
"""

import collections
import dataclasses
import math
import random
import threading
import time

from ..core import AdList, Node, node_delete
from ..lru import BaselineList, ExtendedList, Link
from .config import SWEEP_DUMMIES, ConfigError, WorkloadConfig
from .results import BenchResult


@dataclasses.dataclass
class RunStats:
    """Outcome of one timed run plus the end-of-run consistency checks."""

    seconds: float
    final_length: int
    outstanding_pins: int = 0
    poison_hits: int = 0
    stacked: int = 0
    max_evictors: int = 0


class InvariantViolation(AssertionError):
    pass


def _run_threads(n, target):
    """Run ``target(i)`` on ``n`` threads started together; return wall seconds."""
    barrier = threading.Barrier(n + 1)
    errors = []

    def body(i):
        barrier.wait()
        try:
            target(i)
        except BaseException as exc:  # re-raised in the coordinator
            errors.append(exc)

    threads = [threading.Thread(target=body, args=(i,), daemon=True) for i in range(n)]
    for t in threads:
        t.start()
    barrier.wait()
    start = time.perf_counter()
    for t in threads:
        t.join()
    elapsed = time.perf_counter() - start
    if errors:
        raise errors[0]
    return elapsed


def _thread_rng(seed, tid):
    return random.Random(seed * 1_000_003 + tid)


# -- uniform workload ---------------------------------------------------------

class UniformElement(Node):
    __slots__ = ("owner", "serial")

    def __init__(self, owner, serial):
        Node.__init__(self)
        self.owner = owner
        self.serial = serial


class UniformLink(Link):
    __slots__ = ("owner", "serial")

    def __init__(self, owner, serial):
        Link.__init__(self)
        self.owner = owner
        self.serial = serial


class _PoisonLog:
    """Counts attribute reads of deleted nodes before their owner reuses them."""

    def __init__(self):
        self.hits = []

    def make_class(self, base):
        hits = self.hits

        class Poisoned(base):
            __slots__ = ()

            def __getattribute__(self, name):
                hits.append(name)
                return object.__getattribute__(self, name)

        return Poisoned


def _uniform_gaps(rng, cfg):
    # nodes to step over before each insert; about one batch of every other
    # thread lies between two of ours
    return [rng.randint(0, cfg.threads) for _ in range(cfg.batch_size)]


def _uniform_adlist(cfg, lst, tid, poison_cls, base_cls):
    rng = _thread_rng(cfg.seed, tid)
    batch = [UniformElement(tid, i) for i in range(cfg.batch_size)]
    for _ in range(cfg.batches):
        if poison_cls is not None:
            for e in batch:
                object.__setattr__(e, "__class__", base_cls)
        # insert pass: scatter the batch along one forward walk
        it = lst.iter()
        gaps = _uniform_gaps(rng, cfg)
        for e, gap in zip(batch, gaps):
            for _ in range(gap):
                if it.next() is None:
                    break
            if it.done:
                lst.append(e)
            else:
                lst.insert_after(it.current or lst.head, e)
            e.unpin()
        it.destroy()
        # remove pass: delete our own nodes as the walk meets them
        left = len(batch)
        while left:
            it = lst.iter()
            node = it.next()
            while node is not None:
                if node.owner == tid:
                    victim = node
                    node = it.pop()
                    left -= 1
                    if poison_cls is not None:
                        object.__setattr__(victim, "__class__", poison_cls)
                    if not left:
                        break
                else:
                    node = it.next()
            it.destroy()


def _uniform_dlist(cfg, lst, tid):
    rng = _thread_rng(cfg.seed, tid)
    batch = [UniformLink(tid, i) for i in range(cfg.batch_size)]
    tail = lst.tail
    for _ in range(cfg.batches):
        gaps = _uniform_gaps(rng, cfg)
        with lst.lock:
            cur = lst.head
            for e, gap in zip(batch, gaps):
                for _ in range(gap):
                    if cur.next is tail:
                        break
                    cur = cur.next
                lst._link(cur, e)
        left = len(batch)
        with lst.lock:
            cur = lst.head.next
            while left:
                nxt = cur.next
                if cur.owner == tid:
                    lst._unlink(cur)
                    left -= 1
                cur = nxt


def uniform_once(cfg, poison=False):
    """One timed uniform run.  ``poison`` traps reads of deleted nodes (adlist)."""
    if cfg.impl == "dlist":
        lst = BaselineList()
        secs = _run_threads(cfg.threads, lambda tid: _uniform_dlist(cfg, lst, tid))
        return RunStats(secs, len(lst))
    lst = AdList()
    log = _PoisonLog() if poison else None
    poison_cls = log.make_class(UniformElement) if poison else None
    secs = _run_threads(cfg.threads, lambda tid: _uniform_adlist(
        cfg, lst, tid, poison_cls, UniformElement))
    nodes = lst.check_links()
    # sentinels keep one permanent pin each
    pins = lst.head.refcount()[1] + lst.tail.refcount()[1] - 2
    pins += sum(n.refcount()[1] for n in nodes)
    return RunStats(secs, len(nodes), outstanding_pins=pins,
                    poison_hits=len(log.hits) if log else 0)


def run_uniform(cfg):
    cfg.validate()
    if cfg.workload != "uniform":
        raise ConfigError("run_uniform needs workload 'uniform'")
    result = BenchResult(cfg.workload, cfg.impl, cfg.threads, 0)
    for _ in range(cfg.repeats):
        run = uniform_once(cfg)
        if run.final_length or run.outstanding_pins:
            raise InvariantViolation(
                f"uniform run left {run.final_length} nodes, {run.outstanding_pins} pins")
        result.seconds.append(run.seconds)
    return result


# -- LRU workload -------------------------------------------------------------

class LruElement(Node):
    __slots__ = ("index", "present")

    def __init__(self, index):
        Node.__init__(self)
        self.index = index
        self.present = False


class LruLink(Link):
    __slots__ = ("index", "present")

    def __init__(self, index):
        Link.__init__(self)
        self.index = index
        self.present = False


def busy_wait(seconds):
    """Spin for ``seconds`` of wall time; models CPU-bound eviction work."""
    if seconds <= 0:
        return
    deadline = time.perf_counter() + seconds
    while time.perf_counter() < deadline:
        pass


def op_schedule(picks, inserts):
    """Yield True for inserts, False for picks, spreading inserts evenly."""
    total = picks + inserts
    for i in range(total):
        yield (i + 1) * inserts // total > i * inserts // total


def thread_ops(cfg, tid):
    """Thread ``tid``'s LRU operations: None for an insert, else an element index.

    Depends only on ``cfg`` and ``tid``, so a seed fixes every sequence.
    """
    rng = _thread_rng(cfg.seed, tid)
    n = cfg.element_count
    for is_insert in op_schedule(cfg.picks_per_thread, cfg.inserts_per_thread):
        yield None if is_insert else rng.randrange(n)


class _LruRun:
    def __init__(self, cfg):
        self.cfg = cfg
        impl = cfg.impl
        n = cfg.element_count
        if impl == "dlist":
            self.lst = BaselineList()
            self.elements = [LruLink(i) for i in range(n)]
        elif impl == "adlist":
            self.lst = AdList()
            self.elements = [LruElement(i) for i in range(n)]
        else:
            self.lst = ExtendedList(cfg.dummy_count, seed=cfg.seed,
                                    rebalance_every=cfg.rebalance_every)
            self.elements = [LruElement(i) for i in range(n)]
        # deque append/pop are atomic: a per-thread stack with no lock
        per = cfg.available_per_thread
        self.stacks = [collections.deque(self.elements[t * per:(t + 1) * per])
                       for t in range(cfg.threads)]
        self.evict_gate = threading.Lock()
        self.evictors = 0
        self.max_evictors = 0
        self.round_robin = 0
        self.cost = cfg.evict_cost_us * 1e-6

    # list operations per implementation

    def insert(self, e):
        impl = self.cfg.impl
        if impl == "dlist":
            self.lst.insert_at_front(e)
        elif impl == "adlist":
            self.lst.insert_at_front(e).unpin()
        else:
            self.lst.insert_at_head(e).unpin()
        e.present = True

    def reprioritize(self, e):
        if not e.present:
            return
        if self.cfg.impl == "dlist":
            self.lst.move_to_head(e)
            return
        if not e.pin():
            return  # being evicted or moved by someone else
        if not node_delete(e):
            e.unpin()
            return
        if self.cfg.impl == "adlist":
            self.lst.insert_at_front(e).unpin()
        else:
            self.lst.insert_at_head(e).unpin()

    def _evict(self, tid):
        cfg = self.cfg
        stacks = self.stacks
        nthreads = len(stacks)
        self.evictors += 1
        self.max_evictors = max(self.max_evictors, self.evictors)
        try:
            if cfg.impl == "dlist":
                def on_evict(node):
                    busy_wait(self.cost)
                    node.present = False
                victims = self.lst.evict_tail(cfg.evict_batch_k, on_evict)
            else:
                victims = []
                for _ in range(cfg.evict_batch_k):
                    node = self.lst.dequeue()
                    if node is None:
                        break
                    busy_wait(self.cost)
                    node.present = False
                    victims.append(node)
            for node in victims:
                stacks[self.round_robin].append(node)
                self.round_robin = (self.round_robin + 1) % nthreads
            if not victims and not stacks[tid]:
                # list drained into other threads' stacks: take one back
                for other in stacks:
                    try:
                        stacks[tid].append(other.pop())
                        break
                    except IndexError:
                        continue
        finally:
            self.evictors -= 1

    def take_available(self, tid):
        stack = self.stacks[tid]
        gate = self.evict_gate
        while True:
            try:
                return stack.pop()
            except IndexError:
                pass
            if gate.acquire(blocking=False):
                try:
                    self._evict(tid)
                finally:
                    gate.release()
            else:
                # wait for the running reclaimer, then look again
                gate.acquire()
                gate.release()

    def worker(self, tid):
        elements = self.elements
        insert, reprioritize, take = self.insert, self.reprioritize, self.take_available
        for op in thread_ops(self.cfg, tid):
            if op is None:
                insert(take(tid))
            else:
                reprioritize(elements[op])

    def listed(self):
        if self.cfg.impl == "dlist":
            return list(self.lst)
        if self.cfg.impl == "adlist":
            return self.lst.check_links()
        return self.lst.client_nodes()


def lru_once(cfg):
    run = _LruRun(cfg)
    secs = _run_threads(cfg.threads, run.worker)
    listed = run.listed()
    stacked = sum(len(s) for s in run.stacks)
    pins = 0 if cfg.impl == "dlist" else sum(n.refcount()[1] for n in listed)
    return RunStats(secs, len(listed), outstanding_pins=pins, stacked=stacked,
                    max_evictors=run.max_evictors)


def run_lru(cfg):
    cfg.validate()
    if not cfg.is_lru:
        raise ConfigError("run_lru needs an LRU workload")
    dummies = cfg.dummy_count if cfg.impl == "adlist-dummy" else 0
    result = BenchResult(cfg.workload, cfg.impl, cfg.threads, dummies)
    pool = cfg.element_count
    for _ in range(cfg.repeats):
        run = lru_once(cfg)
        if run.final_length + run.stacked != pool:
            raise InvariantViolation(
                f"{run.final_length} listed + {run.stacked} stacked != {pool} elements")
        if run.max_evictors > 1 or run.outstanding_pins:
            raise InvariantViolation(
                f"{run.max_evictors} concurrent evictors, {run.outstanding_pins} pins left")
        result.seconds.append(run.seconds)
    return result


# -- dummy-node sweep ---------------------------------------------------------

@dataclasses.dataclass
class SweepRow:
    dummy_count: int
    mean: float
    # t / log2(n) with t the single-dummy mean (undefined at n = 1)
    t_over_log: float
    # c / log2(n) with c fitted by least squares over n >= 2
    fitted: float


def fit_inverse_log(counts, means):
    """Least-squares ``c`` for ``mean ~ c / log2(n)`` over the counts n >= 2."""
    xs = [1.0 / math.log2(n) for n in counts if n >= 2]
    ys = [m for n, m in zip(counts, means) if n >= 2]
    return sum(x * y for x, y in zip(xs, ys)) / sum(x * x for x in xs)


def sweep_table(results):
    """Rows of measured means alongside the t/log(n) curves."""
    results = sorted(results, key=lambda r: r.dummy_count)
    counts = [r.dummy_count for r in results]
    means = [r.mean for r in results]
    t = means[counts.index(1)] if 1 in counts else math.nan
    c = fit_inverse_log(counts, means)
    rows = []
    for n, m in zip(counts, means):
        curve = math.inf if n == 1 else t / math.log2(n)
        fitted = math.inf if n == 1 else c / math.log2(n)
        rows.append(SweepRow(n, m, curve, fitted))
    return rows


def run_dummy_sweep(cfg, dummy_counts=SWEEP_DUMMIES):
    """Run the reprioritize mix once per dummy count; returns the results."""
    cfg.validate()
    if cfg.impl != "adlist-dummy":
        raise ConfigError("run_dummy_sweep needs impl 'adlist-dummy'")
    out = []
    for n in dummy_counts:
        sub = dataclasses.replace(cfg, dummy_count=n)
        out.append(run_lru(sub))
    return out


def run(cfg):
    """Dispatch on ``cfg.workload``; returns a list of ``BenchResult``."""
    if cfg.workload == "uniform":
        return [run_uniform(cfg)]
    if cfg.workload == "dummy-sweep":
        return run_dummy_sweep(cfg)
    return [run_lru(cfg)]


__all__ = [
    "InvariantViolation", "RunStats", "SweepRow", "WorkloadConfig", "busy_wait",
    "fit_inverse_log", "lru_once", "op_schedule", "run", "run_dummy_sweep",
    "run_lru", "run_uniform", "sweep_table", "thread_ops", "uniform_once",
]
