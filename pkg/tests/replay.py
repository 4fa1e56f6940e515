"""Replay a random single-threaded program on each list implementation.

Every replay returns the list of observable outputs: returned keys, ``None``
for empty removals, and full forward/backward walks.
"""

from adlist import AdList, BaselineList, ExtendedList, Link, Node, node_delete

from oracles import RefList, pick


class KeyNode(Node):
    __slots__ = ("key",)

    def __init__(self, key):
        Node.__init__(self)
        self.key = key


class KeyLink(Link):
    __slots__ = ("key",)

    def __init__(self, key):
        Link.__init__(self)
        self.key = key


def replay_ref(program):
    ref = RefList()
    out = []
    fresh = 0
    for op, frac in program:
        items = ref.items
        if op in ("front", "append"):
            fresh += 1
            getattr(ref, "insert_at_front" if op == "front" else "append")(fresh)
            out.append(fresh)
        elif op in ("after", "before"):
            if not items:
                out.append("skip")
                continue
            fresh += 1
            anchor = pick(items, frac)
            getattr(ref, "insert_" + op)(anchor, fresh)
            out.append((anchor, fresh))
        elif op == "delete":
            if not items:
                out.append("skip")
                continue
            victim = pick(items, frac)
            ref.delete(victim)
            out.append(("del", victim))
        elif op == "pop":
            out.append(ref.pop())
        elif op == "dequeue":
            out.append(ref.dequeue())
        elif op == "forward":
            out.append(tuple(items))
        elif op == "backward":
            out.append(tuple(reversed(items)))
        elif op == "first":
            out.append(items[0] if items else None)
        elif op == "last":
            out.append(items[-1] if items else None)
    return out


def _adlist_walk(lst, forward):
    keys = []
    with lst.iter(forward) as it:
        node = it.next()
        while node is not None:
            keys.append(node.key)
            node = it.next()
    return keys


def replay_adlist(program, lst=None):
    lst = AdList() if lst is None else lst
    nodes = {}
    out = []
    fresh = 0
    for op, frac in program:
        if op in ("front", "append"):
            fresh += 1
            node = nodes[fresh] = KeyNode(fresh)
            (lst.insert_at_front if op == "front" else lst.append)(node).unpin()
            out.append(fresh)
        elif op in ("after", "before", "delete"):
            items = _adlist_walk(lst, True)
            if not items:
                out.append("skip")
                continue
            anchor = nodes[pick(items, frac)]
            assert anchor.pin()
            if op == "delete":
                assert node_delete(anchor)
                del nodes[anchor.key]
                out.append(("del", anchor.key))
                continue
            fresh += 1
            node = nodes[fresh] = KeyNode(fresh)
            getattr(lst, "insert_" + op)(anchor, node).unpin()
            anchor.unpin()
            out.append((anchor.key, fresh))
        elif op in ("pop", "dequeue"):
            node = getattr(lst, op)()
            if node is not None:
                del nodes[node.key]
            out.append(None if node is None else node.key)
        elif op in ("forward", "backward"):
            out.append(tuple(_adlist_walk(lst, op == "forward")))
        elif op in ("first", "last"):
            node = getattr(lst, op)()
            if node is not None:
                node.unpin()
            out.append(None if node is None else node.key)
    return out


def replay_extended(program, dummy_count=4, rebalance_every=3, seed=1):
    lst = ExtendedList(dummy_count, seed=seed, rebalance_every=rebalance_every)
    return replay_adlist(program, lst)


def replay_baseline(program):
    lst = BaselineList()
    nodes = {}
    out = []
    fresh = 0
    for op, frac in program:
        if op in ("front", "append"):
            fresh += 1
            node = nodes[fresh] = KeyLink(fresh)
            (lst.insert_at_front if op == "front" else lst.append)(node)
            out.append(fresh)
        elif op in ("after", "before", "delete"):
            items = [n.key for n in lst]
            if not items:
                out.append("skip")
                continue
            anchor = nodes[pick(items, frac)]
            if op == "delete":
                assert lst.remove(anchor)
                del nodes[anchor.key]
                out.append(("del", anchor.key))
                continue
            fresh += 1
            node = nodes[fresh] = KeyLink(fresh)
            getattr(lst, "insert_" + op)(anchor, node)
            out.append((anchor.key, fresh))
        elif op in ("pop", "dequeue"):
            node = getattr(lst, op)()
            if node is not None:
                del nodes[node.key]
            out.append(None if node is None else node.key)
        elif op == "forward":
            out.append(tuple(n.key for n in lst))
        elif op == "backward":
            out.append(tuple(reversed([n.key for n in lst])))
        elif op in ("first", "last"):
            node = getattr(lst, op)()
            out.append(None if node is None else node.key)
    return out
