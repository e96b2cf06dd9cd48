"""Exact integer max-flow by blocking flows (Dinic)."""

from collections import deque

# capacities and flow values must fit a signed 64-bit word
MAX_CAPACITY = 2**63 - 1


class FlowNetwork:
    """Directed network with integer capacities and paired reverse arcs.

    Arc ``a`` and arc ``a ^ 1`` are each other's reverse.
    """

    def __init__(self, num_nodes, source, sink):
        if not (0 <= source < num_nodes and 0 <= sink < num_nodes) or source == sink:
            raise ValueError("source and sink must be distinct nodes of the network")
        self.num_nodes = num_nodes
        self.source = source
        self.sink = sink
        self.head = []
        self.capacity = []
        self.adj = [[] for _ in range(num_nodes)]

    def add_arc(self, u, v, cap, rev_cap=0):
        if cap < 0 or rev_cap < 0:
            raise ValueError("capacities must be nonnegative")
        if cap > MAX_CAPACITY or rev_cap > MAX_CAPACITY:
            raise OverflowError(f"capacity {max(cap, rev_cap)} does not fit in 63 bits")
        a = len(self.head)
        self.head += [v, u]
        self.capacity += [int(cap), int(rev_cap)]
        self.adj[u].append(a)
        self.adj[v].append(a + 1)
        return a

    def add_edge(self, u, v, cap):
        """Undirected edge: capacity ``cap`` in both directions."""
        return self.add_arc(u, v, cap, cap)

    @property
    def num_arcs(self):
        return len(self.head)


class FlowResult:
    __slots__ = ("value", "source_side", "flow")

    def __init__(self, value, source_side, flow):
        self.value = value
        self.source_side = source_side
        self.flow = flow

    def __repr__(self):
        return f"FlowResult(value={self.value}, |source_side|={len(self.source_side)})"


def _levels(net, residual, s):
    level = [-1] * net.num_nodes
    level[s] = 0
    q = deque([s])
    head, adj = net.head, net.adj
    while q:
        u = q.popleft()
        lu = level[u] + 1
        for a in adj[u]:
            v = head[a]
            if residual[a] > 0 and level[v] < 0:
                level[v] = lu
                q.append(v)
    return level


def _blocking_flow(net, residual, level):
    s, t = net.source, net.sink
    head, adj = net.head, net.adj
    it = [0] * net.num_nodes
    total = 0
    stack = []
    u = s
    while True:
        if u == t:
            f = min(residual[a] for a in stack)
            cut_at = None
            for k, a in enumerate(stack):
                residual[a] -= f
                residual[a ^ 1] += f
                if cut_at is None and residual[a] == 0:
                    cut_at = k
            total += f
            del stack[cut_at:]
            u = head[stack[-1]] if stack else s
            continue
        arcs = adj[u]
        i = it[u]
        lu = level[u] + 1
        while i < len(arcs):
            a = arcs[i]
            if residual[a] > 0 and level[head[a]] == lu:
                break
            i += 1
        it[u] = i
        if i < len(arcs):
            a = arcs[i]
            stack.append(a)
            u = head[a]
        else:
            if u == s:
                return total
            level[u] = -1
            a = stack.pop()
            u = head[a ^ 1]
            it[u] += 1


def max_flow(net):
    """Maximum s-t flow and the minimal source side of a minimum cut.

    The source side is the set reachable from the source in the final
    residual network. The flow value is checked against that cut's
    capacity before returning.
    """
    residual = list(net.capacity)
    total = 0
    while True:
        level = _levels(net, residual, net.source)
        if level[net.sink] < 0:
            break
        total += _blocking_flow(net, residual, level)
        if total > MAX_CAPACITY:
            raise OverflowError("flow value does not fit in 63 bits")
    side = {v for v, lv in enumerate(level) if lv >= 0}
    cut = 0
    for u in side:
        for a in net.adj[u]:
            if net.head[a] not in side:
                cut += net.capacity[a]
    if cut != total:
        raise RuntimeError(f"max-flow certificate failed: flow {total} != cut {cut}")
    flow = [net.capacity[a] - residual[a] for a in range(net.num_arcs)]
    return FlowResult(total, side, flow)
