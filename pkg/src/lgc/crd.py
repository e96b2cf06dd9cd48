"""Capacity Releasing Diffusion.

Mass starts at the seeds and is spread by a bounded unit-flow
push-relabel process: every vertex can hold mass up to its degree, edges
carry at most ``U`` per round and labels stop at ``h``. Between rounds the
held mass is capped at the degree and then doubled. Mass is counted in
exact integer units so conservation checks are exact.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

from lgc.diffusion import SparseEmbedding
from lgc.flow import _int_weights
from lgc.graph import DomainError, sweep_cut, validate_seeds

# mass units must fit a signed 64-bit word
_MAX_UNITS = 2**63 - 1


@dataclass(frozen=True)
class CrdParams:
    U: int = 3
    h: int = 10
    w: int = 2
    initial_mass_multiplier: float = 2.0

    def __post_init__(self):
        for name in ("U", "h", "w"):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise ValueError(f"{name} must be a positive integer, got {val}")
        if not self.initial_mass_multiplier > 0:
            raise ValueError("initial_mass_multiplier must be positive")


@dataclass
class CrdState:
    mass: dict
    labels: dict
    rounds: int = 0
    pushes: int = 0
    relabels: int = 0
    unit: int = 1
    mass_log: list = field(default_factory=list)
    capacity: dict = field(default_factory=dict)

    def absorbed(self, v):
        """Mass held at ``v`` up to its degree, in graph units."""
        return min(self.mass.get(v, 0), self.capacity.get(v, 0)) / self.unit

    def embedding(self):
        return SparseEmbedding((v, m / self.unit) for v, m in self.mass.items())


def _unit_flow(rows, mass, cap_of, params, state, check):
    """Lowest-label-first push-relabel on the current mass; mutates ``mass``."""
    h, U = params.h, params.U
    labels = {}
    flow = {}
    cursor = {}
    buckets = [deque() for _ in range(h)]
    queued = set()

    def excess(v):
        return mass.get(v, 0) - cap_of(v)

    def enqueue(v):
        lv = labels.get(v, 0)
        if v not in queued and lv < h and excess(v) > 0:
            buckets[lv].append(v)
            queued.add(v)

    for v in sorted(mass):
        enqueue(v)
    total = sum(mass.values()) if check else 0

    level = 0
    while True:
        while level < h and not buckets[level]:
            level += 1
        if level >= h:
            break
        v = buckets[level].popleft()
        queued.discard(v)
        nbrs, ws = rows(v)
        lv = labels.get(v, 0)
        i = cursor.get(v, 0)
        while excess(v) > 0 and lv < h:
            if i == len(nbrs):
                lv += 1
                labels[v] = lv
                state.relabels += 1
                i = 0
                continue
            u, w = nbrs[i], ws[i]
            lu = labels.get(u, 0)
            if lv == lu + 1:
                # capacity is released as the tail climbs, up to U per unit of weight
                room = min(lv, U) * w * state.unit - flow.get((v, u), 0)
                head_room = 2 * cap_of(u) - mass.get(u, 0)
                amount = min(excess(v), room, head_room)
                if amount > 0:
                    mass[v] -= amount
                    mass[u] = mass.get(u, 0) + amount
                    flow[(v, u)] = flow.get((v, u), 0) + amount
                    flow[(u, v)] = flow.get((u, v), 0) - amount
                    state.pushes += 1
                    if check:
                        assert sum(mass.values()) == total, "mass not conserved by push"
                    enqueue(u)
                    if amount == room or amount == head_room:
                        i += 1
                    continue
            i += 1
        cursor[v] = i
        enqueue(v)
        level = 0
    if check:
        assert sum(mass.values()) == total, "mass not conserved by inner round"
    return labels


def crd_diffuse(g, seeds, params=None, check=False):
    """Run the diffusion and return its final state (mass, labels, counters)."""
    params = params or CrdParams()
    seeds = validate_seeds(g, seeds)
    iw = _int_weights(g)
    mult = Fraction(repr(float(params.initial_mass_multiplier)))
    unit = mult.denominator
    rows_cache = {}

    def rows(v):
        r = rows_cache.get(v)
        if r is None:
            r = iw.row(v)
            rows_cache[v] = r
        return r

    def cap_of(v):
        return sum(rows(v)[1]) * unit

    mass = {}
    for s in seeds.tolist():
        mass[s] = mult.numerator * (cap_of(s) // unit)
    state = CrdState(mass, {}, unit=unit)
    for rnd in range(params.w):
        if rnd:
            for v in list(mass):
                mass[v] = 2 * min(mass[v], cap_of(v))
        if max(mass.values()) > _MAX_UNITS // 4:
            raise OverflowError("CRD mass no longer fits in 63 bits; lower w or the multiplier")
        state.labels = _unit_flow(rows, mass, cap_of, params, state, check)
        state.rounds += 1
        state.mass_log.append(sum(mass.values()))
    state.mass = {v: m for v, m in mass.items() if m > 0}
    state.capacity = {v: cap_of(v) for v in state.mass}
    return state


def crd_cluster(g, seeds, params=None):
    """Cluster found by sweeping the settled CRD mass (normalised by degree)."""
    state = crd_diffuse(g, seeds, params)
    emb = state.embedding()
    if not emb:
        raise DomainError("empty embedding")
    return sweep_cut(g, emb)
