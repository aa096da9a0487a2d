"""Exact symbolic engine for Turing dynamical systems on M^Z x S.

The tape alphabet is M = GF(2)^N, the state space is S = GF(2)^2, and the
acting group is (Aut(M) wr Z) x Aut(S). Symbols and states are identified
with their coordinate vectors read as integers, so symbol index ``i`` *is*
the vector ``i``. Subsets of the alphabet are bitmasks over symbol indices.

Shift convention: ``(t.m)_i = m_{i+1}``, which moves the head one cell to the
right, i.e. ``t.(x_ y, s) = (x y_, s)``.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence

from . import gf2

PARTITION_WINDOW = (-1, 0, 1)


# --------------------------------------------------------------------------
# alphabet and states


@dataclass(frozen=True)
class Alphabet:
    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("alphabet needs at least one bit")

    @property
    def size(self) -> int:
        return 1 << self.bits

    @property
    def full(self) -> int:
        return (1 << self.size) - 1

    @property
    def max_digit(self) -> int:
        """Largest digit value, ``2**N - 2``."""
        return self.size - 2

    @cached_property
    def names(self) -> tuple[str, ...]:
        return ("-",) + tuple(str(k) for k in range(self.size - 1))

    BLANK = 0

    def digit(self, k: int) -> int:
        """Symbol index of digit ``k`` (0 <= k <= D)."""
        if not 0 <= k <= self.max_digit:
            raise ValueError(f"digit {k} outside 0..{self.max_digit}")
        return k + 1

    def index(self, name: str) -> int:
        return self.names.index(name)

    def vector(self, symbol: int) -> int:
        return symbol


@dataclass(frozen=True)
class StateSpace:
    names: tuple[str, ...] = ("void", "inc-last-digit", "carry", "zero-prev-digits")
    full: int = 0b1111

    def index(self, name: str) -> int:
        return self.names.index(name)


STATES = StateSpace()
VOID, INC, CARRY, ZPREV = range(4)


def popcount(x: int) -> int:
    return bin(x).count("1")


def symbols_of(mask: int) -> Iterator[int]:
    s = 0
    while mask:
        if mask & 1:
            yield s
        mask >>= 1
        s += 1


# --------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class Configuration:
    """A point of M^Z x S with finitely many non-blank tape cells."""

    tape: tuple[tuple[int, int], ...]
    state: int

    @classmethod
    def make(cls, tape: Mapping[int, int], state: int) -> "Configuration":
        return cls(tuple(sorted((p, s) for p, s in tape.items() if s)), state)

    @classmethod
    def from_symbols(cls, symbols: Sequence[int], head: int, state: int,
                     start: int = 0) -> "Configuration":
        """Tape ``symbols`` laid out from position ``start - head``."""
        return cls.make({start - head + i: s for i, s in enumerate(symbols)}, state)

    def symbol(self, pos: int) -> int:
        for p, s in self.tape:
            if p == pos:
                return s
        return 0

    @property
    def tape_map(self) -> dict[int, int]:
        return dict(self.tape)

    def cell(self) -> tuple[int, int, int, int]:
        t = self.tape_map
        return (t.get(-1, 0), t.get(0, 0), t.get(1, 0), self.state)

    def render(self, alphabet: Alphabet, lo: int | None = None,
               hi: int | None = None) -> str:
        positions = [p for p, _ in self.tape] + [0]
        lo = min(positions) - 1 if lo is None else lo
        hi = max(positions) + 1 if hi is None else hi
        t = self.tape_map
        cells = []
        for p in range(lo, hi + 1):
            name = alphabet.names[t.get(p, 0)]
            cells.append(f"[{name}]" if p == 0 else name)
        return " ".join(cells) + f", {STATES.names[self.state]}"

    def to_json(self, alphabet: Alphabet) -> dict:
        return {
            "tape": [{"offset": p, "symbol": alphabet.names[s]} for p, s in self.tape],
            "state": STATES.names[self.state],
        }

    @classmethod
    def from_json(cls, alphabet: Alphabet, data: Mapping) -> "Configuration":
        tape = {int(c["offset"]): alphabet.index(c["symbol"]) for c in data["tape"]}
        return cls.make(tape, STATES.index(data["state"]))


# --------------------------------------------------------------------------
# cylinders


@dataclass(frozen=True)
class Cylinder:
    """Cylinder set fixed by finitely many symbol constraints and a state subset.

    ``window`` holds ``(offset, mask)`` pairs sorted by offset, with no mask
    equal to the full alphabet. ``states`` is a nonempty 4-bit mask.
    """

    bits: int
    window: tuple[tuple[int, int], ...] = ()
    states: int = 0b1111

    @classmethod
    def make(cls, bits: int, window: Mapping[int, int] | None = None,
             states: int = 0b1111) -> "Cylinder":
        full = (1 << (1 << bits)) - 1
        window = window or {}
        items = []
        for offset, mask in sorted(window.items()):
            mask &= full
            if mask == 0:
                raise ValueError(f"empty symbol constraint at offset {offset}")
            if mask != full:
                items.append((offset, mask))
        if states & 0b1111 == 0:
            raise ValueError("empty state constraint")
        return cls(bits, tuple(items), states & 0b1111)

    @classmethod
    def pinned(cls, bits: int, symbols: Sequence[int], head: int, state: int,
               ) -> "Cylinder":
        """Cylinder pinning ``symbols`` with ``symbols[head]`` at offset 0."""
        return cls.make(bits, {i - head: 1 << s for i, s in enumerate(symbols)},
                        1 << state)

    @property
    def full(self) -> int:
        return (1 << (1 << self.bits)) - 1

    def constraint(self, offset: int) -> int:
        for o, m in self.window:
            if o == offset:
                return m
        return self.full

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(o for o, _ in self.window)

    def measure(self) -> Fraction:
        size = 1 << self.bits
        out = Fraction(popcount(self.states), 4)
        for _, mask in self.window:
            out *= Fraction(popcount(mask), size)
        return out

    def contains(self, x: Configuration) -> bool:
        if not (self.states >> x.state) & 1:
            return False
        t = x.tape_map
        return all((mask >> t.get(o, 0)) & 1 for o, mask in self.window)

    def issubset(self, other: "Cylinder") -> bool:
        if self.states & ~other.states:
            return False
        return all(self.constraint(o) & ~mask == 0 for o, mask in other.window)

    def with_constraint(self, offset: int, mask: int) -> "Cylinder":
        w = dict(self.window)
        w[offset] = mask
        return Cylinder.make(self.bits, w, self.states)

    def with_states(self, states: int) -> "Cylinder":
        return Cylinder(self.bits, self.window, states)

    def sample(self, rng, spread: int = 2) -> Configuration:
        """Random finite-support configuration inside the cylinder."""
        size = 1 << self.bits
        offs = self.offsets
        lo = min(offs + (0,)) - spread
        hi = max(offs + (0,)) + spread
        tape = {}
        for p in range(lo, hi + 1):
            choices = list(symbols_of(self.constraint(p)))
            tape[p] = choices[rng.randrange(len(choices))] if choices else rng.randrange(size)
        state = list(symbols_of(self.states))
        return Configuration.make(tape, state[rng.randrange(len(state))])

    def render(self, alphabet: Alphabet) -> str:
        parts = []
        for o, mask in self.window:
            syms = list(symbols_of(mask))
            if len(syms) == 1:
                txt = alphabet.names[syms[0]]
            elif popcount(mask) == alphabet.size - 1:
                txt = "!" + alphabet.names[next(symbols_of(self.full & ~mask))]
            else:
                txt = "{" + ",".join(alphabet.names[s] for s in syms) + "}"
            parts.append(f"{o}:{txt}")
        states = [STATES.names[s] for s in symbols_of(self.states)]
        return "[" + " ".join(parts) + ", " + "|".join(states) + "]"

    def to_json(self) -> dict:
        a = Alphabet(self.bits)
        return {
            "bits": self.bits,
            "window": [
                {"offset": o, "symbols": [a.names[s] for s in symbols_of(m)]}
                for o, m in self.window
            ],
            "states": [STATES.names[s] for s in symbols_of(self.states)],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Cylinder":
        a = Alphabet(int(data["bits"]))
        window = {}
        for entry in data["window"]:
            window[int(entry["offset"])] = sum(1 << a.index(s) for s in entry["symbols"])
        states = sum(1 << STATES.index(s) for s in data["states"])
        return cls.make(a.bits, window, states)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def universe(bits: int) -> Cylinder:
    return Cylinder(bits)


def intersect(c1: Cylinder, c2: Cylinder) -> Cylinder | None:
    """Intersection of two cylinders, or ``None`` when it is empty."""
    states = c1.states & c2.states
    if not states:
        return None
    w = dict(c1.window)
    for o, m in c2.window:
        m = w.get(o, c1.full) & m
        if not m:
            return None
        w[o] = m
    return Cylinder(c1.bits, tuple(sorted(w.items())), states)


def difference(c: Cylinder, d: Cylinder) -> list[Cylinder]:
    """Pairwise disjoint cylinders whose union is ``c`` minus ``d``."""
    if intersect(c, d) is None:
        return [c]
    out = []
    rest = c
    for o, mask in d.window:
        have = rest.constraint(o)
        outside = have & ~mask
        if outside:
            out.append(rest.with_constraint(o, outside))
        rest = rest.with_constraint(o, have & mask)
    outside = rest.states & ~d.states
    if outside:
        out.append(rest.with_states(outside))
    return out


@dataclass(frozen=True)
class CylinderUnion:
    cylinders: tuple[Cylinder, ...] = ()

    @classmethod
    def of(cls, *cylinders: Cylinder | None) -> "CylinderUnion":
        return cls(tuple(c for c in cylinders if c is not None))

    def __iter__(self):
        return iter(self.cylinders)

    def __len__(self):
        return len(self.cylinders)

    def disjoint(self) -> "CylinderUnion":
        pieces: list[Cylinder] = []
        for c in self.cylinders:
            new = [c]
            for p in pieces:
                new = [q for r in new for q in difference(r, p)]
                if not new:
                    break
            pieces.extend(new)
        return CylinderUnion(tuple(pieces))

    def measure(self) -> Fraction:
        return sum((c.measure() for c in self.disjoint()), Fraction(0))

    def is_empty(self) -> bool:
        return not self.cylinders

    def contains(self, x: Configuration) -> bool:
        return any(c.contains(x) for c in self.cylinders)

    def intersect(self, other: "CylinderUnion | Cylinder") -> "CylinderUnion":
        others = other.cylinders if isinstance(other, CylinderUnion) else (other,)
        return CylinderUnion.of(*(intersect(a, b) for a in self.cylinders for b in others))

    def minus(self, other: "CylinderUnion | Cylinder") -> "CylinderUnion":
        others = other.cylinders if isinstance(other, CylinderUnion) else (other,)
        pieces = list(self.cylinders)
        for d in others:
            pieces = [q for p in pieces for q in difference(p, d)]
        return CylinderUnion(tuple(pieces))

    def covers(self, c: Cylinder) -> bool:
        return CylinderUnion((c,)).minus(self).is_empty()

    def union(self, other: "CylinderUnion") -> "CylinderUnion":
        return CylinderUnion(self.cylinders + other.cylinders)


def measure(u: CylinderUnion | Cylinder) -> Fraction:
    if isinstance(u, Cylinder):
        return u.measure()
    return u.measure()


def partition_cells(bits: int) -> Iterator[Cylinder]:
    """All cells ``[x y_ z, s]`` of the partition."""
    size = 1 << bits
    for s in range(4):
        for x in range(size):
            for y in range(size):
                for z in range(size):
                    yield Cylinder.make(bits, {-1: 1 << x, 0: 1 << y, 1: 1 << z}, 1 << s)


def pairwise_disjoint(cylinders: Sequence[Cylinder]) -> list[tuple[int, int]]:
    """Indices of intersecting pairs.

    Cylinders pinning a single state and single symbols on the partition window
    are bucketed by that cell, since cylinders in different buckets cannot
    meet; everything else is compared against all.
    """
    buckets: dict[tuple, list[int]] = {}
    loose: list[int] = []
    for i, c in enumerate(cylinders):
        key = []
        for o in PARTITION_WINDOW:
            m = c.constraint(o)
            if popcount(m) != 1:
                break
            key.append(m)
        if len(key) == 3 and popcount(c.states) == 1:
            buckets.setdefault((*key, c.states), []).append(i)
        else:
            loose.append(i)
    bad = []
    for members in buckets.values():
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                i, j = members[a], members[b]
                if intersect(cylinders[i], cylinders[j]) is not None:
                    bad.append((i, j))
    for a, i in enumerate(loose):
        for j in range(len(cylinders)):
            if j == i or (j in loose[:a]):
                continue
            if intersect(cylinders[i], cylinders[j]) is not None:
                bad.append((min(i, j), max(i, j)))
    return sorted(set(bad))


# --------------------------------------------------------------------------
# group elements


@dataclass(frozen=True)
class GroupElement:
    """Element of (Aut(M) wr Z) x Aut(S) in normal form.

    Acting on a point, the local automorphisms are applied first (``local[p]``
    to tape cell ``p``), then the state automorphism, then the shift:
    ``(g.m)_i = local[i + shift](m_{i + shift})``.
    """

    bits: int
    shift: int = 0
    local: tuple[tuple[int, gf2.Matrix], ...] = ()
    state_auto: gf2.Matrix = (1, 2)

    @classmethod
    def make(cls, bits: int, shift: int = 0,
             local: Mapping[int, gf2.Matrix] | None = None,
             state_auto: gf2.Matrix = (1, 2)) -> "GroupElement":
        ident = gf2.identity(bits)
        items = []
        for p, a in sorted((local or {}).items()):
            a = tuple(a)
            if len(a) != bits or not gf2.is_invertible(a):
                raise ValueError(f"local automorphism at {p} is not in GL({bits},2)")
            if a != ident:
                items.append((p, a))
        state_auto = tuple(state_auto)
        if not gf2.is_invertible(state_auto) or len(state_auto) != 2:
            raise ValueError("state automorphism is not in GL(2,2)")
        return cls(bits, shift, tuple(items), state_auto)

    @classmethod
    def identity(cls, bits: int) -> "GroupElement":
        return cls(bits)

    @classmethod
    def t(cls, bits: int, k: int = 1) -> "GroupElement":
        return cls(bits, k)

    @classmethod
    def symbol_map(cls, bits: int, x: int, y: int, pos: int = 0,
                   order: str = "forward") -> "GroupElement":
        """The automorphism ``(x -> y)`` acting at tape position ``pos``."""
        return cls.make(bits, 0, {pos: gf2.completion(x, y, bits, order)})

    @classmethod
    def state_map(cls, bits: int, s: int, u: int, order: str = "forward") -> "GroupElement":
        """The automorphism ``(s -> u)`` of the state space."""
        return cls.make(bits, 0, None, gf2.completion(s, u, 2, order))

    @property
    def is_identity(self) -> bool:
        return self.shift == 0 and not self.local and self.state_auto == (1, 2)

    def local_at(self, pos: int) -> gf2.Matrix:
        for p, a in self.local:
            if p == pos:
                return a
        return gf2.identity(self.bits)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return compose(self, other)

    def inverse(self) -> "GroupElement":
        local = {p - self.shift: gf2.inverse(a) for p, a in self.local}
        return GroupElement.make(self.bits, -self.shift, local, gf2.inverse(self.state_auto))

    def act(self, x: Configuration) -> Configuration:
        tape = {}
        local = dict(self.local)
        for p, s in x.tape:
            a = local.get(p)
            tape[p - self.shift] = gf2.apply(a, s) if a else s
        return Configuration.make(tape, gf2.apply(self.state_auto, x.state))

    def act_cylinder(self, c: Cylinder) -> Cylinder:
        return act_cylinder(self, c)

    def describe(self, alphabet: Alphabet | None = None) -> str:
        if self.is_identity:
            return "e"
        parts = []
        if self.shift:
            parts.append("t" if self.shift == 1 else f"t^{self.shift}")
        for p, a in self.local:
            perm = gf2.permutation(a)
            moved = [(s, perm[s]) for s in range(len(perm)) if perm[s] != s]
            if alphabet is not None:
                txt = ",".join(f"{alphabet.names[u]}->{alphabet.names[v]}" for u, v in moved)
            else:
                txt = ",".join(f"{u}->{v}" for u, v in moved)
            parts.append(f"phi@{p}({txt})")
        if self.state_auto != (1, 2):
            perm = gf2.permutation(self.state_auto)
            txt = ",".join(f"{STATES.names[u]}->{STATES.names[v]}"
                           for u, v in enumerate(perm) if u != v)
            parts.append(f"psi({txt})")
        return " ".join(parts)


def compose(g2: GroupElement, g1: GroupElement) -> GroupElement:
    """Normal form of ``g2`` after ``g1``."""
    local = dict(g1.local)
    for p, a in g2.local:
        q = p + g1.shift
        local[q] = gf2.matmul(a, local.get(q, gf2.identity(g1.bits)))
    return GroupElement.make(g1.bits, g1.shift + g2.shift, local,
                             gf2.matmul(g2.state_auto, g1.state_auto))


def act_cylinder(g: GroupElement, c: Cylinder) -> Cylinder:
    window = dict(c.window)
    out = {}
    for p, mask in window.items():
        a = g.local_at(p)
        out[p - g.shift] = gf2.permute_mask(a, mask)
    return Cylinder.make(c.bits, out, gf2.permute_mask(g.state_auto, c.states))


# --------------------------------------------------------------------------
# systems


@dataclass(frozen=True)
class Instruction:
    name: str
    domain: CylinderUnion
    element: GroupElement

    def resulting_set(self) -> CylinderUnion:
        return CylinderUnion(tuple(act_cylinder(self.element, c) for c in self.domain))


@dataclass(frozen=True)
class TuringSystem:
    bits: int
    instructions: tuple[Instruction, ...]
    initial: CylinderUnion
    accepting: CylinderUnion
    rejecting: CylinderUnion = CylinderUnion()
    groups: tuple[tuple[str, tuple[int, ...]], ...] = ()
    _cell_cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.bits)

    @property
    def halting(self) -> CylinderUnion:
        return self.accepting.union(self.rejecting)

    def instruction_index(self, x: Configuration) -> int | None:
        """Index of the instruction whose domain contains ``x`` (None for e)."""
        key = x.cell()
        try:
            return self._cell_cache[key]
        except KeyError:
            pass
        local = Configuration.make({-1: key[0], 0: key[1], 1: key[2]}, key[3])
        hit = None
        for i, ins in enumerate(self.instructions):
            if ins.domain.contains(local):
                hit = i
                break
        self._cell_cache[key] = hit
        return hit

    def group(self, label: str) -> tuple[Instruction, ...]:
        idx = dict(self.groups)[label]
        return tuple(self.instructions[i] for i in idx)

    def instruction(self, name: str) -> Instruction:
        for ins in self.instructions:
            if ins.name == name:
                return ins
        raise KeyError(name)


def step(sys: TuringSystem, x: Configuration) -> Configuration:
    i = sys.instruction_index(x)
    return x if i is None else sys.instructions[i].element.act(x)


class SplitError(Exception):
    """Raised when a cylinder straddles several instruction domains."""

    def __init__(self, cylinder: Cylinder, offsets: Sequence, instructions: Sequence[str]):
        self.cylinder = cylinder
        self.offsets = tuple(offsets)
        self.instructions = tuple(instructions)
        super().__init__(
            f"cylinder splits across {', '.join(instructions) or 'the e-region'}; "
            f"refine offsets {list(self.offsets)}"
        )


def step_cylinder(sys: TuringSystem, c: Cylinder) -> Cylinder:
    """Image of ``c`` under the system map, provided ``c`` lies in one domain."""
    touching = []
    for ins in sys.instructions:
        parts = [d for d in ins.domain if intersect(c, d) is not None]
        if parts:
            touching.append((ins, parts))
    if not touching:
        return c
    if len(touching) == 1:
        ins, parts = touching[0]
        if ins.domain.covers(c):
            return act_cylinder(ins.element, c)
    offsets = set()
    for _, parts in touching:
        for d in parts:
            if not c.issubset(d):
                for o, mask in d.window:
                    if c.constraint(o) & ~mask:
                        offsets.add(o)
                if c.states & ~d.states:
                    offsets.add("state")
    raise SplitError(c, sorted(offsets, key=str), [ins.name for ins, _ in touching])


# --------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    partition: list[str] = field(default_factory=list)
    condition_i: list[str] = field(default_factory=list)
    condition_ii: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (self.partition or self.condition_i or self.condition_ii)

    def to_json(self) -> dict:
        return {"ok": self.ok, "partition": self.partition,
                "condition_i": self.condition_i, "condition_ii": self.condition_ii}


def _is_cell_union(u: CylinderUnion) -> bool:
    return all(o in PARTITION_WINDOW for c in u for o in c.offsets)


def fixed_points_null(element: GroupElement, domain: Cylinder) -> bool:
    """Decide whether ``{x in domain : g.x = x}`` has measure zero.

    A nonzero shift fixes only shift-periodic tapes, a null set. Otherwise the
    element must visibly move every point: either the state automorphism moves
    each state allowed by the domain, or a local automorphism moves a symbol
    the domain pins to a single value.
    """
    if element.shift != 0:
        return True
    perm = gf2.permutation(element.state_auto)
    if all(perm[s] != s for s in symbols_of(domain.states)):
        return True
    for p, a in element.local:
        mask = domain.constraint(p)
        if popcount(mask) == 1:
            s = next(symbols_of(mask))
            if gf2.apply(a, s) != s:
                return True
    return False


def validate_system(sys: TuringSystem) -> ValidationReport:
    rep = ValidationReport()
    ins = sys.instructions
    for i, a in enumerate(ins):
        if not _is_cell_union(a.domain):
            rep.partition.append(f"{a.name}: domain is not a union of partition cells")
        for b in ins[i + 1:]:
            if not a.domain.intersect(b.domain).is_empty():
                rep.partition.append(f"{a.name} and {b.name}: overlapping domains")
    named = [("I", sys.initial), ("A", sys.accepting), ("R", sys.rejecting)]
    for k, (na, ua) in enumerate(named):
        if not _is_cell_union(ua):
            rep.partition.append(f"{na} is not a union of partition cells")
        for nb, ub in named[k + 1:]:
            if not ua.intersect(ub).is_empty():
                rep.partition.append(f"{na} and {nb} overlap")
    halting = sys.halting
    for a in ins:
        if not a.element.is_identity and not a.domain.intersect(halting).is_empty():
            rep.condition_i.append(f"{a.name}: nontrivial element on a cell of A or R")
    for a in ins:
        for c in a.domain:
            if not fixed_points_null(a.element, c):
                rep.condition_ii.append(
                    f"{a.name}: fixed-point set of positive measure on {c.render(sys.alphabet)}")
                break
    return rep


# --------------------------------------------------------------------------
# component graphs


@dataclass
class LabeledComponentGraph:
    vertices: list[Configuration]
    edges: list[tuple[int, int, GroupElement]]
    root: int = 0
    truncated: bool = False

    @property
    def counts(self) -> dict[tuple[int, int], int]:
        """Integer-collapsed labels: number of instructions realising each edge."""
        out: dict[tuple[int, int], int] = {}
        for u, v, _ in self.edges:
            out[(u, v)] = out.get((u, v), 0) + 1
        return out

    def __len__(self):
        return len(self.vertices)

    def is_directed_line(self) -> bool:
        n = len(self.vertices)
        if len(self.edges) != n - 1:
            return False
        outs: dict[int, int] = {}
        ins: dict[int, int] = {}
        for u, v, _ in self.edges:
            if u == v:
                return False
            outs[u] = outs.get(u, 0) + 1
            ins[v] = ins.get(v, 0) + 1
        if any(k > 1 for k in outs.values()) or any(k > 1 for k in ins.values()):
            return False
        return n == 1 or len(self.line_order()) == n

    def line_order(self) -> list[int]:
        """Vertices of a directed line, from its source."""
        succ = {u: v for u, v, _ in self.edges}
        targets = set(succ.values())
        starts = [v for v in range(len(self.vertices)) if v not in targets]
        if len(starts) != 1:
            return []
        order = [starts[0]]
        while order[-1] in succ and len(order) <= len(self.vertices):
            order.append(succ[order[-1]])
        return order


def predecessors(sys: TuringSystem, y: Configuration) -> list[tuple[Configuration, GroupElement]]:
    out = []
    for ins in sys.instructions:
        if ins.element.is_identity:
            continue
        x = ins.element.inverse().act(y)
        if ins.domain.contains(x):
            out.append((x, ins.element))
    return out


def component_graph(sys: TuringSystem, x: Configuration, cap: int = 10_000,
                    ) -> LabeledComponentGraph:
    if cap < 1:
        raise ValueError("cap must be at least 1")
    index = {x: 0}
    vertices = [x]
    edges: set[tuple[int, int, GroupElement]] = set()
    queue = deque([0])
    truncated = False

    def visit(z: Configuration) -> int | None:
        nonlocal truncated
        if z in index:
            return index[z]
        if len(vertices) >= cap:
            truncated = True
            return None
        index[z] = len(vertices)
        vertices.append(z)
        queue.append(index[z])
        return index[z]

    while queue:
        u = queue.popleft()
        z = vertices[u]
        i = sys.instruction_index(z)
        if i is not None and not sys.instructions[i].element.is_identity:
            g = sys.instructions[i].element
            v = visit(g.act(z))
            if v is not None:
                edges.add((u, v, g))
        for w, g in predecessors(sys, z):
            v = visit(w)
            if v is not None:
                edges.add((v, u, g))
    return LabeledComponentGraph(vertices, sorted(edges, key=lambda e: (e[0], e[1])), 0, truncated)


def is_simply_connected(g: LabeledComponentGraph) -> bool:
    if g.truncated:
        raise ValueError("component graph was truncated; loops cannot be certified")
    if not g.vertices:
        return True
    bits = g.edges[0][2].bits if g.edges else 1
    adj: dict[int, list[tuple[int, int, GroupElement]]] = {}
    for k, (u, v, lab) in enumerate(g.edges):
        adj.setdefault(u, []).append((k, v, lab))
        adj.setdefault(v, []).append((k, u, lab.inverse()))
    # path[v] maps the root's frame to v's frame along the spanning tree
    path = {g.root: GroupElement.identity(bits)}
    tree: set[int] = set()
    queue = deque([g.root])
    while queue:
        u = queue.popleft()
        for k, v, lab in adj.get(u, []):
            if v not in path:
                path[v] = compose(lab, path[u])
                tree.add(k)
                queue.append(v)
    for k, (u, v, lab) in enumerate(g.edges):
        if k in tree:
            continue
        loop = compose(path[v].inverse(), compose(lab, path[u]))
        if not loop.is_identity:
            return False
    return True


def random_element(bits: int, rng, length: int = 6) -> tuple[GroupElement, list[GroupElement]]:
    """Random word over the generators; returns the product and the letters."""
    letters = []
    size = 1 << bits
    for _ in range(rng.randrange(length + 1)):
        kind = rng.randrange(3)
        if kind == 0:
            letters.append(GroupElement.t(bits, rng.choice((-1, 1))))
        elif kind == 1:
            x, y = rng.randrange(1, size), rng.randrange(1, size)
            letters.append(GroupElement.symbol_map(bits, x, y, rng.randrange(-2, 3)))
        else:
            s, u = rng.randrange(1, 4), rng.randrange(1, 4)
            letters.append(GroupElement.state_map(bits, s, u))
    g = GroupElement.identity(bits)
    for w in letters:
        g = compose(w, g)
    return g, letters


def iter_configs(cylinders: Iterable[Cylinder], rng, n: int) -> Iterator[Configuration]:
    cyls = list(cylinders)
    for _ in range(n):
        yield cyls[rng.randrange(len(cyls))].sample(rng)
