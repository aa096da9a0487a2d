"""The "carry" Turing dynamical system and its chain census.

The machine repeatedly adds one to a block of ``j`` digits in base ``D + 1``
(``D = 2**N - 2``) until the block reads ``D D ... D``. Starting from the
initial cylinder ``[- D_ D^(j-1) -, zero-prev-digits]`` every orbit is a
computational chain that ends in the accepting set ``[-_, carry]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .tds import (
    CARRY, INC, ZPREV, Alphabet, Configuration, Cylinder, CylinderUnion,
    GroupElement, Instruction, SplitError, TuringSystem, act_cylinder,
    compose, component_graph, intersect, pairwise_disjoint, step,
    step_cylinder, validate_system, STATES,
)

GROUP_LABELS = ("S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8", "S9", "S10")


@dataclass(frozen=True)
class CarryParams:
    bits: int

    def __post_init__(self):
        if self.bits < 2:
            raise ValueError("the carry machine needs N >= 2 bits")

    @property
    def alphabet(self) -> Alphabet:
        return Alphabet(self.bits)

    @property
    def max_digit(self) -> int:
        return (1 << self.bits) - 2


def build_carry_system(p: CarryParams, order: str = "forward") -> TuringSystem:
    """Instructions S1-S10 with the digit ellipses expanded.

    ``order`` selects the basis completion used for the automorphisms
    ``(x -> y)``; the verified properties do not depend on it.
    """
    a = p.alphabet
    n, D = p.bits, p.max_digit
    blank = 1 << a.BLANK
    nonblank = a.full & ~blank
    dig = a.digit

    def sym(x, y):
        return GroupElement.symbol_map(n, dig(x), dig(y), order=order)

    def state(s, u):
        return GroupElement.state_map(n, s, u, order=order)

    t = GroupElement.t(n)
    cyl = Cylinder.make
    instructions: list[Instruction] = []
    groups: dict[str, list[int]] = {g: [] for g in GROUP_LABELS}

    def add(group, name, domain, element):
        groups[group].append(len(instructions))
        instructions.append(Instruction(name, CylinderUnion((domain,)), element))

    for k in range(D):
        add("S1" if k < D - 1 else "S2", f"inc[{k}]",
            cyl(n, {0: 1 << dig(k), 1: blank}, 1 << INC), sym(k, k + 1))
    add("S3", "S3", cyl(n, {0: 1 << dig(D), 1: blank}, 1 << INC), state(INC, CARRY))
    add("S4", "S4", cyl(n, {0: 1 << dig(D)}, 1 << CARRY), GroupElement.t(n, -1))
    for k in reversed(range(D)):
        if k == D - 1:
            g = "S5"
        elif k == 0:
            g = "S8"
        elif k == D - 2:
            g = "S6"
        else:
            g = "S7"
        add(g, f"carry[{k}]", cyl(n, {0: 1 << dig(k), 1: nonblank}, 1 << CARRY),
            compose(t, compose(sym(k, k + 1), state(CARRY, ZPREV))))
    add("S9", "S9", cyl(n, {0: 1 << dig(D), 1: nonblank}, 1 << ZPREV),
        compose(t, sym(D, 0)))
    add("S10", "S10", cyl(n, {0: 1 << dig(D), 1: blank}, 1 << ZPREV),
        compose(sym(D, 0), state(ZPREV, INC)))

    initial = CylinderUnion((cyl(n, {-1: blank, 0: 1 << dig(D)}, 1 << ZPREV),))
    accepting = CylinderUnion((cyl(n, {0: blank}, 1 << CARRY),))
    return TuringSystem(
        bits=n,
        instructions=tuple(instructions),
        initial=initial,
        accepting=accepting,
        rejecting=CylinderUnion(),
        groups=tuple((g, tuple(ix)) for g, ix in groups.items()),
    )


# --------------------------------------------------------------------------
# symbolic verification


@dataclass
class CheckReport:
    ok: bool
    details: list[dict] = field(default_factory=list)

    def __bool__(self):
        return self.ok


def verify_initial_set_avoided(sys: TuringSystem) -> CheckReport:
    """Every resulting set misses the initial set (and I is never a fixed point)."""
    a = sys.alphabet
    details = []
    ok = True
    for ins in sys.instructions:
        result = ins.resulting_set()
        meet = result.intersect(sys.initial)
        details.append({
            "instruction": ins.name,
            "resulting_set": [c.render(a) for c in result],
            "disjoint_from_I": meet.is_empty(),
        })
        ok &= meet.is_empty()
    # points outside every domain are fixed, so I must lie inside the domains
    domains = CylinderUnion(tuple(c for ins in sys.instructions for c in ins.domain))
    stray = sys.initial.minus(domains)
    if not stray.is_empty():
        ok = False
        details.append({"instruction": "e", "resulting_set": [c.render(a) for c in stray],
                        "disjoint_from_I": False})
    return CheckReport(ok, details)


def _result_state(ins: Instruction) -> str:
    states = {s for c in ins.resulting_set() for s in range(4) if (c.states >> s) & 1}
    return "|".join(STATES.names[s] for s in sorted(states))


def verify_no_interference(sys: TuringSystem) -> CheckReport:
    """Brute-force pairwise disjointness of all nontrivial resulting sets.

    Each detail row also carries the resulting state, which reproduces the
    three-case grouping (inc-last-digit, carry, zero-prev-digits).
    """
    a = sys.alphabet
    active = [ins for ins in sys.instructions if not ins.element.is_identity]
    results = [ins.resulting_set() for ins in active]
    details = []
    ok = True
    for i in range(len(active)):
        for j in range(i + 1, len(active)):
            meet = results[i].intersect(results[j])
            si, sj = _result_state(active[i]), _result_state(active[j])
            details.append({
                "pair": (active[i].name, active[j].name),
                "case": si if si == sj else None,
                "disjoint": meet.is_empty(),
                "witness": [c.render(a) for c in meet],
            })
            ok &= meet.is_empty()
    return CheckReport(ok, details)


def offending_pairs(rep: CheckReport) -> list[tuple[str, str]]:
    return [d["pair"] for d in rep.details if not d["disjoint"]]


# --------------------------------------------------------------------------
# chains


def initial_symbols(p: CarryParams, j: int) -> list[int]:
    a = p.alphabet
    return [a.BLANK] + [a.digit(p.max_digit)] * j + [a.BLANK]


def initial_configuration(p: CarryParams, j: int) -> Configuration:
    return Configuration.from_symbols(initial_symbols(p, j), head=1, state=ZPREV)


def initial_cylinder(p: CarryParams, j: int) -> Cylinder:
    return Cylinder.pinned(p.bits, initial_symbols(p, j), head=1, state=ZPREV)


def step_guard(p: CarryParams, j: int) -> int:
    return 10 * (p.max_digit + 1) ** j * (j + 2)


def trace(p: CarryParams, j: int, sys: TuringSystem | None = None) -> list[Configuration]:
    """Trajectory of the canonical initial configuration up to acceptance."""
    if j < 1:
        raise ValueError("j must be at least 1")
    sys = sys or build_carry_system(p)
    x = initial_configuration(p, j)
    out = [x]
    guard = step_guard(p, j)
    while not sys.halting.contains(x):
        if len(out) > guard:
            raise RuntimeError(f"no acceptance after {guard} steps")
        x = step(sys, x)
        out.append(x)
    return out


@dataclass(frozen=True)
class ChainRecord:
    j: int
    length: int
    cylinders: tuple[Cylinder, ...]
    measure: Fraction
    accepted: bool
    counting_bound_ok: bool
    lower_bound_ok: bool

    def to_json(self) -> dict:
        return {
            "j": self.j,
            "length": self.length,
            "measure": f"{self.measure.numerator}/{self.measure.denominator}",
            "accepted": self.accepted,
            "lower_bound_ok": self.lower_bound_ok and self.counting_bound_ok,
        }


def guaranteed_measure(p: CarryParams, j: int) -> Fraction:
    """Lower bound (1/|S|) ((D+1)/(D+2))^j (1/(D+2))^2 on the j-digit chain mass, D the top digit."""
    D = p.max_digit
    return Fraction(1, 4) * Fraction(D + 1, D + 2) ** j * Fraction(1, D + 2) ** 2


def chain_record(p: CarryParams, j: int, sys: TuringSystem | None = None) -> ChainRecord:
    sys = sys or build_carry_system(p)
    c = initial_cylinder(p, j)
    cyls = [c]
    guard = step_guard(p, j)
    while not sys.halting.covers(c):
        if len(cyls) > guard:
            raise RuntimeError(f"no acceptance after {guard} steps")
        c = step_cylinder(sys, c)  # SplitError would falsify the construction
        cyls.append(c)
    length = len(cyls)
    mu = Fraction(length) * cyls[0].measure()
    return ChainRecord(
        j=j,
        length=length,
        cylinders=tuple(cyls),
        measure=mu,
        accepted=sys.accepting.covers(cyls[-1]),
        counting_bound_ok=length >= (p.max_digit + 1) ** j,
        lower_bound_ok=mu >= guaranteed_measure(p, j),
    )


@dataclass
class Census:
    params: CarryParams
    records: list[ChainRecord]
    disjoint: bool
    overlaps: list[tuple[int, int]]

    @property
    def total_measure(self) -> Fraction:
        return sum((r.measure for r in self.records), Fraction(0))

    def to_json(self) -> dict:
        return {
            "n_bits": self.params.bits,
            "d_value": self.params.max_digit,
            "disjoint": self.disjoint,
            "records": [r.to_json() for r in self.records],
        }

    def csv_rows(self) -> list[dict]:
        return [
            {"j": r.j, "length": r.length, "measure_num": r.measure.numerator,
             "measure_den": r.measure.denominator, "accepted": r.accepted}
            for r in self.records
        ]


CENSUS_STEP_LIMIT = 10**6


def chain_census(p: CarryParams, jmax: int, sys: TuringSystem | None = None) -> Census:
    sys = sys or build_carry_system(p)
    records = []
    total = 0
    for j in range(1, jmax + 1):
        rec = chain_record(p, j, sys)
        total += rec.length
        if total > CENSUS_STEP_LIMIT:
            raise ValueError(f"census exceeds {CENSUS_STEP_LIMIT} cylinders at j={j}")
        records.append(rec)
    allc = [c for r in records for c in r.cylinders]
    overlaps = pairwise_disjoint(allc)
    return Census(p, records, not overlaps, overlaps)


def chain_is_line(sys: TuringSystem, p: CarryParams, j: int) -> bool:
    """The component of the initial configuration is a directed line of length l_j."""
    path = trace(p, j, sys)
    g = component_graph(sys, path[0], cap=len(path) + 5)
    if g.truncated or not g.is_directed_line():
        return False
    return [g.vertices[i] for i in g.line_order()] == path


# --------------------------------------------------------------------------
# chain mass constants


@dataclass(frozen=True)
class ChainMassConstants:
    mass_constant: Fraction
    exponent_threshold: float
    checks: tuple[tuple[int, bool], ...] = ()


def chain_mass_constants(p: CarryParams, jmax: int = 0, d: float | None = None,
                         census: Census | None = None) -> ChainMassConstants:
    """C = (|S| (D+2))^-2 and the infimum of admissible exponents d.

    With ``jmax`` and ``d`` also checks that the chains of length at least
    (D+1)^j have measure above C / ((D+1)^j)^d.
    """
    D = p.max_digit
    C = Fraction(1, (4 * (D + 2)) ** 2)
    thr = math.log1p(1 / (D + 1)) / math.log(D + 1)
    checks = []
    if jmax and d is not None:
        census = census or chain_census(p, jmax)
        for j in range(1, jmax + 1):
            L = (D + 1) ** j
            mass = sum((r.measure for r in census.records if r.length >= L), Fraction(0))
            checks.append((j, float(mass) > float(C) / L ** d))
    return ChainMassConstants(C, thr, tuple(checks))


def resulting_set(sys: TuringSystem, name: str) -> CylinderUnion:
    return sys.instruction(name).resulting_set()


__all__ = [
    "CarryParams", "build_carry_system", "verify_initial_set_avoided", "verify_no_interference",
    "trace", "chain_census", "chain_record", "ChainRecord", "Census",
    "chain_mass_constants", "guaranteed_measure", "initial_configuration",
    "initial_cylinder", "chain_is_line", "SplitError", "act_cylinder",
    "intersect", "validate_system",
]
