import random
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from specden import gf2
from specden.carry import CarryParams, build_carry_system, initial_cylinder
from specden.tds import (
    Alphabet,
    Configuration,
    Cylinder,
    CylinderUnion,
    GroupElement,
    LabeledComponentGraph,
    SplitError,
    act_cylinder,
    compose,
    difference,
    fixed_points_null,
    intersect,
    is_simply_connected,
    pairwise_disjoint,
    partition_cells,
    random_element,
    step,
    step_cylinder,
    universe,
)

from conftest import configurations, cylinders, gl2_matrices, group_elements


# --------------------------------------------------------------------------
# GF(2) linear algebra


@given(gl2_matrices(3))
def test_inverse_roundtrip(a):
    assert gf2.matmul(gf2.inverse(a), a) == gf2.identity(3)
    assert gf2.matmul(a, gf2.inverse(a)) == gf2.identity(3)


@given(st.integers(1, 15), st.integers(1, 15), st.sampled_from(sorted(gf2.COMPLETIONS)))
def test_completion_sends_x_to_y(x, y, order):
    a = gf2.completion(x, y, 4, order)
    assert gf2.is_invertible(a)
    assert gf2.apply(a, x) == y


def test_completion_rejects_zero():
    with pytest.raises(ValueError):
        gf2.completion(0, 1, 2)


@given(gl2_matrices(2))
def test_permutation_is_bijection_fixing_blank(a):
    perm = gf2.permutation(a)
    assert perm[0] == 0
    assert sorted(perm) == list(range(4))


def test_alphabet_names():
    a = Alphabet(3)
    assert a.size == 8 and a.max_digit == 6
    assert a.names == ("-", "0", "1", "2", "3", "4", "5", "6")
    assert a.index("6") == a.digit(6) == 7


# --------------------------------------------------------------------------
# group action


@given(group_elements(), group_elements(), configurations())
def test_action_is_a_left_action(g2, g1, x):
    assert compose(g2, g1).act(x) == g2.act(g1.act(x))
    assert (g2 * g1).act(x) == g2.act(g1.act(x))


@given(group_elements(), configurations())
def test_inverse_undoes_action(g, x):
    assert g.inverse().act(g.act(x)) == x
    assert compose(g.inverse(), g).is_identity


def test_shift_moves_head_right():
    x = Configuration.from_symbols([1, 2, 3], head=0, state=0)
    y = GroupElement.t(2).act(x)
    assert y.symbol(0) == 2 and y.symbol(-1) == 1


@given(group_elements(), cylinders(), configurations())
def test_cylinder_image_matches_pointwise_image(g, c, x):
    assert c.contains(x) == act_cylinder(g, c).contains(g.act(x))


@given(group_elements(), cylinders())
def test_action_preserves_measure(g, c):
    assert act_cylinder(g, c).measure() == c.measure()


def test_random_words_compose_consistently():
    rng = random.Random(5)
    for _ in range(50):
        g, letters = random_element(2, rng)
        x = Cylinder.make(2, {-1: 0b0110, 2: 0b1001}, 0b0101).sample(rng)
        y = x
        for w in letters:
            y = w.act(y)
        assert g.act(x) == y


# --------------------------------------------------------------------------
# cylinder algebra


@given(cylinders(), cylinders())
def test_intersect_commutes(a, b):
    assert intersect(a, b) == intersect(b, a)


@given(cylinders(), cylinders(), cylinders())
def test_intersect_associates(a, b, c):
    ab = intersect(a, b)
    bc = intersect(b, c)
    left = intersect(ab, c) if ab is not None else None
    right = intersect(a, bc) if bc is not None else None
    assert left == right


@given(cylinders(), cylinders(), configurations())
def test_intersection_membership(a, b, x):
    m = intersect(a, b)
    assert (m is not None and m.contains(x)) == (a.contains(x) and b.contains(x))


@given(cylinders(), cylinders(), configurations())
def test_difference_is_disjoint_cover(a, b, x):
    parts = difference(a, b)
    assert not pairwise_disjoint(parts)
    inside = sum(p.contains(x) for p in parts)
    assert inside == int(a.contains(x) and not b.contains(x))
    m = intersect(a, b)
    assert sum(p.measure() for p in parts) == a.measure() - (m.measure() if m else 0)


@given(st.lists(cylinders(), min_size=1, max_size=4), st.lists(cylinders(), max_size=3))
def test_union_measure_is_inclusion_exclusion_free(us, vs):
    u = CylinderUnion.of(*us)
    v = CylinderUnion.of(*vs)
    # mu(U) = mu(U - V) + mu(U & V)
    assert u.measure() == u.minus(v).measure() + u.intersect(v).measure()
    assert u.measure() <= 1


def test_measure_values():
    assert universe(2).measure() == 1
    c = Cylinder.make(2, {0: 0b0010, 1: 0b0011}, 0b0001)
    assert c.measure() == Fraction(1, 4) * Fraction(2, 4) * Fraction(1, 4)


def test_empty_constraint_rejected():
    with pytest.raises(ValueError):
        Cylinder.make(2, {0: 0})
    with pytest.raises(ValueError):
        Cylinder.make(2, {}, 0)


@pytest.mark.parametrize("bits", [2, 3])
def test_partition_cells_tile_the_space(bits):
    cells = list(partition_cells(bits))
    assert len(cells) == (1 << bits) ** 3 * 4
    assert sum(c.measure() for c in cells) == 1
    assert pairwise_disjoint(cells) == []


@given(cylinders())
def test_json_roundtrip(c):
    assert Cylinder.from_json(c.to_json()) == c


@given(configurations())
def test_configuration_json_roundtrip(x):
    a = Alphabet(2)
    assert Configuration.from_json(a, x.to_json(a)) == x


# --------------------------------------------------------------------------
# systems


@pytest.fixture(scope="module")
def carry2():
    return build_carry_system(CarryParams(2))


def test_step_cylinder_agrees_with_step(carry2):
    rng = random.Random(11)
    c = initial_cylinder(CarryParams(2), 3)
    for _ in range(40):
        d = step_cylinder(carry2, c)
        for _ in range(5):
            x = c.sample(rng)
            assert d.contains(step(carry2, x))
        if carry2.halting.covers(d):
            break
        c = d


def test_step_cylinder_reports_split(carry2):
    c = Cylinder.make(2, {0: 1 << 3}, 1 << 3)  # [D, zprev] straddles S9 and S10
    with pytest.raises(SplitError) as info:
        step_cylinder(carry2, c)
    assert 1 in info.value.offsets
    assert set(info.value.instructions) == {"S9", "S10"}


def test_fixed_point_decision():
    dom = Cylinder.make(2, {0: 0b0010}, 0b0010)
    assert fixed_points_null(GroupElement.t(2), dom)
    assert not fixed_points_null(GroupElement.identity(2), dom)
    assert fixed_points_null(GroupElement.symbol_map(2, 1, 2), dom)
    # a local map at an unconstrained offset fixes a positive-measure set
    assert not fixed_points_null(GroupElement.symbol_map(2, 1, 2, pos=3), dom)


def test_simple_connectivity_detects_nontrivial_loop():
    x = Configuration.make({0: 1}, 0)
    g = GroupElement.symbol_map(2, 1, 2)
    y = g.act(x)
    tree = LabeledComponentGraph([x, y], [(0, 1, g)])
    assert is_simply_connected(tree)
    h = compose(GroupElement.state_map(2, 1, 2), g.inverse())
    loop = LabeledComponentGraph([x, y], [(0, 1, g), (1, 0, h)])
    assert not is_simply_connected(loop)
    back = LabeledComponentGraph([x, y], [(0, 1, g), (1, 0, g.inverse())])
    assert is_simply_connected(back)
    with pytest.raises(ValueError):
        is_simply_connected(LabeledComponentGraph([x], [], truncated=True))
