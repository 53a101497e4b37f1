import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hyperwave.characteristics import (
    Box,
    connected_components,
    diophantine_profile,
    enumerate_characteristics,
    verify_component_bound,
)
from hyperwave.genericity import LinearSeed, build_gamma

PELL = LinearSeed([(1,)], [1.0], 2)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=2, max_size=2).filter(any))
def test_single_site_enumeration_integer_oracle(j0):
    # b = 1: n omega0 = -+sqrt(|j|^2+1)  <=>  n^2 (|j0|^2+1) = |j|^2+1 with the sign of n
    seed = LinearSeed([tuple(j0)], [1.0], 2)
    box = Box(6, 9)
    cs = enumerate_characteristics(seed, box)
    w2 = j0[0] ** 2 + j0[1] ** 2 + 1
    plus, minus = set(), set()
    for n in range(-6, 7):
        for j in itertools.product(range(-9, 10), repeat=2):
            if n and n * n * w2 == j[0] ** 2 + j[1] ** 2 + 1:
                (plus if n < 0 else minus).add((n,) + j)
    assert set(cs.plus) == plus and set(cs.minus) == minus


def test_two_site_enumeration_float_oracle():
    seed = LinearSeed([(1,), (2,)], [1.0, 1.0], 2)
    cs = enumerate_characteristics(seed, Box(8, 20))
    w = seed.omega0_float
    near = set()
    for n1 in range(-8, 9):
        for n2 in range(-8 + abs(n1), 9 - abs(n1)):
            s = n1 * w[0] + n2 * w[1]
            for j in range(-20, 21):
                r = math.sqrt(j * j + 1)
                if abs(s + r) < 1e-9 or abs(r - s) < 1e-9:
                    near.add((n1, n2, j))
    assert set(cs.points) == near
    for x in cs.points:
        assert cs.branch(x) in "+-"


def _union_find_components(points, steps):
    parent = {x: x for x in points}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for x in points:
        for g in steps:
            y = tuple(a + c for a, c in zip(x, g))
            if y in parent:
                parent[find(x)] = find(y)
    groups = {}
    for x in points:
        groups.setdefault(find(x), set()).add(x)
    return sorted(len(g) for g in groups.values())


@pytest.mark.parametrize("sites, p", [([(1,)], 2), ([(1,), (2,)], 2), ([(1, 0), (0, 2)], 2),
                                      ([(3,)], 4)])
def test_components_match_union_find(sites, p):
    seed = LinearSeed(sites, [1.0] * len(sites), p)
    cs = enumerate_characteristics(seed, Box(10, 30))
    gamma = build_gamma(seed)
    rep = connected_components(cs, gamma)
    assert sorted(rep.sizes()) == _union_find_components(cs.points, gamma.nonzero())
    assert verify_component_bound(rep).ok
    alg = connected_components(cs, gamma, mode="algebra-step")
    assert alg.max_size >= rep.max_size


def test_pell_components_are_conjugate_pairs():
    cs = enumerate_characteristics(PELL, Box(30, 45))
    rep = connected_components(cs, build_gamma(PELL))
    assert set(rep.sizes()) <= {1, 2}
    assert [(-1, 1), (1, -1)] in rep.components


def test_component_bound_counterexample_reported():
    cs = enumerate_characteristics(PELL, Box(30, 45))
    rep = connected_components(cs, build_gamma(PELL))
    rep.bound_B = 1
    chk = verify_component_bound(rep)
    assert not chk and len(chk.counterexample) == 2


def test_diophantine_profile_brute_force():
    box = Box(12, 20)
    prof = diophantine_profile(PELL, box)
    for N, m, x in prof.table:
        best = min(abs(s * n * math.sqrt(2) + math.sqrt(j * j + 1))
                   for n in range(1, N + 1) for s in (1, -1) for j in range(-20, 21)
                   if 2 * n * n != j * j + 1)
        assert m == pytest.approx(best, rel=1e-12)
    assert prof.table[2][1] == pytest.approx(0.11953506150162507, rel=1e-12)
    assert all(m >= prof.bound(N) * (1 - 1e-12) for N, m, _ in prof.table)
    assert prof.to_csv().startswith("N,min_divisor,argmin_point\n")


def test_box_validation():
    with pytest.raises(ValueError):
        Box(-1, 3)
    with pytest.raises(ValueError):
        enumerate_characteristics(PELL, Box(0, 3))
    with pytest.raises(ValueError):
        diophantine_profile(PELL, Box(1, 3))
    with pytest.raises(ValueError):
        connected_components(enumerate_characteristics(PELL, Box(3, 3)), build_gamma(PELL),
                             mode="bogus")
