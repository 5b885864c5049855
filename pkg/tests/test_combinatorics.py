"""Collision maps, the product-expansion identity, and expansion
consistency of the iterated mild hierarchy."""

import math

import numpy as np
import pytest

from nlslab.combinatorics import (
    CollisionMap,
    collision_map_count,
    enumerate_collision_maps,
    evaluate_duhamel_iterate,
    expansion_consistency,
    verify_product_identity,
)
from nlslab.hierarchy import (
    collision_single,
    dense_kernel,
    hierarchy_free_evolve,
    tensor_power,
)
from nlslab.solver import solve_nls
from nlslab.torus import TorusGeometry, random_shell_field

GEOM = TorusGeometry(1, (1.0,), (32,))


def test_count_matches_enumeration():
    for k in range(1, 5):
        for r in range(1, 6):
            maps = enumerate_collision_maps(k, r)
            assert len(maps) == collision_map_count(k, r)
            assert len(set(m.values for m in maps)) == len(maps)


def test_count_closed_form():
    for k in range(1, 5):
        for r in range(1, 6):
            expect = math.factorial(k + r - 1) // math.factorial(k - 1)
            assert collision_map_count(k, r) == expect


def test_enumeration_is_lexicographic():
    maps = enumerate_collision_maps(2, 3)
    vals = [m.values for m in maps]
    assert vals == sorted(vals)
    assert vals[0] == (1, 1, 1)
    assert vals[-1] == (2, 3, 4)


def test_collision_map_validation():
    with pytest.raises(ValueError):
        CollisionMap(2, 2, (1, 4))  # sigma(4) must be <= 3
    with pytest.raises(ValueError):
        CollisionMap(2, 2, (0, 1))
    with pytest.raises(ValueError):
        enumerate_collision_maps(8, 5)  # budget k + r <= 12


def test_collision_map_str_format():
    m = CollisionMap(2, 2, (1, 3))
    assert str(m) == "2 2 : 1 3"


def test_product_identity_polynomial_exact():
    rng = np.random.default_rng(0)
    for m in range(1, 5):
        F = list(rng.standard_normal(m) + 1j * rng.standard_normal(m))
        coefs = rng.standard_normal((m, 4)) + 1j * rng.standard_normal((m, 4))
        G = [
            (lambda tau, a=coefs[i]: a[0] + a[1] * tau + a[2] * tau ** 2 + a[3] * tau ** 3)
            for i in range(m)
        ]
        assert verify_product_identity(m, F, G, 0.8) < 1e-10


def test_product_identity_trivial_cases():
    # all G = 0: both sides reduce to prod F
    F = [2.0, -1.5]
    G = [lambda t: 0.0, lambda t: 0.0]
    assert verify_product_identity(2, F, G, 1.0) < 1e-14
    # all F = 0, single factor: both sides are the plain integral
    assert verify_product_identity(1, [0.0], [lambda t: t], 1.0) < 1e-14


def test_duhamel_iterate_matches_manual_composition():
    f = random_shell_field(GEOM, 2, 0)
    sigma = CollisionMap(1, 2, (1, 1))
    t, t1, t2 = 0.3, 0.2, 0.1
    got = evaluate_duhamel_iterate(f, sigma, t, (t1, t2))
    manual = tensor_power(f, 3)
    manual = collision_single(manual, 1)
    manual = hierarchy_free_evolve(manual, t1 - t2)
    manual = collision_single(manual, 1)
    manual = hierarchy_free_evolve(manual, t - t1)
    assert got.order == 1 and got.rank == manual.rank
    assert np.abs(dense_kernel(got) - dense_kernel(manual)).max() < 1e-12


def test_expansion_consistency_halves():
    phi0 = random_shell_field(GEOM, 2, 0)
    for r in (1, 2):
        vals = []
        for dt in (0.025, 0.0125):
            traj = solve_nls(phi0, 0.2, dt)
            vals.append(expansion_consistency(traj, 1, r))
        assert vals[0] / vals[1] > 2.0, (r, vals)


def test_expansion_rejects_r3():
    traj = solve_nls(random_shell_field(GEOM, 2, 1), 0.02, 0.01)
    with pytest.raises(ValueError):
        expansion_consistency(traj, 1, 3)
