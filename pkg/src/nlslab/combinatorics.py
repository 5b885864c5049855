"""Collision-map enumeration, the product-expansion identity, Duhamel
iterates, and consistency of the iterated mild-hierarchy expansion.

A collision map sigma records, for each of r successive collisions, which
earlier particle the new one attaches to: sigma(j) in {1, ..., j-1} for
j = k+1, ..., k+r.  There are exactly k (k+1) ... (k+r-1) of them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .hierarchy import (
    DEFAULT_RANK_BUDGET,
    FactorizedDensityMatrix,
    apply_sobolev_op,
    collision_full,
    collision_single,
    default_zeta,
    hierarchy_defect_matrix,
    hierarchy_free_evolve,
    tensor_power,
    trace_norm,
    _check_budget,
)
from .solver import simpson_weights

__all__ = [
    "CollisionMap",
    "enumerate_collision_maps",
    "collision_map_count",
    "verify_product_identity",
    "evaluate_duhamel_iterate",
    "expansion_consistency",
    "ENUMERATION_BUDGET",
]

ENUMERATION_BUDGET = 12


@dataclass(frozen=True)
class CollisionMap:
    """sigma in M_{k,r}: values are (sigma(k+1), ..., sigma(k+r))."""

    k: int
    r: int
    values: tuple

    def __post_init__(self):
        if self.k < 1 or self.r < 1:
            raise ValueError("k and r must be >= 1")
        if len(self.values) != self.r:
            raise ValueError("need exactly r values")
        for i, v in enumerate(self.values):
            j = self.k + 1 + i
            if not 1 <= v <= j - 1:
                raise ValueError("sigma(%d) = %d violates 1 <= sigma(j) <= j-1" % (j, v))

    def __str__(self):
        return "%d %d : %s" % (self.k, self.r, " ".join(str(v) for v in self.values))


def enumerate_collision_maps(k, r):
    """All of M_{k,r} in lexicographic order of (sigma(k+1), ..., sigma(k+r))."""
    if k < 1 or r < 1:
        raise ValueError("k and r must be >= 1")
    if k + r > ENUMERATION_BUDGET:
        raise ValueError("k + r exceeds the enumeration budget of %d" % ENUMERATION_BUDGET)
    ranges = [range(1, k + i) for i in range(1, r + 1)]
    return [CollisionMap(k, r, vals) for vals in itertools.product(*ranges)]


def collision_map_count(k, r):
    """|M_{k,r}| = k (k+1) ... (k+r-1) = (k+r-1)!/(k-1)!, exact big integers."""
    if k < 1 or r < 1:
        raise ValueError("k and r must be >= 1")
    return math.prod(range(k, k + r))


def _gauss_nodes(a, b, n):
    x, w = np.polynomial.legendre.leggauss(n)
    mid, half = (a + b) / 2.0, (b - a) / 2.0
    return mid + half * x, half * w


def _integral(fn, a, b, nodes):
    x, w = _gauss_nodes(a, b, nodes)
    return sum(wi * fn(xi) for xi, wi in zip(x, w))


def verify_product_identity(m, F, G, t, nodes=24):
    """|LHS - RHS| of the product-expansion identity

        prod_r (F_r + int_0^t G_r)
          = sum over partitions {1..m} = S1 u S2 of
            (prod_{S1} F_r) * sum_{r in S2} int_0^t G_r(tau)
                prod_{r' in S2 \\ {r}} int_0^tau G_{r'},

    with the empty-S2 partition contributing prod F_r (inner sum read as 1).
    Both sides use Gauss-Legendre quadrature, exact for polynomial G.
    """
    if m > 6:
        raise ValueError("m must be <= 6")
    if len(F) != m or len(G) != m:
        raise ValueError("need m coefficients and m functions")
    full = [_integral(G[i], 0.0, t, nodes) for i in range(m)]
    lhs = math.prod(F[i] + full[i] for i in range(m))
    rhs = 0.0 + 0.0j
    for mask in range(2 ** m):
        S2 = [i for i in range(m) if mask >> i & 1]
        S1 = [i for i in range(m) if not mask >> i & 1]
        coeff = math.prod([F[i] for i in S1], start=1.0 + 0.0j)
        if not S2:
            rhs += coeff
            continue
        inner = 0.0 + 0.0j
        for r in S2:
            rest = [i for i in S2 if i != r]

            def integrand(tau, r=r, rest=rest):
                val = G[r](tau)
                for i in rest:
                    val *= _integral(G[i], 0.0, tau, nodes)
                return val

            inner += _integral(integrand, 0.0, t, nodes)
        rhs += coeff * inner
    return abs(lhs - rhs)


def evaluate_duhamel_iterate(f, sigma, t, times, budget=DEFAULT_RANK_BUDGET):
    """Duhamel iterate of order r on factorized data:

        U^{(k)}(t - t_1) B_{sigma(k+1),k+1} U^{(k+1)}(t_1 - t_2) ...
            B_{sigma(k+r),k+r} |f><f|^{tensor (k+r)}

    times is (t_1, ..., t_r); r = 0 (empty times, sigma None) degenerates to
    U^{(k)}(t) |f><f|^{tensor k}.
    """
    if sigma is None:
        if times:
            raise ValueError("r = 0 call must have empty times")
        raise ValueError("r = 0 call needs an explicit order; use tensor_power")
    k, r = sigma.k, sigma.r
    if len(times) != r:
        raise ValueError("need r = %d intermediate times" % r)
    _check_budget(2 ** r, budget)
    gamma = tensor_power(f, k + r)
    ts = [t] + list(times)
    for i in range(r, 0, -1):
        gamma = collision_single(gamma, sigma.values[i - 1], budget=budget)
        gamma = hierarchy_free_evolve(gamma, ts[i - 1] - ts[i])
    return gamma


def expansion_consistency(traj, k, r, zeta=None, budget=100000):
    """Trace-norm defect, under S^{(k,-zeta0)}, of the iterated mild-hierarchy
    expansion at the final stored time.

    r = 1 is the mild equation itself and delegates to the same defect matrix
    as hierarchy_duhamel_residual; r = 2 substitutes the equation into itself
    once, with iterated Simpson quadrature over the simplex t >= t1 >= t2.
    """
    if r not in (1, 2):
        raise ValueError("r must be 1 or 2")
    if zeta is None:
        zeta = default_zeta(traj.geometry.d)
    M = len(traj.times) - 1
    if M < 2:
        raise ValueError("need at least 3 time points")
    t = float(traj.times[M])
    if r == 1:
        defect = hierarchy_defect_matrix(traj, k, M, budget=budget)
        return trace_norm(apply_sobolev_op(defect, -zeta))
    h = traj.dt
    terms = []
    terms += tensor_power(traj.states[M], k).terms
    g0 = hierarchy_free_evolve(tensor_power(traj.states[0], k), t)
    terms += [(-c, ke, br) for c, ke, br in g0.terms]
    w1 = simpson_weights(M, h)
    mu = traj.coupling
    for i in range(M + 1):
        t1 = float(traj.times[i])
        # first-order term: U(t - t1) B_{k+1} U(t1) gamma0^{(k+1)}
        g1 = hierarchy_free_evolve(tensor_power(traj.states[0], k + 1), t1)
        g1 = collision_full(g1, budget=budget)
        g1 = hierarchy_free_evolve(g1, t - t1)
        terms += [(1j * mu * w1[i] * c, ke, br) for c, ke, br in g1.terms]
        # second-order term: inner integral over [0, t1]
        if i == 0:
            continue
        w2 = simpson_weights(i, h)
        for j in range(i + 1):
            t2 = float(traj.times[j])
            g2 = collision_full(tensor_power(traj.states[j], k + 2), budget=budget)
            g2 = hierarchy_free_evolve(g2, t1 - t2)
            g2 = collision_full(g2, budget=budget)
            g2 = hierarchy_free_evolve(g2, t - t1)
            # defect = gamma - [U gamma0 - i mu int U B gamma^{(k+1)}] and the
            # substituted inner integral carries its own -i mu, so the double
            # term enters the defect with +mu^2
            scale = mu ** 2 * w1[i] * w2[j]
            terms += [(scale * c, ke, br) for c, ke, br in g2.terms]
    _check_budget(len(terms), budget)
    defect = FactorizedDensityMatrix(k, terms)
    return trace_norm(apply_sobolev_op(defect, -zeta))
