"""哈希族与随机基"""

import cmath

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hcsketch.estimator.errors import UnknownPatternVertex
from hcsketch.estimator.hashing import (
    MERSENNE_P,
    KWiseHash,
    derive_basis,
    derive_basis_stack,
    eval_hash,
    horner61,
    make_hash,
    mulmod61,
    prf_key,
    seeds_for,
    x_exponent,
    x_independence,
    y_independence,
    y_value,
)
from hcsketch.estimator.pattern import build_pattern_profile


field_elements = st.integers(min_value=0, max_value=MERSENNE_P - 1)


@settings(max_examples=200)
@given(st.lists(st.tuples(field_elements, field_elements), min_size=1, max_size=20))
def test_mulmod_matches_python_ints(pairs):
    a = np.array([x for x, _ in pairs], dtype=np.uint64)
    b = np.array([y for _, y in pairs], dtype=np.uint64)
    expected = [(x * y) % MERSENNE_P for x, y in pairs]
    assert [int(v) for v in mulmod61(a, b)] == expected


@settings(max_examples=50)
@given(
    st.lists(field_elements, min_size=1, max_size=12),
    st.lists(field_elements, min_size=1, max_size=10),
)
def test_horner_matches_scalar_eval(coefficients, keys):
    h = KWiseHash(independence=len(coefficients), coefficients=tuple(coefficients), prime=MERSENNE_P, range=MERSENNE_P)
    got = horner61(np.array([coefficients], dtype=np.uint64), np.array(keys, dtype=np.uint64))
    assert [int(v) for v in got[0]] == [eval_hash(h, k) for k in keys]


def test_hash_is_deterministic():
    a = make_hash(prf_key(7, b"\x01" * 32), 3, 6, 5)
    b = make_hash(prf_key(7, b"\x01" * 32), 3, 6, 5)
    assert a == b
    assert all(0 <= c < MERSENNE_P for c in a.coefficients)


def test_hash_output_uniform():
    h = make_hash(prf_key(11, b"\x00" * 32), 0, 4, 3)
    n = 100_000
    counts = np.bincount([eval_hash(h, v) for v in range(n)], minlength=3)
    expected = n / 3
    sigma = (n * (1 / 3) * (2 / 3)) ** 0.5
    assert np.all(np.abs(counts - expected) < 5 * sigma)


def test_independence_parameters(triangle_profile, single_edge_profile):
    assert x_independence(triangle_profile) == 18
    assert y_independence(triangle_profile) == 12
    assert y_independence(single_edge_profile) == 4


def test_y_independence_covers_all_pattern_vertices():
    from hcsketch.estimator.pattern import Hypergraph

    p = build_pattern_profile(Hypergraph.from_edges([tuple(range(6))]))
    assert y_independence(p) == 6


def test_basis_deterministic_and_seed_dependent(triangle_profile):
    a = derive_basis(triangle_profile, 42)
    b = derive_basis(triangle_profile, 42)
    c = derive_basis(triangle_profile, 43)
    assert a == b
    assert a != c
    assert 0 <= a.q_exponent < triangle_profile.tau


def test_basis_depends_on_pattern(triangle_profile, path3):
    other = build_pattern_profile(path3)
    assert derive_basis(triangle_profile, 1).y_hash != derive_basis(other, 1).y_hash


def test_x_exponent_range(triangle_profile):
    basis = derive_basis(triangle_profile, 5)
    for v in range(200):
        for c in triangle_profile.vertices:
            assert 0 <= x_exponent(basis, c, v) < triangle_profile.degrees[c]


def test_x_exponent_unknown_vertex(triangle_profile):
    basis = derive_basis(triangle_profile, 5)
    with pytest.raises(UnknownPatternVertex):
        x_exponent(basis, 99, 1)


def test_x_root_mean_vanishes(fan3):
    profile = build_pattern_profile(fan3)
    basis = derive_basis(profile, 3)
    n = 100_000
    exps = [x_exponent(basis, 0, v) for v in range(n)]
    mean = sum(cmath.exp(2j * cmath.pi * x / 3) for x in exps) / n
    assert abs(mean) < 0.02


def test_y_values_uniform_on_powers_of_two(triangle_profile):
    basis = derive_basis(triangle_profile, 9)
    n = 100_000
    values = [y_value(basis, v) for v in range(n)]
    assert set(values) == {1, 2, 4}
    for target in (1, 2, 4):
        assert abs(values.count(target) / n - 1 / 3) < 0.01


def test_stack_rows_match_scalar_basis(fan3):
    profile = build_pattern_profile(fan3)
    seeds = seeds_for(1000, 5)
    stack = derive_basis_stack(profile, seeds)
    keys = np.array([0, 1, 17, 123456789, MERSENNE_P - 2], dtype=np.uint64)
    y = stack.y_values(keys)
    for i, seed in enumerate(seeds):
        basis = derive_basis(profile, seed)
        assert stack.basis(i, profile) == basis
        assert int(stack.q_exponents[i]) == basis.q_exponent
        assert [int(v) for v in y[i]] == [y_value(basis, int(k)) for k in keys]
        for idx, c in enumerate(profile.vertices):
            x = stack.x_exponents(idx, keys)
            assert [int(v) for v in x[i]] == [x_exponent(basis, c, int(k)) for k in keys]


def test_seeds_wrap_at_64_bits():
    assert seeds_for((1 << 64) - 1, 3) == [(1 << 64) - 1, 0, 1]


# 单位根与子集和的代数性质

@pytest.mark.parametrize("tau", [3, 7, 15, 31])
def test_root_power_sums(tau):
    for k in range(0, 4 * tau + 1):
        total = sum(cmath.exp(2j * cmath.pi * ((k * l) % tau) / tau) for l in range(tau))
        expected = tau if k % tau == 0 else 0
        assert abs(total - expected) < 1e-6 * tau


@pytest.mark.parametrize("t", range(1, 9))
def test_power_sums_divisible_only_for_all_ones(t):
    tau = (1 << t) - 1

    def bounded(prefix, remaining, width):
        if width == 0:
            yield prefix
            return
        for x in range(remaining + 1):
            yield from bounded(prefix + (x,), remaining - x, width - 1)

    for xs in bounded((), t, t):
        total = sum(x << i for i, x in enumerate(xs))
        if total == 0:
            continue
        assert (total % tau == 0) == all(x == 1 for x in xs)


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_uniform_root_moments(d):
    rng = np.random.default_rng(2024 + d)
    n = 100_000
    x = rng.integers(0, d, size=n)
    for i in range(1, d):
        mean = np.mean(np.exp(2j * np.pi * x * i / d))
        assert abs(mean) < 3 / n ** 0.5
    assert np.allclose(np.exp(2j * np.pi * x * d / d), 1.0)
