from fractions import Fraction
from itertools import combinations, permutations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tenspec.algebra import LambdaPoly
from tenspec.grassmann import (
    DimensionMismatch,
    GrassmannError,
    GrassmannParityError,
    GrassmannPoly,
    MonomialKey,
    SizeLimitError,
    berezin_psi,
    berezin_top,
    char_poly_matrix,
    exp_nilpotent,
    exp_series,
    hyperpfaffian,
    kinetic_term,
    merge_sign,
    mul,
    paired_partition,
    paired_partition_batched,
    pfaffian,
    psi_bit,
)
from tenspec.tensors import AntisymTensor, perm_sign

from oracles import det_bareiss


def gen(n, a, bar=False):
    return GrassmannPoly.generator(n, a, bar)


def poly_strategy(n, even_only=False, no_scalar=False):
    masks = st.integers(0, (1 << (2 * n)) - 1)
    if even_only:
        masks = masks.filter(lambda m: m.bit_count() % 2 == 0)
    if no_scalar:
        masks = masks.filter(lambda m: m != 0)
    coeff = st.integers(-3, 3).map(Fraction)
    return st.dictionaries(masks, coeff, max_size=6).map(lambda d: GrassmannPoly(n, d))


# --- algebra -----------------------------------------------------------------------

def test_square_of_even_pair():
    one = GrassmannPoly.scalar(2, 1)
    a = one + gen(2, 0) * gen(2, 1)
    assert mul(a, a) == one + gen(2, 0) * gen(2, 1) * 2


def test_generators_anticommute_and_square_to_zero():
    n = 3
    for x in range(2 * n):
        gx = gen(n, x // 2, bool(x % 2))
        assert (gx * gx).terms == {}
        for y in range(2 * n):
            gy = gen(n, y // 2, bool(y % 2))
            assert gx * gy == -(gy * gx)


@settings(max_examples=40, deadline=None)
@given(poly_strategy(3), poly_strategy(3), poly_strategy(3))
def test_product_is_associative_and_distributive(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c


@settings(max_examples=40, deadline=None)
@given(poly_strategy(3, even_only=True, no_scalar=True))
def test_exp_factorised_matches_series(a):
    assert exp_nilpotent(a) == exp_series(a)


def test_exp_of_paired_sum():
    n = 2
    a = GrassmannPoly.monomial(n, [(0, 1), (0, 0)]) + GrassmannPoly.monomial(n, [(1, 1), (1, 0)])
    want = GrassmannPoly.scalar(n, 1) + a + GrassmannPoly.monomial(n, [(0, 1), (0, 0), (1, 1), (1, 0)])
    assert exp_nilpotent(a) == want


def test_exp_rejects_odd_and_scalar():
    with pytest.raises(GrassmannParityError):
        exp_nilpotent(gen(2, 0))
    with pytest.raises(GrassmannParityError):
        exp_nilpotent(GrassmannPoly.scalar(2, 1) + gen(2, 0) * gen(2, 1))


def test_merge_sign_counts_transpositions():
    # ψ̄_0 · ψ_0: moving ψ̄_0 (bit 1) past ψ_0 (bit 0) costs one sign
    assert merge_sign(0b10, 0b01) == -1
    assert merge_sign(0b01, 0b10) == 1


def test_monomial_key_roundtrip():
    for mask in range(1 << 8):
        assert MonomialKey.from_mask(mask).to_mask() == mask


def test_dimension_checks():
    with pytest.raises(DimensionMismatch):
        gen(2, 5)
    with pytest.raises(DimensionMismatch):
        gen(2, 0) + gen(3, 0)


# --- Berezin integral ------------------------------------------------------------

@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_berezin_normalisation(n):
    top = GrassmannPoly.monomial(n, [f for a in range(n) for f in ((a, 1), (a, 0))])
    assert berezin_top(top) == LambdaPoly.constant(1)


def test_berezin_of_kinetic_exponential():
    assert berezin_top(exp_nilpotent(kinetic_term(2))) == LambdaPoly([0, 0, 1])
    assert berezin_top(exp_nilpotent(kinetic_term(3, 2))) == LambdaPoly.constant(8)


def test_berezin_ignores_lower_terms():
    assert berezin_top(GrassmannPoly.scalar(2, 7) + gen(2, 0) * gen(2, 1)) == LambdaPoly.constant(0)


# --- determinants and Pfaffians -----------------------------------------------------

def det_char_oracle(M, lam):
    n = len(M)
    return det_bareiss([[(lam if a == b else 0) - Fraction(M[a][b]) for b in range(n)] for a in range(n)])


def test_char_poly_of_diagonal():
    assert char_poly_matrix([[1, 0], [0, 2]]) == LambdaPoly([2, -3, 1])


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 4).flatmap(
    lambda n: st.lists(st.lists(st.integers(-5, 5), min_size=n, max_size=n), min_size=n, max_size=n)))
def test_char_poly_matches_determinant(M):
    Z = char_poly_matrix(M)
    for lam in (Fraction(0), Fraction(1), Fraction(-2, 3), Fraction(5)):
        assert Z(lam) == det_char_oracle(M, lam)


def test_char_poly_via_full_algebra():
    """DP partition function equals brute-force exponentiation plus Berezin."""
    rng = np.random.default_rng(3)
    M = rng.integers(-3, 4, size=(3, 3)).tolist()
    act = kinetic_term(3)
    for a in range(3):
        for b in range(3):
            act = act - GrassmannPoly.monomial(3, [(a, 1), (b, 0)], M[a][b])
    assert berezin_top(exp_series(act)) == char_poly_matrix(M)


def matching_pfaffian(M):
    """Sum over perfect matchings with the sign of the flattened permutation."""
    n = len(M)
    if n == 0:
        return Fraction(1)
    total = Fraction(0)
    for j in range(1, n):
        rest = [k for k in range(1, n) if k != j]
        sub = [[M[r][c] for c in rest] for r in rest]
        total += (-1) ** (j - 1) * Fraction(M[0][j]) * matching_pfaffian(sub)
    return total


def test_pfaffian_two_by_two():
    M = [[0, 3], [-3, 0]]
    assert pfaffian(M) == 3
    assert pfaffian(M) ** 2 == det_bareiss(M) == 9


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([2, 4, 6]).flatmap(
    lambda n: st.lists(st.integers(-5, 5), min_size=n * (n - 1) // 2, max_size=n * (n - 1) // 2)
    .map(lambda v: (n, v))))
def test_pfaffian_matches_matchings(nv):
    n, vals = nv
    M = [[Fraction(0)] * n for _ in range(n)]
    for (a, b), v in zip(combinations(range(n), 2), vals):
        M[a][b], M[b][a] = Fraction(v), Fraction(-v)
    assert pfaffian(M) == matching_pfaffian(M)
    assert pfaffian(M) ** 2 == det_bareiss(M)


def test_pfaffian_rejects_bad_input():
    with pytest.raises(GrassmannError):
        pfaffian([[0, 1, 0], [-1, 0, 0], [0, 0, 0]])
    with pytest.raises(GrassmannError):
        pfaffian([[0, 1], [1, 0]])
    with pytest.raises(DimensionMismatch):
        pfaffian([[0, 1]])


# --- hyperpfaffian -------------------------------------------------------------------

def test_hyperpfaffian_single_block():
    T = AntisymTensor(4, 4, {(0, 1, 2, 3): 5})
    assert abs(hyperpfaffian(T)) == 5


def partition_oracle(T):
    """Signed sum over splittings of the sites into blocks of size p (block containing
    the smallest free site first), normalised by the measure sign of ψ_0...ψ_{n-1}."""
    n, p = T.n, T.p

    def rec(free):
        if not free:
            return [((), Fraction(1))]
        out = []
        first = free[0]
        for rest in combinations(free[1:], p - 1):
            block = (first,) + rest
            left = [a for a in free if a not in block]
            for order, v in rec(left):
                out.append((block + order, v * T[block]))
        return out

    measure = berezin_psi(GrassmannPoly(n, {sum(psi_bit(a) for a in range(n)): 1}))
    return sum(perm_sign(order) * v for order, v in rec(list(range(n)))) * measure


@pytest.mark.parametrize("seed", range(3))
def test_hyperpfaffian_matches_partitions(seed):
    T = AntisymTensor.random_rational(8, 4, np.random.default_rng(seed))
    assert hyperpfaffian(T) == partition_oracle(T)


def test_hyperpfaffian_p2_is_pfaffian():
    rng = np.random.default_rng(5)
    T = AntisymTensor.random_rational(6, 2, rng)
    M = [[T[(a, b)] for b in range(6)] for a in range(6)]
    # exp(Σ T ψψ) versus exp(-½ Σ ψ M ψ) = exp(-Σ_{a<b} M ψψ): sign (-1)^{n/2}
    assert hyperpfaffian(T) == (-1) ** 3 * pfaffian(M)


def test_hyperpfaffian_preconditions():
    with pytest.raises(GrassmannError):
        hyperpfaffian(AntisymTensor(6, 3))
    with pytest.raises(GrassmannError):
        hyperpfaffian(AntisymTensor(6, 4))


# --- partition DP --------------------------------------------------------------------

def test_paired_partition_rejects_odd_terms():
    with pytest.raises(GrassmannParityError):
        paired_partition(2, {0b1: 1})


def test_size_limit():
    with pytest.raises(SizeLimitError):
        paired_partition(20, {})
    assert paired_partition(20, {}, max_n=20) == LambdaPoly.monomial(20)


def test_batched_matches_exact():
    rng = np.random.default_rng(7)
    n = 4
    masks = sorted({int(m) for m in rng.integers(1, 1 << (2 * n), size=40) if bin(int(m)).count("1") % 2 == 0})
    C = rng.integers(-4, 5, size=(len(masks), 3)) + 1j * rng.integers(-4, 5, size=(len(masks), 3))
    out = paired_partition_batched(n, masks, C)
    for b in range(3):
        ex = paired_partition(n, {m: complex(C[i, b]) for i, m in enumerate(masks)})
        assert np.allclose(out[b], [complex(c) for c in ex.padded(n + 1)], atol=1e-9)


def test_batched_shape_check():
    with pytest.raises(DimensionMismatch):
        paired_partition_batched(2, [0b11], np.ones((2, 1)))


def test_permutation_sign_helper():
    for perm in permutations(range(4)):
        inv = sum(1 for i in range(4) for j in range(i + 1, 4) if perm[i] > perm[j])
        assert perm_sign(perm) == (-1) ** inv
