"""Finite Grassmann algebra on the generators ψ_a, ψ̄_a with Berezin integration.

Generators are laid out in the canonical order ψ_0, ψ̄_0, ψ_1, ψ̄_1, ... and a
monomial is the bitmask of the generators it contains, written in that order
(bit ``2a`` is ψ_a, bit ``2a + 1`` is ψ̄_a).  Sites are 0-based.

The Berezin measure is normalised so that ``∏_a ψ̄_a ψ_a`` integrates to 1.
Single-species integrals (Pfaffians, hyperpfaffians) use ``dψ_0 ... dψ_{n-1}``
read so that ``ψ_{n-1} ... ψ_0`` integrates to 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .algebra import LambdaPoly, exact

DEFAULT_MAX_N = 14


class GrassmannError(ValueError):
    pass


class DimensionMismatch(GrassmannError):
    pass


class GrassmannParityError(GrassmannError):
    pass


class SizeLimitError(GrassmannError):
    pass


def psi_bit(a: int) -> int:
    return 1 << (2 * a)


def psibar_bit(a: int) -> int:
    return 1 << (2 * a + 1)


def _even_bits(n: int) -> int:
    return int("01" * n, 2) if n else 0


def merge_sign(left: int, right: int) -> int:
    """Sign picked up when ``mono(left) * mono(right)`` is put in canonical order."""
    s = 0
    r = right
    while r:
        low = r & -r
        s += (left >> low.bit_length()).bit_count()
        r ^= low
    return -1 if s & 1 else 1


def ordered_monomial(factors: Iterable[tuple[int, int]]) -> tuple[int, int] | None:
    """Mask and sign of an ordered product of generators ``(site, bar)``.

    Returns ``None`` when a generator repeats (the product vanishes).
    """
    mask, sign = 0, 1
    for site, bar in factors:
        b = 1 << (2 * site + bar)
        if mask & b:
            return None
        sign *= merge_sign(mask, b)
        mask |= b
    return mask, sign


@dataclass(frozen=True)
class MonomialKey:
    psi_mask: int
    psibar_mask: int

    def to_mask(self) -> int:
        out = 0
        for a in range(max(self.psi_mask.bit_length(), self.psibar_mask.bit_length())):
            if self.psi_mask >> a & 1:
                out |= psi_bit(a)
            if self.psibar_mask >> a & 1:
                out |= psibar_bit(a)
        return out

    @classmethod
    def from_mask(cls, mask: int) -> "MonomialKey":
        psi = bar = 0
        a = 0
        while mask >> (2 * a):
            if mask >> (2 * a) & 1:
                psi |= 1 << a
            if mask >> (2 * a + 1) & 1:
                bar |= 1 << a
            a += 1
        return cls(psi, bar)


def _is_zero(c) -> bool:
    return c == 0


def _coerce(c):
    if isinstance(c, LambdaPoly):
        return c
    return exact(c)


class GrassmannPoly:
    """Element of the exterior algebra on 2n generators.

    Coefficients are exact scalars or :class:`LambdaPoly` values; they are
    assumed to commute with everything.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict | None = None):
        self.n = n
        self.terms: dict[int, object] = {}
        limit = 1 << (2 * n)
        for mask, c in (terms or {}).items():
            if isinstance(mask, MonomialKey):
                mask = mask.to_mask()
            if mask >= limit:
                raise DimensionMismatch(f"monomial {mask:#x} outside n={n}")
            c = _coerce(c)
            if not _is_zero(c):
                self.terms[mask] = c

    @classmethod
    def scalar(cls, n: int, c=1) -> "GrassmannPoly":
        return cls(n, {0: c})

    @classmethod
    def generator(cls, n: int, a: int, bar: bool = False) -> "GrassmannPoly":
        if not 0 <= a < n:
            raise DimensionMismatch(f"site {a} outside n={n}")
        return cls(n, {1 << (2 * a + int(bar)): 1})

    @classmethod
    def monomial(cls, n: int, factors: Iterable[tuple[int, int]], coeff=1) -> "GrassmannPoly":
        """Ordered product ``coeff * ∏ ψ^{(bar)}_{site}``."""
        mono = ordered_monomial(factors)
        if mono is None:
            return cls(n)
        mask, sign = mono
        return cls(n, {mask: sign * _coerce(coeff)})

    def coefficient(self, key):
        if isinstance(key, MonomialKey):
            key = key.to_mask()
        return self.terms.get(key, Fraction(0))

    def is_even(self) -> bool:
        return all(m.bit_count() % 2 == 0 for m in self.terms)

    def is_odd(self) -> bool:
        return all(m.bit_count() % 2 == 1 for m in self.terms)

    def scalar_part(self):
        return self.terms.get(0, Fraction(0))

    def _check(self, other: "GrassmannPoly"):
        if self.n != other.n:
            raise DimensionMismatch(f"n={self.n} vs n={other.n}")

    def __add__(self, other):
        if not isinstance(other, GrassmannPoly):
            other = GrassmannPoly.scalar(self.n, other)
        self._check(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out[m] + c if m in out else c
        return GrassmannPoly(self.n, out)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannPoly(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, GrassmannPoly):
            return mul(self, other)
        c = _coerce(other)
        return GrassmannPoly(self.n, {m: v * c for m, v in self.terms.items()})

    def __rmul__(self, other):
        c = _coerce(other)
        return GrassmannPoly(self.n, {m: c * v for m, v in self.terms.items()})

    def __pow__(self, k: int):
        out = GrassmannPoly.scalar(self.n, 1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, GrassmannPoly):
            other = GrassmannPoly.scalar(self.n, other)
        return self.n == other.n and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return f"GrassmannPoly(n={self.n}, 0)"
        parts = []
        for m in sorted(self.terms):
            names = []
            for bit in range(2 * self.n):
                if m >> bit & 1:
                    names.append(("ψ̄" if bit & 1 else "ψ") + str(bit // 2))
            parts.append(f"({self.terms[m]!r})" + ("·" + "".join(names) if names else ""))
        return f"GrassmannPoly(n={self.n}, " + " + ".join(parts) + ")"


def mul(a: GrassmannPoly, b: GrassmannPoly) -> GrassmannPoly:
    a._check(b)
    out: dict[int, object] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            if ma & mb:
                continue
            m = ma | mb
            v = ca * cb
            if merge_sign(ma, mb) < 0:
                v = -v
            out[m] = out[m] + v if m in out else v
    return GrassmannPoly(a.n, out)


def exp_nilpotent(a: GrassmannPoly) -> GrassmannPoly:
    """``exp(a)`` for an even element without scalar part.

    Even monomials commute and square to zero, so the exponential factorises
    as ``∏_t (1 + c_t m_t)`` over the terms of ``a``.
    """
    if not a.is_even():
        raise GrassmannParityError("exp_nilpotent needs a Grassmann-even argument")
    if not _is_zero(a.scalar_part()):
        raise GrassmannParityError("exp_nilpotent needs zero scalar part")
    state: dict[int, object] = {0: Fraction(1)}
    for m, c in a.terms.items():
        _absorb(state, m, c)
    return GrassmannPoly(a.n, state)


def exp_series(a: GrassmannPoly) -> GrassmannPoly:
    """Reference ``Σ_k a^k / k!``; terminates because ``a`` is nilpotent."""
    if not _is_zero(a.scalar_part()):
        raise GrassmannParityError("exp_series needs zero scalar part")
    out = GrassmannPoly.scalar(a.n, 1)
    power = GrassmannPoly.scalar(a.n, 1)
    for k in range(1, 2 * a.n + 1):
        power = power * a
        if not power.terms:
            break
        out = out + power * Fraction(1, math.factorial(k))
    return out


def _absorb(state: dict, m: int, c) -> None:
    """In place: ``state <- state * (1 + c m)``."""
    for s, v in list(state.items()):
        if s & m:
            continue
        t = s | m
        w = v * c
        if merge_sign(s, m) < 0:
            w = -w
        if t in state:
            w = state[t] + w
            if _is_zero(w):
                del state[t]
                continue
        state[t] = w


def berezin_top(a: GrassmannPoly) -> LambdaPoly:
    """Coefficient of ``∏_a ψ̄_a ψ_a`` (measure normalised to 1 on it)."""
    top = (1 << (2 * a.n)) - 1
    c = a.terms.get(top, Fraction(0))
    if a.n % 2:
        c = -c
    return c if isinstance(c, LambdaPoly) else LambdaPoly.constant(c)


def berezin_psi(a: GrassmannPoly):
    """Single-species integral ``∫ dψ_0...dψ_{n-1}`` with ``ψ_{n-1}...ψ_0 -> 1``."""
    c = a.terms.get(_even_bits(a.n), Fraction(0))
    if (a.n * (a.n - 1) // 2) % 2:
        c = -c
    return c


def _check_size(n: int, max_n: int | None):
    limit = DEFAULT_MAX_N if max_n is None else max_n
    if n > limit:
        raise SizeLimitError(f"n={n} exceeds the exact-evaluation limit {limit}")


def paired_partition(n: int, interaction: dict[int, object], max_n: int | None = None) -> LambdaPoly:
    """``∫ D(ψ,ψ̄) exp(λ ψ̄·ψ + S_int)`` as a polynomial in λ.

    ``interaction`` maps even monomial masks to exact coefficients.  Since
    ``exp(λ ψ̄·ψ) = ∏_a (1 + λ ψ̄_a ψ_a)``, the λ^k coefficient collects the
    fully paired monomials of ``exp(S_int)`` on n - k sites.  States that can
    no longer be completed to a paired monomial are dropped on the fly.
    """
    _check_size(n, max_n)
    even = _even_bits(n)
    terms = [(m, c) for m, c in interaction.items() if not _is_zero(c)]
    for m, _ in terms:
        if m == 0 or m.bit_count() % 2:
            raise GrassmannParityError("interaction must be Grassmann-even without scalar part")
    terms.sort()
    remaining = [0] * (len(terms) + 1)
    for i in range(len(terms) - 1, -1, -1):
        remaining[i] = remaining[i + 1] | terms[i][0]

    def viable(s: int, rem: int) -> bool:
        psi = s & even
        bar = (s >> 1) & even
        missing = ((psi & ~bar) << 1) | (bar & ~psi)
        return missing & ~rem == 0

    state: dict[int, object] = {0: Fraction(1)}
    for i, (m, c) in enumerate(terms):
        rem = remaining[i + 1]
        new: dict[int, object] = {}
        for s, v in state.items():
            if viable(s, rem):
                new[s] = new[s] + v if s in new else v
            if s & m:
                continue
            t = s | m
            if not viable(t, rem):
                continue
            w = v * c
            if merge_sign(s, m) < 0:
                w = -w
            new[t] = new[t] + w if t in new else w
        state = {s: v for s, v in new.items() if not _is_zero(v)}

    coeffs = [Fraction(0)] * (n + 1)
    for s, v in state.items():
        pairs = s.bit_count() // 2
        # ∏_{a∈B} ψ̄_a ψ_a = (-1)^{|B|} × canonical monomial
        coeffs[n - pairs] += -v if pairs % 2 else v
    return LambdaPoly(coeffs)


def paired_partition_batched(n: int, masks, coeffs, max_n: int | None = None):
    """Float version of :func:`paired_partition` for many coefficient sets at once.

    ``masks`` is a fixed list of even monomials and ``coeffs`` has shape
    ``(len(masks), B)``; returns ascending λ coefficients of shape ``(B, n+1)``.
    """
    _check_size(n, max_n)
    masks = [int(m) for m in masks]
    C = np.asarray(coeffs, dtype=complex)
    if C.ndim != 2 or C.shape[0] != len(masks):
        raise DimensionMismatch("coeffs must have shape (len(masks), batch)")
    for m in masks:
        if m == 0 or m.bit_count() % 2:
            raise GrassmannParityError("interaction must be Grassmann-even without scalar part")
    even = _even_bits(n)
    order = sorted(range(len(masks)), key=lambda i: masks[i])
    remaining = [0] * (len(order) + 1)
    for j in range(len(order) - 1, -1, -1):
        remaining[j] = remaining[j + 1] | masks[order[j]]

    def viable(s: int, rem: int) -> bool:
        psi = s & even
        bar = (s >> 1) & even
        missing = ((psi & ~bar) << 1) | (bar & ~psi)
        return missing & ~rem == 0

    B = C.shape[1]
    state = {0: np.ones(B, dtype=complex)}
    for j, i in enumerate(order):
        m, c = masks[i], C[i]
        rem = remaining[j + 1]
        new = {}
        for s, v in state.items():
            if viable(s, rem):
                new[s] = new[s] + v if s in new else v
            if s & m:
                continue
            t = s | m
            if not viable(t, rem):
                continue
            w = v * c if merge_sign(s, m) > 0 else -(v * c)
            new[t] = new[t] + w if t in new else w
        state = new

    out = np.zeros((B, n + 1), dtype=complex)
    for s, v in state.items():
        pairs = s.bit_count() // 2
        out[:, n - pairs] += -v if pairs % 2 else v
    return out


def kinetic_term(n: int, lam=None) -> GrassmannPoly:
    """``λ Σ_a ψ̄_a ψ_a`` with λ symbolic unless a value is given."""
    c = LambdaPoly.lam() if lam is None else exact(lam)
    out = GrassmannPoly(n)
    for a in range(n):
        out = out + GrassmannPoly.monomial(n, [(a, 1), (a, 0)], c)
    return out


def char_poly_matrix(M: Sequence[Sequence], max_n: int | None = None) -> LambdaPoly:
    """``det(λ·1 - M)`` from the Grassmann integral of ``exp(Σ ψ̄_a (λδ_ab - M_ab) ψ_b)``."""
    n = len(M)
    if any(len(row) != n for row in M):
        raise DimensionMismatch("matrix must be square")
    inter: dict[int, object] = {}
    for a in range(n):
        for b in range(n):
            c = exact(M[a][b])
            if c == 0:
                continue
            mask, sign = ordered_monomial([(a, 1), (b, 0)])
            inter[mask] = inter.get(mask, 0) - sign * c
    return paired_partition(n, inter, max_n)


def pfaffian(M: Sequence[Sequence]):
    """Pfaffian as ``∫ Dψ exp(-½ Σ ψ_a M_ab ψ_b)``; agrees with the usual sign."""
    n = len(M)
    if any(len(row) != n for row in M):
        raise DimensionMismatch("matrix must be square")
    if n % 2:
        raise GrassmannError("Pfaffian needs even dimension")
    E = [[exact(x) for x in row] for row in M]
    for a in range(n):
        for b in range(n):
            if E[a][b] != -E[b][a]:
                raise GrassmannError("matrix is not antisymmetric")
    action = GrassmannPoly(n)
    terms = {}
    for a, b in combinations(range(n), 2):
        if E[a][b] != 0:
            terms[psi_bit(a) | psi_bit(b)] = -E[a][b]
    action = GrassmannPoly(n, terms)
    return berezin_psi(exp_nilpotent(action))


def hyperpfaffian(T) -> object:
    """``∫ Dψ exp(Σ_{a_1<...<a_p} T_{a_1...a_p} ψ_{a_1}...ψ_{a_p})`` for even p dividing n."""
    n, p = T.n, T.p
    if p % 2:
        raise GrassmannError("hyperpfaffian needs even p")
    if n % p:
        raise GrassmannError(f"p={p} does not divide n={n}")
    terms = {}
    for idx, v in T.entries():
        mask = 0
        for a in idx:
            mask |= psi_bit(a)
        terms[mask] = v
    return berezin_psi(exp_nilpotent(GrassmannPoly(n, terms)))
