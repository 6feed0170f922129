"""Gaussian-averaged characteristic polynomial and effective couplings.

Averaging over the tensor turns the interaction into ``-μ (ψ̄·ψ)^p`` and the
partition function becomes

    Z(λ) = Σ_k (-μ)^k n! / (k! (n - pk)!) λ^{n - pk}.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .algebra import LambdaPoly, exact
from .grassmann import merge_sign, ordered_monomial, paired_partition

PRESET_KINDS = ("PsiP_PsiBarP", "MixedK", "SingleBarSum")


def _to_complex(x) -> complex:
    return complex(x)


@dataclass(frozen=True)
class AvgCharPoly:
    """``Z(λ, μ)`` for the averaged ensemble.

    ``mu`` may be exact (Fraction / CRational) or a Python complex.  Exact
    coefficients are available only in the former case.
    """

    n: int
    p: int
    mu: object

    @property
    def kmax(self) -> int:
        return self.n // self.p

    def multiplicity(self, k: int) -> int:
        """``n! / (k! (n - pk)!)``, an integer."""
        n, p = self.n, self.p
        return math.comb(n, p * k) * math.factorial(p * k) // math.factorial(k)

    def is_exact(self) -> bool:
        return not isinstance(self.mu, (float, complex))

    def term(self, k: int):
        """Exact coefficient of ``λ^{n-pk}``."""
        return (-self.mu) ** k * self.multiplicity(k)

    def exact_coeffs(self) -> list:
        """Ascending coefficients ``[c_0, ..., c_n]`` (exact)."""
        if not self.is_exact():
            raise TypeError("exact coefficients need an exact μ")
        out = [Fraction(0)] * (self.n + 1)
        for k in range(self.kmax + 1):
            out[self.n - self.p * k] = self.term(k)
        return out

    def lambda_poly(self) -> LambdaPoly:
        return LambdaPoly(self.exact_coeffs())

    def log_terms(self) -> list[tuple[int, complex, float]]:
        """``(k, phase, log|c|)`` for each nonzero term; overflow-free."""
        mu = _to_complex(self.mu)
        if mu == 0:
            return [(0, 1 + 0j, 0.0)]
        lmu = math.log(abs(mu))
        ph = -mu / abs(mu)
        out = []
        for k in range(self.kmax + 1):
            lm = k * lmu + _log_int(self.multiplicity(k))
            out.append((k, ph ** k, lm))
        return out

    def float_coeffs(self) -> list[complex]:
        """Ascending complex coefficients; only sensible for modest n."""
        out = [0j] * (self.n + 1)
        for k, ph, lm in self.log_terms():
            out[self.n - self.p * k] = ph * math.exp(lm)
        return out

    def __call__(self, lam):
        return sum(c * lam ** (self.n - self.p * k)
                   for k, c in ((k, self.term(k)) for k in range(self.kmax + 1)))


def _log_int(m: int) -> float:
    if m.bit_length() < 1000:
        return math.log(m)
    shift = m.bit_length() - 900
    return math.log(m >> shift) + shift * math.log(2)


def avg_coeffs(n: int, p: int, mu) -> AvgCharPoly:
    if n < 1 or p < 2:
        raise ValueError("need n >= 1 and p >= 2")
    if not isinstance(mu, (float, complex)):
        mu = exact(mu)
    return AvgCharPoly(n, p, mu)


@dataclass(frozen=True)
class InteractionPreset:
    """One of the three current families coupled to the tensor.

    ``beta`` defaults to 1/2 for real even-p tensors and 1 otherwise.
    """

    kind: str
    k: int | None = None
    alpha: object = 1
    beta: object = None

    def __post_init__(self):
        if self.kind not in PRESET_KINDS:
            raise ValueError(f"unknown preset {self.kind!r}")
        if self.kind == "MixedK" and self.k is None:
            raise ValueError("MixedK needs k")

    def resolved_beta(self, p: int, complex_tensor: bool = False):
        if self.beta is not None:
            return exact(self.beta)
        return Fraction(1) if (p % 2 or complex_tensor) else Fraction(1, 2)

    @property
    def name(self) -> str:
        return f"MixedK(k={self.k})" if self.kind == "MixedK" else self.kind

    @classmethod
    def parse(cls, text: str, alpha=1, beta=None) -> "InteractionPreset":
        """Accepts ``PsiP_PsiBarP``, ``SingleBarSum``, ``MixedK(k=2)``, ``MixedK:2``, ``MixedK2``."""
        t = text.strip()
        m = re.fullmatch(r"MixedK(?:\(\s*(?:k\s*=\s*)?(\d+)\s*\)|[:=]?(\d+))", t)
        if m:
            return cls("MixedK", int(m.group(1) or m.group(2)), alpha, beta)
        return cls(t, None, alpha, beta)


def mu_from_preset(preset: InteractionPreset, p: int, n: int, complex_tensor: bool = False):
    """Effective coupling μ for a preset; exact when α and β are."""
    alpha = exact(preset.alpha)
    beta = preset.resolved_beta(p, complex_tensor)
    base = alpha * alpha * beta / (math.factorial(p) * Fraction(n) ** (p - 1))
    e = p * (p - 1) // 2
    if preset.kind == "PsiP_PsiBarP":
        sign = (-1) ** (e - 1)
        return sign * base
    if preset.kind == "MixedK":
        k = preset.k
        if not 1 <= k < p:
            raise ValueError(f"MixedK needs 1 <= k < p, got k={k}, p={p}")
        return (-1) ** (e + (p - k) - 1) * base
    return (-1) ** e * p * base


def mu_tilde(mu, n: int, p: int):
    return mu * Fraction(n) ** (p - 1) if not isinstance(mu, (float, complex)) else mu * n ** (p - 1)


def mu_from_tilde(mt, n: int, p: int):
    return mt / Fraction(n) ** (p - 1) if not isinstance(mt, (float, complex)) else mt / n ** (p - 1)


def hermite_reference(n: int, sigma=1) -> LambdaPoly:
    """``σ^n He_n(λ/σ)`` via the three-term recurrence, exact for rational σ²."""
    s2 = exact(sigma) ** 2
    prev, cur = LambdaPoly.constant(1), LambdaPoly.lam()
    if n == 0:
        return prev
    for k in range(1, n):
        prev, cur = cur, LambdaPoly.lam() * cur - prev * (k * s2)
    return cur


def hermite_consistency(n: int, sigma=1) -> bool:
    s2 = exact(sigma) ** 2
    return avg_coeffs(n, 2, s2 / 2).lambda_poly() == hermite_reference(n, sigma)


# --- currents and the exact Gaussian (Wick) average -------------------------

def _mono(factors) -> dict[int, int]:
    res = ordered_monomial(factors)
    if res is None:
        return {}
    return {res[0]: res[1]}


def _dsum(*parts: dict) -> dict:
    out: dict = {}
    for d in parts:
        for m, c in d.items():
            v = out.get(m, 0) + c
            if v == 0:
                out.pop(m, None)
            else:
                out[m] = v
    return out


def dict_mul(x: dict, y: dict) -> dict:
    """Product of Grassmann elements held as ``{mask: coeff}``."""
    out: dict = {}
    for ma, ca in x.items():
        for mb, cb in y.items():
            if ma & mb:
                continue
            m = ma | mb
            v = ca * cb * merge_sign(ma, mb)
            w = out.get(m, 0) + v
            if w == 0:
                out.pop(m, None)
            else:
                out[m] = w
    return out


def preset_currents(preset: InteractionPreset, idx: tuple) -> tuple[dict, dict]:
    """``(J_A, J̄_A)`` as ``{mask: sign}`` for an increasing tuple ``A``."""
    p = len(idx)
    if preset.kind == "PsiP_PsiBarP":
        return _mono((a, 0) for a in idx), _mono((a, 1) for a in idx)
    if preset.kind == "MixedK":
        k = preset.k
        if not 1 <= k < p:
            raise ValueError(f"MixedK needs 1 <= k < p, got k={k}, p={p}")
        J = _mono((a, 0 if i < k else 1) for i, a in enumerate(idx))
        Jb = _mono((a, 1 if i < k else 0) for i, a in enumerate(idx))
        return J, Jb
    J = _dsum(*(_mono((a, 1 if i == j else 0) for i, a in enumerate(idx)) for j in range(p)))
    Jb = _dsum(*(_mono((a, 0 if i == j else 1) for i, a in enumerate(idx)) for j in range(p)))
    return J, Jb


def wick_effective_action(preset: InteractionPreset, n: int, p: int,
                          complex_tensor: bool = False) -> dict:
    """Exact ``log⟨exp S_int⟩_T`` as a Grassmann element ``{mask: coeff}``.

    Real even p:  ``(α²σ²/2) Σ_A (J_A + J̄_A)²``.
    Complex or odd p:  ``α²σ² Σ_A J̄_A J_A``, with ``σ² = β/n^{p-1}``.
    Each per-tuple piece squares to zero and pieces commute, so exponentiating
    this element reproduces the full Gaussian average.
    """
    alpha = exact(preset.alpha)
    beta = preset.resolved_beta(p, complex_tensor)
    s2 = beta / Fraction(n) ** (p - 1)
    out: dict = {}
    for idx in combinations(range(n), p):
        J, Jb = preset_currents(preset, idx)
        if p % 2 == 0 and not complex_tensor:
            K = _dsum(J, Jb)
            piece = {m: c * alpha * alpha * s2 / 2 for m, c in dict_mul(K, K).items()}
        else:
            piece = {m: c * alpha * alpha * s2 for m, c in dict_mul(Jb, J).items()}
        out = _dsum(out, piece)
    return out


def wick_average(preset: InteractionPreset, n: int, p: int, complex_tensor: bool = False,
                 max_n: int | None = None) -> LambdaPoly:
    """Exact ``⟨Z(λ, T)⟩_T`` for Gaussian T, by Wick contraction."""
    return paired_partition(n, wick_effective_action(preset, n, p, complex_tensor), max_n)


def mu_hat_from_coeffs(coeffs, n: int, p: int):
    """Estimate μ from the ``λ^{n-p}`` coefficient: ``c = -μ n!/(n-p)!``."""
    return -coeffs[n - p] / (math.factorial(n) // math.factorial(n - p))

