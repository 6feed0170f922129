"""Tensor containers, coupling patterns and the exact tensor characteristic polynomial."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Iterator

import numpy as np

from .algebra import CRational, LambdaPoly, exact, re_im, _frac_str
from .grassmann import (
    DimensionMismatch,
    GrassmannError,
    GrassmannParityError,
    ordered_monomial,
    paired_partition,
)


def perm_sign(idx) -> int:
    """Sign of the permutation sorting ``idx`` (0 if an index repeats)."""
    idx = list(idx)
    if len(set(idx)) < len(idx):
        return 0
    s = 1
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                s = -s
    return s


def _conj(x):
    return x.conjugate() if isinstance(x, CRational) else x


class AntisymTensor:
    """Totally antisymmetric tensor stored on strictly increasing index tuples."""

    def __init__(self, n: int, p: int, values: dict | None = None, kind: str = "real"):
        if p < 1 or n < 1:
            raise ValueError("n and p must be positive")
        if kind not in ("real", "complex"):
            raise ValueError(f"unknown kind {kind!r}")
        self.n, self.p, self.kind = n, p, kind
        self.values: dict[tuple, object] = {}
        for idx, v in (values or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != p or any(not 0 <= i < n for i in idx):
                raise DimensionMismatch(f"index {idx} invalid for n={n}, p={p}")
            s = perm_sign(idx)
            if s == 0:
                raise GrassmannError(f"repeated index in {idx}")
            v = exact(v)
            if kind == "real" and re_im(v)[1] != 0:
                raise ValueError("complex entry in a real tensor")
            key = tuple(sorted(idx))
            if s < 0:
                v = -v
            if key in self.values and self.values[key] != v:
                raise GrassmannError(f"inconsistent entries for {key}")
            if v != 0:
                self.values[key] = v

    def __getitem__(self, idx):
        s = perm_sign(idx)
        if s == 0:
            return Fraction(0)
        v = self.values.get(tuple(sorted(idx)), Fraction(0))
        return v if s > 0 else -v

    def entries(self) -> Iterator[tuple[tuple, object]]:
        return iter(sorted(self.values.items()))

    def conjugate(self) -> "AntisymTensor":
        return AntisymTensor(self.n, self.p, {k: _conj(v) for k, v in self.values.items()}, self.kind)

    def __eq__(self, other):
        return (isinstance(other, AntisymTensor) and (self.n, self.p) == (other.n, other.p)
                and self.values == other.values)

    @classmethod
    def random_rational(cls, n: int, p: int, rng: np.random.Generator, kind: str = "real",
                        scale: int = 5, density: float = 1.0) -> "AntisymTensor":
        """Small-integer random entries; handy for exact checks."""
        vals = {}
        for idx in combinations(range(n), p):
            if rng.random() > density:
                continue
            re = int(rng.integers(-scale, scale + 1))
            im = int(rng.integers(-scale, scale + 1)) if kind == "complex" else 0
            vals[idx] = CRational.make(re, im)
        return cls(n, p, vals, kind)

    def to_dict(self) -> dict:
        entries = []
        for idx, v in self.entries():
            re, im = re_im(v)
            entries.append({"idx": list(idx), "re": _frac_str(re), "im": _frac_str(im)})
        return {"n": self.n, "p": self.p, "kind": self.kind, "entries": entries}

    @classmethod
    def from_dict(cls, d: dict) -> "AntisymTensor":
        try:
            n, p = int(d["n"]), int(d["p"])
            kind = d.get("kind", "real")
            vals = {}
            for e in d["entries"]:
                re = exact(e.get("re", 0))
                im = exact(e.get("im", 0))
                vals[tuple(e["idx"])] = CRational.make(re, im)
        except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed tensor JSON: {exc}") from exc
        return cls(n, p, vals, kind)


class GeneralTensor:
    """Tensor with no symmetry assumed, stored on ordered index tuples."""

    def __init__(self, n: int, p: int, values: dict | None = None):
        self.n, self.p = n, p
        self.values: dict[tuple, object] = {}
        for idx, v in (values or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != p or any(not 0 <= i < n for i in idx):
                raise DimensionMismatch(f"index {idx} invalid for n={n}, p={p}")
            v = exact(v)
            if v != 0:
                self.values[idx] = v

    def __getitem__(self, idx):
        return self.values.get(tuple(idx), Fraction(0))

    def entries(self):
        return iter(sorted(self.values.items()))

    def conjugate(self) -> "GeneralTensor":
        return GeneralTensor(self.n, self.p, {k: _conj(v) for k, v in self.values.items()})

    @classmethod
    def from_matrix(cls, M) -> "GeneralTensor":
        n = len(M)
        return cls(n, 2, {(a, b): M[a][b] for a in range(n) for b in range(n)})

    @classmethod
    def from_antisym(cls, T: AntisymTensor) -> "GeneralTensor":
        vals = {}
        for idx, v in T.entries():
            for perm in permutations(range(T.p)):
                key = tuple(idx[i] for i in perm)
                vals[key] = v * perm_sign(perm)
        return cls(T.n, T.p, vals)


@dataclass
class CouplingSet:
    """Weights ``g_b`` (and optionally ``ḡ_b``) on species patterns ``b ∈ {0,1}^p``.

    Bit 0 selects ψ and bit 1 selects ψ̄ at that tensor slot.  The interaction
    is ``(1/p!) Σ_{a_1..a_p} T_{a} Σ_b g_b ψ^{(b_1)}_{a_1}...ψ^{(b_p)}_{a_p}``
    plus the same with ``T̄`` and ``ḡ``.
    """

    p: int
    g: dict = field(default_factory=dict)
    gbar: dict | None = None

    def __post_init__(self):
        self.g = self._clean(self.g)
        if self.gbar is not None:
            self.gbar = self._clean(self.gbar)

    def _clean(self, d: dict) -> dict:
        out = {}
        for b, v in d.items():
            b = tuple(int(x) for x in b)
            if len(b) != self.p or any(x not in (0, 1) for x in b):
                raise ValueError(f"pattern {b} is not in {{0,1}}^{self.p}")
            v = exact(v)
            if v != 0:
                out[b] = v
        return out

    @classmethod
    def all_unit(cls, p: int) -> "CouplingSet":
        return cls(p, {b: 1 for b in product((0, 1), repeat=p)})

    @classmethod
    def split_species(cls, p: int) -> "CouplingSet":
        """``g = 1`` on the all-ψ and all-ψ̄ patterns: ``T·ψ^p + T·ψ̄^p``."""
        return cls(p, {(0,) * p: 1, (1,) * p: 1})

    @classmethod
    def matrix(cls) -> "CouplingSet":
        """p = 2 pattern giving ``-ψ̄_a M_ab ψ_b``, so Z(λ) = det(λ - M)."""
        return cls(2, {(1, 0): -2})

    def to_dict(self) -> dict:
        def enc(d):
            return [{"b": list(b), "re": _frac_str(re_im(v)[0]), "im": _frac_str(re_im(v)[1])}
                    for b, v in sorted(d.items())]
        out = {"p": self.p, "g": enc(self.g)}
        if self.gbar is not None:
            out["gbar"] = enc(self.gbar)
        return out

    @classmethod
    def from_dict(cls, d: dict) -> "CouplingSet":
        def dec(items):
            return {tuple(e["b"]): CRational.make(exact(e.get("re", 0)), exact(e.get("im", 0)))
                    for e in items}
        return cls(int(d["p"]), dec(d.get("g", [])), dec(d["gbar"]) if d.get("gbar") is not None else None)


def _symmetrized(p: int, g: dict) -> dict:
    """``G(b') = (1/p!) Σ_σ g(b'∘σ)`` on patterns, for antisymmetric T on increasing tuples.

    Reordering the odd generators of a permuted index tuple costs sgn(σ),
    which cancels the sign from T's antisymmetry, so no sign enters here.
    """
    out = {}
    fact = math.factorial(p)
    for bp in product((0, 1), repeat=p):
        tot = Fraction(0)
        for sigma in permutations(range(p)):
            b = tuple(bp[sigma[i]] for i in range(p))
            if b in g:
                tot = tot + g[b]
        if tot != 0:
            out[bp] = tot / fact
    return out


def interaction_terms(T, couplings: CouplingSet) -> dict[int, object]:
    """Monomial masks and exact coefficients of the coupled tensor action."""
    if couplings.p != T.p:
        raise DimensionMismatch(f"couplings are for p={couplings.p}, tensor has p={T.p}")
    p = T.p
    out: dict[int, object] = {}

    def add(mask, v):
        if v == 0:
            return
        w = out.get(mask, 0) + v
        if w == 0:
            out.pop(mask, None)
        else:
            out[mask] = w

    if isinstance(T, AntisymTensor):
        G = _symmetrized(p, couplings.g)
        Gb = _symmetrized(p, couplings.gbar) if couplings.gbar is not None else {}
        for idx, t in T.entries():
            tc = _conj(t)
            for bp in set(G) | set(Gb):
                mask, sign = ordered_monomial(zip(idx, bp))
                add(mask, sign * (G.get(bp, 0) * t + Gb.get(bp, 0) * tc))
        return out

    fact = math.factorial(p)
    for idx, t in T.entries():
        tc = _conj(t)
        for patterns, coef in ((couplings.g, t), (couplings.gbar or {}, tc)):
            for b, gv in patterns.items():
                mono = ordered_monomial(zip(idx, b))
                if mono is None:
                    continue
                mask, sign = mono
                add(mask, sign * gv * coef / fact)
    return out


def char_poly_exact(T, couplings: CouplingSet, max_n: int | None = None) -> LambdaPoly:
    """``Z(λ) = ∫ D(ψ,ψ̄) exp(λ ψ̄·ψ + S_int)`` for a fixed tensor, exactly.

    Odd p makes the tensor action Grassmann-odd when T has commuting entries;
    that case is rejected.
    """
    if T.p % 2:
        raise GrassmannParityError(
            f"p={T.p} is odd: a commuting tensor gives a Grassmann-odd action")
    return paired_partition(T.n, interaction_terms(T, couplings), max_n)


def all_g_unit_vanishes(T, max_n: int | None = None) -> bool:
    """True when ``Z(λ) - λ^n`` vanishes with every pattern weight set to 1."""
    Z = char_poly_exact(T, CouplingSet.all_unit(T.p), max_n)
    return Z == LambdaPoly.monomial(T.n)


def load_tensor(path) -> AntisymTensor:
    with open(path) as fh:
        return AntisymTensor.from_dict(json.load(fh))


def save_tensor(T: AntisymTensor, path) -> None:
    with open(path, "w") as fh:
        json.dump(T.to_dict(), fh, indent=1)
