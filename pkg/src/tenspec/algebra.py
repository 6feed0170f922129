"""Exact scalars and univariate polynomials in the spectral parameter.

Scalars are ``int``/``Fraction`` when real and :class:`CRational` when the
imaginary part is nonzero; arithmetic between them never touches floats.
"""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence


class CRational:
    """Complex number with rational real and imaginary parts.

    Results whose imaginary part cancels are returned as ``Fraction`` so that
    real computations stay on the fast path.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def make(re, im):
        if im == 0:
            return Fraction(re)
        return CRational(re, im)

    def __add__(self, other):
        o = _split(other)
        if o is None:
            return NotImplemented
        return CRational.make(self.re + o[0], self.im + o[1])

    __radd__ = __add__

    def __sub__(self, other):
        o = _split(other)
        if o is None:
            return NotImplemented
        return CRational.make(self.re - o[0], self.im - o[1])

    def __rsub__(self, other):
        o = _split(other)
        if o is None:
            return NotImplemented
        return CRational.make(o[0] - self.re, o[1] - self.im)

    def __mul__(self, other):
        o = _split(other)
        if o is None:
            return NotImplemented
        a, b = self.re, self.im
        c, d = o
        return CRational.make(a * c - b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _split(other)
        if o is None:
            return NotImplemented
        c, d = o
        den = c * c + d * d
        if den == 0:
            raise ZeroDivisionError("division by exact zero")
        a, b = self.re, self.im
        return CRational.make((a * c + b * d) / den, (b * c - a * d) / den)

    def __rtruediv__(self, other):
        o = _split(other)
        if o is None:
            return NotImplemented
        return CRational(*o) * self.reciprocal()

    def reciprocal(self):
        den = self.re * self.re + self.im * self.im
        return CRational.make(self.re / den, -self.im / den)

    def __neg__(self):
        return CRational(-self.re, -self.im)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Fraction(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conjugate(self):
        return CRational(self.re, -self.im)

    def __eq__(self, other):
        o = _split(other)
        if o is None:
            return NotImplemented
        return self.re == o[0] and self.im == o[1]

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"CRational({self.re}, {self.im})"


def _split(x):
    if isinstance(x, CRational):
        return x.re, x.im
    if isinstance(x, (int, Rational)):
        return Fraction(x), Fraction(0)
    return None


def exact(x):
    """Convert ``x`` to an exact scalar (``Fraction`` or :class:`CRational`).

    Floats are converted to the exact binary value they hold; strings may be
    ``"p/q"`` or decimal literals.
    """
    if isinstance(x, CRational):
        return CRational.make(x.re, x.im)
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, (float, str)):
        return Fraction(x)
    if isinstance(x, complex):
        return CRational.make(Fraction(x.real), Fraction(x.imag))
    if hasattr(x, "item"):  # numpy scalars
        return exact(x.item())
    raise TypeError(f"cannot convert {type(x).__name__} to an exact scalar")


def re_im(x) -> tuple[Fraction, Fraction]:
    parts = _split(x)
    if parts is None:
        raise TypeError(f"not an exact scalar: {x!r}")
    return parts


def scalar_to_json(x) -> dict:
    re, im = re_im(x)
    return {"re": _frac_str(re), "im": _frac_str(im)}


def scalar_from_json(obj) -> Fraction | CRational:
    if isinstance(obj, dict):
        return CRational.make(Fraction(str(obj.get("re", 0))), Fraction(str(obj.get("im", 0))))
    return exact(obj)


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class LambdaPoly:
    """Polynomial in λ with exact coefficients, stored in ascending powers."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [exact(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs: tuple = tuple(cs)

    @classmethod
    def constant(cls, c) -> "LambdaPoly":
        return cls([c])

    @classmethod
    def lam(cls) -> "LambdaPoly":
        return cls([0, 1])

    @classmethod
    def monomial(cls, k: int, c=1) -> "LambdaPoly":
        return cls([0] * k + [c])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def coeff(self, k: int):
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else Fraction(0)

    def padded(self, length: int) -> list:
        return [self.coeff(k) for k in range(length)]

    def __add__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        n = max(len(self.coeffs), len(other.coeffs))
        return LambdaPoly(self.coeff(k) + other.coeff(k) for k in range(n))

    __radd__ = __add__

    def __neg__(self):
        return LambdaPoly(-c for c in self.coeffs)

    def __sub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        if isinstance(other, LambdaPoly):
            if not self.coeffs or not other.coeffs:
                return LambdaPoly()
            out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if a == 0:
                    continue
                for j, b in enumerate(other.coeffs):
                    out[i + j] = out[i + j] + a * b
            return LambdaPoly(out)
        if _split(other) is None:
            return NotImplemented
        return LambdaPoly(c * other for c in self.coeffs)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if _split(other) is None:
            return NotImplemented
        return LambdaPoly(c / other for c in self.coeffs)

    def __pow__(self, k: int):
        out = LambdaPoly.constant(1)
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __eq__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "LambdaPoly(0)"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            terms.append(f"({c})" + ("" if k == 0 else f"*λ^{k}"))
        return "LambdaPoly(" + " + ".join(terms) + ")"

    def to_json(self, length: int | None = None) -> list[dict]:
        n = len(self.coeffs) if length is None else length
        return [scalar_to_json(self.coeff(k)) for k in range(n)]

    @classmethod
    def from_json(cls, data: Sequence) -> "LambdaPoly":
        return cls(scalar_from_json(x) for x in data)

    def to_complex(self) -> list[complex]:
        return [complex(c) for c in self.coeffs]


def _as_poly(x):
    if isinstance(x, LambdaPoly):
        return x
    if _split(x) is not None:
        return LambdaPoly([x])
    return None
