"""Fuss-Catalan numbers, the branch q(z) of q = 1 + z q^p, and the densities
built on them (Fuss-Catalan P_p, the generalized Wigner law, radial root law).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import gmpy2
import numpy as np
from gmpy2 import mpfr
from scipy import integrate


class BranchPointError(ArithmeticError):
    pass


class HypergeometricError(ArithmeticError):
    def __init__(self, msg, bound=None):
        super().__init__(msg)
        self.bound = bound


def fc_number(p: int, k: int) -> Fraction:
    """``F_p(k) = C(pk+1, k) / (pk+1)``."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return Fraction(math.comb(p * k + 1, k), p * k + 1)


def z_c(p: int) -> float:
    return (p - 1) ** (p - 1) / p ** p


def x_max(p: int) -> float:
    """Right edge of the Fuss-Catalan support, ``1/z_c``."""
    return p ** p / (p - 1) ** (p - 1)


@dataclass(frozen=True)
class FCParams:
    p: int

    def __post_init__(self):
        if self.p < 2:
            raise ValueError("p must be >= 2")

    @property
    def z_c(self) -> float:
        return z_c(self.p)

    @property
    def x_max(self) -> float:
        return x_max(self.p)

    @property
    def w_c(self) -> float:
        return math.sqrt(self.x_max)


def fc_branch_solve(p: int, z, steps: int = 64, tol: float = 1e-14) -> complex:
    """The root of ``q = 1 + z q^p`` continued from ``q(0) = 1`` along ``[0, z]``."""
    z = complex(z)
    q = 1 + 0j
    if z == 0:
        return q
    t_prev = 0.0
    for i in range(1, steps + 1):
        q = _continue(p, z, t_prev, i / steps, q, tol, depth=0)
        t_prev = i / steps
    return q


def _continue(p, z, t0, t1, q, tol, depth):
    zt = z * t1
    x = q
    for _ in range(50):
        f = zt * x ** p - x + 1
        d = p * zt * x ** (p - 1) - 1
        if abs(d) < 1e-10:
            raise BranchPointError(f"continuation reaches the branch point near z={zt}")
        dx = f / d
        x -= dx
        if abs(dx) <= tol * max(1.0, abs(x)):
            break
    else:
        x = None
    # reject jumps to another branch; refine the step instead
    if x is None or abs(x - q) > 0.25 * max(1.0, abs(q)):
        if depth > 30:
            raise BranchPointError(f"continuation failed near z={zt}")
        tm = 0.5 * (t0 + t1)
        q = _continue(p, z, t0, tm, q, tol, depth + 1)
        return _continue(p, z, tm, t1, q, tol, depth + 1)
    return x


def fc_series(p: int, z, terms: int = 40) -> complex:
    """Partial sum ``Σ_{k<terms} F_p(k) z^k`` built from the term ratio."""
    z = complex(z)
    t, s = 1 + 0j, 0j
    for k in range(terms):
        s += t
        ratio = math.prod(p * k + j for j in range(1, p + 1)) / (
            (k + 1) * math.prod((p - 1) * k + j for j in range(2, p + 1)))
        t *= ratio * z
    return s


# --- generalized hypergeometric series -------------------------------------

def _check_lower(lower):
    for b in lower:
        if b <= 0 and float(b).is_integer():
            raise HypergeometricError(f"lower parameter {b} is a non-positive integer")


def _terminating(upper) -> int | None:
    ks = [int(-a) for a in upper if a <= 0 and float(a).is_integer()]
    return min(ks) if ks else None


def hypergeometric_series(upper, lower, x: float, tol: float = 1e-12,
                          return_error: bool = False):
    """``_rF_s(upper; lower; x)`` by term recurrence for real ``-1 < x ≤ 1``.

    Away from 1 the series is summed directly with a geometric tail bound.
    For ``r = s + 1`` and ``x`` near 1 the sum is Levin-accelerated; when the
    parameter excess is a positive half-integer, ``F(1 - σ²)`` is analytic in
    ``σ``, and ``F(1)``, the ``σ`` coefficient and a Chebyshev interpolant
    built from accelerated values away from the edge give the value.  The
    tolerance is relative to ``max(|F|, 1)`` since F may vanish at ``x = 1``.
    """
    upper = [float(a) for a in upper]
    lower = [float(b) for b in lower]
    _check_lower(lower)
    x = float(x)
    if not -1 < x <= 1:
        raise HypergeometricError(f"argument {x} outside (-1, 1]")
    if x == 0:
        return (1.0, 0.0) if return_error else 1.0
    stop = _terminating(upper)
    if stop is not None:
        s, t = 1.0, 1.0
        for k in range(stop):
            t *= math.prod(a + k for a in upper) / math.prod(b + k for b in lower) * x / (k + 1)
            s += t
        return (s, 0.0) if return_error else s
    if not lower and len(upper) == 1:
        # binomial series
        val = (1 - x) ** (-upper[0]) if x < 1 or upper[0] < 0 else math.inf
        return (val, 0.0) if return_error else val
    if abs(x) <= _DIRECT_MAX:
        val, err = _direct(upper, lower, x, tol)
    else:
        if len(upper) != len(lower) + 1:
            raise HypergeometricError("summation near 1 needs r = s + 1")
        excess = sum(lower) - sum(upper)
        if excess <= 0:
            raise HypergeometricError("series diverges at 1 (parameter excess <= 0)")
        if abs(2 * excess - round(2 * excess)) < 1e-12 and round(2 * excess) % 2 == 1:
            val, err = _edge_model(tuple(upper), tuple(lower))(x)
        else:
            val, err = _levin(upper, lower, x)
        if err > tol * max(abs(val), 1.0):
            raise HypergeometricError(f"tolerance not achieved at x={x}", err)
    return (val, err) if return_error else val


_DIRECT_MAX = 0.85


def _direct(upper, lower, x, tol, kcap=20000):
    s, t = 1.0, 1.0
    ax = abs(x)
    for k in range(kcap):
        r = math.prod(a + k for a in upper) / math.prod(b + k for b in lower) * x / (k + 1)
        t *= r
        s += t
        # once |ratio| < 1 and decreasing towards |x|, the tail is geometric
        if k > 2 and abs(r) < 1:
            tail = abs(t) * max(abs(r), ax) / (1 - max(abs(r), ax))
            if tail <= tol * abs(s):
                return s, tail
    raise HypergeometricError("direct summation did not converge", abs(t))


_LEVIN_BITS = 1024


@lru_cache(maxsize=None)
def _ffs_factors(m: int) -> tuple:
    """Recursion weights ``(n+1)(n+j)^{j-2}/(n+j+1)^{j-1}`` with ``n = m - j``."""
    with gmpy2.context(gmpy2.get_context(), precision=_LEVIN_BITS):
        out = []
        for j in range(1, m + 1):
            n = m - j
            bnk = mpfr(n + j + 1)
            out.append((n + 1) * (mpfr(n + j) / bnk) ** (j - 2) / bnk)
        return tuple(out)


def _levin(upper, lower, x, kmax=400, target=1e-18, exact=False):
    """Levin u-transform of the partial sums; returns (value, last change).

    Uses the Fessler-Ford-Smith recursion along anti-diagonals so that each
    new partial sum costs O(k).  ``exact=True`` returns the mpfr value.
    """
    with gmpy2.context(gmpy2.get_context(), precision=_LEVIN_BITS):
        up = [mpfr(a) for a in upper]
        lo = [mpfr(b) for b in lower]
        X = mpfr(x)
        t = mpfr(1)
        S = mpfr(1)
        Nrow: list = []
        Drow: list = []
        prev, err, L = None, math.inf, S
        hits = 0
        for m in range(kmax + 1):
            if m > 0:
                num = mpfr(1)
                for a in up:
                    num *= a + (m - 1)
                den = mpfr(m)
                for b in lo:
                    den *= b + (m - 1)
                t = t * num / den * X
                if t == 0:
                    return (S if exact else float(S)), 0.0
                S = S + t
            w = t * (m + 1)
            # Nrow[j] holds N_j^{(m-j)} after the update
            newN = [S / w]
            newD = [1 / w]
            fs = _ffs_factors(m)
            for j in range(1, m + 1):
                f = fs[j - 1]
                newN.append(newN[j - 1] - f * Nrow[j - 1])
                newD.append(newD[j - 1] - f * Drow[j - 1])
            Nrow, Drow = newN, newD
            if m < 2:
                continue
            L = Nrow[m] / Drow[m]
            if prev is not None:
                err = float(abs(L - prev))
                if err <= target * max(float(abs(L)), 1.0):
                    hits += 1
                    if hits >= 2:
                        break
                else:
                    hits = 0
            prev = L
        return (L if exact else float(L)), err


class _EdgeModel:
    """``F(1 - σ²) = F(1) + B σ + σ² h(σ)`` with h a Chebyshev interpolant.

    ``B`` is nonzero only for excess 1/2, where the leading singular term is
    ``Γ(-1/2) ∏Γ(b)/∏Γ(a) (1-x)^{1/2}``.
    """

    SIG_LO, SIG_HI, NODES = 0.04, 0.40, 20

    def __init__(self, upper, lower):
        excess = sum(lower) - sum(upper)
        F1, e1 = _levin(upper, lower, 1.0, exact=True)
        self.F1 = float(F1)
        if abs(excess - 0.5) < 1e-12:
            self.B = math.gamma(-0.5) * math.prod(math.gamma(b) for b in lower) / math.prod(
                math.gamma(a) for a in upper)
        else:
            self.B = 0.0
        cheb = np.polynomial.chebyshev.Chebyshev
        dom = [self.SIG_LO, self.SIG_HI]
        k = np.arange(self.NODES)
        u = np.cos(np.pi * (k + 0.5) / self.NODES)
        sig = 0.5 * (dom[0] + dom[1]) + 0.5 * (dom[1] - dom[0]) * u
        errs = [e1]
        hv = []
        with gmpy2.context(gmpy2.get_context(), precision=_LEVIN_BITS):
            for sg in sig:
                v, e = _levin(upper, lower, 1 - sg * sg, exact=True)
                errs.append(e)
                ms = mpfr(float(sg))
                hv.append(float((v - F1 - mpfr(self.B) * ms) / (ms * ms)))
        self.h = cheb.fit(sig, hv, self.NODES - 1, domain=dom)
        self.node_err = max(errs) / self.SIG_LO ** 2 + 1e-16 * float(np.max(np.abs(hv)))
        self.tail = float(np.max(np.abs(self.h.coef[-2:])))
        self.unit = np.zeros(self.NODES)
        self.unit[-1] = 1.0

    def __call__(self, x):
        sg = math.sqrt(max(1.0 - x, 0.0))
        val = self.F1 + self.B * sg + sg * sg * float(self.h(sg))
        # h's error grows like |T_{n-1}| when extrapolating below the node interval
        u = (2 * sg - self.SIG_LO - self.SIG_HI) / (self.SIG_HI - self.SIG_LO)
        amp = 1.0 if abs(u) <= 1 else abs(float(np.polynomial.chebyshev.chebval(u, self.unit)))
        err = sg * sg * (self.tail + self.node_err) * amp + 2e-16 * max(abs(val), 1.0)
        return val, err


@lru_cache(maxsize=256)
def _edge_model(upper: tuple, lower: tuple) -> _EdgeModel:
    return _EdgeModel(list(upper), list(lower))


# --- Fuss-Catalan density ---------------------------------------------------

@dataclass
class FCDensity:
    """``P_p(x)`` on ``(0, x_max)`` as a sum of p-1 hypergeometric terms."""

    p: int
    Lam: list = field(init=False)
    params: list = field(init=False)

    def __post_init__(self):
        p = self.p
        if p < 2:
            raise ValueError("p must be >= 2")
        zc = z_c(p)
        self.Lam, self.params = [], []
        for n in range(1, p):
            num = math.prod(math.gamma((m - n) / p) for m in range(1, p) if m != n)
            den = math.prod(math.gamma((m + 1) / (p - 1) - n / p) for m in range(1, p))
            lam = (1 / (p - 1) ** 1.5) * math.sqrt(p / (2 * math.pi)) * zc ** (n / p) * num / den
            up = [1 - (1 + m) / (p - 1) + n / p for m in range(1, p)]
            lo = [1 + (n - m) / p for m in range(1, p) if m != n]
            self.Lam.append(lam)
            self.params.append((up, lo))

    @property
    def x_max(self) -> float:
        return x_max(self.p)

    def __call__(self, x: float) -> float:
        p = self.p
        if not 0 < x < self.x_max:
            raise ValueError(f"x={x} outside the open support (0, {self.x_max})")
        arg = min(z_c(p) * x, 1.0)
        tot = 0.0
        for n, (lam, (up, lo)) in enumerate(zip(self.Lam, self.params), start=1):
            tot += lam * x ** ((n - p) / p) * hypergeometric_series(up, lo, arg)
        return max(tot, 0.0)

    def scaled(self, t: float) -> float:
        """``p t^{p-1} P_p(t^p)``: the density in ``t = x^{1/p}``, regular at 0."""
        p = self.p
        if t <= 0:
            return p * self.Lam[0]  # only the n = 1 term survives at t = 0
        x = t ** p
        if x >= self.x_max:
            return 0.0
        arg = min(z_c(p) * x, 1.0)
        tot = 0.0
        for n, (lam, (up, lo)) in enumerate(zip(self.Lam, self.params), start=1):
            tot += lam * t ** (n - 1) * hypergeometric_series(up, lo, arg)
        return max(p * tot, 0.0)


@lru_cache(maxsize=16)
def fc_density(p: int) -> FCDensity:
    return FCDensity(p)


def density_P(p: int, x: float) -> float:
    return fc_density(p)(x)


def fc_moment(p: int, k: int) -> float:
    """``∫ x^k P_p(x) dx`` after ``x = t^p``; the square-root edge is handled by
    an algebraic quadrature weight."""
    dens = fc_density(p)
    tm = dens.x_max ** (1.0 / p)

    def f(t):
        if t >= tm:
            return 0.0
        return t ** (p * k) * dens.scaled(t) / math.sqrt(tm - t)

    val, err = integrate.quad(f, 0.0, tm, weight="alg", wvar=(0.0, 0.5),
                              epsabs=1e-13, epsrel=1e-11, limit=200)
    return val


def moments_check(p: int, kmax: int = 5) -> float:
    """Max relative error of the quadrature moments against ``F_p(k)``."""
    return max(abs(fc_moment(p, k) / float(fc_number(p, k)) - 1) for k in range(kmax + 1))


def fc_cdf(p: int, x: float) -> float:
    """``∫_0^x P_p``."""
    dens = fc_density(p)
    if x <= 0:
        return 0.0
    if x >= dens.x_max:
        return 1.0
    tx = x ** (1.0 / p)
    val, _ = integrate.quad(dens.scaled, 0.0, tx, epsabs=1e-12, epsrel=1e-10, limit=200)
    return min(val, 1.0)


def rho_gurau(p: int, y: float) -> float:
    """Generalized Wigner law ``|y| P_p(y²)`` on ``|y| < w_c``."""
    wc = math.sqrt(x_max(p))
    if abs(y) >= wc:
        raise ValueError(f"|y|={abs(y)} outside the support (w_c={wc})")
    if y == 0:
        # |y| P(y²) ~ Λ_1 |y|^{(2-p)/p}
        return fc_density(p).Lam[0] if p == 2 else math.inf
    return abs(y) * density_P(p, y * y)


def r_max(p: int, mu_tilde: float) -> float:
    return (p * mu_tilde * x_max(p)) ** (1.0 / p)


def rho_radial(p: int, mu_tilde: float, r: float) -> float:
    """Radial density of the roots: ``sqrt(p/μ̃) r^{p/2-1} ρ_Gurau(r^{p/2}/sqrt(pμ̃))``."""
    rm = r_max(p, mu_tilde)
    if not 0 < r < rm:
        raise ValueError(f"r={r} outside the support (0, {rm})")
    y = r ** (p / 2) / math.sqrt(p * mu_tilde)
    return math.sqrt(p / mu_tilde) * r ** (p / 2 - 1) * rho_gurau(p, y)


def radial_cdf(p: int, mu_tilde: float, r) -> np.ndarray:
    """``∫_0^r ρ(r') dr'`` for an array of radii (any order).

    Uses ``ρ dr = P_p(x) dx`` with ``x = r^p/(pμ̃)`` and accumulates
    Gauss-Legendre panels in ``t = x^{1/p}`` between sorted points.
    """
    r = np.asarray(r, dtype=float)
    dens = fc_density(p)
    tm = dens.x_max ** (1.0 / p)
    t = np.clip(r / (p * mu_tilde) ** (1.0 / p), 0.0, tm)
    order = np.argsort(t)
    ts = t[order]
    # panel boundaries: the sorted points plus a uniform grid to bound panel width
    grid = np.unique(np.concatenate([[0.0], ts, np.linspace(0.0, tm, 257)]))
    xg, wg = np.polynomial.legendre.leggauss(12)
    acc = np.zeros(len(grid))
    for i in range(1, len(grid)):
        a, b = grid[i - 1], grid[i]
        if b <= a:
            acc[i] = acc[i - 1]
            continue
        nodes = 0.5 * (b - a) * xg + 0.5 * (a + b)
        acc[i] = acc[i - 1] + 0.5 * (b - a) * sum(w * dens.scaled(s) for s, w in zip(nodes, wg))
    out = np.empty_like(t)
    out[order] = np.interp(ts, grid, acc)
    return np.minimum(out, 1.0)
