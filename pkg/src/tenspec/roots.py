"""All roots of the averaged characteristic polynomial at large N.

``Z(λ) = λ^m W(λ^p)`` so only the degree ``⌊N/p⌋`` polynomial ``W`` is solved,
by Aberth-Ehrlich iteration in multiprecision (gmpy2), and the λ-roots are
obtained by taking p-th roots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import gmpy2
import numpy as np
from gmpy2 import mpc, mpfr

from .algebra import exact, re_im
from .closed import AvgCharPoly


class RootFindingError(RuntimeError):
    def __init__(self, msg, failed=()):
        super().__init__(msg)
        self.failed = list(failed)


def _flog(q) -> float:
    """``log|q|`` for an exact scalar, safe for huge numerators/denominators."""
    re, im = re_im(q)
    if im == 0:
        x = abs(re)
        if x == 0:
            return -math.inf
        return math.log(x.numerator) - math.log(x.denominator)
    a, b = _flog(re), _flog(im)
    return max(a, b) + 0.5 * math.log1p(math.exp(-2 * abs(a - b)))


def _phase(q) -> complex:
    re, im = re_im(q)
    if im == 0:
        return complex((re > 0) - (re < 0))
    lr, li = _flog(re), _flog(im)
    m = max(lr, li)
    z = complex(math.copysign(math.exp(lr - m), re) if re else 0.0,
                math.copysign(math.exp(li - m), im) if im else 0.0)
    return z / abs(z)


@dataclass
class ScaledPoly:
    """``Σ_j w_j s^j`` stored as ascending (phase, log|w_j|) pairs.

    ``exact`` keeps the ascending exact coefficients when known so that any
    working precision can be regenerated without loss.
    """

    phases: np.ndarray
    logmags: np.ndarray
    exact: list | None = None

    @property
    def degree(self) -> int:
        nz = np.nonzero(np.isfinite(self.logmags))[0]
        return int(nz[-1]) if len(nz) else -1

    @classmethod
    def from_exact(cls, coeffs) -> "ScaledPoly":
        cs = [exact(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        ph = np.array([_phase(c) if c != 0 else 0j for c in cs], dtype=complex)
        lm = np.array([_flog(c) for c in cs], dtype=float)
        return cls(ph, lm, cs)

    @classmethod
    def from_complex(cls, coeffs) -> "ScaledPoly":
        c = np.asarray(coeffs, dtype=complex)
        nz = np.nonzero(c)[0]
        c = c[: nz[-1] + 1] if len(nz) else c[:0]
        mag = np.abs(c)
        with np.errstate(divide="ignore", invalid="ignore"):
            ph = np.where(mag > 0, c / np.where(mag > 0, mag, 1), 0)
            lm = np.where(mag > 0, np.log(np.where(mag > 0, mag, 1)), -np.inf)
        return cls(ph.astype(complex), lm.astype(float), None)

    def mp_coeffs(self, prec: int) -> list:
        """Ascending coefficients as ``mpc`` at ``prec`` bits."""
        with gmpy2.context(gmpy2.get_context(), precision=prec):
            if self.exact is not None:
                out = []
                for c in self.exact:
                    re, im = re_im(c)
                    out.append(mpc(gmpy2.mpq(re.numerator, re.denominator),
                                   gmpy2.mpq(im.numerator, im.denominator)))
                return out
            return [mpc(complex(ph)) * gmpy2.exp(mpfr(lm)) if np.isfinite(lm) else mpc(0)
                    for ph, lm in zip(self.phases, self.logmags)]

    def to_complex(self) -> np.ndarray:
        with np.errstate(over="raise"):
            return self.phases * np.exp(self.logmags)

    def log_abs_eval(self, s: np.ndarray) -> np.ndarray:
        """``log Σ_j |w_j| |s|^j`` in double precision."""
        la = np.log(np.abs(s) + 1e-300)
        j = np.arange(len(self.logmags))
        return np.logaddexp.reduce(self.logmags[None, :] + la[:, None] * j[None, :], axis=1)


@dataclass
class RootSet:
    roots: np.ndarray
    residual: np.ndarray
    multiplicity_at_zero: int = 0
    precision_bits: int = 0
    # orbit representation when produced by lift_roots
    sroots: np.ndarray | None = None
    p: int = 1
    info: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.roots)


def reduce_by_symmetry(Z: AvgCharPoly) -> tuple[int, ScaledPoly]:
    """``Z(λ) = λ^m W(λ^p)`` with ``m = n mod p`` and ascending W coefficients."""
    m = Z.n % Z.p
    K = Z.kmax
    if Z.is_exact():
        w = [Fraction(0)] * (K + 1)
        for k in range(K + 1):
            w[K - k] = Z.term(k)
        return m, ScaledPoly.from_exact(w)
    ph = np.zeros(K + 1, dtype=complex)
    lm = np.full(K + 1, -np.inf)
    for k, phase, logmag in Z.log_terms():
        ph[K - k] = phase
        lm[K - k] = logmag
    return m, ScaledPoly(ph, lm, None)


def _initial_polygon(logmags: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Starting points on circles read off the Newton polygon of ``log|w_j|``."""
    pts = [(j, y) for j, y in enumerate(logmags) if np.isfinite(y)]
    hull: list[tuple[int, float]] = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (pt[0] - x1) <= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    z: list[complex] = []
    for (x1, y1), (x2, y2) in zip(hull[:-1], hull[1:]):
        cnt = x2 - x1
        r = math.exp((y1 - y2) / cnt)
        ang = 2 * np.pi * (np.arange(cnt) + 0.5) / cnt + rng.uniform(-0.1, 0.1, cnt) + 0.7 * len(z)
        z.extend(r * np.exp(1j * ang))
    return np.array(z, dtype=complex)


def _initial_circle(logmags: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    K = len(logmags) - 1
    r = math.exp((logmags[0] - logmags[-1]) / K)
    ang = 2 * np.pi * (np.arange(K) + 0.5) / K + rng.uniform(-0.1, 0.1, K)
    return r * np.exp(1j * ang)


def _aberth_level(W: ScaledPoly, prec: int, z0: np.ndarray, maxit: int):
    """Jacobi-style Aberth sweeps at one working precision.

    A root is frozen once ``|W(s)|`` is at the rounding level of
    ``Σ|w_j||s|^j``.  The pair sum ``Σ 1/(s_i - s_j)`` only steers the step,
    so it is formed in double precision; the Newton ratio uses ``prec`` bits.
    """
    K = W.degree
    logu = -prec * math.log(2) + math.log(4 * K)
    with gmpy2.context(gmpy2.get_context(), precision=prec):
        cc = W.mp_coeffs(prec)[::-1]  # descending for Horner
        dc = [cc[k] * (K - k) for k in range(K)]
        z = np.array([mpc(complex(x)) for x in z0], dtype=object)
        zf = np.array(z0, dtype=complex)
        active = np.ones(K, bool)
        lw_all = np.zeros(K)
        lb_all = np.zeros(K)
        rows = np.arange(K)
        for it in range(maxit):
            idx = np.nonzero(active)[0]
            if len(idx) == 0:
                break
            za = z[idx]
            w = np.full(len(idx), cc[0], dtype=object)
            for k in range(1, K + 1):
                w = w * za + cc[k]
            lb = W.log_abs_eval(zf[idx])
            lw = np.array([float(gmpy2.log(abs(x))) if x != 0 else -np.inf for x in w])
            lw_all[idx], lb_all[idx] = lw, lb
            done = lw <= lb + logu
            dw = np.full(len(idx), dc[0], dtype=object)
            for k in range(1, K):
                dw = dw * za + dc[k]
            D = zf[idx][:, None] - zf[None, :]
            D[rows[: len(idx)], idx] = 1
            D[D == 0] = 1e-300
            inv = 1 / D
            inv[rows[: len(idx)], idx] = 0
            S = inv.sum(axis=1)
            upd = np.nonzero(~done)[0]
            for j in upd:
                if dw[j] == 0:
                    continue
                ratio = w[j] / dw[j]
                corr = ratio / (1 - mpc(complex(ratio) * S[j]))
                z[idx[j]] = za[j] - corr
                zf[idx[j]] = complex(z[idx[j]])
            active[idx[done]] = False
        resid = np.exp(np.minimum(lw_all - lb_all, 0.0))
        return z, zf, active.copy(), resid, it


def find_roots(W: ScaledPoly, precision_bits: int = 64, tol: float = 1e-13, *,
               max_bits: int = 8192, maxit: int = 2000, seed: int = 0,
               init: str = "polygon", method: str = "aberth") -> RootSet:
    """All roots of W in s.

    Working precision starts at ``precision_bits`` and doubles until the
    roots move by less than ``tol`` (relative) between levels and every root
    passes the backward-error gate.  ``method="companion"`` uses the
    eigenvalues of the companion matrix in double precision (degree ≤ 200).
    """
    K = W.degree
    if K < 1:
        raise ValueError("find_roots needs degree >= 1")
    lm = W.logmags[: K + 1]
    low = int(np.argmax(np.isfinite(lm)))
    if low:
        # exact zero roots from vanishing low-order coefficients
        shifted = ScaledPoly(W.phases[low:K + 1], lm[low:], W.exact[low:K + 1] if W.exact else None)
        inner = find_roots(shifted, precision_bits, tol, max_bits=max_bits, maxit=maxit,
                           seed=seed, init=init, method=method) if K - low >= 1 else None
        zs = np.zeros(low, dtype=complex)
        if inner is None:
            return RootSet(zs, np.zeros(low), precision_bits=precision_bits)
        return RootSet(np.concatenate([inner.roots, zs]), np.concatenate([inner.residual, np.zeros(low)]),
                       precision_bits=inner.precision_bits, info=inner.info)
    if K == 1:
        c = W.mp_coeffs(max(precision_bits, 64))
        with gmpy2.context(gmpy2.get_context(), precision=max(precision_bits, 64)):
            r = complex(-c[0] / c[1])
        return RootSet(np.array([r]), np.zeros(1), precision_bits=precision_bits)
    if method == "companion":
        return _companion(W)
    if method != "aberth":
        raise ValueError(f"unknown method {method!r}")

    rng = np.random.default_rng(seed)
    z0 = _initial_polygon(lm, rng) if init == "polygon" else _initial_circle(lm, rng)
    prec = precision_bits
    prev = None
    levels = []
    while prec <= max_bits:
        z, zf, failed, resid, its = _aberth_level(W, prec, z0 if prev is None else prev, maxit)
        change = None
        if prev is not None:
            change = float(np.max(np.abs(zf - prev) / np.maximum(np.abs(zf), 1e-300)))
        levels.append({"bits": prec, "iterations": its, "change": change, "failed": int(failed.sum())})
        if not failed.any() and change is not None and change < tol and float(resid.max()) <= tol:
            return RootSet(zf, resid, precision_bits=prec, info={"levels": levels})
        prev = zf
        prec *= 2
    if K <= 200:
        rs = _companion(W)
        rs.info["levels"] = levels
        rs.info["fallback"] = "companion"
        return rs
    raise RootFindingError(f"no convergence up to {max_bits} bits", np.nonzero(failed)[0])


def _companion(W: ScaledPoly) -> RootSet:
    K = W.degree
    if K > 200:
        raise ValueError("companion fallback limited to degree 200")
    c = W.to_complex()[: K + 1]
    r = np.roots(c[::-1])
    lw = np.log(np.abs(np.polyval(c[::-1], r)) + 1e-300)
    resid = np.exp(np.minimum(lw - W.log_abs_eval(r), 0.0))
    return RootSet(r.astype(complex), resid, precision_bits=53, info={"method": "companion"})


def lift_roots(sroots, p: int, m: int, residual=None) -> RootSet:
    """λ-roots: the p p-th roots of each s plus ``m`` roots at the origin."""
    s = np.asarray(sroots, dtype=complex)
    r = np.abs(s) ** (1.0 / p)
    th = np.angle(s) / p
    rot = np.exp(2j * np.pi * np.arange(p) / p)
    lam = (r * np.exp(1j * th))[:, None] * rot[None, :]
    roots = np.concatenate([lam.ravel(), np.zeros(m, dtype=complex)])
    res = np.zeros(len(roots)) if residual is None else np.concatenate(
        [np.repeat(np.asarray(residual, float), p), np.zeros(m)])
    return RootSet(roots, res, multiplicity_at_zero=m, sroots=s, p=p)


def avg_roots(n: int, p: int, mu, precision_bits: int = 64, tol: float = 1e-13, **kw) -> RootSet:
    """Convenience: all N roots of the averaged Z for coupling μ."""
    Z = AvgCharPoly(n, p, mu if isinstance(mu, (float, complex)) else exact(mu))
    m, W = reduce_by_symmetry(Z)
    if W.degree < 1:
        return lift_roots(np.zeros(0), p, m)
    sr = find_roots(W, precision_bits, tol, **kw)
    out = lift_roots(sr.roots, p, m, sr.residual)
    out.precision_bits = sr.precision_bits
    out.info = sr.info
    return out


def power_sums(rs: RootSet, kmax: int) -> np.ndarray:
    """``Ξ(k) = Σ_j λ_j^k`` for k = 0..kmax.

    For a lifted root set the orbit structure is used, so ``Ξ(k) = 0`` exactly
    when p does not divide k.
    """
    out = np.zeros(kmax + 1, dtype=complex)
    out[0] = len(rs.roots)
    if rs.sroots is not None and rs.p > 1:
        for k in range(1, kmax + 1):
            if k % rs.p == 0:
                out[k] = rs.p * np.sum(rs.sroots ** (k // rs.p))
        return out
    for k in range(1, kmax + 1):
        out[k] = np.sum(rs.roots ** k)
    return out


def power_sums_from_coeffs(coeffs, kmax: int) -> list:
    """Newton's identities on an exact monic polynomial (ascending coefficients)."""
    cs = [exact(c) for c in coeffs]
    while cs and cs[-1] == 0:
        cs.pop()
    n = len(cs) - 1
    if cs[-1] != 1:
        raise ValueError("polynomial must be monic")
    e = [cs[n - i] if i <= n else Fraction(0) for i in range(kmax + 1)]  # e[i] = a_i
    P = [Fraction(n)]
    for k in range(1, kmax + 1):
        v = -k * e[k] if k <= n else Fraction(0)
        for i in range(1, min(k, n + 1)):
            v -= e[i] * P[k - i]
        P.append(v)
    return P


def verify_generating_identity(Z, lam0, kmax: int, roots: RootSet | None = None) -> tuple[float, float]:
    """Gap between ``Σ_{k≤kmax} Ξ(k) λ_0^{-k}`` and ``λ_0 Z'(λ_0)/Z(λ_0)``.

    Both sides are evaluated in exact arithmetic (λ_0 is converted exactly),
    so the gap is the pure truncation error.  Returns ``(gap, bound)`` with
    ``bound = N ρ^{kmax+1}/(1-ρ)``, ``ρ = max|λ_j| / |λ_0|``.
    """
    if isinstance(Z, AvgCharPoly):
        Z = Z.lambda_poly()
    coeffs = list(Z.coeffs)
    n = len(coeffs) - 1
    if roots is None:
        if n > 200:
            raise ValueError("pass roots explicitly for degree above 200")
        rr = np.roots([complex(c) for c in reversed(coeffs)]) if n else np.zeros(0)
    else:
        rr = roots.roots
    R = float(np.max(np.abs(rr))) * (1 + 1e-12) if len(rr) else 0.0
    rho = R / abs(complex(lam0))
    if rho >= 1:
        raise ValueError("λ_0 lies inside the root disk")
    x = exact(lam0)
    xi = power_sums_from_coeffs(coeffs, kmax)
    inv = 1 / x
    series = sum(xi[k] * inv ** k for k in range(kmax + 1))
    dZ = sum(k * coeffs[k] * x ** (k - 1) for k in range(1, n + 1))
    val = sum(coeffs[k] * x ** k for k in range(n + 1))
    gap = abs(complex(series - x * dZ / val))
    bound = n * rho ** (kmax + 1) / (1 - rho)
    return gap, bound
