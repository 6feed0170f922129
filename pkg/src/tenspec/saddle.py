"""Saddles of the large-N action, gradient flows and zero-location prediction.

Rescaled action ``S(q) = q - z q^p/p - log(q / z^{1/p})`` with ``q = λQ`` and
``z = pμ̃/λ^p``; its saddles solve ``z q^p - q + 1 = 0``.  The branch of
``z^{1/p}`` is principal, which shifts S by a q-independent constant.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .fuss_catalan import BranchPointError, fc_branch_solve, r_max
from .roots import ScaledPoly, find_roots

THETA0 = 0.02


class FlowError(RuntimeError):
    pass


@dataclass(frozen=True)
class ActionQ:
    """Large-N action in either parametrization.

    ``S_lambda(Q) = λQ - μ̃Q^p - log Q``;  ``S(q)`` is the rescaled form.
    """

    p: int
    z: complex

    @classmethod
    def from_lambda(cls, p: int, mu_tilde, lam) -> "ActionQ":
        return cls(p, complex(p * mu_tilde / complex(lam) ** p))

    def lam(self, mu_tilde, branch: int = 0) -> complex:
        """One of the p values of λ with ``z = pμ̃/λ^p``."""
        base = (complex(self.p * mu_tilde) / self.z) ** (1.0 / self.p)
        return base * cmath.exp(2j * math.pi * branch / self.p)

    def S(self, q):
        q = np.asarray(q, dtype=complex)
        p, z = self.p, self.z
        return q - z * q ** p / p - np.log(q / z ** (1.0 / p))

    def dS(self, q):
        q = np.asarray(q, dtype=complex)
        return 1 - self.z * q ** (self.p - 1) - 1 / q

    def d2S(self, q):
        q = np.asarray(q, dtype=complex)
        return -(self.p - 1) * self.z * q ** (self.p - 2) + 1 / q ** 2

    @staticmethod
    def S_lambda(Q, lam, mu_tilde, p):
        Q = np.asarray(Q, dtype=complex)
        return lam * Q - mu_tilde * Q ** p - np.log(Q)


@dataclass
class SaddlePoint:
    q: complex
    S: complex
    residual: float
    contributing: bool = False
    dominant: bool = False


@dataclass
class Thimble:
    saddle_index: int
    direction: str
    points: np.ndarray
    reason: str
    arc_length: float
    im_drift: float


@dataclass
class SaddleSet:
    p: int
    z: complex
    saddles: list
    thimbles: list = field(default_factory=list)
    contour_radius: float | None = None

    @property
    def n_contributing(self) -> int:
        return sum(s.contributing for s in self.saddles)

    @property
    def n_leading(self) -> int:
        return sum(s.dominant for s in self.saddles)

    def contributing(self) -> list:
        return [s for s in self.saddles if s.contributing]

    def leading(self) -> list:
        return [s for s in self.saddles if s.dominant]


def _newton(p, z, q, tol=1e-15, maxit=60):
    for _ in range(maxit):
        f = z * q ** p - q + 1
        d = p * z * q ** (p - 1) - 1
        if d == 0:
            break
        dq = f / d
        q -= dq
        if abs(dq) <= tol * max(1.0, abs(q)):
            break
    return q


def find_saddles(p: int, z) -> SaddleSet:
    """All p roots of ``z q^p - q + 1``, Newton-polished."""
    z = complex(z)
    if z == 0:
        raise ValueError("z = 0 leaves a single saddle; p saddles need z != 0")
    coeffs = np.zeros(p + 1, dtype=complex)
    coeffs[0], coeffs[1], coeffs[p] = 1, -1, z
    rs = find_roots(ScaledPoly.from_complex(coeffs), method="companion")
    act = ActionQ(p, z)
    out = []
    for q in sorted(rs.roots, key=lambda w: (round(w.real, 9), w.imag)):
        q = _newton(p, z, complex(q))
        res = abs(z * q ** p - q + 1)
        out.append(SaddlePoint(q, complex(act.S(q)), res))
    return SaddleSet(p, z, out)


def _ascent_angle(act: ActionQ, q: complex) -> float:
    """Direction along which Re S grows fastest near the saddle."""
    return -cmath.phase(complex(act.d2S(q))) / 2


def flow(act: ActionQ, q0: complex, direction: str = "ascent", sign: int = 1, *,
         saddle_index: int = 0, eps: float | None = None, max_abs: float = 1e3,
         min_abs: float = 1e-6, re_bound: float = 40.0, max_len: float = 1e4,
         max_steps: int = 100000, rtol: float = 1e-11, atol: float = 1e-13) -> Thimble:
    """Flow of ``dq/ds = ±conj(S')/|S'|`` from a saddle, parametrized by arc length.

    ``sign`` picks which of the two branches leaves the saddle.  The flow
    stops when |q| leaves ``[min_abs, max_abs]``, when Re S moves more than
    ``re_bound`` away from its saddle value, or after ``max_len`` of arc.
    """
    if direction not in ("ascent", "descent"):
        raise ValueError(f"direction must be ascent or descent, not {direction!r}")
    up = 1.0 if direction == "ascent" else -1.0
    S0 = complex(act.S(q0))
    if abs(complex(act.dS(q0))) > 1e-8 * max(1.0, abs(q0)):
        raise FlowError("starting point is not a saddle")
    eps = 1e-4 * max(1.0, abs(q0)) if eps is None else eps
    phi = _ascent_angle(act, q0) + (0.0 if up > 0 else math.pi / 2)
    start = q0 + sign * eps * cmath.exp(1j * phi)

    def rhs(s, y):
        q = complex(y[0], y[1])
        g = complex(act.dS(q))
        v = up * g.conjugate() / abs(g)
        return [v.real, v.imag]

    def ev_big(s, y):
        return math.hypot(y[0], y[1]) - max_abs

    def ev_small(s, y):
        return math.hypot(y[0], y[1]) - min_abs

    def ev_re(s, y):
        return abs(complex(act.S(complex(y[0], y[1]))).real - S0.real) - re_bound

    for ev in (ev_big, ev_small, ev_re):
        ev.terminal = True
    sol = integrate.solve_ivp(rhs, (0.0, max_len), [start.real, start.imag], method="DOP853",
                              events=(ev_big, ev_small, ev_re), rtol=rtol, atol=atol,
                              max_step=max(1.0, abs(q0)) * 0.05, dense_output=False)
    if sol.status < 0:
        raise FlowError(sol.message)
    pts = np.concatenate([[q0], sol.y[0] + 1j * sol.y[1]])
    if len(pts) > max_steps:
        pts = pts[:max_steps]
    reasons = ("|q| large", "|q| small", "Re S bound")
    reason = "arc length"
    for k, te in enumerate(sol.t_events):
        if len(te):
            reason = reasons[k]
    ims = np.unwrap(np.imag(act.S(pts[1:])), period=2 * math.pi)
    ref = S0.imag + 2 * math.pi * round((ims[0] - S0.imag) / (2 * math.pi))
    drift = float(np.max(np.abs(ims - ref))) if len(ims) else 0.0
    return Thimble(saddle_index, direction, pts, reason, float(sol.t[-1]) + eps, drift)


def circle_crossings(pts: np.ndarray, radius: float) -> int:
    """Number of times the polyline crosses ``|q| = radius``.

    Vertex sign changes of ``|q| - radius`` count once each; a chord that dips
    inside between two outside vertices (segment-circle test) counts twice.
    """
    out = np.abs(pts) >= radius
    n = int(np.count_nonzero(out[1:] != out[:-1]))
    p0, p1 = pts[:-1], pts[1:]
    d = p1 - p0
    dd = np.abs(d) ** 2
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.clip(-np.real(np.conj(p0) * d) / dd, 0, 1)
    closest = np.abs(p0 + np.nan_to_num(t) * d)
    dips = out[1:] & out[:-1] & (closest < radius) & (dd > 0)
    return n + 2 * int(np.count_nonzero(dips))


def _mark_leading(ss: "SaddleSet", rel: float = 1e-9) -> None:
    contrib = ss.contributing()
    for s in ss.saddles:
        s.dominant = False
    if contrib:
        best = max(s.S.real for s in contrib)
        for s in contrib:
            s.dominant = abs(s.S.real - best) <= rel * max(1.0, abs(best))


def contributing_saddles(p: int, z, contour_radius: float | None = None,
                         with_descent: bool = False, **flow_kw) -> SaddleSet:
    """Flag saddles whose dual (ascent) thimble has odd intersection with ``|q| = contour_radius``.

    The dual thimble is the union of both ascent branches; crossings are
    counted with orientation, so a dual thimble entering and leaving the
    disc (e.g. both branches ending at q = 0) does not contribute.
    ``dominant`` marks the contributing saddles of largest Re S.
    """
    ss = find_saddles(p, z)
    act = ActionQ(p, ss.z)
    if contour_radius is None:
        contour_radius = 1e-2 * min(abs(s.q) for s in ss.saddles)
    ss.contour_radius = contour_radius
    kw = dict(min_abs=min(1e-6, 0.1 * contour_radius))
    kw.update(flow_kw)
    for i, sp in enumerate(ss.saddles):
        total = 0
        for sign in (1, -1):
            th = flow(act, sp.q, "ascent", sign, saddle_index=i, **kw)
            ss.thimbles.append(th)
            total += circle_crossings(th.points, contour_radius)
            if with_descent:
                ss.thimbles.append(flow(act, sp.q, "descent", sign, saddle_index=i, **kw))
        sp.contributing = total % 2 == 1
    _mark_leading(ss)
    return ss


def classify_real(p: int, z0: float, theta0: float = THETA0, **kw) -> SaddleSet:
    """Classify at ``z0 e^{iθ0}`` and report S of the matching saddles at real ``z0``.

    On the real axis Stokes lines make the classification ambiguous; the small
    phase selects a side, while the reported actions are those at ``z0``.
    """
    tilted = contributing_saddles(p, z0 * cmath.exp(1j * theta0), **kw)
    real = find_saddles(p, z0)
    act = ActionQ(p, complex(z0))
    used = set()
    for sp in tilted.saddles:
        j = min((k for k in range(p) if k not in used), key=lambda k: abs(real.saddles[k].q - sp.q))
        used.add(j)
        rq = real.saddles[j].q
        sp.q, sp.S, sp.residual = rq, complex(act.S(rq)), real.saddles[j].residual
    _mark_leading(tilted)
    return tilted


# --- density and zero locations on the positive ray ------------------------

def omega_saddle(p: int, mu_tilde, lam) -> complex:
    """``λQ* = q*(z)`` on the branch continued from ``q(0) = 1``."""
    lam = complex(lam)
    if lam == 0:
        raise ValueError("λ = 0 is outside the saddle parametrization")
    z = p * complex(mu_tilde) / lam ** p
    return fc_branch_solve(p, z)


def ray_saddle(p: int, mu_tilde: float, r: float) -> complex:
    """Upper saddle of the colliding pair for real ``z = pμ̃/r^p > z_c``.

    Among the roots with Im q > 0 this is the one of smallest argument; it
    continues the q(0)=1 branch through the upper side of the cut.
    """
    z = p * mu_tilde / r ** p
    coeffs = np.zeros(p + 1)
    coeffs[0], coeffs[1], coeffs[p] = 1.0, -1.0, z
    rts = np.roots(coeffs[::-1])
    up = [q for q in rts if q.imag > 1e-12 * max(1.0, abs(q))]
    if not up:
        raise BranchPointError(f"no complex saddle pair at r={r} (outside the support)")
    q = min(up, key=lambda w: cmath.phase(w))
    return _newton(p, complex(z), complex(q))


def im_action_on_ray(p: int, mu_tilde: float, r: float) -> float:
    """``Im S[Q*]`` at real ``λ = r``: ``(1 - 1/p) Im q* - arg q*``."""
    q = ray_saddle(p, mu_tilde, r)
    return (1 - 1 / p) * q.imag - cmath.phase(q)


def rho_from_saddle(p: int, mu_tilde: float, r: float) -> float:
    """``(p/π)|Im Q*|`` with ``Q* = q*/r``; zero at and beyond the edge."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    rm = r_max(p, mu_tilde)
    if r >= rm:
        return 0.0
    if r == 0:
        # q* ~ (-1/z)^{1/p} as z -> ∞
        return p / math.pi * math.sin(math.pi / p) * (p * mu_tilde) ** (-1.0 / p)
    q = ray_saddle(p, mu_tilde, r)
    return p / math.pi * abs(q.imag) / r


def predict_zero_radii(p: int, mu_tilde: float, n: int, grid: int = 2000) -> np.ndarray:
    """Radii r on the positive ray with ``|Im S[Q*(r)]| = (π/2 + kπ)/N``.

    |Im S| decreases from π/p at r -> 0 to 0 at the edge; each level is
    bracketed on a grid and refined with Brent's method.
    """
    if mu_tilde <= 0:
        raise ValueError("zero prediction assumes μ̃ > 0")
    rm = r_max(p, mu_tilde)
    rs = rm * (np.arange(1, grid) / grid)
    g = np.array([abs(im_action_on_ray(p, mu_tilde, r)) for r in rs])
    out = []
    k = 0
    while True:
        level = (math.pi / 2 + k * math.pi) / n
        if level >= math.pi / p:
            break
        above = np.nonzero(g >= level)[0]
        below = np.nonzero(g < level)[0]
        if not len(above) or not len(below):
            break
        # last grid point still above the level, then the next one
        i = above[-1]
        if i + 1 >= len(rs):
            break
        a, b = rs[i], rs[i + 1]
        f = lambda r: abs(im_action_on_ray(p, mu_tilde, r)) - level  # noqa: E731
        out.append(optimize.brentq(f, a, b, xtol=1e-14 * rm, rtol=1e-14))
        k += 1
    return np.sort(np.array(out))


def zero_radius_deviation(predicted, radii) -> float:
    """Mean |Δr| pairing both lists from the outer edge inward."""
    a = np.sort(np.asarray(predicted, float))[::-1]
    b = np.sort(np.asarray(radii, float))[::-1]
    k = min(len(a), len(b))
    if k == 0:
        raise ValueError("nothing to compare")
    return float(np.mean(np.abs(a[:k] - b[:k])))
