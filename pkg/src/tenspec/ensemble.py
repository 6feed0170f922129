"""Monte Carlo over Gaussian tensors and symmetric matrices.

Each sample draws from its own counter-based stream keyed by (seed, index),
samples are processed in fixed-size chunks, and chunk statistics are merged
by a pairwise tree of fixed shape, so results do not depend on the number of
worker threads.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import numpy as np

from .algebra import CRational, LambdaPoly, exact
from .closed import (
    InteractionPreset,
    avg_coeffs,
    dict_mul,
    hermite_reference,
    mu_from_preset,
    preset_currents,
)
from .grassmann import char_poly_matrix, paired_partition, paired_partition_batched
from .tensors import AntisymTensor

CHUNK = 1024


def worker_count(requested: int | None = None) -> int:
    env = os.environ.get("TENSPEC_THREADS")
    cap = int(env) if env and env.isdigit() and int(env) > 0 else (os.cpu_count() or 1)
    return max(1, min(cap, requested or cap))


def sample_stream(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one sample: Philox keyed by ``(seed, index)``."""
    key = ((int(seed) & (2 ** 64 - 1)) << 64) | (int(index) & (2 ** 64 - 1))
    return np.random.Generator(np.random.Philox(key=key))


@dataclass
class EnsembleSpec:
    """Gaussian antisymmetric tensor ensemble coupled through a preset."""

    n: int
    p: int
    scalar_kind: str = "real"
    preset: InteractionPreset = field(default_factory=lambda: InteractionPreset("PsiP_PsiBarP"))
    samples: int = 1000
    seed: int = 0
    beta: object = None

    def __post_init__(self):
        if self.scalar_kind not in ("real", "complex"):
            raise ValueError(f"unknown scalar kind {self.scalar_kind!r}")
        if not 2 <= self.p <= self.n:
            raise ValueError(f"need 2 <= p <= n, got p={self.p}, n={self.n}")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.beta is not None:
            self.preset = InteractionPreset(self.preset.kind, self.preset.k, self.preset.alpha, self.beta)

    @property
    def complex_tensor(self) -> bool:
        return self.scalar_kind == "complex"

    def variance(self):
        """Exact ``β/N^{p-1}`` of each independent entry."""
        return self.preset.resolved_beta(self.p, self.complex_tensor) / Fraction(self.n) ** (self.p - 1)

    def tuples(self) -> list[tuple]:
        return list(combinations(range(self.n), self.p))

    def mu(self):
        return mu_from_preset(self.preset, self.p, self.n, self.complex_tensor)

    def reference(self) -> list:
        return avg_coeffs(self.n, self.p, self.mu()).exact_coeffs()


@dataclass
class MatrixSpec:
    """Real symmetric Gaussian matrices: off-diagonal variance σ², diagonal 2σ²."""

    n: int
    sigma: float = 1.0
    samples: int = 1000
    seed: int = 0

    def reference(self) -> list:
        return hermite_reference(self.n, self.sigma).padded(self.n + 1)


def sample_entries(spec: EnsembleSpec, rng: np.random.Generator) -> np.ndarray:
    """Entries on increasing tuples (lexicographic order)."""
    m = math.comb(spec.n, spec.p)
    var = float(spec.variance())
    if spec.complex_tensor:
        s = math.sqrt(var / 2)
        return s * rng.standard_normal(m) + 1j * s * rng.standard_normal(m)
    return math.sqrt(var) * rng.standard_normal(m)


def sample_tensor(spec: EnsembleSpec, rng: np.random.Generator) -> AntisymTensor:
    vals = sample_entries(spec, rng)
    kind = spec.scalar_kind
    out = {}
    for idx, v in zip(spec.tuples(), vals):
        out[idx] = CRational.make(Fraction(float(v.real)), Fraction(float(v.imag))) if kind == "complex" \
            else Fraction(float(v))
    return AntisymTensor(spec.n, spec.p, out, kind)


def sample_symmetric_matrix(n: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((n, n)) * sigma
    m = np.triu(g, 1)
    return m + m.T + np.diag(math.sqrt(2.0) * np.diag(g))


# --- per-sample interaction --------------------------------------------------

@dataclass
class _Structure:
    """Per-sample coefficients are ``At @ t + Ab @ conj(t) + Aa @ |t|²``."""

    masks: list
    At: np.ndarray
    Ab: np.ndarray
    Aa: np.ndarray
    exact_terms: list  # per tuple: list of (mask, feature, exact weight)


def _structure(spec: EnsembleSpec) -> _Structure:
    """Real even p: ``α t (J + J̄)``.  Complex even p: ``α (t J + t̄ J̄)``.

    Odd p has a Grassmann-odd tensor action, so each sample uses the
    contracted form ``α² |t|² J̄J``, whose average equals the Gaussian
    average of the full action because ``(J̄J)²`` vanishes.
    """
    alpha = exact(spec.preset.alpha)
    tuples = spec.tuples()
    per_tuple = []
    for idx in tuples:
        J, Jb = preset_currents(spec.preset, idx)
        terms = []
        if spec.p % 2:
            for m, c in dict_mul(Jb, J).items():
                terms.append((m, "a", c * alpha * alpha))
        elif spec.complex_tensor:
            terms += [(m, "t", c * alpha) for m, c in J.items()]
            terms += [(m, "b", c * alpha) for m, c in Jb.items()]
        else:
            for m, c in list(J.items()) + list(Jb.items()):
                terms.append((m, "t", c * alpha))
        per_tuple.append(terms)
    masks = sorted({m for terms in per_tuple for m, _, _ in terms})
    pos = {m: i for i, m in enumerate(masks)}
    mats = {f: np.zeros((len(masks), len(tuples)), dtype=complex) for f in "tba"}
    for j, terms in enumerate(per_tuple):
        for m, f, c in terms:
            mats[f][pos[m], j] += complex(c)
    return _Structure(masks, mats["t"], mats["b"], mats["a"], per_tuple)


def exact_sample_charpoly(spec: EnsembleSpec, T: AntisymTensor, structure: _Structure | None = None) -> LambdaPoly:
    """Per-sample polynomial in exact arithmetic (cross-check of the float path)."""
    st = structure or _structure(spec)
    inter: dict = {}
    for idx, terms in zip(spec.tuples(), st.exact_terms):
        t = T[idx]
        tb = t.conjugate() if isinstance(t, CRational) else t
        feat = {"t": t, "b": tb, "a": t * tb}
        for m, f, c in terms:
            inter[m] = inter.get(m, 0) + c * feat[f]
    return paired_partition(spec.n, inter)


def _batch_coeffs(spec: EnsembleSpec, st: _Structure, tvals: np.ndarray) -> np.ndarray:
    """``tvals`` has shape (tuples, B); returns (B, n+1) ascending coefficients."""
    C = st.At @ tvals + st.Ab @ np.conj(tvals) + st.Aa @ (np.abs(tvals) ** 2)
    return paired_partition_batched(spec.n, st.masks, C)


def _matrix_coeffs(ms: np.ndarray) -> np.ndarray:
    """Ascending coefficients of ``det(λ - M)`` for a stack of symmetric matrices."""
    ev = np.linalg.eigvalsh(ms)
    B, n = ev.shape
    e = np.zeros((B, n + 1))
    e[:, 0] = 1.0
    for i in range(n):
        e[:, 1:i + 2] = e[:, 1:i + 2] - ev[:, i:i + 1] * e[:, 0:i + 1]
    # e holds descending coefficients of ∏(λ - ev)
    return e[:, ::-1].astype(complex)


# --- streaming moments -------------------------------------------------------

@dataclass
class RunningMoments:
    """Count, mean and centred second moments (real and imaginary parts separately)."""

    count: int = 0
    mean: np.ndarray | None = None
    m2_re: np.ndarray | None = None
    m2_im: np.ndarray | None = None

    @classmethod
    def from_batch(cls, x: np.ndarray) -> "RunningMoments":
        x = np.asarray(x, dtype=complex)
        mu = x.mean(axis=0)
        d = x - mu
        return cls(len(x), mu, np.sum(d.real ** 2, axis=0), np.sum(d.imag ** 2, axis=0))

    def update(self, x) -> None:
        """Welford update with one sample vector."""
        x = np.asarray(x, dtype=complex)
        if self.count == 0:
            self.count, self.mean = 1, x.copy()
            self.m2_re, self.m2_im = np.zeros(len(x)), np.zeros(len(x))
            return
        self.count += 1
        d = x - self.mean
        self.mean = self.mean + d / self.count
        d2 = x - self.mean
        self.m2_re = self.m2_re + d.real * d2.real
        self.m2_im = self.m2_im + d.imag * d2.imag

    def merge(self, other: "RunningMoments") -> "RunningMoments":
        """Chan et al. pairwise combination."""
        if self.count == 0:
            return other
        if other.count == 0:
            return self
        n = self.count + other.count
        d = other.mean - self.mean
        w = self.count * other.count / n
        return RunningMoments(n, self.mean + d * (other.count / n),
                              self.m2_re + other.m2_re + d.real ** 2 * w,
                              self.m2_im + other.m2_im + d.imag ** 2 * w)

    def _se(self, m2):
        if self.count < 2:
            return np.full(len(m2), np.inf)
        return np.sqrt(m2 / (self.count - 1) / self.count)

    @property
    def stderr_re(self) -> np.ndarray:
        return self._se(self.m2_re)

    @property
    def stderr_im(self) -> np.ndarray:
        return self._se(self.m2_im)


def tree_reduce(parts: list) -> RunningMoments:
    """Pairwise reduction with a shape fixed by ``len(parts)``."""
    if not parts:
        return RunningMoments()
    while len(parts) > 1:
        nxt = [parts[i].merge(parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


@dataclass
class MCResult:
    mean: np.ndarray
    stderr_re: np.ndarray
    stderr_im: np.ndarray
    count: int
    reference: list

    def mu_hat(self, n: int, p: int) -> tuple[float, float]:
        """``μ̂`` and its standard error from the ``λ^{n-p}`` coefficient."""
        f = math.factorial(n) // math.factorial(n - p)
        return float(-self.mean[n - p].real / f), float(self.stderr_re[n - p] / f)


def _chunk_task(spec, st, lo, hi):
    if isinstance(spec, MatrixSpec):
        ms = np.stack([sample_symmetric_matrix(spec.n, spec.sigma, sample_stream(spec.seed, i))
                       for i in range(lo, hi)])
        return RunningMoments.from_batch(_matrix_coeffs(ms))
    tv = np.stack([sample_entries(spec, sample_stream(spec.seed, i)) for i in range(lo, hi)], axis=1)
    return RunningMoments.from_batch(_batch_coeffs(spec, st, tv))


def mc_average_charpoly(spec, workers: int | None = None, chunk: int = CHUNK) -> MCResult:
    """Mean and standard errors of the per-sample characteristic-polynomial coefficients."""
    st = _structure(spec) if isinstance(spec, EnsembleSpec) else None
    bounds = [(lo, min(lo + chunk, spec.samples)) for lo in range(0, spec.samples, chunk)]
    nw = worker_count(workers)
    if nw == 1:
        parts = [_chunk_task(spec, st, lo, hi) for lo, hi in bounds]
    else:
        with ThreadPoolExecutor(max_workers=nw) as ex:
            parts = list(ex.map(lambda b: _chunk_task(spec, st, *b), bounds))
    rm = tree_reduce(parts)
    return MCResult(rm.mean, rm.stderr_re, rm.stderr_im, rm.count, spec.reference())


# --- z-scores ---------------------------------------------------------------------

@dataclass
class ZReport:
    rows: list  # (power of λ, mean, reference, stderr, z)
    max_abs_z: float

    def to_dict(self) -> dict:
        return {"rows": [dict(zip(("power", "mean", "reference", "stderr", "z"), r)) for r in self.rows],
                "max_abs_z": self.max_abs_z}


def zscore_report(mean, stderr, reference) -> ZReport:
    """Per-coefficient ``(mean - reference)/stderr`` on real arrays."""
    mean = np.asarray(mean, dtype=float)
    stderr = np.asarray(stderr, dtype=float)
    ref = np.asarray([float(r) for r in reference], dtype=float)
    if not (len(mean) == len(stderr) == len(ref)):
        raise ValueError("mean, stderr and reference must have the same length")
    rows = []
    zmax = 0.0
    for k, (m, s, r) in enumerate(zip(mean, stderr, ref)):
        gap = m - r
        if s == 0:
            if abs(gap) > 1e-12 * max(1.0, abs(r)):
                raise ZeroDivisionError(f"zero standard error with gap {gap} at λ^{k}")
            z = 0.0
        else:
            z = gap / s
        zmax = max(zmax, abs(z))
        rows.append((k, float(m), float(r), float(s), float(z)))
    return ZReport(rows, zmax)


def mc_report(res: MCResult) -> dict:
    """z tables for the real and imaginary parts against the exact reference."""
    ref = [complex(r) for r in res.reference]
    re = zscore_report(res.mean.real, res.stderr_re, [r.real for r in ref])
    im = zscore_report(res.mean.imag, res.stderr_im, [r.imag for r in ref])
    return {"samples": res.count, "re": re.to_dict(), "im": im.to_dict(),
            "max_abs_z": max(re.max_abs_z, im.max_abs_z)}


def exact_matrix_charpoly(M) -> LambdaPoly:
    return char_poly_matrix([[Fraction(float(x)) for x in row] for row in M])
