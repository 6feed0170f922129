"""Self-contained invariant suites behind ``tenspec verify``."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .closed import InteractionPreset, avg_coeffs, hermite_consistency, mu_from_preset, wick_average
from .ensemble import MatrixSpec, mc_average_charpoly, mc_report
from .fuss_catalan import fc_branch_solve, fc_series, moments_check, r_max, rho_radial, z_c
from .grassmann import char_poly_matrix, hyperpfaffian, pfaffian
from .roots import avg_roots, verify_generating_identity
from .saddle import classify_real, rho_from_saddle
from .tensors import AntisymTensor, CouplingSet, char_poly_exact


def _rand_antisym(rng, n):
    a = rng.integers(-4, 5, size=(n, n))
    m = np.triu(a, 1)
    return [[Fraction(int(x)) for x in row] for row in (m - m.T)]


def suite_grassmann(quick: bool):
    rng = np.random.default_rng(1)
    out = []
    ok = True
    for _ in range(5 if quick else 30):
        n = int(rng.choice([2, 4, 6]))
        M = _rand_antisym(rng, n)
        ok &= pfaffian(M) ** 2 == char_poly_matrix(M)(0)
    out.append(("pfaffian squared equals determinant", ok, "random integer matrices"))
    ok = True
    for _ in range(2 if quick else 10):
        T = AntisymTensor.random_rational(4, 4, rng)
        Z = char_poly_exact(T, CouplingSet.split_species(4))
        ok &= Z(0) == hyperpfaffian(T) ** 2 * (-1) ** (4 * 3 // 2)
    out.append(("split-species polynomial at zero equals squared hyperpfaffian", ok, "n=4, p=4"))
    return out


def suite_closed(quick: bool):
    out = [("Hermite consistency", all(hermite_consistency(n) for n in range(1, 9)), "n=1..8")]
    pre = InteractionPreset("PsiP_PsiBarP")
    mu = mu_from_preset(pre, 3, 6, True)
    ok = wick_average(pre, 6, 3, True) == avg_coeffs(6, 3, mu).lambda_poly()
    out.append(("Wick average matches the closed form", ok, "p=3, n=6, complex"))
    return out


def suite_roots(quick: bool):
    out = []
    ok = True
    for p in range(2, 8):
        rs = avg_roots(50, p, Fraction(1, p) / Fraction(50) ** (p - 1))
        lam = rs.roots
        rot = lam * np.exp(2j * np.pi / p)
        ok &= bool(np.allclose(np.sort_complex(np.round(lam, 9)), np.sort_complex(np.round(rot, 9)), atol=1e-8))
        Z = avg_coeffs(50, p, Fraction(1, p) / Fraction(50) ** (p - 1))
        ok &= all(Z.exact_coeffs()[m] == 0 for m in range(51) if (50 - m) % p)
    out.append(("p-fold symmetry and sparsity", ok, "n=50, p=2..7"))
    Z = avg_coeffs(30, 3, Fraction(1, 3) / 900)
    gap, bound = verify_generating_identity(Z, 3.0, 20)
    out.append(("generating identity", gap <= bound, f"gap={gap:.3g} bound={bound:.3g}"))
    return out


def suite_fc(quick: bool):
    out = []
    err = max(moments_check(p, 3 if quick else 5) for p in (2, 3))
    out.append(("Fuss-Catalan moments", err < 1e-6, f"max rel err {err:.3g}"))
    gap = max(abs(fc_branch_solve(p, z_c(p) / 2 * 0.5) - fc_series(p, z_c(p) / 2 * 0.5, 200)) for p in (2, 3, 4))
    out.append(("branch solve matches the series", gap < 1e-10, f"gap {gap:.3g}"))
    return out


def suite_saddle(quick: bool):
    cases = [(3, 0.03, 1), (3, 0.23, 2), (4, 0.01, 1), (4, 0.06, 1), (4, 0.16, 2)]
    ok = all(classify_real(p, z0).n_leading == want for p, z0, want in cases)
    out = [("leading saddle counts", ok, "five reference (p, z0) points")]
    gap = 0.0
    for p, mt in ((2, 0.5), (3, 1 / 3)):
        rm = r_max(p, mt)
        for r in rm * (np.arange(1, 21) / 21):
            gap = max(gap, abs(rho_from_saddle(p, mt, r) - rho_radial(p, mt, r)))
    out.append(("saddle density equals the radial law", gap < 1e-6, f"max gap {gap:.3g}"))
    return out


def suite_mc(quick: bool):
    res = mc_average_charpoly(MatrixSpec(3, 1.0, 20000 if quick else 100000, 11))
    z = mc_report(res)["max_abs_z"]
    return [("Hermite average by Monte Carlo", z < 4, f"max |z| {z:.3g}")]


SUITES = {
    "grassmann": suite_grassmann,
    "closed": suite_closed,
    "roots": suite_roots,
    "fc": suite_fc,
    "saddle": suite_saddle,
    "mc": suite_mc,
}


def run_suites(name: str = "all", quick: bool = False) -> list[tuple[str, bool, str]]:
    names = list(SUITES) if name == "all" else [name]
    out = []
    for n in names:
        try:
            out.extend(SUITES[n](quick))
        except Exception as exc:  # report, do not abort the other suites
            out.append((n, False, f"{type(exc).__name__}: {exc}"))
    return out
