"""Wedge integrals of metric pairs and the path-level volume bounds.

Integrals are normalized so the flat torus has unit volume:

    integral(A^k wedge B^{n-k}) := grid mean of D_k(A; B) / binom(n, k)

where D_k is the mixed-determinant coefficient pairing k columns of A with
n-k columns of B (so A = B gives det A for every k, and the integrand at a
point equals sigma_k(P) * det B / binom(n, k) for the relative sigma's).
Everything downstream -- the eps-expansion of V(eps), the bigness floor,
the nef lower bounds -- is a statement about these normalized quantities
and is invariant under the normalization choice.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .fields import TorusMetricField
from .inequalities import InequalityReport, make_report, not_applicable


def _matrix_field(obj, grid):
    if isinstance(obj, TorusMetricField):
        return obj.g, obj.grid
    arr = np.asarray(obj, dtype=complex)
    if grid is None:
        raise ValueError("raw matrix fields need an explicit grid")
    return arr, grid


def mixed_determinants(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """All mixed coefficients D_k(A; B), k = 0..n, batched over leading axes.

    D_k sums det over the binom(n, k) column subsets drawn from A; it is
    the coefficient of t^k in det(t A + B).  Supported for n <= 3.
    """
    A = np.asarray(A, dtype=complex)
    B = np.asarray(B, dtype=complex)
    if A.shape != B.shape:
        raise DimensionMismatch(f"shapes differ: {A.shape} vs {B.shape}")
    n = A.shape[-1]
    if A.shape[-2] != n or n > 3:
        raise DimensionMismatch(f"expected (..., n, n) with n <= 3, got {A.shape}")
    out = np.zeros(A.shape[:-2] + (n + 1,), dtype=float)
    for r in range(n + 1):
        acc = 0.0
        for subset in itertools.combinations(range(n), r):
            M = B.copy()
            for j in subset:
                M[..., :, j] = A[..., :, j]
            acc = acc + np.linalg.det(M).real
        out[..., r] = acc
    return out


def wedge_integral(A, B, k: int, grid=None) -> float:
    """Normalized integral of A^k wedge B^{n-k} over a torus grid.

    A and B may be TorusMetricField objects or raw (grid + (n, n)) arrays
    (raw arrays need the grid passed explicitly).  Both operands must live
    on the same grid.
    """
    gA, gridA = _matrix_field(A, grid)
    gB, gridB = _matrix_field(B, grid)
    if gridA is not None and gridB is not None and gridA.shape != gridB.shape:
        raise DimensionMismatch("operands live on different grids")
    the_grid = gridA or gridB
    n = gA.shape[-1]
    if not 0 <= k <= n:
        raise ValueError(f"k must lie in 0..{n}, got {k}")
    D = mixed_determinants(gA, gB)
    integrand = D[..., k] / math.comb(n, k)
    return the_grid.mean(integrand)


def volume(field: TorusMetricField) -> float:
    """integral of omega^n (unit-volume normalization for the flat metric)."""
    return field.grid.mean(field.det_g)


# -- eps-expansion of the path volume ---------------------------------------


def fit_epsilon_expansion(epsilons, values, degree: int,
                          cond_limit: float = 1e8):
    """Least-squares polynomial fit of V(eps), guarded for conditioning.

    Returns (coefficients c_0..c_degree, condition number, max residual).
    The Vandermonde is built in eps/max(eps) so the condition number is
    scale-free; schedules too clustered to identify the coefficients are
    rejected rather than silently fit.
    """
    eps = np.asarray(list(epsilons), dtype=float)
    vals = np.asarray(list(values), dtype=float)
    if eps.size != vals.size:
        raise DimensionMismatch("epsilons and values differ in length")
    if eps.size < degree + 2:
        raise ValueError(
            f"need at least degree+2 = {degree + 2} states to fit and "
            f"cross-check, got {eps.size}"
        )
    scale = eps.max()
    V = np.vander(eps / scale, degree + 1, increasing=True)
    cond = float(np.linalg.cond(V))
    if cond > cond_limit:
        raise ValueError(
            f"eps schedule too ill-conditioned for the fit "
            f"(cond {cond:.2e} > {cond_limit:.1e}); spread the schedule"
        )
    a, *_ = np.linalg.lstsq(V, vals, rcond=None)
    coeffs = a / scale ** np.arange(degree + 1)
    resid = float(np.max(np.abs(V @ a - vals)))
    return coeffs, cond, resid


@dataclass
class ExpansionReport:
    """Fitted eps-expansion of V(eps) = integral omega_eps^n along a path.

    coefficient k of eps^k, divided by binom(n, k), estimates the class
    integral pairing (n-k) copies of the eps-independent class piece with
    k copies of omega; on a torus every piece except the top eps^n
    coefficient vanishes in class.
    """

    epsilons: list
    values: list
    coefficients: list
    implied_class_integrals: list
    condition_number: float
    fit_residual: float
    reference_volume: float
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "epsilons": self.epsilons,
            "values": self.values,
            "coefficients": self.coefficients,
            "implied_class_integrals": self.implied_class_integrals,
            "condition_number": self.condition_number,
            "fit_residual": self.fit_residual,
            "reference_volume": self.reference_volume,
            "note": self.note,
        }


def epsilon_expansion_check(path, omega: TorusMetricField,
                            cond_limit: float = 1e8) -> ExpansionReport:
    """Fit V(eps) over a solved path and report the expansion coefficients."""
    n = omega.n
    eps = [s.epsilon for s in path]
    vals = [omega.grid.mean(s.sigma_n_field * omega.det_g) for s in path]
    coeffs, cond, resid = fit_epsilon_expansion(eps, vals, n, cond_limit)
    implied = [float(coeffs[k]) / math.comb(n, k) for k in range(n + 1)]
    return ExpansionReport(
        epsilons=[float(e) for e in eps],
        values=[float(v) for v in vals],
        coefficients=[float(c) for c in coeffs],
        implied_class_integrals=implied,
        condition_number=cond,
        fit_residual=resid,
        reference_volume=volume(omega),
        note="torus expectation: c_k = 0 for k < n, c_n = reference volume",
    )


# -- volume floors ------------------------------------------------------------


@dataclass
class BignessReport:
    """Per-state and extrapolated checks of the volume floor

    integral omega_eps^n >= ((n+1) kappa0 / 2)^n * integral omega^n,
    meaningful only when kappa0 > 0.
    """

    kappa0: float
    per_state: list
    extrapolated: InequalityReport
    applicable: bool

    def as_dict(self) -> dict:
        return {
            "kappa0": self.kappa0,
            "per_state": [r.as_dict() for r in self.per_state],
            "extrapolated": self.extrapolated.as_dict(),
            "applicable": self.applicable,
        }


def bigness_bound_report(kappa0: float, omega: TorusMetricField, path,
                         tol: float = 1e-9,
                         cond_limit: float = 1e8) -> BignessReport:
    n = omega.n
    if kappa0 <= 0.0:
        na = not_applicable(
            "bigness-volume-floor",
            f"kappa0 = {kappa0:.6g} <= 0: no uniform negativity floor",
        )
        return BignessReport(float(kappa0), [na], na, applicable=False)
    ref = volume(omega)
    rhs = ((n + 1) * kappa0 / 2.0) ** n * ref
    per_state = []
    eps, vals = [], []
    for s in path:
        V = omega.grid.mean(s.sigma_n_field * omega.det_g)
        eps.append(s.epsilon)
        vals.append(V)
        per_state.append(make_report(
            "bigness-volume-floor", V, rhs, tol,
            note=f"eps={s.epsilon:.6g}",
        ))
    if len(path) >= n + 2:
        coeffs, _, _ = fit_epsilon_expansion(eps, vals, n, cond_limit)
        extrapolated = make_report(
            "bigness-volume-floor-limit", float(coeffs[0]), rhs, tol,
            note="eps -> 0 extrapolation (constant term of the fit)",
        )
    else:
        extrapolated = not_applicable(
            "bigness-volume-floor-limit",
            f"need >= {n + 2} states to extrapolate, have {len(path)}",
        )
    return BignessReport(float(kappa0), per_state, extrapolated, applicable=True)


def nef_lower_bound_check(path, omega: TorusMetricField, C=None,
                          tol: float = 1e-8) -> list:
    """Check integral omega_eps^k wedge omega^{n-k} >= C^{k/n-1} integral omega_eps^n.

    C must be a certified pointwise ceiling of sigma_n = omega_eps^n/omega^n
    (sigma_n = e^u <= exp(sup u) <= C); since k/n - 1 <= 0, the MacLaurin
    step sigma_k-quotient >= sigma_n^{k/n} = sigma_n * sigma_n^{k/n-1}
    >= sigma_n * C^{k/n-1} only holds with C above sigma_n.  By default C
    is taken from each state's recorded ceiling exp(log_c_bound).  One
    report per (state, k) for 1 <= k <= n; k = n is the trivial identity
    row.
    """
    n = omega.n
    reports = []
    for j, s in enumerate(path):
        if C is None:
            c_state = float(np.exp(s.log_c_bound))
        elif np.ndim(C) == 0:
            c_state = float(C)
        else:
            c_state = float(C[j])
        if c_state <= 0.0:
            reports.append(not_applicable(
                "nef-wedge-lower-bound",
                f"sigma_n ceiling {c_state:.6g} <= 0 at eps={s.epsilon:.6g}",
            ))
            continue
        top = wedge_integral(s.g_eps, omega, n, grid=omega.grid)
        for k in range(1, n + 1):
            lhs = wedge_integral(s.g_eps, omega, k, grid=omega.grid)
            rhs = c_state ** (k / n - 1.0) * top
            reports.append(make_report(
                "nef-wedge-lower-bound", lhs, rhs, tol,
                note=f"eps={s.epsilon:.6g} k={k} ceiling={c_state:.6g}",
            ))
    return reports
