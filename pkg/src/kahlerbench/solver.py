"""Monge-Ampère solves and the shrinking-coefficient continuity path.

The discrete problem on a torus grid is

    log det(alpha + Hess v) - v - (F + log det g_ref) = 0

for a real potential v, where alpha is a positive coefficient form, Hess is
the spectral complex Hessian, and g_ref carries the reference volume form.
Newton's method linearizes to (Delta_M - 1) delta = -residual with
Delta_M = trace(M^{-1} Hess .), solved by a preconditioned Krylov iteration
(Fourier-diagonal flat-Laplacian surrogate); steps are safeguarded by a
backtracking line search that never leaves the positive cone.

The continuity path solves the family

    det(eps g + Hess v_eps) = det(g) e^{v_eps + f},    f = -log det g,

downward in eps with warm starts shifted by the known n*log(eps'/eps)
drift, and records per-state diagnostics: sup u against the volume-ratio
ceiling, the Ricci identity residual, relative eigenvalue range, the trace
field S_eps, and the top volume ratio sigma_n.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg

from .errors import DimensionMismatch, NonConvergence, PositivityLoss
from .fields import FIELD_PD_RTOL, TorusMetricField
from .grids import TorusGrid
from .linalg import relative_eigenvalues_field, trace_s_field

LINE_SEARCH_HALVINGS = 30


@dataclass
class MAProblem:
    """One Monge-Ampère problem instance on a torus grid."""

    grid: TorusGrid
    alpha: np.ndarray
    reference: TorusMetricField
    datum: np.ndarray

    def __post_init__(self):
        n = self.grid.n
        want = self.grid.shape + (n, n)
        self.alpha = np.asarray(self.alpha, dtype=complex)
        if self.alpha.shape != want:
            raise DimensionMismatch(f"alpha shape {self.alpha.shape} != {want}")
        self.datum = np.asarray(self.datum, dtype=float)
        if self.datum.shape != self.grid.shape:
            raise DimensionMismatch(
                f"datum shape {self.datum.shape} != grid {self.grid.shape}"
            )
        if self.reference.grid.shape != self.grid.shape:
            raise DimensionMismatch("reference field lives on a different grid")

    @property
    def target(self) -> np.ndarray:
        return self.datum + self.reference.log_det_g


def _positivity(M: np.ndarray):
    w = np.linalg.eigvalsh(M)
    ratio = w[..., 0] - FIELD_PD_RTOL * np.maximum(w[..., -1], 0.0)
    worst = np.unravel_index(np.argmin(ratio), ratio.shape)
    ok = ratio[worst] > 0.0 and w[worst][-1] > 0.0
    return ok, worst, float(w[worst][0])


def ma_log_residual(problem: MAProblem, v: np.ndarray, M: np.ndarray = None) -> np.ndarray:
    """Forward evaluation of the log-form operator at v."""
    if M is None:
        M = problem.alpha + problem.grid.complex_hessian(v)
    det = np.linalg.det(M).real
    if np.any(det <= 0.0):
        worst = np.unravel_index(np.argmin(det), det.shape)
        raise PositivityLoss(
            f"candidate metric degenerate at grid index {worst}", point=worst
        )
    return np.log(det) - v - problem.target


def _solve_linearized(grid: TorusGrid, M_inv: np.ndarray, rhs: np.ndarray,
                      rtol: float) -> np.ndarray:
    """Solve (Delta_M - 1) delta = rhs with a flat-Laplacian preconditioner."""
    shape = grid.shape
    size = rhs.size
    c_bar = float(np.einsum("...ii->...", M_inv).real.mean()) / grid.n
    pre_mult = 1.0 / (c_bar * grid.flat_laplacian_multiplier - 1.0)

    def matvec(x):
        f = x.reshape(shape)
        H = grid.complex_hessian(f)
        lap = np.einsum("...ij,...ji->...", M_inv, H).real
        return (lap - f).reshape(size)

    def precond(x):
        f = x.reshape(shape)
        return np.fft.ifftn(np.fft.fftn(f) * pre_mult).real.reshape(size)

    A = scipy.sparse.linalg.LinearOperator((size, size), matvec=matvec, dtype=float)
    P = scipy.sparse.linalg.LinearOperator((size, size), matvec=precond, dtype=float)
    b = rhs.reshape(size)
    try:
        delta, info = scipy.sparse.linalg.bicgstab(A, b, M=P, rtol=rtol, atol=0.0,
                                                   maxiter=500)
    except TypeError:  # older scipy spells the kwarg `tol`
        delta, info = scipy.sparse.linalg.bicgstab(A, b, M=P, tol=rtol, atol=0.0,
                                                   maxiter=500)
    if info != 0:
        # Breakdown near the attainable floating-point floor still returns a
        # usable iterate; accept it when the true relative residual is small.
        achieved = np.linalg.norm(matvec(delta) - b) / max(np.linalg.norm(b), 1e-300)
        if achieved > 1e-6:
            raise NonConvergence(
                f"Krylov solve failed (info={info}, rel residual {achieved:.2e})"
            )
    return delta.reshape(shape)


def solve_ma(problem: MAProblem, tol: float = 1e-10, max_steps: int = 50,
             v0: np.ndarray = None, return_info: bool = False):
    """Newton solve of the Monge-Ampère problem to sup-norm tolerance.

    Returns the potential v (and an info dict with the residual history if
    return_info is set).  Raises PositivityLoss if the initial candidate
    leaves the positive cone, NonConvergence if the residual cannot be
    brought below tol.  The returned v is re-verified by an independent
    forward evaluation after the iteration.
    """
    grid = problem.grid
    v = np.zeros(grid.shape) if v0 is None else np.array(v0, dtype=float)
    if v.shape != grid.shape:
        raise DimensionMismatch(f"v0 shape {v.shape} != grid {grid.shape}")

    t0 = time.perf_counter()
    history = []
    M = problem.alpha + grid.complex_hessian(v)
    ok, worst, wmin = _positivity(M)
    if not ok:
        raise PositivityLoss(
            f"initial candidate not positive at grid index {worst}",
            point=worst, min_eigenvalue=wmin,
        )
    r = ma_log_residual(problem, v, M)
    res = float(np.max(np.abs(r)))
    history.append(res)

    steps = 0
    while res > tol:
        if steps >= max_steps:
            raise NonConvergence(
                f"Newton stalled at residual {res:.3e} after {steps} steps",
                residual=res, steps=steps,
            )
        M_inv = np.linalg.inv(M)
        rtol = max(1e-10, min(1e-4, 0.1 * res))
        delta = _solve_linearized(grid, M_inv, -r, rtol)

        t, accepted, any_positive = 1.0, False, False
        worst_pt, worst_eig = None, None
        for _ in range(LINE_SEARCH_HALVINGS + 1):
            v_try = v + t * delta
            M_try = problem.alpha + grid.complex_hessian(v_try)
            ok, pt, wmin = _positivity(M_try)
            if not ok:
                worst_pt, worst_eig = pt, wmin
                t *= 0.5
                continue
            any_positive = True
            r_try = ma_log_residual(problem, v_try, M_try)
            res_try = float(np.max(np.abs(r_try)))
            if res_try < res:
                v, M, r, res = v_try, M_try, r_try, res_try
                accepted = True
                break
            t *= 0.5
        if not accepted:
            if not any_positive:
                raise PositivityLoss(
                    f"line search could not restore positivity (grid index {worst_pt})",
                    point=worst_pt, min_eigenvalue=worst_eig,
                )
            raise NonConvergence(
                f"line search stalled at residual {res:.3e}", residual=res, steps=steps
            )
        steps += 1
        history.append(res)

    final = float(np.max(np.abs(ma_log_residual(problem, v))))
    if final > tol:
        raise NonConvergence(
            f"post-solve verification failed: residual {final:.3e} > tol {tol:.1e}",
            residual=final, steps=steps,
        )
    if return_info:
        info = {
            "residual_history": history,
            "final_residual": final,
            "newton_steps": steps,
            "seconds": time.perf_counter() - t0,
        }
        return v, info
    return v


def manufactured_problem(grid: TorusGrid, v_star: np.ndarray) -> MAProblem:
    """Problem whose exact solution is the supplied potential (flat data).

    Sets alpha = identity and F = log det(I + Hess v*) - v*, so the solve
    must recover v* up to solver tolerance.
    """
    reference = TorusMetricField(grid, np.zeros(grid.shape))
    eye = np.broadcast_to(np.eye(grid.n, dtype=complex),
                          grid.shape + (grid.n, grid.n)).copy()
    M = eye + grid.complex_hessian(np.asarray(v_star, dtype=float))
    det = np.linalg.det(M).real
    if np.any(det <= 0.0):
        raise PositivityLoss("manufactured potential leaves the positive cone")
    datum = np.log(det) - v_star
    return MAProblem(grid, eye, reference, datum)


# -- continuity path ---------------------------------------------------------


@dataclass
class ContinuityState:
    """One solved state of the family det(eps g + Hess v) = det(g) e^{v+f}."""

    epsilon: float
    v: np.ndarray
    u: np.ndarray
    f: np.ndarray
    g_eps: np.ndarray
    sup_u: float
    log_c_bound: float
    ricci_residual_sup: float
    rel_eig_min: float
    rel_eig_max: float
    s_field: np.ndarray
    sigma_n_field: np.ndarray
    newton_steps: int = 0

    @property
    def s_max(self) -> float:
        return float(self.s_field.max())


def volume_ratio_ceiling(omega: TorusMetricField, eps0: float) -> float:
    """log C with C = sup det(eps0 g + Hess log det g) / det g.

    The path invariant sup u_eps <= log C holds for every eps < eps0.
    """
    grid = omega.grid
    H = grid.complex_hessian(omega.log_det_g)
    ratio = np.linalg.det(eps0 * omega.g + H).real / omega.det_g
    top = float(ratio.max())
    if top <= 0.0:
        raise PositivityLoss("volume-ratio ceiling degenerate: sup ratio <= 0")
    return float(np.log(top))


def make_state(omega: TorusMetricField, epsilon: float, v: np.ndarray,
               f: np.ndarray, log_c: float, newton_steps: int = 0,
               refine: int = None) -> ContinuityState:
    grid = omega.grid
    g_eps = epsilon * omega.g + grid.complex_hessian(v)
    u = f + v
    lam = relative_eigenvalues_field(omega.g, g_eps)
    if refine is None:
        refine = 2 if grid.n <= 2 else 1
    if refine > 1:
        ricci_sup = ricci_residual_dealiased(omega, epsilon, v, pad=refine)
    else:
        ricci_sup = ricci_residual_of(g_eps, epsilon, omega)
    return ContinuityState(
        epsilon=float(epsilon),
        v=v, u=u, f=f, g_eps=g_eps,
        sup_u=float(u.max()),
        log_c_bound=log_c,
        ricci_residual_sup=ricci_sup,
        rel_eig_min=float(lam.min()),
        rel_eig_max=float(lam.max()),
        s_field=trace_s_field(omega.g, g_eps),
        sigma_n_field=np.linalg.det(g_eps).real / omega.det_g,
        newton_steps=newton_steps,
    )


def continuity_path(omega: TorusMetricField, epsilons, tol: float = 1e-10,
                    max_steps: int = 50) -> list:
    """Solve the family along a strictly decreasing positive eps schedule.

    Warm-starts each solve from the previous state shifted by the exact
    flat drift n log(eps'/eps).  Solver failures propagate annotated with
    the offending eps; already-computed states are not returned partially.
    """
    eps = [float(e) for e in epsilons]
    if not eps or any(e <= 0.0 for e in eps):
        raise ValueError("eps schedule must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps schedule must be strictly decreasing")

    grid = omega.grid
    f = -omega.log_det_g
    log_c = volume_ratio_ceiling(omega, eps[0])
    states = []
    v_prev = None
    for i, e in enumerate(eps):
        if v_prev is None:
            v0 = np.full(grid.shape, grid.n * np.log(e))
        else:
            v0 = v_prev + grid.n * np.log(e / eps[i - 1])
        problem = MAProblem(grid, e * omega.g, omega, f)
        try:
            v, info = solve_ma(problem, tol=tol, max_steps=max_steps, v0=v0,
                               return_info=True)
        except (PositivityLoss, NonConvergence) as err:
            err.epsilon = e
            raise
        states.append(make_state(omega, e, v, f, log_c,
                                 newton_steps=info["newton_steps"]))
        v_prev = v
    return states


def ricci_residual_of(g_eps: np.ndarray, epsilon: float,
                      omega: TorusMetricField) -> float:
    """sup-norm of Ric(omega_eps) + omega_eps - eps*omega over the grid.

    Ric is the spectral -dd^c log det g_eps; the residual measures how
    exactly the solved state satisfies the twisted Einstein identity.
    """
    grid = omega.grid
    det = np.linalg.det(g_eps).real
    if np.any(det <= 0.0):
        raise PositivityLoss("state metric degenerate; Ricci residual undefined")
    ric = -grid.complex_hessian(np.log(det))
    resid = ric + g_eps - epsilon * omega.g
    return float(np.max(np.abs(resid)))


def ricci_residual(state: ContinuityState, omega: TorusMetricField) -> float:
    return ricci_residual_of(state.g_eps, state.epsilon, omega)


def ricci_residual_dealiased(omega: TorusMetricField, epsilon: float,
                             v: np.ndarray, pad: int = 2) -> float:
    """Ricci identity residual with the determinant evaluated dealiased.

    On the solve grid the raw residual is the spectral Hessian of the
    Newton stopping residual — it reflects the solver, not the
    discretization.  Here log det(omega_eps) is instead evaluated on a
    pad-times finer grid (trigonometric prolongation of v and the
    background potential) and truncated back to the solve band before the
    Ricci Hessian is taken.  That removes the fold-back of product terms
    the solve grid cannot represent, so the value measures genuine
    discretization error and decays at the spectral rate under grid
    refinement.
    """
    grid = omega.grid
    fine = TorusGrid(grid.n, pad * grid.N)
    omega_fine = TorusMetricField(fine, grid.prolong(omega.psi, fine))
    v_fine = grid.prolong(np.asarray(v, dtype=float), fine)
    g_eps_fine = epsilon * omega_fine.g + fine.complex_hessian(v_fine)
    det = np.linalg.det(g_eps_fine).real
    if np.any(det <= 0.0):
        raise PositivityLoss("state metric degenerate on the dealiasing grid")
    ldg = fine.restrict(np.log(det), grid)
    ric = -grid.complex_hessian(ldg)
    g_eps = epsilon * omega.g + grid.complex_hessian(np.asarray(v, dtype=float))
    resid = ric + g_eps - epsilon * omega.g
    return float(np.max(np.abs(resid)))


@dataclass
class LimitProbeReport:
    """Drift of the normalized potentials w = u - n log eps along the path.

    On a torus the family collapses (u ~ n log eps, volume eps^n -> 0);
    bounded, shrinking drifts certify the normalized limit, while the raw
    u's diverge.  A single-state path has nothing to compare: empty report.
    """

    epsilons: list
    drifts: list
    converging: bool
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "epsilons": [float(e) for e in self.epsilons],
            "drifts": [float(d) for d in self.drifts],
            "converging": self.converging,
            "note": self.note,
        }


def limit_probe(path) -> LimitProbeReport:
    eps = [s.epsilon for s in path]
    if len(path) < 2:
        return LimitProbeReport(eps, [], converging=False,
                                note="single-state path: no drift to measure")
    n = path[0].g_eps.shape[-1]
    ws = [s.u - n * np.log(s.epsilon) for s in path]
    drifts = [float(np.max(np.abs(b - a))) for a, b in zip(ws, ws[1:])]
    # "converging" = drifts stop growing and the tail drift is small in
    # absolute terms; loose by design, this is a probe rather than a proof.
    tail_shrinks = all(d2 <= d1 * 1.5 + 1e-14 for d1, d2 in zip(drifts, drifts[1:]))
    converging = bool(tail_shrinks and drifts[-1] < 1.0)
    note = ("normalized potentials u - n log eps settle; raw u diverges like "
            "n log eps (torus volume collapse)")
    return LimitProbeReport(eps, drifts, converging, note)
