"""Kähler metric fields over the two substrates.

A metric field knows how to produce, at any admissible point P:

    metric_matrix_at(P)   the matrix g_{i jbar}(P)
    dg_at(P)[i, j, k]     d g_{i jbar} / dz^k
    ddg_at(P)[i, j, k, l] d^2 g_{i jbar} / dz^k dzbar^l
    ricci_at(P)           the Ricci form -dd^c log det g as a matrix

On the periodic torus the metric is flat + complex Hessian of a real
potential sampled on the grid; derivatives are spectral and arbitrary-point
queries go through trigonometric interpolation (exact for band-limited
potentials).  On an analytic chart the potential is a closed-form symbolic
expression in z and zbar treated as independent variables, and every
derivative is a lambdified exact formula.

Torus potentials are stored in the zero-mean gauge: dd^c kills constants,
so the mean is pure gauge and fixing it keeps field comparisons and file
round-trips literal.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import sympy as sp

from .errors import DimensionMismatch, PositivityLoss
from .grids import ChartGeometry, TorusGrid
from .linalg import HermitianMetric

# Per-point positivity guard for metric fields: smallest eigenvalue must
# exceed this multiple of the largest at the same point.
FIELD_PD_RTOL = 1e-10


def _check_field_positivity(g: np.ndarray, describe_point):
    w = np.linalg.eigvalsh(g)
    ratio = w[..., 0] - FIELD_PD_RTOL * w[..., -1]
    worst = np.unravel_index(np.argmin(ratio), ratio.shape)
    if ratio[worst] <= 0.0 or w[worst][..., -1] <= 0.0:
        raise PositivityLoss(
            f"metric loses positivity at point {describe_point(worst)}: "
            f"eigenvalues {w[worst]}",
            point=describe_point(worst),
            min_eigenvalue=float(w[worst][..., 0]),
        )


class TorusMetricField:
    """g = identity + complex Hessian of a real periodic potential."""

    kind = "periodic-torus"

    def __init__(self, grid: TorusGrid, psi: np.ndarray):
        psi = np.asarray(psi, dtype=float)
        if psi.shape != grid.shape:
            raise DimensionMismatch(f"potential shape {psi.shape} != grid {grid.shape}")
        self.grid = grid
        self.n = grid.n
        self.psi = psi - psi.mean()  # zero-mean gauge
        eye = np.eye(self.n, dtype=complex)
        self.g = eye + grid.complex_hessian(self.psi)
        _check_field_positivity(self.g, lambda idx: idx)

    @property
    def geometry(self) -> TorusGrid:
        return self.grid

    def trusted(self, point) -> bool:
        return True

    @cached_property
    def psi_hat(self) -> np.ndarray:
        return self.grid.fft(self.psi)

    @cached_property
    def g_inv(self) -> np.ndarray:
        return np.linalg.inv(self.g)

    @cached_property
    def det_g(self) -> np.ndarray:
        return np.linalg.det(self.g).real

    @cached_property
    def log_det_g(self) -> np.ndarray:
        return np.log(self.det_g)

    @cached_property
    def dg(self) -> np.ndarray:
        """dg[..., i, j, k] = d g_{i jbar} / dz^k over the grid."""
        return self.grid.hessian_third(self.psi)

    @cached_property
    def ddg(self) -> np.ndarray:
        """ddg[..., i, j, k, l] = d^2 g_{i jbar} / dz^k dzbar^l over the grid."""
        return self.grid.hessian_fourth(self.psi)

    @cached_property
    def ricci(self) -> np.ndarray:
        """Ricci form -dd^c log det g as a Hermitian matrix field."""
        H = self.grid.complex_hessian(self.log_det_g)
        return -H

    # -- pointwise queries (trigonometric interpolation) -------------------

    def _point(self, point) -> np.ndarray:
        p = np.asarray(point, dtype=float).reshape(-1)
        if p.size != 2 * self.n:
            raise DimensionMismatch(
                f"torus point needs {2 * self.n} real coordinates, got {p.size}"
            )
        return p

    def metric_matrix_at(self, point) -> np.ndarray:
        p = self._point(point)[None, :]
        n, grid = self.n, self.grid
        out = np.eye(n, dtype=complex)
        for i in range(n):
            for j in range(i, n):
                coeff = self.psi_hat * grid.dz_multiplier(i) * grid.dzbar_multiplier(j)
                val = grid.eval_spectral(coeff, p)[0]
                out[i, j] += val
                if j != i:
                    out[j, i] += np.conj(val)
                else:
                    out[i, i] = out[i, i].real
        return out

    def metric_at(self, point) -> HermitianMetric:
        return HermitianMetric.from_matrix(self.metric_matrix_at(point), atol=1e-9)

    def dg_at(self, point) -> np.ndarray:
        p = self._point(point)[None, :]
        n, grid = self.n, self.grid
        out = np.empty((n, n, n), dtype=complex)
        for i, j, k in itertools.product(range(n), repeat=3):
            coeff = (
                self.psi_hat
                * grid.dz_multiplier(i)
                * grid.dzbar_multiplier(j)
                * grid.dz_multiplier(k)
            )
            out[i, j, k] = grid.eval_spectral(coeff, p)[0]
        return out

    def ddg_at(self, point) -> np.ndarray:
        p = self._point(point)[None, :]
        n, grid = self.n, self.grid
        out = np.empty((n, n, n, n), dtype=complex)
        for i, j, k, l in itertools.product(range(n), repeat=4):
            coeff = (
                self.psi_hat
                * grid.dz_multiplier(i)
                * grid.dzbar_multiplier(j)
                * grid.dz_multiplier(k)
                * grid.dzbar_multiplier(l)
            )
            out[i, j, k, l] = grid.eval_spectral(coeff, p)[0]
        return out

    def ricci_at(self, point) -> np.ndarray:
        from .curvature import ricci_from_derivatives

        g = self.metric_matrix_at(point)
        return ricci_from_derivatives(g, self.dg_at(point), self.ddg_at(point))


class ChartMetricField:
    """Metric from a closed-form potential on an analytic chart.

    The potential is a sympy expression in 2n symbols: z_1..z_n and their
    formal conjugates.  Reality of the potential is the caller's promise;
    a Hermitian-drift check on the evaluated metric catches violations.
    """

    kind = "analytic-chart"

    def __init__(self, geometry: ChartGeometry, potential: sp.Expr,
                 z_symbols, zbar_symbols):
        self.geometry = geometry
        self.n = geometry.n
        self.potential = sp.sympify(potential)
        self.z = tuple(z_symbols)
        self.zbar = tuple(zbar_symbols)
        if len(self.z) != self.n or len(self.zbar) != self.n:
            raise DimensionMismatch(
                f"need {self.n} holomorphic and {self.n} antiholomorphic symbols"
            )
        self._lambdas = {}

    def _derivative(self, alpha, beta):
        """Lambdified d^{|alpha|+|beta|} potential / dz^alpha dzbar^beta."""
        key = (tuple(alpha), tuple(beta))
        fn = self._lambdas.get(key)
        if fn is None:
            expr = self.potential
            for i, a in enumerate(alpha):
                if a:
                    expr = sp.diff(expr, self.z[i], a)
            for j, b in enumerate(beta):
                if b:
                    expr = sp.diff(expr, self.zbar[j], b)
            fn = sp.lambdify(self.z + self.zbar, expr, modules="numpy")
            self._lambdas[key] = fn
        return fn

    def _point(self, point) -> np.ndarray:
        z = np.asarray(point, dtype=complex).reshape(-1)
        if z.size != self.n:
            raise DimensionMismatch(f"chart point needs {self.n} complex coordinates")
        if not self.geometry.trusted(z):
            raise ValueError(f"point {z} outside the trusted chart region")
        return z

    def _eval(self, alpha, beta, z: np.ndarray) -> complex:
        args = tuple(z) + tuple(np.conj(z))
        return complex(self._derivative(alpha, beta)(*args))

    def trusted(self, point) -> bool:
        z = np.asarray(point, dtype=complex).reshape(-1)
        return self.geometry.trusted(z)

    def _unit(self, i):
        e = [0] * self.n
        e[i] = 1
        return tuple(e)

    def metric_matrix_at(self, point) -> np.ndarray:
        z = self._point(point)
        n = self.n
        g = np.empty((n, n), dtype=complex)
        for i in range(n):
            ei = self._unit(i)
            for j in range(i, n):
                val = self._eval(ei, self._unit(j), z)
                g[i, j] = val
                g[j, i] = np.conj(val)
        scale = max(1.0, float(np.max(np.abs(g))))
        drift = float(np.max(np.abs(g - g.conj().T)))
        if drift > 1e-9 * scale:
            raise ValueError(
                f"metric not Hermitian at {z} (drift {drift:.2e}); "
                "is the potential real?"
            )
        g = (g + g.conj().T) / 2.0
        w = np.linalg.eigvalsh(g)
        if w[0] <= FIELD_PD_RTOL * max(w[-1], 0.0) or w[-1] <= 0.0:
            raise PositivityLoss(
                f"metric loses positivity at {z}: eigenvalues {w}",
                point=tuple(z), min_eigenvalue=float(w[0]),
            )
        return g

    def metric_at(self, point) -> HermitianMetric:
        return HermitianMetric.from_matrix(self.metric_matrix_at(point), atol=1e-9)

    def dg_at(self, point) -> np.ndarray:
        z = self._point(point)
        n = self.n
        out = np.empty((n, n, n), dtype=complex)
        for i, j, k in itertools.product(range(n), repeat=3):
            alpha = [0] * n
            alpha[i] += 1
            alpha[k] += 1
            out[i, j, k] = self._eval(tuple(alpha), self._unit(j), z)
        return out

    def ddg_at(self, point) -> np.ndarray:
        z = self._point(point)
        n = self.n
        out = np.empty((n, n, n, n), dtype=complex)
        for i, j, k, l in itertools.product(range(n), repeat=4):
            alpha = [0] * n
            alpha[i] += 1
            alpha[k] += 1
            beta = [0] * n
            beta[j] += 1
            beta[l] += 1
            out[i, j, k, l] = self._eval(tuple(alpha), tuple(beta), z)
        return out

    def ricci_at(self, point) -> np.ndarray:
        from .curvature import ricci_from_derivatives

        g = self.metric_matrix_at(point)
        return ricci_from_derivatives(g, self.dg_at(point), self.ddg_at(point))


MetricField = TorusMetricField | ChartMetricField


def metric_from_potential(geometry, potential, z_symbols=None, zbar_symbols=None):
    """Build the metric field of a potential on either substrate.

    Torus: `potential` is a real grid array; the metric is
    identity + complex Hessian, checked positive at every grid point.
    Chart: `potential` is a sympy expression and the symbol tuples name its
    holomorphic/antiholomorphic variables.
    """
    if isinstance(geometry, TorusGrid):
        return TorusMetricField(geometry, potential)
    if isinstance(geometry, ChartGeometry):
        if z_symbols is None or zbar_symbols is None:
            raise ValueError("chart fields need z_symbols and zbar_symbols")
        return ChartMetricField(geometry, potential, z_symbols, zbar_symbols)
    raise TypeError(f"unsupported geometry {type(geometry).__name__}")
