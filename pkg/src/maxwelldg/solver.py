"""Direct solution of the assembled saddle point systems."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import splu

from .assembly import Discretization
from .spaces import FemField

__all__ = ["ResonanceError", "Solution", "factorize", "solve_mixed",
           "solve_auxiliary", "SolutionOperator"]

# Relative diagonal drop in the LU factor below which the system is
# declared singular (an interior resonance or a defective setup).
PIVOT_RTOL = 1e-12


class ResonanceError(RuntimeError):
    """The saddle point matrix is numerically singular for this wavenumber."""


@dataclass
class Solution:
    """Discrete fields plus solver diagnostics."""

    u: FemField
    p: FemField
    lam: FemField | None
    residual: float        # algebraic residual, relative to the load
    pivot_ratio: float     # min/max modulus of the LU diagonal
    constraint_gap: float  # ||B u - C p|| relative to operator/field scales


def factorize(matrix):
    """Sparse LU with a relative pivot check."""
    try:
        lu = splu(matrix.tocsc())
    except RuntimeError as err:
        raise ResonanceError(f"saddle point factorization failed: {err}") from err
    diag = np.abs(lu.U.diagonal())
    ratio = diag.min() / diag.max() if diag.size else 0.0
    if ratio < PIVOT_RTOL:
        raise ResonanceError(
            f"saddle point matrix is numerically singular (pivot ratio {ratio:.2e})")
    return lu, ratio


def _residual(matrix, x, rhs) -> float:
    scale = np.linalg.norm(rhs)
    return float(np.linalg.norm(matrix @ x - rhs) / (scale if scale > 0 else 1.0))


def _constraint_gap(disc: Discretization, u: np.ndarray, p: np.ndarray) -> float:
    gap = np.linalg.norm(disc.b_matrix @ u - disc.c_matrix @ p)
    bscale = np.sqrt((disc.b_matrix.power(2)).sum())
    cscale = np.sqrt((disc.c_matrix.power(2)).sum())
    denom = bscale * np.linalg.norm(u) + cscale * np.linalg.norm(p)
    return float(gap / (denom if denom > 0 else 1.0))


def solve_mixed(disc: Discretization, ksq: float, load: np.ndarray) -> Solution:
    """Solve the two-field system for (u, p)."""
    system = disc.primal_system(ksq)
    lu, pivot = factorize(system)
    sol = lu.solve(load)
    nv = disc.spaces.dim_V
    u, p = sol[:nv], sol[nv:]
    return Solution(FemField("V", u), FemField("Q", p), None,
                    _residual(system, sol, load), pivot,
                    _constraint_gap(disc, u, p))


def solve_auxiliary(disc: Discretization, ksq: float, load: np.ndarray) -> Solution:
    """Solve the three-field system with the explicit face multiplier.

    The load is given in (V, Q) layout; the multiplier row carries no
    data.  The returned (u, p) match the two-field solve and the
    multiplier carries the normal jump of p.
    """
    sp = disc.spaces
    nv, nm = sp.dim_V, sp.dim_M
    full = np.zeros(nv + nm + sp.dim_Q)
    full[:nv] = load[:nv]
    full[nv + nm:] = load[nv:]
    system = disc.auxiliary_system(ksq)
    lu, pivot = factorize(system)
    sol = lu.solve(full)
    u, lam, p = sol[:nv], sol[nv:nv + nm], sol[nv + nm:]
    return Solution(FemField("V", u), FemField("Q", p), FemField("M", lam),
                    _residual(system, sol, full), pivot,
                    _constraint_gap(disc, u, p))


class SolutionOperator:
    """Factorized solution operator at a fixed wavenumber (default 0).

    At ksq = 0 this is the discrete source-to-field map whose spectral
    properties mirror the continuous solution operator; the
    factorization is reused across right hand sides.
    """

    def __init__(self, disc: Discretization, ksq: float = 0.0):
        self.disc = disc
        self.ksq = ksq
        self._system = disc.primal_system(ksq)
        self._lu, self.pivot_ratio = factorize(self._system)

    def solve(self, load: np.ndarray) -> Solution:
        sol = self._lu.solve(load)
        nv = self.disc.spaces.dim_V
        u, p = sol[:nv], sol[nv:]
        return Solution(FemField("V", u), FemField("Q", p), None,
                        _residual(self._system, sol, load), self.pivot_ratio,
                        _constraint_gap(self.disc, u, p))

    def apply(self, load_v: np.ndarray) -> FemField:
        """Field part of the solution for a V-layout load."""
        full = np.zeros(self._system.shape[0])
        full[:self.disc.spaces.dim_V] = load_v
        return self.solve(full).u

    def apply_density(self, coeffs: np.ndarray) -> Solution:
        """Solve with the source eps times the V field with these
        coefficients; (j, v) is then a weighted mass product."""
        sp = self.disc.spaces
        load = np.zeros(sp.dim_V + sp.dim_Q)
        load[:sp.dim_V] = self.disc.mass_eps @ coeffs
        return self.solve(load)
