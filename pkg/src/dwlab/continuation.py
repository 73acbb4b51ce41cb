"""Heteroclinic boundary-value continuation.

Walls are computed as solutions of the desingularized system on a truncated
domain [-L, L], discretized by piecewise-polynomial collocation at Gauss
points, with boundary conditions pinning the appropriate components to the
analytic chart equilibria and one integral phase condition fixing
translation.  The number of boundary conditions and free scalars follows the
regime:

  * codim-2: p, q pinned at both ends; (s, Omega) free.
  * center:  p, q pinned at the left end; Omega slaved to the center
    condition Omega = beta-/alpha + s^2/2; the right end is constrained only
    through the energy-gap equation H(p, q at +L) - H(Z^pi_-) = htilde with
    the gap htilde itself the free scalar (a measurement, since the far
    state is generically a periodic orbit rather than the equilibrium).
    A flat-constrained variant (gap forced to zero, right end pinned, s and
    h freed) is available and is expected not to converge away from c_cp=0.
  * codim-0: p pinned at both ends; nothing free.

Solving uses damped Newton iteration on an analytically assembled sparse
Jacobian; branches in any of (c_cp, s, Omega, h) are traced by
pseudo-arclength continuation with a secant predictor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.polynomial import legendre
from scipy.sparse import csc_matrix
from scipy.sparse.linalg import lsmr, splu

from .charts import PI, ZERO, chart_equilibria
from .classify import CENTER, CODIM0, CODIM2, Regime
from .energy import center_frequency, hamiltonian, hamiltonian_gradient
from .errors import NoConvergence, RegimeError, SingularJacobian
from .model import (MaterialParams, WaveFrame, rhs_jacobian_raw,
                    rhs_param_derivatives_raw, rhs_raw)

__all__ = [
    "BvpConfig",
    "Profile",
    "Branch",
    "BranchPoint",
    "build_bvp",
    "initial_profile",
    "newton_solve",
    "continue_branch",
    "termination_boundary",
]

import warnings as _warnings

from .errors import CenterConditionViolated as _CCV

#: pseudo-arclength step bounds and adaptation factors
STEP_MIN = 1e-5
STEP_MAX = 0.05
STEP_GROW = 1.3
GROW_AFTER = 3


@dataclass(frozen=True)
class BvpConfig:
    """Discretization and Newton settings."""

    L: float = 50.0
    n_mesh: int = 400
    collocation_order: int = 4
    newton_tol: float = 1e-10
    max_newton: int = 12

    def __post_init__(self):
        if not (self.L > 0):
            raise ValueError("L must be positive")
        if self.n_mesh < 50:
            raise ValueError("n_mesh must be at least 50")
        if self.collocation_order not in (3, 4, 5):
            raise ValueError("collocation_order must be 3, 4 or 5")


@dataclass(frozen=True)
class Profile:
    """Discretized wall profile: fine-mesh nodes, states (theta, p, q) per
    node, the parameters it solves, and diagnostics (free-scalar values,
    boundary/phase residuals, energy gap where applicable)."""

    mesh: np.ndarray
    states: np.ndarray
    mp: MaterialParams
    wf: WaveFrame
    regime: str
    diagnostics: dict = field(default_factory=dict)

    @property
    def params(self):
        return (self.mp, self.wf)


@dataclass(frozen=True)
class BranchPoint:
    """One accepted continuation point."""

    param: float
    scalars: dict
    profile: Profile | None
    diagnostics: dict


@dataclass(frozen=True)
class Branch:
    """Ordered continuation results plus the termination reason, one of
    'reached_target', 'fold', 'newton_failure', 'step_underflow'."""

    points: list
    terminated: str
    cont_name: str

    @property
    def end(self) -> BranchPoint:
        return self.points[-1]


# ---------------------------------------------------------------------------
# Collocation machinery
# ---------------------------------------------------------------------------

def _lagrange_matrices(order: int):
    """Interpolation and derivative matrices of the Lagrange basis on the
    equally spaced representation nodes j/order (j = 0..order) of the unit
    interval, evaluated at the ``order`` Gauss points."""
    m = order
    rep = np.arange(m + 1) / m
    gauss = 0.5 * (legendre.leggauss(m)[0] + 1.0)
    W = np.empty((m, m + 1))
    D = np.empty((m, m + 1))
    for j in range(m + 1):
        e = np.zeros(m + 1)
        e[j] = 1.0
        coeffs = np.polynomial.polynomial.polyfit(rep, e, m)
        W[:, j] = np.polynomial.polynomial.polyval(gauss, coeffs)
        D[:, j] = np.polynomial.polynomial.polyval(
            gauss, np.polynomial.polynomial.polyder(coeffs))
    return W, D


class HeteroclinicBVP:
    """Discretized nonlinear system for one regime on a fixed mesh.

    Unknowns are the nodal states plus the regime's free scalars; any of
    (c_cp, s, omega, h, htilde) may additionally act as the continuation
    parameter.  ``base`` holds the fixed parameter values; unknown scalars
    override them.
    """

    SCALAR_NAMES = ("c_cp", "s", "omega", "h", "htilde")

    def __init__(self, mode: str, mp: MaterialParams, wf: WaveFrame,
                 cfg: BvpConfig, free_scalars=None, slave_omega=None,
                 flat_constrained: bool = False):
        if mode not in (CODIM2, CENTER, CODIM0):
            raise ValueError(f"unknown mode {mode!r}")
        self.mode = mode
        self.cfg = cfg
        self.flat_constrained = flat_constrained
        if free_scalars is None:
            if mode == CODIM2:
                free_scalars = ("s", "omega")
            elif mode == CENTER:
                free_scalars = (("s", "h") if flat_constrained
                                else ("htilde",))
            else:
                free_scalars = ()
        self.free_scalars = tuple(free_scalars)
        # Omega is slaved to the center condition in center mode
        self.slave_omega = (mode == CENTER) if slave_omega is None else slave_omega
        if self.slave_omega and ("omega" in self.free_scalars):
            raise ValueError("omega cannot be both free and slaved")
        self.base = dict(alpha=mp.alpha, beta=mp.beta, mu=mp.mu, h=mp.h,
                         c_cp=mp.c_cp, s=wf.s, omega=wf.omega, htilde=0.0)

        m = cfg.collocation_order
        N = cfg.n_mesh
        self.m, self.N = m, N
        self.h_mesh = 2.0 * cfg.L / N
        self.n_nodes = N * m + 1
        self.nU = 3 * self.n_nodes
        self.mesh = np.linspace(-cfg.L, cfg.L, self.n_nodes)
        self.W, self.D = _lagrange_matrices(m)
        # node indices per interval: (N, m+1)
        self.loc_idx = (np.arange(N)[:, None] * m + np.arange(m + 1)[None, :])
        # trapezoid weights on the uniform fine mesh, for the phase condition
        dxi = self.h_mesh / m
        w = np.full(self.n_nodes, dxi)
        w[0] = w[-1] = 0.5 * dxi
        self.phase_w = w
        # reference profile for the phase condition (set via set_reference)
        self.uhat = None
        self.uhat_prime = None
        self._bc_names = self._boundary_names()
        self.n_bc = len(self._bc_names)
        self.n_colloc = 3 * N * m
        self._build_pattern()

    # -- parameter handling -------------------------------------------------

    def _boundary_names(self):
        if self.mode == CODIM2:
            return ("p_left", "q_left", "p_right", "q_right")
        if self.mode == CENTER:
            if self.flat_constrained:
                return ("p_left", "q_left", "p_right", "q_right")
            return ("p_left", "q_left", "energy_gap")
        return ("p_left", "p_right")

    def n_unknowns(self, with_cont: bool = False) -> int:
        return self.nU + len(self.free_scalars) + (1 if with_cont else 0)

    def params_from(self, scalars: dict) -> dict:
        """Full parameter dict from the base values and scalar overrides."""
        par = dict(self.base)
        par.update(scalars)
        if self.slave_omega:
            mp = self._mp(par)
            par["omega"] = center_frequency(PI, mp, par["s"])
        return par

    @staticmethod
    def _mp(par) -> MaterialParams:
        return MaterialParams(alpha=par["alpha"], beta=par["beta"],
                              mu=par["mu"], h=par["h"], c_cp=par["c_cp"])

    @staticmethod
    def _wf(par) -> WaveFrame:
        return WaveFrame(s=par["s"], omega=par["omega"])

    def unpack(self, x, cont_name=None):
        u = x[: self.nU].reshape(self.n_nodes, 3)
        scalars = {name: x[self.nU + k]
                   for k, name in enumerate(self.free_scalars)}
        if cont_name is not None:
            scalars[cont_name] = x[-1]
        return u, scalars

    def pack(self, states: np.ndarray, scalars: dict, cont_name=None):
        parts = [np.asarray(states, dtype=float).ravel()]
        parts.append(np.array([scalars[n] for n in self.free_scalars]))
        if cont_name is not None:
            parts.append(np.array([scalars[cont_name]]))
        return np.concatenate(parts)

    def set_reference(self, states: np.ndarray, scalars: dict):
        """Fix the phase-condition reference profile (and its derivative)."""
        par = self.params_from(scalars)
        u = np.asarray(states, dtype=float)
        d = rhs_raw(u[:, 0], u[:, 1], u[:, 2], par["alpha"], par["beta"],
                    par["mu"], par["h"], par["c_cp"], par["s"], par["omega"])
        self.uhat = u.copy()
        self.uhat_prime = np.stack(d, axis=1)

    # -- residual -----------------------------------------------------------

    def _equilibria(self, par):
        mp, wf = self._mp(par), self._wf(par)
        z0m = chart_equilibria(ZERO, mp, wf)[1].z
        zpim = chart_equilibria(PI, mp, wf)[1].z
        return z0m, zpim

    def _bc_residual(self, u, par):
        z0m, zpim = self._equilibria(par)
        res = []
        for name in self._bc_names:
            if name == "p_left":
                res.append(u[0, 1] - z0m.real)
            elif name == "q_left":
                res.append(u[0, 2] - z0m.imag)
            elif name == "p_right":
                res.append(u[-1, 1] - zpim.real)
            elif name == "q_right":
                res.append(u[-1, 2] - zpim.imag)
            elif name == "energy_gap":
                mp, wf = self._mp(par), self._wf(par)
                with _warnings.catch_warnings():
                    _warnings.simplefilter("ignore", _CCV)
                    gap = (hamiltonian(PI, u[-1, 1], u[-1, 2], mp, wf)
                           - hamiltonian(PI, zpim.real, zpim.imag, mp, wf))
                res.append(gap - par["htilde"])
        return np.array(res)

    def residual(self, x, cont_name=None):
        u, scalars = self.unpack(x, cont_name)
        par = self.params_from(scalars)
        u_loc = u[self.loc_idx]                       # (N, m+1, 3)
        u_g = np.einsum("gj,ijc->igc", self.W, u_loc)  # (N, m, 3)
        du_g = np.einsum("gj,ijc->igc", self.D, u_loc) / self.h_mesh
        th, p, q = u_g[..., 0], u_g[..., 1], u_g[..., 2]
        f = rhs_raw(th, p, q, par["alpha"], par["beta"], par["mu"],
                    par["h"], par["c_cp"], par["s"], par["omega"])
        r_coll = du_g - np.stack(f, axis=-1)
        r_bc = self._bc_residual(u, par)
        r_phase = float(np.sum(self.phase_w[:, None] * (u - self.uhat)
                               * self.uhat_prime))
        return np.concatenate([r_coll.ravel(), r_bc, [r_phase]])

    # -- Jacobian -----------------------------------------------------------

    def _build_pattern(self):
        """Static sparsity pattern (rows/cols) of the collocation block."""
        N, m = self.N, self.m
        # rows: (N, m, 3) row index 3*(i*m+g)+a, broadcast over (j, b)
        ig = (np.arange(N)[:, None] * m + np.arange(m)[None, :])  # (N, m)
        row = (3 * ig[..., None, None, None]
               + np.arange(3)[None, None, :, None, None])
        self._rows_coll = np.broadcast_to(
            row, (N, m, 3, m + 1, 3)).ravel()
        col = (3 * self.loc_idx[:, None, None, :, None]
               + np.arange(3)[None, None, None, None, :])
        self._cols_coll = np.broadcast_to(
            col, (N, m, 3, m + 1, 3)).ravel()
        self._eye_D = np.einsum("gj,ab->gjab", self.D, np.eye(3)) / self.h_mesh

    def _scalar_chain(self, name, par):
        """Names and weights of the raw-parameter derivatives behind one
        unknown scalar, accounting for the slaved frequency."""
        if name == "htilde":
            return []
        chain = [(name, 1.0)]
        if self.slave_omega:
            if name == "s":
                chain.append(("omega", par["s"]))
            elif name == "c_cp":
                dod = par["beta"] / (par["alpha"] * (1.0 - par["c_cp"]) ** 2)
                chain.append(("omega", dod))
        return chain

    def _bc_jacobian_rows(self, u, par, scal_names):
        """Rows (dense over a few entries) of the boundary conditions."""
        rows = []
        node_last = self.n_nodes - 1
        eps = 1e-6

        def bc_vals(par_mod):
            return self._bc_residual(u, par_mod)

        base_val = bc_vals(par)
        # derivative w.r.t. scalar values by central differences on the
        # boundary targets (the state contribution is handled analytically)
        dscal = {}
        for name in scal_names:
            if name == "htilde":
                v = np.zeros(self.n_bc)
                for i, bc in enumerate(self._bc_names):
                    if bc == "energy_gap":
                        v[i] = -1.0
                dscal[name] = v
                continue
            par_p = self.params_from({**{k: par[k] for k in
                                         self.SCALAR_NAMES if k in par},
                                      name: par[name] + eps})
            par_m = self.params_from({**{k: par[k] for k in
                                         self.SCALAR_NAMES if k in par},
                                      name: par[name] - eps})
            dscal[name] = (bc_vals(par_p) - bc_vals(par_m)) / (2 * eps)

        for i, bc in enumerate(self._bc_names):
            cols, vals = [], []
            if bc == "p_left":
                cols.append(1); vals.append(1.0)
            elif bc == "q_left":
                cols.append(2); vals.append(1.0)
            elif bc == "p_right":
                cols.append(3 * node_last + 1); vals.append(1.0)
            elif bc == "q_right":
                cols.append(3 * node_last + 2); vals.append(1.0)
            elif bc == "energy_gap":
                mp, wf = self._mp(par), self._wf(par)
                gp, gq = hamiltonian_gradient(PI, u[-1, 1], u[-1, 2], mp, wf)
                cols += [3 * node_last + 1, 3 * node_last + 2]
                vals += [gp, gq]
            for k, name in enumerate(scal_names):
                d = dscal[name][i]
                if d != 0.0:
                    cols.append(self.nU + k)
                    vals.append(d)
            rows.append((cols, vals))
        return rows, base_val

    def jacobian(self, x, cont_name=None):
        """Sparse Jacobian of ``residual`` (including the continuation
        column when ``cont_name`` is given; the arclength row is appended by
        the continuation driver)."""
        u, scalars = self.unpack(x, cont_name)
        par = self.params_from(scalars)
        scal_names = list(self.free_scalars) + ([cont_name] if cont_name else [])
        n_scal = len(scal_names)
        n_x = self.nU + n_scal
        N, m = self.N, self.m

        u_loc = u[self.loc_idx]
        u_g = np.einsum("gj,ijc->igc", self.W, u_loc)
        th, p, q = u_g[..., 0], u_g[..., 1], u_g[..., 2]
        args = (th, p, q, par["alpha"], par["beta"], par["mu"], par["h"],
                par["c_cp"], par["s"], par["omega"])
        Jf = rhs_jacobian_raw(*args)
        # data block: (N, m, 3, m+1, 3)
        Jf_arr = np.empty((N, m, 3, 3))
        for a in range(3):
            for b in range(3):
                Jf_arr[..., a, b] = np.broadcast_to(Jf[a][b], (N, m))
        # data[i, g, a, j, b] = D[g, j]/h * delta_ab - W[g, j] * Jf[i, g, a, b]
        diff_part = self._eye_D.transpose(0, 2, 1, 3)  # (m, 3, m+1, 3)
        data = np.broadcast_to(diff_part[None], (N, m, 3, m + 1, 3)).copy()
        data -= self.W[None, :, None, :, None] * Jf_arr[:, :, :, None, :]
        rows = [self._rows_coll]
        cols = [self._cols_coll]
        vals = [data.ravel()]

        # scalar columns of the collocation rows
        if n_scal:
            pder = rhs_param_derivatives_raw(*args)
            row_scal = np.repeat(np.arange(self.n_colloc), 1)
            for k, name in enumerate(scal_names):
                colv = np.zeros((N, m, 3))
                for raw, wgt in self._scalar_chain(name, par):
                    d = pder[raw]
                    for a in range(3):
                        colv[..., a] -= wgt * np.broadcast_to(d[a], (N, m))
                rows.append(row_scal)
                cols.append(np.full(self.n_colloc, self.nU + k))
                vals.append(colv.ravel())

        # boundary rows
        bc_rows, _ = self._bc_jacobian_rows(u, par, scal_names)
        for i, (c, v) in enumerate(bc_rows):
            rows.append(np.full(len(c), self.n_colloc + i))
            cols.append(np.array(c))
            vals.append(np.array(v, dtype=float))

        # phase row
        ph_row = self.n_colloc + self.n_bc
        ph_vals = (self.phase_w[:, None] * self.uhat_prime).ravel()
        rows.append(np.full(self.nU, ph_row))
        cols.append(np.arange(self.nU))
        vals.append(ph_vals)

        n_rows = self.n_colloc + self.n_bc + 1
        J = csc_matrix((np.concatenate(vals),
                        (np.concatenate(rows), np.concatenate(cols))),
                       shape=(n_rows, n_x))
        return J

    # -- profile plumbing ---------------------------------------------------

    def make_profile(self, u, scalars, extra=None) -> Profile:
        par = self.params_from(scalars)
        diag = {"free_scalars": dict(scalars),
                "boundary_residual": float(np.max(np.abs(
                    self._bc_residual(u, par)))) if self.uhat is not None else None}
        if extra:
            diag.update(extra)
        return Profile(mesh=self.mesh.copy(), states=np.asarray(u).copy(),
                       mp=self._mp(par), wf=self._wf(par), regime=self.mode,
                       diagnostics=diag)


# ---------------------------------------------------------------------------
# Public builders and solvers
# ---------------------------------------------------------------------------

def build_bvp(regime: Regime, mp: MaterialParams, wf: WaveFrame,
              cfg: BvpConfig = BvpConfig(), free_scalars=None,
              flat_constrained: bool = False) -> HeteroclinicBVP:
    """Discretized heteroclinic system for the given regime.

    Raises ``RegimeError`` when the regime kind is inconsistent with the
    parameters (checked through the selected speed where applicable)."""
    if regime.kind not in (CODIM2, CENTER, CODIM0):
        raise RegimeError(f"unsupported regime {regime.kind!r}")
    return HeteroclinicBVP(regime.kind, mp, wf, cfg,
                           free_scalars=free_scalars,
                           flat_constrained=flat_constrained)


def initial_profile(bvp: HeteroclinicBVP, mu: float) -> np.ndarray:
    """Homogeneous-wall initial guess on the fine mesh."""
    r = math.sqrt(-mu)
    xi = bvp.mesh
    theta = 2.0 * np.arctan(np.exp(r * xi))
    u = np.stack([theta, np.full_like(xi, r), np.zeros_like(xi)], axis=1)
    return u


def newton_solve(bvp: HeteroclinicBVP, states: np.ndarray, scalars: dict,
                 cont_name=None, extra_row=None, return_iters: bool = False):
    """Damped Newton iteration on the discretized system.

    ``extra_row`` optionally appends one dense equation (value, gradient)
    callback pair used by the pseudo-arclength driver.  Returns the solved
    (states, scalars) pair (plus the iteration count when requested).
    Raises ``NoConvergence`` / ``SingularJacobian``.
    """
    x = bvp.pack(states, scalars, cont_name)
    tol = bvp.cfg.newton_tol
    res_norm = None
    for it in range(bvp.cfg.max_newton + 1):
        r = bvp.residual(x, cont_name)
        if extra_row is not None:
            r = np.append(r, extra_row[0](x))
        res_norm = float(np.max(np.abs(r)))
        if not math.isfinite(res_norm):
            raise NoConvergence("residual is not finite")
        if res_norm < tol:
            u, sc = bvp.unpack(x, cont_name)
            return (u, sc, it) if return_iters else (u, sc)
        if it == bvp.cfg.max_newton:
            break
        J = bvp.jacobian(x, cont_name)
        if extra_row is not None:
            from scipy.sparse import vstack as sp_vstack
            g = csc_matrix(extra_row[1](x)[None, :])
            J = csc_matrix(sp_vstack([J, g]))
        # direct sparse LU first; fall back to a regularized least-squares
        # step when the factorization fails or the LU direction cannot be
        # damped into a residual decrease (the codim-0 truncation is
        # exponentially ill-conditioned, with a near-kernel along the decayed
        # left-chart modes, and needs the minimal-norm direction)
        candidates = []
        try:
            lu = splu(J.tocsc())
            dx = lu.solve(-r)
            if np.all(np.isfinite(dx)):
                candidates.append(dx)
        except RuntimeError:
            pass

        def _lsmr_step():
            sol = lsmr(J, -r, damp=1e-12, atol=1e-14, btol=1e-14,
                       maxiter=20 * J.shape[0])
            return sol[0]

        accepted = False
        for attempt in range(2):
            if attempt == 1 or not candidates:
                dx = _lsmr_step()
                if not np.all(np.isfinite(dx)):
                    raise SingularJacobian(
                        "linear solve produced non-finite update")
            else:
                dx = candidates[0]
            lam = 1.0
            for _ in range(10):
                x_new = x + lam * dx
                r_new = bvp.residual(x_new, cont_name)
                if extra_row is not None:
                    r_new = np.append(r_new, extra_row[0](x_new))
                nrm = float(np.max(np.abs(r_new)))
                if math.isfinite(nrm) and (nrm < res_norm or nrm < tol):
                    x = x_new
                    accepted = True
                    break
                lam *= 0.5
            if accepted:
                break
        if not accepted:
            raise NoConvergence(
                f"damping failed at residual {res_norm:.3e}")
    raise NoConvergence(
        f"no convergence after {bvp.cfg.max_newton} iterations "
        f"(residual {res_norm:.3e})")


def solve_regime(bvp: HeteroclinicBVP, guess_states=None, scalars=None):
    """Convenience: set the phase reference to the guess and Newton-solve."""
    if guess_states is None:
        guess_states = initial_profile(bvp, bvp.base["mu"])
    if scalars is None:
        scalars = {n: bvp.base[n] for n in bvp.free_scalars}
    bvp.set_reference(guess_states, scalars)
    u, sc = newton_solve(bvp, guess_states, scalars)
    return u, sc


def _weighted_dot(bvp, a, b):
    """Inner product weighting profile components by 1/n_nodes so arclength
    steps are mesh-independent."""
    nU = bvp.nU
    return (float(np.dot(a[:nU], b[:nU])) / bvp.n_nodes
            + float(np.dot(a[nU:], b[nU:])))


def continue_branch(bvp: HeteroclinicBVP, start_states, start_scalars,
                    cont_name: str, target: float,
                    step0: float = 0.01, store_profiles: bool = False,
                    record_htilde: bool = None) -> Branch:
    """Pseudo-arclength continuation of a solved profile in ``cont_name``
    toward ``target``.

    The start must solve the system at the base parameter value.  Steps adapt
    within [1e-5, 0.05]: halved on corrector failure, grown by 1.3 after 3
    consecutive successes.  Every accepted point is recorded; termination is
    reported in the Branch (never raised) as one of reached_target /
    newton_failure / step_underflow, with folds flagged in diagnostics.
    """
    if record_htilde is None:
        record_htilde = "htilde" in bvp.free_scalars
    lam0 = bvp.base[cont_name]
    direction = 1.0 if target >= lam0 else -1.0
    scalars = dict(start_scalars)
    scalars[cont_name] = lam0
    x = bvp.pack(start_states, scalars, cont_name)
    bvp.set_reference(start_states, scalars)

    def record(u, sc, diag):
        prof = bvp.make_profile(u, sc) if store_profiles else None
        pt_scalars = {n: float(sc[n]) for n in bvp.free_scalars}
        par = bvp.params_from(sc)
        pt_scalars.setdefault("s", float(par["s"]))
        pt_scalars.setdefault("omega", float(par["omega"]))
        if record_htilde:
            pt_scalars["htilde"] = float(sc.get("htilde", 0.0))
        points.append(BranchPoint(param=float(sc[cont_name]),
                                  scalars=pt_scalars, profile=prof,
                                  diagnostics=diag))

    points = []
    u0, sc0 = bvp.unpack(x, cont_name)
    record(u0, sc0, {"step": 0.0})
    if lam0 == target:
        return Branch(points=points, terminated="reached_target",
                      cont_name=cont_name)

    n_x = bvp.n_unknowns(with_cont=True)
    tangent = np.zeros(n_x)
    tangent[-1] = direction
    step = min(step0, STEP_MAX)
    successes = 0
    fold_seen = False
    x_prev = x.copy()

    while True:
        lam = x[-1]
        remaining = (target - lam) * direction
        if remaining <= 1e-14:
            term = "reached_target"
            break
        # clamp the predictor so lambda cannot overshoot the target
        t_lam = tangent[-1]
        ds = step
        if t_lam * direction > 1e-12:
            ds = min(ds, remaining / (t_lam * direction))
        x_pred = x + ds * tangent

        def arc_val(z, x_pred=x_pred, t=tangent):
            return _weighted_dot(bvp, z - x_pred, t)

        def arc_grad(z, t=tangent):
            g = t.copy()
            g[: bvp.nU] /= bvp.n_nodes
            return g

        u_pred, sc_pred = bvp.unpack(x_pred, cont_name)
        try:
            u_new, sc_new, iters = newton_solve(
                bvp, u_pred, sc_pred, cont_name=cont_name,
                extra_row=(arc_val, arc_grad), return_iters=True)
            ok = True
        except (NoConvergence, SingularJacobian):
            ok = False
        if not ok:
            successes = 0
            step *= 0.5
            if step < STEP_MIN:
                term = "newton_failure"
                break
            continue
        x_prev = x.copy()
        x = bvp.pack(u_new, sc_new, cont_name)
        # secant tangent for the next step
        diff = x - x_prev
        nrm = math.sqrt(_weighted_dot(bvp, diff, diff))
        if nrm > 0:
            new_tangent = diff / nrm
            if new_tangent[-1] * tangent[-1] < 0:
                fold_seen = True
            tangent = new_tangent
        bvp.set_reference(u_new, sc_new)
        record(u_new, sc_new,
               {"step": ds, "newton_iters": iters, "fold": fold_seen})
        successes += 1
        if successes >= GROW_AFTER:
            step = min(step * STEP_GROW, STEP_MAX)
            successes = 0

    if term == "reached_target" and fold_seen:
        pass  # folds are recorded per-point; target still reached
    # attach the final full profile
    u_end, sc_end = bvp.unpack(x, cont_name)
    extra = {}
    if record_htilde:
        extra["htilde"] = float(sc_end.get("htilde", 0.0))
    prof = bvp.make_profile(u_end, sc_end, extra=extra)
    points[-1] = replace(points[-1], profile=prof)
    return Branch(points=points, terminated=term, cont_name=cont_name)


def termination_boundary(mp: MaterialParams, wf: WaveFrame,
                         c_cp_values, cfg: BvpConfig = BvpConfig(),
                         fit_degree: int = 3):
    """Existence-boundary estimate: for each c_cp, continue the codim-2 wall
    in s toward 0 (h and Omega free) and record the last converged point.

    Returns (points, fit_coefficients) where points is a list of
    (c_cp, s_terminal, omega_terminal) and the fit is a polynomial in c_cp
    through the s-terminal values (least squares, given degree).
    """
    results = []
    for ccp in c_cp_values:
        # first walk c_cp from 0 to its target at fixed h
        bvp0 = HeteroclinicBVP(CODIM2, mp, wf, cfg)
        u, sc = solve_regime(bvp0)
        if ccp != 0.0:
            br = continue_branch(bvp0, u, sc, "c_cp", ccp)
            if br.terminated != "reached_target":
                results.append((float(ccp), float("nan"), float("nan")))
                continue
            u = br.end.profile.states
            sc = dict(br.end.scalars)
        # then continue in s toward zero with (omega, h) free
        mp_c = mp.replace(c_cp=ccp)
        wf_c = WaveFrame(s=sc["s"], omega=sc["omega"])
        bvp = HeteroclinicBVP(CODIM2, mp_c, wf_c, cfg,
                              free_scalars=("omega", "h"))
        sc2 = {"omega": sc["omega"], "h": mp.h}
        bvp.set_reference(u, sc2)
        u2, sc2 = newton_solve(bvp, u, sc2)
        br = continue_branch(bvp, u2, sc2, "s", 0.0)
        end = br.end
        results.append((float(ccp), float(end.param),
                        float(end.scalars["omega"])))
    pts = [r for r in results if math.isfinite(r[1])]
    coeffs = np.polyfit([r[0] for r in pts], [r[1] for r in pts],
                        deg=min(fit_degree, max(1, len(pts) - 1)))
    return results, coeffs
