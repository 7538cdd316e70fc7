"""Planar reduced-coordinate rigid-body dynamics, batched over environments.

Bodies are the revolute-joint links (welded links merge into their parent;
root-welded links merge into the floating base).  The mass matrix comes from
a composite-rigid-body pass, the bias vector (Coriolis/centrifugal plus
gravity) from a recursive Newton-Euler sweep with zero joint acceleration,
and integration is semi-implicit Euler: M u' = tau - bias, velocities first.

All state arrays carry a leading batch dimension N.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..motion.skeleton import wrap_angle


class SimDiverged(RuntimeError):
    """State became non-finite; carries the last finite state."""

    def __init__(self, last_state):
        super().__init__("simulation diverged (non-finite state)")
        self.last_state = last_state


@dataclass
class SimConfig:
    dt: float = 1.0 / 200.0
    substeps: int = 4
    gravity: float = 9.81          # magnitude, acting along -y
    ground_kp: float = 2.0e4
    ground_kd: float = 300.0
    friction: float = 1.0          # Coulomb coefficient
    friction_damping: float = 300.0
    rod_stiffness: float = 2000.0
    obs_noise_std: float = 0.02
    gravity_noise_std: float = 0.4
    action_noise_std: float = 0.02
    fixed_base: bool = False
    kp: np.ndarray | float | None = None  # override the robot preset gains
    kd: np.ndarray | float | None = None

    def __post_init__(self):
        if self.dt <= 0 or self.substeps < 1:
            raise ValueError("dt must be > 0 and substeps >= 1")
        for name in ("ground_kp", "ground_kd", "rod_stiffness"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        for name in ("obs_noise_std", "gravity_noise_std", "action_noise_std"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass
class SimState:
    """Single-environment snapshot (batched internals use VecState)."""

    root: np.ndarray       # [x, y, theta]
    root_vel: np.ndarray   # [vx, vy, omega]
    q: np.ndarray
    qd: np.ndarray
    contacts: np.ndarray   # bool per foot
    time: float = 0.0

    def to_dict(self):
        return {
            "root": self.root.tolist(),
            "root_vel": self.root_vel.tolist(),
            "q": self.q.tolist(),
            "qd": self.qd.tolist(),
            "contacts": [bool(c) for c in self.contacts],
            "time": self.time,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            root=np.array(d["root"], dtype=np.float64),
            root_vel=np.array(d["root_vel"], dtype=np.float64),
            q=np.array(d["q"], dtype=np.float64),
            qd=np.array(d["qd"], dtype=np.float64),
            contacts=np.array(d["contacts"], dtype=bool),
            time=float(d.get("time", 0.0)),
        )


class VecState:
    """Batched state arrays with shape (N, ...)."""

    def __init__(self, root, root_vel, q, qd, contacts, time):
        self.root = root
        self.root_vel = root_vel
        self.q = q
        self.qd = qd
        self.contacts = contacts
        self.time = time

    @classmethod
    def from_single(cls, s):
        return cls(
            s.root[None].copy(),
            s.root_vel[None].copy(),
            s.q[None].copy(),
            s.qd[None].copy(),
            s.contacts[None].copy(),
            np.array([s.time]),
        )

    def single(self, i=0):
        return SimState(
            root=self.root[i].copy(),
            root_vel=self.root_vel[i].copy(),
            q=self.q[i].copy(),
            qd=self.qd[i].copy(),
            contacts=self.contacts[i].copy(),
            time=float(self.time[i]),
        )

    def copy(self):
        return VecState(
            self.root.copy(), self.root_vel.copy(), self.q.copy(),
            self.qd.copy(), self.contacts.copy(), self.time.copy(),
        )

    def is_finite(self):
        return (
            np.isfinite(self.root).all(axis=1)
            & np.isfinite(self.root_vel).all(axis=1)
            & np.isfinite(self.q).all(axis=1)
            & np.isfinite(self.qd).all(axis=1)
        )


def _rot(ang):
    c, s = np.cos(ang), np.sin(ang)
    return c, s


def _apply(c, s, v):
    """Rotate (..., 2) vectors by angles with precomputed cos/sin (...,)."""
    return np.stack([c * v[..., 0] - s * v[..., 1], s * v[..., 0] + c * v[..., 1]], axis=-1)


def _perp(v):
    """z-hat cross v for planar vectors: rotate by +90 degrees."""
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


@dataclass
class _Body:
    mass: float
    inertia: float            # about own CoM
    com_local: np.ndarray     # in body frame
    parent: int               # body index, -1 for the base itself
    joint_local: np.ndarray   # attachment point in parent body frame
    zero: float               # frame angle offset relative to parent at q=0
    joint_index: int          # index into q, -1 for base


class SimModel:
    """Precomputed body tree and lookup tables for one robot."""

    def __init__(self, spec, config):
        self.spec = spec
        self.config = config
        sk = spec.skeleton
        self.J = sk.joint_count
        self.D = 3 + self.J

        jmap = {i: j for j, i in enumerate(sk.joint_links)}
        body_of_link = [0] * len(sk.links)
        # link frame expressed in its body frame: (offset, angle)
        link_in_body = [None] * len(sk.links)
        bodies = [_Body(0.0, 0.0, np.zeros(2), -1, np.zeros(2), 0.0, -1)]

        base_mass = 0.0
        base_moment = np.zeros(2)
        base_inertia_origin = 0.0

        for i, link in enumerate(sk.links):
            if link.parent < 0:
                p_off, p_ang = np.zeros(2), 0.0
                parent_body = 0
            else:
                parent_body = body_of_link[link.parent]
                p_off, p_ang = link_in_body[link.parent]
                plink = sk.links[link.parent]
                p_off = p_off + _apply(
                    np.cos(p_ang), np.sin(p_ang),
                    np.array([link.attach * plink.length, 0.0]),
                )
            if link.joint is None:
                ang = p_ang + link.zero
                body_of_link[i] = parent_body
                link_in_body[i] = (p_off, ang)
                if parent_body != 0:
                    raise ValueError("welded links below a joint are not supported")
                com = p_off + _apply(np.cos(ang), np.sin(ang), np.array([link.com * link.length, 0.0]))
                base_mass += link.mass
                base_moment += link.mass * com
                base_inertia_origin += link.inertia + link.mass * float(com @ com)
            else:
                body_of_link[i] = len(bodies)
                link_in_body[i] = (np.zeros(2), 0.0)
                bodies.append(
                    _Body(
                        mass=link.mass,
                        inertia=link.inertia,
                        com_local=np.array([link.com * link.length, 0.0]),
                        parent=parent_body,
                        joint_local=p_off.copy(),
                        zero=p_ang + link.zero,
                        joint_index=jmap[i],
                    )
                )

        if base_mass > 0.0:
            com0 = base_moment / base_mass
            bodies[0] = _Body(
                mass=base_mass,
                inertia=base_inertia_origin - base_mass * float(com0 @ com0),
                com_local=com0,
                parent=-1,
                joint_local=np.zeros(2),
                zero=0.0,
                joint_index=-1,
            )
        self.bodies = bodies
        self.body_of_link = body_of_link
        self.link_in_body = link_in_body
        self.n_bodies = len(bodies)

        # per body: ancestor body chain back to (and excluding) the base
        self.ancestors = []
        for b in range(self.n_bodies):
            chain = []
            k = b
            while k > 0:
                chain.append(k)
                k = self.bodies[k].parent
            self.ancestors.append(tuple(chain))

        self.children = [[] for _ in range(self.n_bodies)]
        for b in range(1, self.n_bodies):
            self.children[self.bodies[b].parent].append(b)

        # contact and rod attachment points in body frames
        self.contact_points = []
        for link_idx, frac in spec.contacts:
            off, ang = link_in_body[link_idx]
            L = sk.links[link_idx].length
            local = off + _apply(np.cos(ang), np.sin(ang), np.array([frac * L, 0.0]))
            self.contact_points.append((body_of_link[link_idx], local))
        # group contact points per foot link for the contact flags
        self.contact_links = sorted({l for l, _ in spec.contacts})
        self.contact_link_of_point = [
            self.contact_links.index(l) for l, _ in spec.contacts
        ]

        self.rod_attach = []
        for rod in sk.rods:
            pts = []
            for link_idx, frac in ((rod.link_a, rod.frac_a), (rod.link_b, rod.frac_b)):
                off, ang = link_in_body[link_idx]
                L = sk.links[link_idx].length
                local = off + _apply(np.cos(ang), np.sin(ang), np.array([frac * L, 0.0]))
                pts.append((body_of_link[link_idx], local))
            self.rod_attach.append(tuple(pts))
        self.rod_rest = self._rod_rest_lengths()

        self.joint_lo, self.joint_hi = sk.joint_limits
        self.kp = np.broadcast_to(
            np.asarray(config.kp if config.kp is not None else spec.kp, dtype=np.float64),
            (self.J,),
        )
        self.kd = np.broadcast_to(
            np.asarray(config.kd if config.kd is not None else spec.kd, dtype=np.float64),
            (self.J,),
        )

    # -- kinematics ----------------------------------------------------------

    def body_kinematics(self, root, root_vel, q, qd):
        """World angle, origin, angular velocity, origin velocity per body.

        Returns dict of arrays shaped (N, B) / (N, B, 2).
        """
        N = root.shape[0]
        B = self.n_bodies
        ang = np.empty((N, B))
        org = np.empty((N, B, 2))
        w = np.empty((N, B))
        vel = np.empty((N, B, 2))
        ang[:, 0] = root[:, 2]
        org[:, 0] = root[:, :2]
        w[:, 0] = root_vel[:, 2]
        vel[:, 0] = root_vel[:, :2]
        for b in range(1, B):
            bd = self.bodies[b]
            p = bd.parent
            c, s = _rot(ang[:, p])
            att = org[:, p] + _apply(c, s, bd.joint_local[None, :])
            ang[:, b] = ang[:, p] + bd.zero + q[:, bd.joint_index]
            org[:, b] = att
            w[:, b] = w[:, p] + qd[:, bd.joint_index]
            vel[:, b] = vel[:, p] + w[:, p, None] * _perp(att - org[:, p])
        c, s = _rot(ang)
        com_local = np.stack([bd.com_local for bd in self.bodies])  # (B, 2)
        com = org + _apply(c, s, com_local[None, :, :])
        com_vel = vel + w[..., None] * _perp(com - org)
        return {"ang": ang, "org": org, "w": w, "vel": vel, "com": com, "com_vel": com_vel}

    def world_point(self, kin, body, local):
        c, s = _rot(kin["ang"][:, body])
        p = kin["org"][:, body] + _apply(c, s, local[None, :])
        v = kin["vel"][:, body] + kin["w"][:, body, None] * _perp(p - kin["org"][:, body])
        return p, v

    def point_jacobian_T_apply(self, kin, body, point, force, out):
        """Accumulate J_p^T f into the generalized force array ``out``."""
        out[:, 0] += force[:, 0]
        out[:, 1] += force[:, 1]
        out[:, 2] += _cross2(point - kin["org"][:, 0], force)
        for b in self.ancestors[body]:
            j = self.bodies[b].joint_index
            out[:, 3 + j] += _cross2(point - kin["org"][:, b], force)

    # -- dynamics ------------------------------------------------------------

    def mass_matrix(self, kin):
        """Composite-rigid-body mass matrix, (N, D, D)."""
        N = kin["ang"].shape[0]
        B = self.n_bodies
        masses = np.array([bd.mass for bd in self.bodies])
        inertias = np.array([bd.inertia for bd in self.bodies])

        mc = np.broadcast_to(masses, (N, B)).copy()
        hc = masses[None, :, None] * kin["com"]          # first moments
        ic = np.empty((N, B))                             # inertia about world origin
        com = kin["com"]
        ic[:] = inertias[None, :] + masses[None, :] * np.einsum("nbc,nbc->nb", com, com)
        for b in range(B - 1, 0, -1):
            p = self.bodies[b].parent
            mc[:, p] += mc[:, b]
            hc[:, p] += hc[:, b]
            ic[:, p] += ic[:, b]
        cc = hc / np.maximum(mc[..., None], 1e-12)
        icc = ic - mc * np.einsum("nbc,nbc->nb", cc, cc)  # about composite CoM

        M = np.zeros((N, self.D, self.D))
        m_tot = mc[:, 0]
        cc_tot = cc[:, 0]
        org0 = kin["org"][:, 0]
        d0 = cc_tot - org0
        M[:, 0, 0] = m_tot
        M[:, 1, 1] = m_tot
        M[:, 0, 2] = M[:, 2, 0] = -m_tot * d0[:, 1]
        M[:, 1, 2] = M[:, 2, 1] = m_tot * d0[:, 0]
        M[:, 2, 2] = icc[:, 0] + m_tot * np.einsum("nc,nc->n", d0, d0)

        for b in range(1, self.n_bodies):
            jb = 3 + self.bodies[b].joint_index
            pb = kin["org"][:, b]
            db = cc[:, b] - pb
            M[:, 0, jb] = M[:, jb, 0] = -mc[:, b] * db[:, 1]
            M[:, 1, jb] = M[:, jb, 1] = mc[:, b] * db[:, 0]
            M[:, 2, jb] = M[:, jb, 2] = icc[:, b] + mc[:, b] * np.einsum(
                "nc,nc->n", db, cc[:, b] - org0
            )
            for a in self.ancestors[b]:
                ja = 3 + self.bodies[a].joint_index
                val = icc[:, b] + mc[:, b] * np.einsum(
                    "nc,nc->n", db, cc[:, b] - kin["org"][:, a]
                )
                M[:, ja, jb] = val
                M[:, jb, ja] = val
        return M

    def bias_forces(self, kin, gravity):
        """RNEA with zero joint acceleration: Coriolis/centrifugal + gravity.

        gravity is the per-env magnitude array (N,), acting along -y.
        Sign convention: M u' + bias = tau.
        """
        N = kin["ang"].shape[0]
        B = self.n_bodies
        # forward: accelerations with q'' = 0; gravity enters as a fictitious
        # upward base acceleration
        a_org = np.zeros((N, B, 2))
        alpha = np.zeros((N, B))
        a_org[:, 0, 1] = gravity
        for b in range(1, B):
            p = self.bodies[b].parent
            d = kin["org"][:, b] - kin["org"][:, p]
            a_org[:, b] = (
                a_org[:, p]
                + alpha[:, p, None] * _perp(d)
                - (kin["w"][:, p] ** 2)[:, None] * d
            )
            alpha[:, b] = alpha[:, p]
        e = kin["com"] - kin["org"]
        a_com = a_org + alpha[..., None] * _perp(e) - (kin["w"] ** 2)[..., None] * e

        masses = np.array([bd.mass for bd in self.bodies])
        inertias = np.array([bd.inertia for bd in self.bodies])
        F = masses[None, :, None] * a_com
        Nz = inertias[None, :] * alpha

        f_net = F.copy()
        n_net = Nz + _cross2(e, F)
        for b in range(B - 1, 0, -1):
            p = self.bodies[b].parent
            f_net[:, p] += f_net[:, b]
            n_net[:, p] += n_net[:, b] + _cross2(
                kin["org"][:, b] - kin["org"][:, p], f_net[:, b]
            )

        bias = np.zeros((N, self.D))
        bias[:, 0:2] = f_net[:, 0]
        bias[:, 2] = n_net[:, 0]
        for b in range(1, B):
            bias[:, 3 + self.bodies[b].joint_index] = n_net[:, b]
        return bias

    # -- forces ---------------------------------------------------------------

    def contact_forces(self, kin, config):
        """Per-point ground forces; returns (points, forces, per-foot flags)."""
        N = kin["ang"].shape[0]
        pts = []
        forces = []
        flags = np.zeros((N, len(self.contact_links)), dtype=bool)
        for k, (body, local) in enumerate(self.contact_points):
            p, v = self.world_point(kin, body, local)
            pen = -p[:, 1]
            active = pen > 0.0
            normal = np.where(
                active,
                config.ground_kp * pen + config.ground_kd * np.maximum(0.0, -v[:, 1]),
                0.0,
            )
            normal = np.maximum(normal, 0.0)
            tangent = np.where(active, -config.friction_damping * v[:, 0], 0.0)
            cap = config.friction * normal
            tangent = np.clip(tangent, -cap, cap)
            pts.append(p)
            forces.append(np.stack([tangent, normal], axis=1))
            flags[:, self.contact_link_of_point[k]] |= active & (normal > 0.0)
        return pts, forces, flags

    def rod_forces_points(self, kin, config):
        """Virtual-rod spring forces at their endpoints."""
        out = []
        for (ba, la), (bb, lb), rest in [
            (att[0], att[1], self.rod_rest[i]) for i, att in enumerate(self.rod_attach)
        ]:
            pa, _ = self.world_point(kin, ba, la)
            pb, _ = self.world_point(kin, bb, lb)
            d = pa - pb
            dist = np.linalg.norm(d, axis=1)
            u = d / np.maximum(dist, 1e-12)[:, None]
            f = -config.rod_stiffness * (dist - rest)[:, None] * u
            out.append(((ba, la, pa, f), (bb, lb, pb, -f)))
        return out

    def _rod_rest_lengths(self):
        root = np.array([[self.spec.rest_root.x, self.spec.rest_root.y, self.spec.rest_root.theta]])
        kin = self.body_kinematics(
            root, np.zeros((1, 3)), self.spec.rest_q[None], np.zeros((1, self.J))
        )
        rests = []
        for (ba, la), (bb, lb) in self.rod_attach:
            pa, _ = self.world_point(kin, ba, la)
            pb, _ = self.world_point(kin, bb, lb)
            rests.append(float(np.linalg.norm(pa[0] - pb[0])))
        given = [r.rest_length for r in self.spec.skeleton.rods]
        return np.array([g if g is not None else r for g, r in zip(given, rests)])


def pd_torque(target_q, q, qd, kp, kd, torque_limit=None):
    """tau = kp (target - q) - kd qd, clamped to per-joint torque limits."""
    tau = kp * (target_q - q) - kd * qd
    if torque_limit is not None:
        tau = np.clip(tau, -torque_limit, torque_limit)
    return tau


def step_batch(model, state, target_q, config, gravity=None):
    """Advance every environment by one control step of config.dt.

    target_q holds desired joint positions (already noise-injected by the
    caller when domain randomization is on).  gravity is a per-env magnitude
    array defaulting to config.gravity.  Returns a new VecState; raises
    SimDiverged (carrying the last finite state) if any env goes non-finite.
    """
    N = state.root.shape[0]
    J = model.J
    g = (
        np.full(N, config.gravity)
        if gravity is None
        else np.broadcast_to(np.asarray(gravity, dtype=np.float64), (N,))
    )
    target_q = np.asarray(target_q, dtype=np.float64)
    if target_q.shape != (N, J):
        raise ValueError(f"target_q shape {target_q.shape} != ({N}, {J})")

    try:
        out = _integrate(model, state, target_q, config, g)
    except (np.linalg.LinAlgError, FloatingPointError):
        raise SimDiverged(state) from None
    if not out.is_finite().all():
        raise SimDiverged(state)
    return out


def _integrate(model, state, target_q, config, g):
    N = state.root.shape[0]
    root = state.root.copy()
    root_vel = state.root_vel.copy()
    q = state.q.copy()
    qd = state.qd.copy()
    flags = state.contacts.copy()
    h = config.dt / config.substeps
    lo, hi = model.joint_lo, model.joint_hi

    for _ in range(config.substeps):
        kin = model.body_kinematics(root, root_vel, q, qd)
        tau_gen = np.zeros((N, model.D))

        tau_pd = pd_torque(target_q, q, qd, model.kp, model.kd, model.spec.torque_limit)
        tau_gen[:, 3:] += tau_pd

        if model.contact_points:
            pts, forces, flags = model.contact_forces(kin, config)
            for k, (body, _) in enumerate(model.contact_points):
                model.point_jacobian_T_apply(kin, body, pts[k], forces[k], tau_gen)

        if model.rod_attach and config.rod_stiffness > 0:
            for (ba, la, pa, fa), (bb, lb, pb, fb) in model.rod_forces_points(kin, config):
                model.point_jacobian_T_apply(kin, ba, pa, fa, tau_gen)
                model.point_jacobian_T_apply(kin, bb, pb, fb, tau_gen)

        M = model.mass_matrix(kin)
        bias = model.bias_forces(kin, g)
        rhs = tau_gen - bias

        if config.fixed_base:
            acc_j = np.linalg.solve(M[:, 3:, 3:], rhs[:, 3:, None])[..., 0]
            qd = qd + h * acc_j
        else:
            acc = np.linalg.solve(M, rhs[..., None])[..., 0]
            root_vel = root_vel + h * acc[:, :3]
            qd = qd + h * acc[:, 3:]

        root = root.copy()
        root[:, :2] += h * root_vel[:, :2]
        root[:, 2] = wrap_angle(root[:, 2] + h * root_vel[:, 2])
        q = q + h * qd

        # hard joint stops: clamp and kill outward velocity
        at_lo = q < lo
        at_hi = q > hi
        q = np.clip(q, lo, hi)
        qd = np.where(at_lo & (qd < 0), 0.0, qd)
        qd = np.where(at_hi & (qd > 0), 0.0, qd)

    return VecState(root, root_vel, q, qd, flags, state.time + config.dt)


def step(state, target_q, config, model=None, spec=None, gravity=None):
    """Single-environment step; see step_batch for semantics."""
    if model is None:
        if spec is None:
            raise ValueError("need a SimModel or a RobotSpec")
        model = SimModel(spec, config)
    vec = VecState.from_single(state)
    try:
        nxt = step_batch(model, vec, np.asarray(target_q)[None], config, gravity)
    except SimDiverged as err:
        raise SimDiverged(err.last_state.single(0)) from None
    return nxt.single(0)
