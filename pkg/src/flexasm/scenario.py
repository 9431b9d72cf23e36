"""Complete spacecraft plant for any assembly state, plus the attitude loop.

One model instance is the free-floating stack-up of: rigid hub, flexible
solar array (with the first-mode frequency pulled out as an uncertainty
channel), rigid tile stack, the flexible structure built so far, and the
three-arm robot gripping a docking tile -- optionally carrying one tile.
The robot walks with arms 1 and 2; arm 3 only handles tiles.

All wired port signals are re-expressed in the hub frame, so each block
is wrapped by its frame's world orientation before interconnection.  The
gripping arm stands on the structure (twist flows up from the docking
port), the other two arms hang off the robot's central hub.

External channels of the open-loop plant:

    inputs  F_G, T_G (hub force/torque), W_ext (wrench at the docking
            port), w_omega (uncertainty);
    outputs a_G, omega_dot_G, z_omega.

Closing the attitude loop adds the integrator banks (omega_G, Theta_G),
the torque disturbance d_t, and the total actuation torque e_t = d_t + u
whose transfer from d_t is the classical input sensitivity.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (
    IkNotConverged,
    MissingStructureData,
    NegativeCount,
    StateInvalid,
)
from .linss import StateSpace, gain, integrator, interconnect, split_channel
from .modal import (
    DEFAULT_DAMPING,
    DEFAULT_TILE_INERTIA,
    DEFAULT_TILE_MASS,
    LatticeStiffness,
    TileLayout,
    build_lattice,
    default_layout,
    load_body_file,
    modal_reduce,
)
from .multibody import (
    Dcm,
    ModalBodyData,
    RigidBodyData,
    apply_frame,
    compose_rigid,
    mode_freq_lfr,
    nearest_dcm,
    rigid_nport,
    rigid_nport_inverted,
    titop_one_port,
    titop_two_port,
    transport_inertia,
)
from .robot import (
    ArmGeometry,
    arm_two_port,
    default_arm_geometry,
    dls_solve,
    link_mass_properties,
    link_poses,
    validate_joints,
    JOINT_LIMIT,
)

__all__ = [
    "ScenarioConfig",
    "AssemblyState",
    "ScenarioModels",
    "table_scenario",
    "stack_properties",
    "build_open_loop",
    "total_inertia",
    "attitude_gains",
    "close_loop",
    "enumerate_model_family",
    "HOME_JOINTS",
]

HOME_JOINTS = np.zeros(5)

# Published spacecraft constants (products of inertia negated into tensors).
HUB_MASS = 166.0
HUB_INERTIA = np.array([[21.6256, -3.84, 0.0],
                        [-3.84, 15.6256, 0.0],
                        [0.0, 0.0, 30.6738]])
GP1 = np.array([0.0, -0.5, 0.0])
GP2 = np.array([-0.5, 0.5, 0.7125])
GP3 = np.array([0.5, 0.0, 0.7125])
ARRAY_DCM = np.diag([-1.0, -1.0, 1.0])

ROBOT_HUB_MASS = 10.0
ROBOT_HUB_INERTIA = 0.6 * np.eye(3)
ARM_MOUNTS = {
    1: np.array([0.1, 0.0, 0.0]),
    2: np.array([-0.05, 0.0, -0.0866]),
    3: np.array([-0.05, 0.0, 0.0866]),
}
ARM_MOUNT_DCMS = {
    1: np.eye(3),
    2: np.array([[-0.5, 0.0, -0.866], [0.0, -1.0, 0.0], [-0.866, 0.0, 0.5]]),
    3: np.array([[-0.5, 0.0, 0.866], [0.0, -1.0, 0.0], [0.866, 0.0, 0.5]]),
}
STACK_OFFSET = np.array([0.5, 0.0, 0.0])


@dataclass(frozen=True)
class AssemblyState:
    """Discrete assembly state: n tiles built, docked at tile j with one
    walking arm, delta = 1 when arm 3 carries a tile."""

    n: int
    j: int
    arm: int
    delta: int

    def __post_init__(self):
        if not (1 <= self.j <= self.n):
            raise StateInvalid(f"docking tile {self.j} outside 1..{self.n}")
        if self.arm not in (1, 2):
            raise StateInvalid(f"gripping arm must be 1 or 2, got {self.arm}")
        if self.delta not in (0, 1):
            raise StateInvalid(f"delta must be 0 or 1, got {self.delta}")


@dataclass(frozen=True)
class ScenarioConfig:
    """All physical data and modeling knobs for one mission scenario."""

    hub: RigidBodyData
    array: ModalBodyData
    array_dcm: np.ndarray
    tile: RigidBodyData
    n_tiles: int
    layout: TileLayout
    arm_geometry: ArmGeometry
    robot_hub: RigidBodyData
    arm_mount_dcms: dict
    stack_offset: np.ndarray
    xi_att: float = 1.0
    f_att_hz: float = 0.01
    r_omega: float = 0.2
    uncertain_mode: int = 0
    z_grid: int = 7
    n_struct_modes: int = 4
    xi_struct: float = DEFAULT_DAMPING
    stiffness: LatticeStiffness = field(default_factory=LatticeStiffness)
    pitch: float = 1.0
    stack_reach: float = 1.5
    name: str = "scenario"

    def __post_init__(self):
        if self.n_tiles < 1:
            raise StateInvalid("need at least one tile")
        if len(self.layout) < self.n_tiles:
            raise MissingStructureData(
                f"layout has {len(self.layout)} cells for N={self.n_tiles}")
        # published mount DCMs are rounded to 4 digits; snap to rotations
        object.__setattr__(self, "arm_mount_dcms",
                           {k: nearest_dcm(v).R for k, v in self.arm_mount_dcms.items()})
        object.__setattr__(self, "array_dcm", nearest_dcm(self.array_dcm).R)

    # -- geometry helpers (hub frame, G at the origin) ----------------------

    def tile_center(self, j: int) -> np.ndarray:
        return GP2_of(self) + self.layout.center(j, self.pitch)

    def stack_center(self) -> np.ndarray:
        return GP3_of(self) + self.stack_offset


def GP2_of(cfg: ScenarioConfig) -> np.ndarray:
    return cfg.hub.offset("P2")


def GP3_of(cfg: ScenarioConfig) -> np.ndarray:
    return cfg.hub.offset("P3")


def table_scenario(n_tiles: int = 4, layout: Optional[TileLayout] = None,
                   z_grid: int = 7, n_struct_modes: int = 4,
                   array: Optional[ModalBodyData] = None,
                   **overrides) -> ScenarioConfig:
    """Scenario built from the published spacecraft tables.

    The flexible structure itself is generated by the lattice bank; only
    its tile properties and layout are inputs.
    """
    from . import data_path

    hub = RigidBodyData(HUB_MASS, HUB_INERTIA,
                        {"P1": GP1, "P2": GP2, "P3": GP3}, name="hub")
    if array is None:
        array = load_body_file(data_path("solar_array.yaml"))
    tile = RigidBodyData(DEFAULT_TILE_MASS, DEFAULT_TILE_INERTIA, {}, name="tile")
    robot_hub = RigidBodyData(ROBOT_HUB_MASS, ROBOT_HUB_INERTIA,
                              {f"A{k}": ARM_MOUNTS[k] for k in (1, 2, 3)},
                              name="robot_hub")
    cfg = ScenarioConfig(
        hub=hub, array=array, array_dcm=ARRAY_DCM, tile=tile,
        n_tiles=n_tiles,
        layout=layout if layout is not None else default_layout(n_tiles),
        arm_geometry=default_arm_geometry(), robot_hub=robot_hub,
        arm_mount_dcms=dict(ARM_MOUNT_DCMS), stack_offset=STACK_OFFSET,
        z_grid=z_grid, n_struct_modes=n_struct_modes, name=f"table_N{n_tiles}")
    return replace(cfg, **overrides) if overrides else cfg


# ---------------------------------------------------------------------------
# stack bookkeeping
# ---------------------------------------------------------------------------

def stack_properties(N: int, n: int, delta: int, tile: RigidBodyData) -> RigidBodyData:
    """Remaining stack as one rigid body: count = N - n - delta tiles."""
    count = N - n - delta
    if count < 0:
        raise NegativeCount(f"stack count N-n-delta = {count}")
    return RigidBodyData(count * tile.mass, count * np.asarray(tile.inertia_G),
                         {}, name=f"stack_{count}")


def enumerate_model_family(N: int):
    """Every (n, j, arm, delta) variant; there are 2 N (N + 1) of them."""
    return [AssemblyState(n, j, arm, delta)
            for n in range(1, N + 1)
            for j in range(1, n + 1)
            for arm in (1, 2)
            for delta in (0, 1)]


def attitude_gains(J_tot: np.ndarray, xi_att: float = 1.0,
                   f_att_hz: float = 0.01) -> np.ndarray:
    """Proportional-derivative attitude gains [k_att c_att] (3 x 6).

    ``k_att = -omega^2 J`` and ``c_att = -2 xi omega J`` with the loop
    frequency given in Hz and converted internally.
    """
    w = 2.0 * np.pi * f_att_hz
    J = np.asarray(J_tot, dtype=float)
    return np.hstack([-w * w * J, -2.0 * xi_att * w * J])


# ---------------------------------------------------------------------------
# model construction
# ---------------------------------------------------------------------------

class ScenarioModels:
    """Model factory with a per-size cache of generated structure data."""

    def __init__(self, cfg: ScenarioConfig):
        self.cfg = cfg
        self._lattices = {}
        self._modal = {}

    # -- structure supply ----------------------------------------------------

    def structure_data(self, n: int, j: int) -> ModalBodyData:
        if not 1 <= n <= self.cfg.n_tiles:
            raise MissingStructureData(f"no structure F_{n} in a {self.cfg.n_tiles}-tile run")
        if not 1 <= j <= n:
            raise MissingStructureData(f"docking tile {j} not part of F_{n}")
        key = (n, j)
        if key not in self._modal:
            if n not in self._lattices:
                self._lattices[n] = build_lattice(
                    self.cfg.layout.head(n), self.cfg.tile.mass,
                    self.cfg.tile.inertia_G, self.cfg.stiffness, self.cfg.pitch)
            n_modes = min(self.cfg.n_struct_modes, 6 * n)
            self._modal[key] = modal_reduce(self._lattices[n], j, n_modes,
                                            self.cfg.xi_struct)
        return self._modal[key]

    # -- robot frame bookkeeping ---------------------------------------------

    def _robot_frames(self, state: AssemblyState, qs):
        """World orientations and positions of the robot cluster."""
        cfg = self.cfg
        g = state.arm
        f = 3 - g
        q = {k: validate_joints(qs[k - 1]) for k in (1, 2, 3)}
        base_world = cfg.tile_center(state.j)

        joints_g, rots_g = link_poses(cfg.arm_geometry, q[g], base="J0")
        M_l5 = {g: rots_g[5]}
        M_c = M_l5[g] @ np.asarray(cfg.arm_mount_dcms[g]).T
        j6_world = {g: base_world + joints_g[6]}
        hub_pos = j6_world[g] - M_c @ cfg.robot_hub.offset(f"A{g}")
        for k in (f, 3):
            M_l5[k] = M_c @ np.asarray(cfg.arm_mount_dcms[k])
            j6_world[k] = hub_pos + M_c @ cfg.robot_hub.offset(f"A{k}")
        return {
            "q": q, "grip": g, "free": f,
            "base_world": base_world, "M_l5": M_l5, "M_c": M_c,
            "hub_pos": hub_pos, "j6_world": j6_world,
            "joints_grip": joints_g, "rots_grip": rots_g,
        }

    # -- open loop -------------------------------------------------------------

    def open_loop(self, state: AssemblyState, qs, rigid: bool = False,
                  pinned: bool = True) -> StateSpace:
        """Plant for one assembly state and arm configuration.

        ``qs`` holds the three joint vectors (arm 1, arm 2, arm 3).  With
        ``rigid=True`` every flexible body is replaced by its rigid block
        and the uncertainty channels become a zero passthrough, which is
        the model the attitude gains are designed against.

        Attitude analysis uses the translation-pinned variant (default):
        the hub translation is constrained at G, matching the mission
        scope in which translational control is out of the loop.  Pinning
        puts the torque-channel antiresonances exactly at the appendages'
        cantilever frequencies and makes the DC gain the inverse of the
        composite inertia *about G*.  ``pinned=False`` returns the free-
        floating plant with its ``F_G``/``a_G`` channels, whose DC gain is
        instead set by the inertia about the composite CoM.
        """
        cfg = self.cfg
        if state.n > cfg.n_tiles:
            raise StateInvalid(f"state has n={state.n} > N={cfg.n_tiles}")
        fr = self._robot_frames(state, qs)
        g, f = fr["grip"], fr["free"]

        hub = rigid_nport(cfg.hub, ["P1", "P2", "P3"])
        hub = split_channel(hub, "W_G", [("F_G", 3), ("T_G", 3)])
        hub = split_channel(hub, "xdd_G", [("a_G", 3), ("omega_dot_G", 3)])

        if rigid:
            arr_data = replace_modes(cfg.array, 0)
            arr = titop_one_port(arr_data)
            wz = gain(np.zeros((2, 2)), (("w_omega", 2),), (("z_omega", 2),))
        else:
            arr = mode_freq_lfr(cfg.array, cfg.uncertain_mode, cfg.r_omega)
            wz = None
        arr = apply_frame(arr, "xdd_P", Dcm(cfg.array_dcm))
        arr = apply_frame(arr, "W_P", Dcm(cfg.array_dcm))

        count = max(cfg.n_tiles - state.n - state.delta, 0)
        stack_body = stack_properties(cfg.n_tiles, state.n, state.delta, cfg.tile) \
            if cfg.n_tiles - state.n - state.delta >= 0 else None
        stk_data = ModalBodyData(
            mass=stack_body.mass, com=cfg.stack_offset,
            inertia_P=transport_inertia(stack_body.inertia_G, stack_body.mass,
                                        cfg.stack_offset),
            freqs=[], dampings=[], L_P=np.zeros((0, 6)), name="stack") \
            if count > 0 else ModalBodyData(0.0, np.zeros(3), np.zeros((3, 3)),
                                            [], [], np.zeros((0, 6)), name="stack")
        stk = titop_one_port(stk_data)

        sdata = self.structure_data(state.n, state.j)
        if rigid:
            sdata = replace_modes(sdata, 0)
        fn = titop_two_port(sdata)

        ga = arm_two_port(cfg.arm_geometry, fr["q"][g], base="J0")
        for ch in ("W_tip", "xdd_tip"):
            ga = apply_frame(ga, ch, Dcm(fr["M_l5"][g]))

        rh = rigid_nport_inverted(cfg.robot_hub, f"A{g}", [f"A{f}", "A3"],
                                  with_com_port=False)
        for ch in [f"xdd_A{g}", f"W_A{g}", f"W_A{f}", f"xdd_A{f}", "W_A3", "xdd_A3"]:
            rh = apply_frame(rh, ch, Dcm(fr["M_c"]))

        fa = arm_two_port(cfg.arm_geometry, fr["q"][f], base="J6")
        for ch in ("W_base", "xdd_base"):
            fa = apply_frame(fa, ch, Dcm(fr["M_l5"][f]))

        a3 = arm_two_port(cfg.arm_geometry, fr["q"][3], base="J6")
        for ch in ("W_base", "xdd_base"):
            a3 = apply_frame(a3, ch, Dcm(fr["M_l5"][3]))
        if state.delta == 1:
            # tip interface carries the tile; express it in the hub frame
            M_l0_3 = fr["M_l5"][3] @ link_poses(cfg.arm_geometry, fr["q"][3],
                                                base="J6")[1][0]
            for ch in ("W_tip", "xdd_tip"):
                a3 = apply_frame(a3, ch, Dcm(M_l0_3))

        blocks = [("hub", hub), ("arr", arr), ("stk", stk), ("fn", fn),
                  ("ga", ga), ("rh", rh), ("fa", fa), ("a3", a3)]
        wiring = [
            ("hub.xdd_P1", "arr.xdd_P"), ("arr.W_P", "hub.W_P1"),
            ("hub.xdd_P3", "stk.xdd_P"), ("stk.W_P", "hub.W_P3"),
            ("hub.xdd_P2", "fn.xdd_P"), ("fn.W_P", "hub.W_P2"),
            ("fn.xdd_C", "ga.xdd_base"), ("ga.W_base", "fn.W_C"),
            ("ga.xdd_tip", f"rh.xdd_A{g}"), (f"rh.W_A{g}", "ga.W_tip"),
            (f"rh.xdd_A{f}", "fa.xdd_base"), ("fa.W_base", f"rh.W_A{f}"),
            ("rh.xdd_A3", "a3.xdd_base"), ("a3.W_base", "rh.W_A3"),
        ]
        if state.delta == 1:
            M_l0_3 = fr["M_l5"][3] @ link_poses(cfg.arm_geometry, fr["q"][3],
                                                base="J6")[1][0]
            tl_data = ModalBodyData(
                mass=cfg.tile.mass, com=np.zeros(3),
                inertia_P=np.asarray(cfg.tile.inertia_G),
                freqs=[], dampings=[], L_P=np.zeros((0, 6)), name="carried_tile")
            tl = titop_one_port(tl_data)
            tl = apply_frame(tl, "xdd_P", Dcm(M_l0_3))
            tl = apply_frame(tl, "W_P", Dcm(M_l0_3))
            blocks.append(("tl", tl))
            wiring += [("a3.xdd_tip", "tl.xdd_P"), ("tl.W_P", "a3.W_tip")]

        ext_in = [("F_G", "hub.F_G"), ("T_G", "hub.T_G"), ("W_ext", "fn.W_C")]
        ext_out = [("a_G", "hub.a_G"), ("omega_dot_G", "hub.omega_dot_G")]
        if wz is None:
            ext_in.append(("w_omega", "arr.w_omega"))
            ext_out.append(("z_omega", "arr.z_omega"))
        else:
            blocks.append(("wz", wz))
            ext_in.append(("w_omega", "wz.w_omega"))
            ext_out.append(("z_omega", "wz.z_omega"))

        plant = interconnect(blocks, wiring, ext_in, ext_out)
        return pin_translation(plant) if pinned else plant

    # -- mass-property oracle ----------------------------------------------

    def mass_properties(self, state: AssemblyState, qs):
        """Composite (mass, CoM, inertia at CoM) in the hub frame.

        Pure mass bookkeeping through the kinematic chain; shares no code
        with the state-space assembly and so cross-checks it at DC.
        """
        cfg = self.cfg
        fr = self._robot_frames(state, qs)
        g, f = fr["grip"], fr["free"]
        array_J_com = np.asarray(cfg.array.inertia_P) - cfg.array.mass * (
            float(cfg.array.com @ cfg.array.com) * np.eye(3)
            - np.outer(cfg.array.com, cfg.array.com))
        parts = [
            (cfg.hub.mass, np.zeros(3), cfg.hub.inertia_G, None),
            (cfg.array.mass, cfg.hub.offset("P1") + cfg.array_dcm @ cfg.array.com,
             array_J_com, cfg.array_dcm),
        ]
        count = max(cfg.n_tiles - state.n - state.delta, 0)
        if count > 0:
            parts.append((count * cfg.tile.mass, cfg.stack_center(),
                          count * np.asarray(cfg.tile.inertia_G), None))
        for t in range(1, state.n + 1):
            parts.append((cfg.tile.mass, cfg.tile_center(t),
                          cfg.tile.inertia_G, None))

        base = fr["base_world"]
        for (m, com, J, R) in link_mass_properties(cfg.arm_geometry, fr["q"][g], "J0"):
            parts.append((m, base + com, J, R))
        parts.append((cfg.robot_hub.mass, fr["hub_pos"],
                      cfg.robot_hub.inertia_G, fr["M_c"]))
        for k in (f, 3):
            M = fr["M_l5"][k]
            origin = fr["j6_world"][k]
            for (m, com, J, R) in link_mass_properties(cfg.arm_geometry,
                                                       fr["q"][k], "J6"):
                parts.append((m, origin + M @ com, J, M @ R))
        if state.delta == 1:
            joints3, rots3 = link_poses(cfg.arm_geometry, fr["q"][3], base="J6")
            tip = fr["j6_world"][3] + fr["M_l5"][3] @ joints3[0]
            parts.append((cfg.tile.mass, tip, cfg.tile.inertia_G,
                          fr["M_l5"][3] @ rots3[0]))
        return compose_rigid(parts)

    def total_inertia(self, state: AssemblyState, qs) -> np.ndarray:
        """Composite inertia about the hub CoM G, hub frame.

        The translation-pinned plant shows exactly the inverse of this
        tensor as its DC gain from hub torque to angular acceleration, so
        it is also the tensor the attitude gains are sized with.  (The
        free-floating variant's DC gain is instead the inverse of the
        inertia about the composite CoM, available from
        :meth:`mass_properties`.)
        """
        m, com, J_com = self.mass_properties(state, qs)
        return transport_inertia(J_com, m, com)

    def closed_loop(self, state: AssemblyState, qs, K_att: np.ndarray,
                    rigid: bool = False, pinned: bool = True) -> StateSpace:
        return close_loop(self.open_loop(state, qs, rigid=rigid, pinned=pinned),
                          K_att)

    def design_gains(self, state: Optional[AssemblyState] = None,
                     qs=None) -> np.ndarray:
        """Baseline gains sized on the worst-case (largest) inertia state.

        Scans the model family at the home configuration when no state is
        given; for disturbance rejection the worst case is the heaviest
        configuration the mission reaches.
        """
        home = (HOME_JOINTS,) * 3
        if state is not None:
            J = self.total_inertia(state, qs if qs is not None else home)
            return attitude_gains(J, self.cfg.xi_att, self.cfg.f_att_hz)
        best = None
        for cand in enumerate_model_family(self.cfg.n_tiles):
            J = self.total_inertia(cand, home)
            if best is None or np.trace(J) > np.trace(best):
                best = J
        return attitude_gains(best, self.cfg.xi_att, self.cfg.f_att_hz)

    # -- combined-arm reach -----------------------------------------------

    def solve_reach(self, state: AssemblyState, reach_arm: int,
                    target_world, q_seed=None, pos_tol: float = 1e-4):
        """Joint angles placing ``reach_arm``'s tip at a world point.

        Solves the 10-dof chain through the gripping arm and the robot
        hub by damped least squares; returns ``(q_grip, q_reach)``.  Far
        targets can trap the descent from the upright home posture, so a
        short deterministic ladder of pre-bent seeds is tried in order.
        """
        cfg = self.cfg
        g = state.arm
        if reach_arm == g:
            raise StateInvalid("reach arm cannot be the gripping arm")
        target_world = np.asarray(target_world, dtype=float)

        def tip_position(q10):
            qg, qr = q10[:5], q10[5:]
            joints_g, rots_g = link_poses(cfg.arm_geometry, qg, base="J0")
            M_c = rots_g[5] @ np.asarray(cfg.arm_mount_dcms[g]).T
            hub_pos = (cfg.tile_center(state.j) + joints_g[6]
                       - M_c @ cfg.robot_hub.offset(f"A{g}"))
            M_l5r = M_c @ np.asarray(cfg.arm_mount_dcms[reach_arm])
            j6r = hub_pos + M_c @ cfg.robot_hub.offset(f"A{reach_arm}")
            joints_r, _ = link_poses(cfg.arm_geometry, qr, base="J6")
            return j6r + M_l5r @ joints_r[0]

        def bent(a, b, yaw=0.0):
            return np.concatenate([[yaw, a, a, a, 0.0], [0.0, b, b, b, 0.0]])

        seeds = [np.asarray(q_seed, dtype=float)] if q_seed is not None else []
        seeds += [np.zeros(10)]
        seeds += [bent(a, b) for a in (0.5, -0.5) for b in (0.5, -0.5)]
        seeds += [bent(0.5, -0.5, 1.5), bent(0.5, -0.5, -1.5)]
        last = None
        for q0 in seeds:
            try:
                q = dls_solve(lambda q10: tip_position(q10) - target_world, q0,
                              -JOINT_LIMIT * np.ones(10), JOINT_LIMIT * np.ones(10),
                              tol=0.5 * pos_tol, max_iter=400)
                return q[:5], q[5:]
            except IkNotConverged as exc:
                last = exc
        raise last


def pin_translation(plant: StateSpace) -> StateSpace:
    """Constrain the hub translation: close a_G = 0 and hide the
    constraint-force channel (attitude-only boundary condition)."""
    from .linss import invert_channels

    inv = invert_channels(plant, ["F_G"], ["a_G"])
    return inv.subsystem(
        outputs=[c for c, _ in inv.out_channels if c != "F_G"],
        inputs=[c for c, _ in inv.in_channels if c != "a_G"])


def replace_modes(data: ModalBodyData, n_modes: int) -> ModalBodyData:
    """Truncate a modal body to its first ``n_modes`` modes."""
    return ModalBodyData(
        mass=data.mass, com=data.com, inertia_P=data.inertia_P,
        freqs=data.freqs[:n_modes], dampings=data.dampings[:n_modes],
        L_P=data.L_P[:n_modes, :],
        phi_C=None if data.phi_C is None else data.phi_C[:, :n_modes],
        pc=data.pc, name=data.name)


def close_loop(plant: StateSpace, K_att: np.ndarray) -> StateSpace:
    """Attitude loop around an open plant.

    Appends the two integrator banks (angular rate, then small-angle
    attitude), feeds back ``u = K_att [Theta; omega]``, and exposes the
    torque disturbance path ``d_t -> e_t`` with ``e_t = d_t + u`` (total
    torque entering the hub, the input-sensitivity output).
    """
    K_att = np.asarray(K_att, dtype=float).reshape(3, 6)
    iw = integrator(3, "wdot", "w")
    it = integrator(3, "w", "theta")
    K = gain(K_att, (("theta", 3), ("omega", 3)), (("u", 3),))
    add = gain(np.hstack([np.eye(3), np.eye(3)]),
               (("d", 3), ("u", 3)), (("e", 3),))
    blocks = [("p", plant), ("iw", iw), ("it", it), ("k", K), ("add", add)]
    wiring = [
        ("p.omega_dot_G", "iw.wdot"),
        ("iw.w", "it.w"), ("iw.w", "k.omega"),
        ("it.theta", "k.theta"),
        ("k.u", "p.T_G"), ("k.u", "add.u"),
    ]
    ext_in = [("d_t", ["p.T_G", "add.d"]),
              ("W_ext", "p.W_ext"),
              ("w_omega", "p.w_omega")]
    ext_out = [("omega_dot_G", "p.omega_dot_G"),
               ("omega_G", "iw.w"),
               ("Theta_G", "it.theta"),
               ("e_t", "add.e"),
               ("z_omega", "p.z_omega")]
    if plant.has_input("F_G"):
        ext_in.append(("F_G", "p.F_G"))
    if plant.has_output("a_G"):
        ext_out.append(("a_G", "p.a_G"))
    return interconnect(blocks, wiring, ext_in, ext_out)


# ---------------------------------------------------------------------------
# spec-level convenience functions
# ---------------------------------------------------------------------------

def build_open_loop(cfg: ScenarioConfig, state: AssemblyState,
                    q1=None, q2=None, q3=None, rigid: bool = False,
                    pinned: bool = True) -> StateSpace:
    qs = tuple(HOME_JOINTS if q is None else q for q in (q1, q2, q3))
    return ScenarioModels(cfg).open_loop(state, qs, rigid=rigid, pinned=pinned)


def total_inertia(cfg: ScenarioConfig, state: AssemblyState,
                  q1=None, q2=None, q3=None) -> np.ndarray:
    qs = tuple(HOME_JOINTS if q is None else q for q in (q1, q2, q3))
    return ScenarioModels(cfg).total_inertia(state, qs)
