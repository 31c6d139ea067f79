"""Lifting operators, fluxes and primal-form assembly for CDG, LDG and BR2.

Every facewise lifting that enters the primal forms has the same shape on
the element ``K`` that carries it::

    lift(u)|_K = -nu * M_K^{-1} G u

where ``nu`` is the outward unit normal of ``K`` on the face and ``G`` is the
face matrix ``Phi_K^T W (Phi_K u_K - Phi_o u_o)`` (the other side is absent
on Dirichlet faces).  For CDG and LDG the combined lifting
``r^e([u]) + l^e(C12 . [u])`` of an interior face lives on the element
whose switch is 1; BR2 uses ``r^e`` alone, which splits in halves over both
sides.  The schemes differ only in how these pieces are multiplied.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from .basis import NodalBasis, face_points, face_quadrature, triangle_quadrature
from .linalg import MassMatrix, SystemMatrix
from .mesh import DIRICHLET, NEUMANN, Mesh, SwitchAssignment

SCHEMES = ("CDG", "LDG", "BR2")


def _zero(x, y):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass
class ProblemSpec:
    """Data of ``-div(kappa grad u) = f`` with Dirichlet/Neumann boundaries.

    ``kappa`` is a positive constant or a callable ``kappa(x, y)``.
    """

    f: Callable = _zero
    g_D: Callable = _zero
    g_N: Callable = _zero
    kappa: float | Callable = 1.0

    def kappa_at(self, x, y) -> np.ndarray:
        if callable(self.kappa):
            k = np.asarray(self.kappa(x, y), dtype=float)
        else:
            k = np.full(np.shape(x), float(self.kappa))
        if np.any(k <= 0):
            raise ValueError("kappa must be positive")
        return k

    def check(self, mesh: Mesh) -> None:
        if not mesh.periodic and not any(f.tag == DIRICHLET for f in mesh.boundary_faces):
            raise ValueError("a non-periodic problem needs a nonempty Dirichlet boundary")


@dataclass
class SchemeConfig:
    scheme: str = "CDG"
    c11_interior: float = 0.0
    c11_boundary: float = 1.0
    eta: float = 3.0
    switch: str = "consistent"

    def __post_init__(self):
        self.scheme = self.scheme.upper()
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.c11_interior < 0 or self.c11_boundary < 0:
            raise ValueError("C11 must be nonnegative")


@dataclass
class DGField:
    """Per-element nodal coefficients, ``(T, S)`` or ``(T, 2, S)``."""

    coeffs: np.ndarray

    @property
    def arity(self) -> str:
        return "scalar" if self.coeffs.ndim == 2 else "vector"

    def __add__(self, other):
        return DGField(self.coeffs + other.coeffs)

    def __sub__(self, other):
        return DGField(self.coeffs - other.coeffs)

    def __mul__(self, c):
        return DGField(self.coeffs * c)

    __rmul__ = __mul__

    @classmethod
    def zeros(cls, T, S, vector=False):
        return cls(np.zeros((T, 2, S) if vector else (T, S)))


class FaceTrace(NamedTuple):
    values: np.ndarray      # (nq, S)
    gradients: np.ndarray   # (nq, S, 2), physical
    points: np.ndarray      # (nq, 2), physical
    weights: np.ndarray     # (nq,), quadrature weight times face length
    normal: np.ndarray      # outward normal of this element


class Lift(NamedTuple):
    target: int
    normal: np.ndarray
    G: np.ndarray           # (S, S * len(elems))
    elems: tuple
    g_rhs: np.ndarray | None  # Phi^T W g_D on Dirichlet faces


class DGSpace:
    """Geometry, quadrature and element matrices of a mesh/basis pair.

    Matrix terms are integrated with rules exact to degree ``2p + 2``; data
    integrals (source, boundary values, errors) use degree ``2p + 4``.
    """

    def __init__(self, mesh: Mesh, basis: NodalBasis, kappa=1.0):
        self.mesh = mesh
        self.basis = basis
        self.kappa = kappa
        self.T = mesh.num_elements
        self.S = basis.S
        p = basis.p
        self.vol_rule = triangle_quadrature(2 * p + 2)
        self.data_rule = triangle_quadrature(2 * p + 4)
        self.face_rule = face_quadrature(2 * p + 2)
        self.face_data_rule = face_quadrature(2 * p + 4)

        verts = mesh.vertices[mesh.elements]
        self.x0 = verts[:, 0]
        self.J = np.stack([verts[:, 1] - verts[:, 0], verts[:, 2] - verts[:, 0]], axis=2)
        self.detJ = np.linalg.det(self.J)
        if np.any(self.detJ <= 0):
            raise ValueError("degenerate or inverted element")
        self.invJ = np.linalg.inv(self.J)

        self._vol_phi = basis.values(self.vol_rule.points)
        self._vol_dphi = basis.ref_gradients(self.vol_rule.points)
        self._face_tables = {}

    def kappa_at(self, x, y):
        return ProblemSpec(kappa=self.kappa).kappa_at(x, y)

    def map_points(self, ref_pts: np.ndarray) -> np.ndarray:
        """Physical coordinates ``(T, npts, 2)`` of reference points."""
        return self.x0[:, None, :] + np.einsum("kij,qj->kqi", self.J, ref_pts)

    def physical_gradients(self, ref_dphi: np.ndarray, k=None) -> np.ndarray:
        invJ = self.invJ if k is None else self.invJ[k]
        if k is None:
            return np.einsum("qsd,kde->kqse", ref_dphi, invJ)
        return ref_dphi @ invJ

    @cached_property
    def _vol_kappa(self):
        x = self.map_points(self.vol_rule.points)
        return self.kappa_at(x[..., 0], x[..., 1])

    @cached_property
    def mass_blocks(self) -> np.ndarray:
        w = self.vol_rule.weights[None, :] * self.detJ[:, None]
        return np.einsum("qi,kq,qj->kij", self._vol_phi, w, self._vol_phi)

    @cached_property
    def mass(self) -> MassMatrix:
        return MassMatrix(self.mass_blocks)

    @cached_property
    def mass_inv(self) -> np.ndarray:
        return np.linalg.inv(self.mass_blocks)

    @cached_property
    def kappa_mass_blocks(self) -> np.ndarray:
        w = self.vol_rule.weights[None, :] * self.detJ[:, None] * self._vol_kappa
        return np.einsum("qi,kq,qj->kij", self._vol_phi, w, self._vol_phi)

    @cached_property
    def lift_product(self) -> np.ndarray:
        """``M^{-1} M_kappa M^{-1}`` per element."""
        Mi = self.mass_inv
        return Mi @ self.kappa_mass_blocks @ Mi

    @cached_property
    def stiffness_blocks(self) -> np.ndarray:
        G = self.physical_gradients(self._vol_dphi)
        w = self.vol_rule.weights[None, :] * self.detJ[:, None] * self._vol_kappa
        return np.einsum("kqid,kq,kqjd->kij", G, w, G)

    def _face_table(self, local, reverse, rule):
        key = (local, reverse, id(rule))
        if key not in self._face_tables:
            # reversed parameter: same physical points seen from the other side
            t = 1.0 - rule.points if reverse else rule.points
            pts = face_points(local, t)
            phi = self.basis.values(pts)
            # traces of off-face nodal functions vanish; make that exact
            off = np.setdiff1d(np.arange(self.S), self.basis.face_nodes[local])
            phi[:, off] = 0.0
            self._face_tables[key] = (phi, self.basis.ref_gradients(pts), pts)
        return self._face_tables[key]

    def face_trace(self, k: int, local: int, reverse: bool = False, data: bool = False) -> FaceTrace:
        rule = self.face_data_rule if data else self.face_rule
        phi, dphi, ref = self._face_table(local, reverse, rule)
        a, b = self.mesh.face_vertices(k, local)
        length = float(np.hypot(*(b - a)))
        d = b - a
        nrm = np.array([d[1], -d[0]]) / length
        x = self.x0[k] + ref @ self.J[k].T
        return FaceTrace(phi, dphi @ self.invJ[k], x, rule.weights * length, nrm)

    def interpolate(self, func: Callable) -> DGField:
        x = self.map_points(self.basis.node_coords)
        return DGField(np.asarray(func(x[..., 0], x[..., 1]), dtype=float))

    def l2_project(self, func: Callable) -> DGField:
        rule = self.data_rule
        phi = self.basis.values(rule.points)
        x = self.map_points(rule.points)
        w = rule.weights[None, :] * self.detJ[:, None] * func(x[..., 0], x[..., 1])
        rhs = np.einsum("qi,kq->ki", phi, w)
        return DGField(np.einsum("kij,kj->ki", self.mass_inv, rhs))


# ---------------------------------------------------------------- liftings

def _interior_traces(space: DGSpace, fid: int):
    f = space.mesh.interior_faces[fid]
    ta = space.face_trace(f.plus, f.local_plus)
    tb = space.face_trace(f.minus, f.local_minus, reverse=True)
    return f, ta, tb


def lift_r_face(space: DGSpace, fid: int, phi: np.ndarray) -> DGField:
    """``r^e(phi)`` for an interior face; ``phi`` is ``(nq, 2)`` at the face
    quadrature points (plus-side parametrization)."""
    if not 0 <= fid < len(space.mesh.interior_faces):
        raise ValueError("r^e is defined on interior faces only")
    f, ta, tb = _interior_traces(space, fid)
    out = DGField.zeros(space.T, space.S, vector=True)
    for k, tr in ((f.plus, ta), (f.minus, tb)):
        rhs = -0.5 * np.einsum("qi,q,qc->ci", tr.values, tr.weights, phi)
        out.coeffs[k] += rhs @ space.mass_inv[k].T
    return out


def lift_l_face(space: DGSpace, fid: int, q: np.ndarray) -> DGField:
    """``l^e(q)`` for an interior face; ``q`` is ``(nq,)``."""
    if not 0 <= fid < len(space.mesh.interior_faces):
        raise ValueError("l^e is defined on interior faces only")
    f, ta, tb = _interior_traces(space, fid)
    nplus = np.asarray(f.normal)
    out = DGField.zeros(space.T, space.S, vector=True)
    for k, tr, nrm in ((f.plus, ta, nplus), (f.minus, tb, -nplus)):
        rhs = -np.outer(nrm, tr.values.T @ (tr.weights * q))
        out.coeffs[k] += rhs @ space.mass_inv[k].T
    return out


def lift_rD_face(space: DGSpace, bid: int, q: np.ndarray) -> DGField:
    """``r_D^e(q)`` for a boundary face; zero on Neumann faces."""
    if not 0 <= bid < len(space.mesh.boundary_faces):
        raise ValueError("r_D^e is defined on boundary faces only")
    bf = space.mesh.boundary_faces[bid]
    out = DGField.zeros(space.T, space.S, vector=True)
    if bf.tag == NEUMANN:
        return out
    tr = space.face_trace(bf.elem, bf.local)
    rhs = -np.outer(tr.normal, tr.values.T @ (tr.weights * q))
    out.coeffs[bf.elem] += rhs @ space.mass_inv[bf.elem].T
    return out


def cdg_face_sigma_support(mesh: Mesh, switches: SwitchAssignment, fid: int) -> int:
    """Element carrying the facewise lifted flux of an interior face."""
    f = mesh.interior_faces[fid]
    return f.plus if switches.s_plus[fid] == 1 else f.minus


def face_jump(space: DGSpace, u: DGField, fid: int) -> np.ndarray:
    """``[u]`` at the face quadrature points, shape ``(nq, 2)``."""
    f, ta, tb = _interior_traces(space, fid)
    d = ta.values @ u.coeffs[f.plus] - tb.values @ u.coeffs[f.minus]
    return d[:, None] * np.asarray(f.normal)[None, :]


# ---------------------------------------------------------------- assembly

def _interior_face_lifts(space, fid, f, ta, tb, switches, scheme):
    """Lift records of one interior face."""
    S = space.S
    jump = np.hstack([ta.values, -tb.values])  # u_plus - u_minus
    if scheme == "BR2":
        return [Lift(f.plus, ta.normal, ta.values.T @ (ta.weights[:, None] * jump),
                     (f.plus, f.minus), None),
                Lift(f.minus, ta.normal, tb.values.T @ (ta.weights[:, None] * jump),
                     (f.plus, f.minus), None)]
    if switches.s_plus[fid] == 1:
        G = ta.values.T @ (ta.weights[:, None] * jump)
        return [Lift(f.plus, ta.normal, G, (f.plus, f.minus), None)]
    G = -tb.values.T @ (ta.weights[:, None] * jump)
    assert G.shape == (S, 2 * S)
    return [Lift(f.minus, -ta.normal, G, (f.plus, f.minus), None)]


def _collect_lifts(space: DGSpace, switches, scheme: str, g_D=None):
    lifts = []
    mesh = space.mesh
    for fid in range(len(mesh.interior_faces)):
        f, ta, tb = _interior_traces(space, fid)
        lifts += _interior_face_lifts(space, fid, f, ta, tb, switches, scheme)
    for bf in mesh.boundary_faces:
        if bf.tag != DIRICHLET:
            continue
        tr = space.face_trace(bf.elem, bf.local)
        G = tr.values.T @ (tr.weights[:, None] * tr.values)
        g_rhs = None
        if g_D is not None:
            g_rhs = _dirichlet_data_moment(space, bf, g_D)
        lifts.append(Lift(bf.elem, tr.normal, G, (bf.elem,), g_rhs))
    return lifts


def _dirichlet_data_moment(space, bf, g_D):
    tr = space.face_trace(bf.elem, bf.local, data=True)
    g = g_D(tr.points[:, 0], tr.points[:, 1])
    return tr.values.T @ (tr.weights * g)


def _add_rhs(b, elems, vec, S):
    for a, e in enumerate(elems):
        b[e] += vec[a * S:(a + 1) * S]


def assemble(mesh: Mesh, basis: NodalBasis, switches: SwitchAssignment | None,
             problem: ProblemSpec, config: SchemeConfig, space: DGSpace | None = None):
    """Assemble the primal system ``A u = b`` of the configured scheme."""
    problem.check(mesh)
    scheme = config.scheme
    if space is None:
        space = DGSpace(mesh, basis, problem.kappa)
    S, T = space.S, space.T
    A = SystemMatrix(T, S)
    b = np.zeros((T, S))
    if scheme == "BR2" and (config.c11_interior or config.c11_boundary):
        A.notes.append("BR2 ignores C11 values")
    if scheme != "BR2" and switches is None:
        raise ValueError(f"{scheme} needs a switch assignment")

    A.diag += space.stiffness_blocks

    # source
    rule = space.data_rule
    x = space.map_points(rule.points)
    w = rule.weights[None, :] * space.detJ[:, None] * problem.f(x[..., 0], x[..., 1])
    b += np.einsum("qi,kq->ki", basis.values(rule.points), w)

    for fid, f in enumerate(mesh.interior_faces):
        _, ta, tb = _interior_traces(space, fid)
        W = ta.weights
        n = ta.normal
        ka = space.kappa_at(ta.points[:, 0], ta.points[:, 1])
        dna = ka[:, None] * (ta.gradients @ n)
        dnb = ka[:, None] * (tb.gradients @ n)
        jump = np.hstack([ta.values, -tb.values])
        # {k grad u} + C12 [k grad u] . n_plus: the average for BR2, the
        # trace from the switch-1 side otherwise (weights exactly 0 and 1)
        if scheme == "BR2":
            wa = wb = 0.5
        else:
            sgn = switches.sign(fid)
            wa, wb = 0.5 * (1 + sgn), 0.5 * (1 - sgn)
        flux = np.hstack([wa * dna, wb * dnb])
        loc = -(flux.T @ (W[:, None] * jump) + jump.T @ (W[:, None] * flux))
        if scheme != "BR2" and config.c11_interior:
            loc += config.c11_interior * jump.T @ (W[:, None] * jump)
        A.add_local((f.plus, f.minus), loc)

    for bf in mesh.boundary_faces:
        k = bf.elem
        if bf.tag == NEUMANN:
            tr = space.face_trace(k, bf.local, data=True)
            gn = problem.g_N(tr.points[:, 0], tr.points[:, 1])
            b[k] += tr.values.T @ (tr.weights * gn)
            continue
        tr = space.face_trace(k, bf.local)
        kap = space.kappa_at(tr.points[:, 0], tr.points[:, 1])
        dn = kap[:, None] * (tr.gradients @ tr.normal)
        W = tr.weights
        loc = -(tr.values.T @ (W[:, None] * dn) + dn.T @ (W[:, None] * tr.values))
        c11 = 0.0 if scheme == "BR2" else config.c11_boundary
        if c11:
            loc += c11 * tr.values.T @ (W[:, None] * tr.values)
        A.add_block(k, k, loc)
        trd = space.face_trace(k, bf.local, data=True)
        g = problem.g_D(trd.points[:, 0], trd.points[:, 1])
        kd = space.kappa_at(trd.points[:, 0], trd.points[:, 1])
        dnd = kd[:, None] * (trd.gradients @ trd.normal)
        b[k] += -dnd.T @ (trd.weights * g)
        if c11:
            b[k] += c11 * trd.values.T @ (trd.weights * g)

    lifts = _collect_lifts(space, switches, scheme, problem.g_D)
    P = space.lift_product
    if scheme in ("CDG", "BR2"):
        for lf in lifts:
            scale = config.eta * (0.25 if len(lf.elems) == 2 else 1.0) if scheme == "BR2" else 1.0
            GP = lf.G.T @ P[lf.target]
            A.add_local(lf.elems, scale * GP @ lf.G)
            if lf.g_rhs is not None:
                _add_rhs(b, lf.elems, scale * GP @ lf.g_rhs, S)
    else:
        by_target: dict = {}
        for lf in lifts:
            by_target.setdefault(lf.target, []).append(lf)
        for k, group in by_target.items():
            Pk = P[k]
            for le in group:
                GP = le.G.T @ Pk
                for lg in group:
                    c = float(np.dot(le.normal, lg.normal))
                    _add_block_pairs(A, le.elems, lg.elems, c * GP @ lg.G, S)
                    if lg.g_rhs is not None:
                        _add_rhs(b, le.elems, c * GP @ lg.g_rhs, S)
    return A, b.ravel()


def _add_block_pairs(A, rows, cols, block, S):
    for a, ea in enumerate(rows):
        for c, ec in enumerate(cols):
            A.add_block(ea, ec, block[a * S:(a + 1) * S, c * S:(c + 1) * S])


def lifting_cross_terms(space: DGSpace, switches: SwitchAssignment) -> SystemMatrix:
    """The ``e != f`` lifting products that LDG keeps and CDG drops."""
    out = SystemMatrix(space.T, space.S)
    by_target: dict = {}
    for lf in _collect_lifts(space, switches, "LDG"):
        by_target.setdefault(lf.target, []).append(lf)
    P = space.lift_product
    for k, group in by_target.items():
        for i, le in enumerate(group):
            for j, lg in enumerate(group):
                if i == j:
                    continue
                c = float(np.dot(le.normal, lg.normal))
                _add_block_pairs(out, le.elems, lg.elems, c * le.G.T @ P[k] @ lg.G, space.S)
    return out


# ---------------------------------------------------------------- structure

def structural_pattern(mesh: Mesh, basis: NodalBasis, switches: SwitchAssignment | None,
                       scheme: str) -> dict:
    """Structural block masks ``{(row elem, col elem): (S, S) bool}``.

    Derived from which basis functions each term of the form touches: the
    volume term couples all dofs of an element; face terms touch the face
    dofs (nonzero traces) and, through normal derivatives, all dofs; lifting
    products only ever touch face dofs.
    """
    scheme = scheme.upper()
    S = basis.S
    allv = np.ones(S, dtype=bool)
    face = []
    for lf in range(3):
        m = np.zeros(S, dtype=bool)
        m[list(basis.face_nodes[lf])] = True
        face.append(m)
    pat: dict = {}

    def add(i, ri, j, cj):
        blk = pat.setdefault((i, j), np.zeros((S, S), dtype=bool))
        blk |= np.outer(ri, cj)

    for k in range(mesh.num_elements):
        add(k, allv, k, allv)

    # lifting supports: (target, [(elem, face mask), ...])
    supports = []
    for fid, f in enumerate(mesh.interior_faces):
        fa, fb = face[f.local_plus], face[f.local_minus]
        sides = [(f.plus, fa), (f.minus, fb)]
        if scheme == "BR2":
            # average-based consistency: every dof against the face dofs
            for (i, mi) in sides:
                for (j, mj) in sides:
                    add(i, allv, j, mj)
                    add(i, mi, j, allv)
            supports.append((f.plus, sides))
            supports.append((f.minus, sides))
            continue
        # one-sided flux: normal derivative from the switch-1 side only
        src = 0 if switches.s_plus[fid] == 1 else 1
        i, _ = sides[src]
        for (j, mj) in sides:
            add(i, allv, j, mj)
            add(j, mj, i, allv)
        for (i2, mi) in sides:
            for (j2, mj) in sides:
                add(i2, mi, j2, mj)
        supports.append((sides[src][0], sides))
    for bf in mesh.boundary_faces:
        if bf.tag == DIRICHLET:
            supports.append((bf.elem, [(bf.elem, face[bf.local])]))

    if scheme in ("CDG", "BR2"):
        for _, sides in supports:
            for (i, mi) in sides:
                for (j, mj) in sides:
                    add(i, mi, j, mj)
    else:
        by_target: dict = {}
        for tgt, sides in supports:
            by_target.setdefault(tgt, []).append(sides)
        for group in by_target.values():
            for se in group:
                for sf in group:
                    for (i, mi) in se:
                        for (j, mj) in sf:
                            add(i, mi, j, mj)
    return pat


def pattern_to_dense(pattern: dict, T: int, S: int) -> np.ndarray:
    out = np.zeros((T * S, T * S), dtype=bool)
    for (i, j), m in pattern.items():
        out[i * S:(i + 1) * S, j * S:(j + 1) * S] |= m
    return out


# ---------------------------------------------------------------- fluxes

def global_lifts(space: DGSpace, u: DGField, switches: SwitchAssignment | None,
                 g_D: Callable | None = None, use_c12: bool = True):
    """``r([u])``, ``l(C12 . [u])`` and ``r_D(g_D - u)`` as whole-mesh fields.

    Face moments from all faces are accumulated into one right-hand side
    per element before a single mass solve.
    """
    mesh = space.mesh
    T, S = space.T, space.S
    rr = np.zeros((T, 2, S))
    ll = np.zeros((T, 2, S))
    rd = np.zeros((T, 2, S))
    for fid, f in enumerate(mesh.interior_faces):
        _, ta, tb = _interior_traces(space, fid)
        n = np.asarray(f.normal)
        d = ta.values @ u.coeffs[f.plus] - tb.values @ u.coeffs[f.minus]
        for k, tr, nk in ((f.plus, ta, n), (f.minus, tb, -n)):
            rr[k] -= 0.5 * np.outer(n, tr.values.T @ (ta.weights * d))
            if use_c12:
                c12n = 0.5 * switches.sign(fid)  # C12 . n_plus
                ll[k] -= np.outer(nk, tr.values.T @ (ta.weights * c12n * d))
    for bf in mesh.boundary_faces:
        if bf.tag != DIRICHLET:
            continue
        tr = space.face_trace(bf.elem, bf.local, data=True)
        q = -(tr.values @ u.coeffs[bf.elem])
        if g_D is not None:
            q = q + g_D(tr.points[:, 0], tr.points[:, 1])
        rd[bf.elem] -= np.outer(tr.normal, tr.values.T @ (tr.weights * q))
    Mi = space.mass_inv
    solve = lambda R: np.einsum("kij,kcj->kci", Mi, R)  # noqa: E731
    return DGField(solve(rr)), DGField(solve(ll)), DGField(solve(rd))


def broken_gradient(space: DGSpace, u: DGField) -> DGField:
    """Nodal coefficients of the elementwise gradient (exact, degree p-1)."""
    dphi = space.basis.ref_gradients(space.basis.node_coords)
    g = np.einsum("nsd,kde,ks->ken", dphi, space.invJ, u.coeffs)
    return DGField(g)


def reconstruct_flux(u: DGField, space: DGSpace, switches: SwitchAssignment | None,
                     problem: ProblemSpec, scheme: str = "CDG") -> DGField:
    """``sigma_h = kappa grad_h u + kappa (r([u]) + l(C12.[u]) - r_D(g_D - u))``.

    Multiplication by ``kappa`` is done nodally.  BR2 carries no switch, so
    its reconstruction drops the ``l`` term.
    """
    use_c12 = scheme.upper() != "BR2"
    rr, ll, rd = global_lifts(space, u, switches, problem.g_D, use_c12)
    x = space.map_points(space.basis.node_coords)
    kap = space.kappa_at(x[..., 0], x[..., 1])[:, None, :]
    grad = broken_gradient(space, u)
    return DGField(kap * (grad.coeffs + rr.coeffs + ll.coeffs - rd.coeffs))
