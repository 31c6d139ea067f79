"""Reference-triangle nodal basis and quadrature rules.

The reference triangle has vertices (0,0), (1,0), (0,1).  Local face ``k``
runs from vertex ``k`` to vertex ``(k+1) % 3``, so face 0 is ``y = 0``,
face 1 is ``x + y = 1`` and face 2 is ``x = 0``.

Nodal basis functions are built on equally spaced nodes.  Interpolation
goes through an orthogonal (Dubiner) intermediate basis so that the
Vandermonde system stays well conditioned up to moderate degree.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import eval_jacobi, roots_jacobi, roots_legendre

REF_VERTICES = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])

MAX_DEGREE = 10


@dataclass(frozen=True)
class QuadratureRule:
    points: np.ndarray
    weights: np.ndarray
    exactness_degree: int


@lru_cache(maxsize=None)
def triangle_quadrature(min_degree: int) -> QuadratureRule:
    """Collapsed-coordinate Gauss rule on the reference triangle.

    Gauss-Legendre in the collapsed direction and Gauss-Jacobi(1, 0) in the
    other absorb the Duffy Jacobian, so ``k = min_degree // 2 + 1`` points
    per direction are exact for total degree ``2k - 1 >= min_degree``.
    """
    if min_degree < 0:
        raise ValueError("min_degree must be nonnegative")
    k = min_degree // 2 + 1
    a, wa = roots_legendre(k)
    b, wb = roots_jacobi(k, 1.0, 0.0)
    A, B = np.meshgrid(a, b, indexing="ij")
    x = 0.25 * (1.0 + A) * (1.0 - B)
    y = 0.5 * (1.0 + B)
    w = np.outer(wa, wb) / 8.0
    pts = np.column_stack([x.ravel(), y.ravel()])
    return QuadratureRule(pts, w.ravel(), 2 * k - 1)


@lru_cache(maxsize=None)
def face_quadrature(min_degree: int) -> QuadratureRule:
    """Gauss-Legendre rule on the unit parameter interval [0, 1].

    Weights sum to 1; multiply by the face length for physical integrals.
    """
    if min_degree < 0:
        raise ValueError("min_degree must be nonnegative")
    k = min_degree // 2 + 1
    t, w = roots_legendre(k)
    return QuadratureRule(0.5 * (t + 1.0), 0.5 * w, 2 * k - 1)


def face_points(local_face: int, t: np.ndarray) -> np.ndarray:
    """Reference coordinates of parameter values ``t`` on a local face."""
    v0 = REF_VERTICES[local_face]
    v1 = REF_VERTICES[(local_face + 1) % 3]
    t = np.asarray(t, dtype=float)
    return v0[None, :] + t[:, None] * (v1 - v0)[None, :]


def _collapse(pts):
    r = 2.0 * pts[:, 0] - 1.0
    s = 2.0 * pts[:, 1] - 1.0
    a = np.full_like(r, -1.0)
    ok = np.abs(1.0 - s) > 1e-14
    a[ok] = 2.0 * (1.0 + r[ok]) / (1.0 - s[ok]) - 1.0
    return a, s


def _djacobi(n, alpha, beta, x):
    if n == 0:
        return np.zeros_like(x)
    return 0.5 * (n + alpha + beta + 1) * eval_jacobi(n - 1, alpha + 1, beta + 1, x)


def _modes(p):
    return [(i, j) for i in range(p + 1) for j in range(p + 1 - i)]


def dubiner_values(p: int, pts: np.ndarray) -> np.ndarray:
    a, b = _collapse(pts)
    q = 0.5 * (1.0 - b)
    cols = [eval_jacobi(i, 0, 0, a) * eval_jacobi(j, 2 * i + 1, 0, b) * q**i
            for i, j in _modes(p)]
    return np.column_stack(cols)


def dubiner_gradients(p: int, pts: np.ndarray) -> np.ndarray:
    """Gradients with respect to the (x, y) reference coordinates.

    Returns an array of shape ``(npts, nmodes, 2)``.
    """
    a, b = _collapse(pts)
    q = 0.5 * (1.0 - b)
    out = np.empty((len(a), len(_modes(p)), 2))
    for m, (i, j) in enumerate(_modes(p)):
        fa = eval_jacobi(i, 0, 0, a)
        dfa = _djacobi(i, 0, 0, a)
        gb = eval_jacobi(j, 2 * i + 1, 0, b)
        dgb = _djacobi(j, 2 * i + 1, 0, b)
        qm1 = q ** (i - 1) if i > 0 else np.zeros_like(q)
        dr = dfa * gb * qm1
        ds = dfa * gb * 0.5 * (1.0 + a) * qm1 + fa * (dgb * q**i - 0.5 * i * gb * qm1)
        # d/dx = 2 d/dr, d/dy = 2 d/ds
        out[:, m, 0] = 2.0 * dr
        out[:, m, 1] = 2.0 * ds
    return out


def equispaced_nodes(p: int) -> np.ndarray:
    return np.array([(i / p, j / p) for j in range(p + 1) for i in range(p + 1 - j)])


@dataclass(frozen=True, eq=False)
class NodalBasis:
    """Lagrange basis of degree ``p`` on equally spaced reference nodes."""

    p: int
    node_coords: np.ndarray
    face_nodes: tuple
    vinv: np.ndarray

    @property
    def S(self) -> int:
        return (self.p + 1) * (self.p + 2) // 2

    @property
    def S_e(self) -> int:
        return self.p + 1

    def values(self, pts: np.ndarray) -> np.ndarray:
        """Basis values at reference points, shape ``(npts, S)``."""
        return dubiner_values(self.p, np.atleast_2d(pts)) @ self.vinv

    def ref_gradients(self, pts: np.ndarray) -> np.ndarray:
        """Reference gradients, shape ``(npts, S, 2)``."""
        g = dubiner_gradients(self.p, np.atleast_2d(pts))
        return np.einsum("qmd,ms->qsd", g, self.vinv)

    def interpolate(self, func, verts: np.ndarray) -> np.ndarray:
        """Nodal interpolant coefficients of ``func(x, y)`` on one element."""
        x = affine_map(verts, self.node_coords)
        return np.asarray(func(x[:, 0], x[:, 1]), dtype=float)


def _face_node_lists(nodes, p):
    i = np.rint(nodes[:, 0] * p).astype(int)
    j = np.rint(nodes[:, 1] * p).astype(int)
    on_face = [j == 0, i + j == p, i == 0]
    # ordering parameter along each face, from its start vertex to its end
    param = [i, j, p - j]
    lists = []
    for mask, t in zip(on_face, param):
        idx = np.flatnonzero(mask)
        lists.append(tuple(int(k) for k in idx[np.argsort(t[idx])]))
    return tuple(lists)


@lru_cache(maxsize=None)
def reference_element(p: int) -> NodalBasis:
    if not 1 <= p <= MAX_DEGREE:
        raise ValueError(f"polynomial degree must lie in [1, {MAX_DEGREE}], got {p}")
    nodes = equispaced_nodes(p)
    V = dubiner_values(p, nodes)
    return NodalBasis(p, nodes, _face_node_lists(nodes, p), np.linalg.inv(V))


def affine_map(verts: np.ndarray, ref_pts: np.ndarray) -> np.ndarray:
    verts = np.asarray(verts, dtype=float)
    J = np.column_stack([verts[1] - verts[0], verts[2] - verts[0]])
    return verts[0][None, :] + np.atleast_2d(ref_pts) @ J.T


def element_jacobian(verts: np.ndarray):
    """Return ``(J, detJ, invJ)`` of the affine map to a physical triangle."""
    verts = np.asarray(verts, dtype=float)
    J = np.column_stack([verts[1] - verts[0], verts[2] - verts[0]])
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    scale = max(np.abs(J).max(), 1e-300)
    if abs(det) <= 1e-14 * scale * scale:
        raise ValueError("degenerate element (zero area)")
    return J, det, np.linalg.inv(J)


def evaluate_on_element(basis: NodalBasis, verts, what: str, points) -> np.ndarray:
    """Evaluate the basis on a physical element at reference ``points``.

    ``what`` is ``"values"`` (shape ``(npts, S)``) or ``"physical_gradients"``
    (shape ``(npts, S, 2)``).
    """
    _, _, invJ = element_jacobian(verts)
    if what == "values":
        return basis.values(points)
    if what == "physical_gradients":
        # grad_x = J^{-T} grad_ref
        return basis.ref_gradients(points) @ invJ
    raise ValueError(f"unknown evaluation kind {what!r}")
