"""Triangular meshes, face connectivity and face switches."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

DIRICHLET = "Dirichlet"
NEUMANN = "Neumann"

# Reference direction for the consistent switch; not parallel to any
# face normal of the structured meshes.
CONSISTENT_DIRECTION = (1.0, -0.3)


class InteriorFace(NamedTuple):
    plus: int
    minus: int
    local_plus: int
    local_minus: int
    normal: tuple  # unit normal of the plus element, pointing into minus


class BoundaryFace(NamedTuple):
    elem: int
    local: int
    normal: tuple  # unit outward normal
    tag: str


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray
    elements: np.ndarray
    interior_faces: tuple
    boundary_faces: tuple
    periodic: bool = False
    n: int | None = None
    # (element, local face) -> ("i", face id) or ("b", face id)
    face_of: dict = field(default_factory=dict, repr=False)

    @property
    def num_elements(self) -> int:
        return len(self.elements)

    @property
    def h(self) -> float | None:
        return None if self.n is None else 1.0 / self.n

    def element_vertices(self, k: int) -> np.ndarray:
        return self.vertices[self.elements[k]]

    def face_vertices(self, k: int, local: int) -> np.ndarray:
        v = self.element_vertices(k)
        return np.array([v[local], v[(local + 1) % 3]])

    def face_length(self, k: int, local: int) -> float:
        a, b = self.face_vertices(k, local)
        return float(np.hypot(*(b - a)))

    def signed_areas(self) -> np.ndarray:
        v = self.vertices[self.elements]
        e1 = v[:, 1] - v[:, 0]
        e2 = v[:, 2] - v[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    def neighbors(self, k: int) -> list:
        """Neighbor element across each local face (``None`` on the boundary)."""
        out = []
        for lf in range(3):
            kind, fid = self.face_of[(k, lf)]
            if kind == "b":
                out.append(None)
            else:
                f = self.interior_faces[fid]
                out.append(f.minus if f.plus == k and f.local_plus == lf else f.plus)
        return out

    def is_interior_element(self, k: int) -> bool:
        return all(self.face_of[(k, lf)][0] == "i" for lf in range(3))

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n,
            "periodic": self.periodic,
            "vertices": self.vertices.tolist(),
            "elements": self.elements.tolist(),
            "interior_faces": [[f.plus, f.minus, f.local_plus, f.local_minus,
                                list(f.normal)] for f in self.interior_faces],
            "boundary_faces": [[f.elem, f.local, list(f.normal), f.tag]
                               for f in self.boundary_faces],
        })

    @classmethod
    def from_json(cls, text: str) -> "Mesh":
        d = json.loads(text)
        interior = tuple(InteriorFace(int(a), int(b), int(la), int(lb), tuple(nrm))
                         for a, b, la, lb, nrm in d["interior_faces"])
        boundary = tuple(BoundaryFace(int(k), int(lf), tuple(nrm), tag)
                         for k, lf, nrm, tag in d["boundary_faces"])
        elements = np.asarray(d["elements"], dtype=int).reshape(-1, 3)
        if len(elements) == 0:
            raise ValueError("mesh has no elements")
        return cls(np.asarray(d["vertices"], dtype=float).reshape(-1, 2), elements,
                   interior, boundary, bool(d.get("periodic", False)), d.get("n"),
                   _face_index(interior, boundary))


def _face_index(interior, boundary):
    face_of = {}
    for i, f in enumerate(interior):
        face_of[(f.plus, f.local_plus)] = ("i", i)
        face_of[(f.minus, f.local_minus)] = ("i", i)
    for i, f in enumerate(boundary):
        face_of[(f.elem, f.local)] = ("b", i)
    return face_of


def _outward_normal(a, b):
    d = b - a
    nrm = np.array([d[1], -d[0]])
    return nrm / np.hypot(*nrm)


def mesh_from_triangles(vertices, elements, boundary_tag="Dirichlet",
                        wrap: Callable | None = None,
                        periodic: bool = False, n: int | None = None) -> Mesh:
    """Build face connectivity for a counterclockwise triangulation.

    Faces are matched on their midpoint and their direction up to sign.
    ``wrap`` maps a point to its representative on a periodic domain, so
    faces on opposite seams meet.  ``boundary_tag`` is a tag string or a
    callable ``(midpoint, normal)`` returning one.
    """
    vertices = np.asarray(vertices, dtype=float)
    elements = np.asarray(elements, dtype=int).reshape(-1, 3)
    if len(elements) == 0:
        raise ValueError("mesh has no elements")
    wrap = wrap or (lambda x: x)
    tagger = boundary_tag if callable(boundary_tag) else (lambda mid, nrm: boundary_tag)

    open_faces: dict = {}
    interior = []
    for k, tri in enumerate(elements):
        for lf in range(3):
            ia, ib = tri[lf], tri[(lf + 1) % 3]
            d = vertices[ib] - vertices[ia]
            # direction up to sign, rounded so periodic copies agree
            if d[0] < -1e-12 or (abs(d[0]) <= 1e-12 and d[1] < 0):
                d = -d
            mid = wrap(0.5 * (vertices[ia] + vertices[ib]))
            fkey = (tuple(np.round(mid, 10) + 0.0), tuple(np.round(d, 10) + 0.0))
            other = open_faces.pop(fkey, None)
            if other is None:
                open_faces[fkey] = (k, lf)
            else:
                k0, lf0 = other
                a, b = vertices[elements[k0][lf0]], vertices[elements[k0][(lf0 + 1) % 3]]
                interior.append(InteriorFace(k0, k, lf0, lf,
                                             tuple(float(c) for c in _outward_normal(a, b))))
    boundary = []
    for k, lf in sorted(open_faces.values()):
        tri = elements[k]
        a, b = vertices[tri[lf]], vertices[tri[(lf + 1) % 3]]
        nrm = _outward_normal(a, b)
        tag = tagger(0.5 * (a + b), nrm)
        if tag not in (DIRICHLET, NEUMANN):
            raise ValueError(f"unknown boundary tag {tag!r}")
        boundary.append(BoundaryFace(k, lf, tuple(float(c) for c in nrm), tag))
    interior.sort(key=lambda f: (f.plus, f.local_plus))
    interior = tuple(interior)
    boundary = tuple(boundary)
    mesh = Mesh(vertices, elements, interior, boundary, periodic, n,
                _face_index(interior, boundary))
    if np.any(mesh.signed_areas() <= 0):
        raise ValueError("elements must be counterclockwise with positive area")
    return mesh


def _unit_wrap(x):
    return np.mod(np.round(x, 12), 1.0)


def build_structured_mesh(n: int, periodic: bool = False,
                          boundary_tag="Dirichlet", diagonal: str = "up") -> Mesh:
    """Unit square split into ``n x n`` squares, each cut along the
    lower-left to upper-right diagonal (``diagonal="down"`` uses the other).

    Squares are numbered row-major (x fastest); square ``q`` holds the lower
    triangle ``2q`` and the upper triangle ``2q + 1``.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    xs = np.linspace(0.0, 1.0, n + 1)
    X, Y = np.meshgrid(xs, xs)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(i, j):
        return j * (n + 1) + i

    elements = []
    for j in range(n):
        for i in range(n):
            if diagonal == "up":
                elements.append((vid(i, j), vid(i + 1, j), vid(i + 1, j + 1)))
                elements.append((vid(i, j), vid(i + 1, j + 1), vid(i, j + 1)))
            elif diagonal == "down":
                elements.append((vid(i, j), vid(i + 1, j), vid(i, j + 1)))
                elements.append((vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)))
            else:
                raise ValueError(f"unknown diagonal {diagonal!r}")
    wrap = _unit_wrap if periodic else None
    return mesh_from_triangles(vertices, elements, boundary_tag, wrap,
                               periodic=periodic, n=n)


def build_four_triangle_mesh() -> Mesh:
    """Small four-element mesh used to illustrate sparsity patterns.

    A central triangle (element 0) is surrounded by three others; with
    the consistent switch the central element receives two facewise
    liftings, so the nonlocal LDG coupling appears between elements 2
    and 3 (numbers 3 and 4 when counting from one).
    """
    vertices = np.array([[0.0, 0.0], [1.0, 0.5], [0.0, 1.0],
                         [0.8, -0.4], [0.8, 1.3], [-0.6, 0.5]])
    elements = [(0, 1, 2), (2, 5, 0), (0, 3, 1), (1, 4, 2)]
    return mesh_from_triangles(vertices, elements, DIRICHLET)


@dataclass(frozen=True, eq=False)
class SwitchAssignment:
    """Switch of the plus element on every interior face.

    The minus switch is ``1 - s_plus`` on each face.
    """

    s_plus: np.ndarray
    strategy: str

    @property
    def s_minus(self) -> np.ndarray:
        return 1 - self.s_plus

    def sign(self, face: int) -> int:
        """``S_plus - S_minus``; C12 equals ``sign * n_plus / 2``."""
        return 2 * int(self.s_plus[face]) - 1

    def switch_of(self, mesh: Mesh, elem: int, local: int) -> int:
        kind, fid = mesh.face_of[(elem, local)]
        if kind != "i":
            raise ValueError("boundary faces carry no switch")
        f = mesh.interior_faces[fid]
        if f.plus == elem and f.local_plus == local:
            return int(self.s_plus[fid])
        return int(self.s_minus[fid])

    def element_sums(self, mesh: Mesh) -> np.ndarray:
        sums = np.zeros(mesh.num_elements, dtype=int)
        for fid, f in enumerate(mesh.interior_faces):
            sums[f.plus] += self.s_plus[fid]
            sums[f.minus] += 1 - self.s_plus[fid]
        return sums


def assign_switches(mesh: Mesh, strategy: str = "consistent",
                    direction: Sequence[float] = CONSISTENT_DIRECTION) -> SwitchAssignment:
    """Assign face switches.

    ``natural`` gives switch 0 to the element with the smaller index.
    ``consistent`` gives switch 1 to the side whose outward normal has a
    positive component along ``direction``; a triangle cannot have all
    three outward normals on that side, so every element sum stays below 3.
    """
    if not mesh.interior_faces:
        raise ValueError("mesh has no interior faces")
    s = np.empty(len(mesh.interior_faces), dtype=int)
    if strategy == "natural":
        for i, f in enumerate(mesh.interior_faces):
            s[i] = 0 if f.plus < f.minus else 1
    elif strategy == "consistent":
        g = np.asarray(direction, dtype=float)
        for i, f in enumerate(mesh.interior_faces):
            dot = float(np.dot(g, f.normal))
            if abs(dot) <= 1e-12:
                s[i] = 0 if f.plus < f.minus else 1
            else:
                s[i] = 1 if dot > 0 else 0
    else:
        raise ValueError(f"unknown switch strategy {strategy!r}")
    sw = SwitchAssignment(s, strategy)
    if strategy == "consistent" and np.any(sw.element_sums(mesh) >= 3):
        bad = np.flatnonzero(sw.element_sums(mesh) >= 3)
        raise RuntimeError(f"consistent switch rule violated on elements {bad.tolist()}")
    return sw


def c12_vector(mesh: Mesh, switches: SwitchAssignment, face: int) -> np.ndarray:
    if not 0 <= face < len(mesh.interior_faces):
        raise IndexError(f"{face} is not an interior face id")
    f = mesh.interior_faces[face]
    nplus = np.asarray(f.normal)
    sp = switches.s_plus[face]
    return 0.5 * (sp * nplus + (1 - sp) * (-nplus))
