"""Block-sparse storage, direct solves, null spaces and spectral radii."""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla


class FactorizationError(RuntimeError):
    """Raised when a symmetric factorization meets a nonpositive pivot."""

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class PowerIterationError(RuntimeError):
    def __init__(self, message, estimate):
        super().__init__(message)
        self.estimate = estimate


class SystemMatrix:
    """Symmetric operator stored as element blocks.

    Diagonal blocks live in a dense ``(T, S, S)`` array.  Off-diagonal
    blocks are kept in a dict keyed by ``(row element, column element)``;
    repeated contributions to the same pair are summed.
    """

    def __init__(self, T: int, S: int):
        self.T = T
        self.S = S
        self.diag = np.zeros((T, S, S))
        self.off: dict = {}
        self.notes: list = []

    @property
    def N(self) -> int:
        return self.T * self.S

    @property
    def shape(self):
        return (self.N, self.N)

    def add_block(self, i: int, j: int, block: np.ndarray) -> None:
        if i == j:
            self.diag[i] += block
        elif (i, j) in self.off:
            self.off[(i, j)] += block
        else:
            self.off[(i, j)] = np.array(block, dtype=float)

    def add_local(self, elems, local: np.ndarray) -> None:
        """Scatter a dense matrix over the stacked dofs of ``elems``."""
        S = self.S
        for a, ea in enumerate(elems):
            for b, eb in enumerate(elems):
                self.add_block(ea, eb, local[a * S:(a + 1) * S, b * S:(b + 1) * S])

    def block(self, i: int, j: int) -> np.ndarray:
        if i == j:
            return self.diag[i]
        return self.off.get((i, j), np.zeros((self.S, self.S)))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        S = self.S
        X = np.asarray(x, dtype=float).reshape(self.T, S)
        Y = np.einsum("kij,kj->ki", self.diag, X)
        for (i, j), B in self.off.items():
            Y[i] += B @ X[j]
        return Y.ravel()

    def to_scipy(self) -> sp.csr_matrix:
        S, T = self.S, self.T
        ii, jj = np.meshgrid(np.arange(S), np.arange(S), indexing="ij")
        rows = [(np.arange(T)[:, None, None] * S + ii).ravel()]
        cols = [(np.arange(T)[:, None, None] * S + jj).ravel()]
        vals = [self.diag.ravel()]
        if self.off:
            keys = np.array(list(self.off.keys()))
            blocks = np.array(list(self.off.values()))
            rows.append((keys[:, 0, None, None] * S + ii).ravel())
            cols.append((keys[:, 1, None, None] * S + jj).ravel())
            vals.append(blocks.ravel())
        A = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=self.shape)
        return A.tocsr()

    def to_dense(self) -> np.ndarray:
        return self.to_scipy().toarray()

    def norm_inf(self) -> float:
        rows = np.abs(self.diag).sum(axis=2)
        for (i, _), B in self.off.items():
            rows[i] += np.abs(B).sum(axis=1)
        return float(rows.max())

    def symmetry_error(self) -> float:
        """``||A - A^T||_inf / ||A||_inf``."""
        A = self.to_scipy()
        d = abs(A - A.T)
        return float(d.sum(axis=1).max() / self.norm_inf())

    def element_pattern(self, tol: float = 0.0) -> dict:
        """Numerical nonzero masks of every stored block."""
        out = {(k, k): np.abs(self.diag[k]) > tol for k in range(self.T)}
        for key, B in self.off.items():
            out[key] = np.abs(B) > tol
        return out

    def write_coordinate(self, path) -> None:
        A = self.to_scipy().tocoo()
        order = np.lexsort((A.col, A.row))
        with open(path, "w") as fh:
            for r, c, v in zip(A.row[order], A.col[order], A.data[order]):
                fh.write(f"{r} {c} {v:.17g}\n")

    def __sub__(self, other: "SystemMatrix") -> "SystemMatrix":
        out = SystemMatrix(self.T, self.S)
        out.diag = self.diag - other.diag
        for key, B in self.off.items():
            out.add_block(*key, B)
        for key, B in other.off.items():
            out.add_block(*key, -B)
        return out

    def __add__(self, other: "SystemMatrix") -> "SystemMatrix":
        out = SystemMatrix(self.T, self.S)
        out.diag = self.diag + other.diag
        for key, B in self.off.items():
            out.add_block(*key, B)
        for key, B in other.off.items():
            out.add_block(*key, B)
        return out


def read_coordinate(path, N: int) -> sp.csr_matrix:
    data = np.loadtxt(path, ndmin=2)
    if data.size == 0:
        return sp.csr_matrix((N, N))
    return sp.coo_matrix((data[:, 2], (data[:, 0].astype(int), data[:, 1].astype(int))),
                         shape=(N, N)).tocsr()


def write_pbm(mask: np.ndarray, path) -> None:
    """Plain (P1) PBM bitmap; black pixels mark nonzeros."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    with open(path, "w") as fh:
        fh.write(f"P1\n{w} {h}\n")
        for row in mask.astype(int):
            fh.write(" ".join(map(str, row)) + "\n")


class MassMatrix:
    """Block-diagonal element mass matrix with cached block Cholesky factors."""

    def __init__(self, blocks: np.ndarray):
        self.blocks = np.asarray(blocks, dtype=float)
        self.chol = np.linalg.cholesky(self.blocks)  # raises if a block is not SPD
        self.chol_inv = np.linalg.inv(self.chol)

    @property
    def T(self) -> int:
        return self.blocks.shape[0]

    @property
    def S(self) -> int:
        return self.blocks.shape[1]

    def matvec(self, x):
        X = np.asarray(x).reshape(self.T, self.S)
        return np.einsum("kij,kj->ki", self.blocks, X).ravel()

    def solve(self, x):
        X = np.asarray(x).reshape(self.T, self.S)
        Y = np.einsum("kij,kj->ki", self.chol_inv, X)
        return np.einsum("kji,kj->ki", self.chol_inv, Y).ravel()

    def to_scipy(self) -> sp.csr_matrix:
        return sp.block_diag(list(self.blocks), format="csr")


def solve_spd(A, b: np.ndarray) -> np.ndarray:
    """Solve ``A x = b`` for a symmetric positive definite ``A``.

    Uses a sparse LU factorization with diagonal pivoting and a symmetric
    fill-reducing ordering, so the U diagonal carries the LDL^T pivots; a
    nonpositive pivot is reported as :class:`FactorizationError`.
    """
    M = A.to_scipy() if isinstance(A, SystemMatrix) else sp.csc_matrix(A)
    M = M.tocsc()
    b = np.asarray(b, dtype=float)
    try:
        lu = spla.splu(M, permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                       options={"SymmetricMode": True})
    except RuntimeError as exc:
        raise FactorizationError(f"factorization failed: {exc}") from exc
    d = lu.U.diagonal()
    scale = np.abs(d).max()
    bad = np.flatnonzero(d <= 1e-14 * scale)
    if bad.size:
        # U is indexed in the column-permuted order
        pivot = int(lu.perm_c[bad[0]])
        raise FactorizationError(
            f"nonpositive pivot {d[bad[0]]:.3e} at unknown {pivot} "
            f"(element {pivot // A.S if isinstance(A, SystemMatrix) else '?'})", pivot)
    x = lu.solve(b)
    # one step of iterative refinement
    x += lu.solve(b - M @ x)
    return x


def nullspace_dim(A, rel_tol: float = 1e-8, return_singular_values: bool = False):
    """Number of singular values below ``rel_tol`` times the largest one."""
    dense = A.to_dense() if isinstance(A, SystemMatrix) else np.asarray(A)
    s = sla.svdvals(dense)
    k = int(np.sum(s <= rel_tol * s[0]))
    if return_singular_values:
        return k, s
    return k


def spectral_radius_generalized(A, M: MassMatrix, tol: float = 1e-8,
                                max_iter: int = 200000, seed: int = 0) -> float:
    """Largest ``|lambda|`` of ``A x = lambda M x`` by power iteration.

    Iterates on the symmetric form ``L^{-1} A L^{-T}`` with ``M = L L^T``
    and stops when the Rayleigh quotient changes by less than ``tol``
    relative between successive iterates.
    """
    op = A.to_scipy() if isinstance(A, SystemMatrix) else sp.csr_matrix(A)
    T, S = M.T, M.S
    Linv = M.chol_inv

    def apply(v):
        w = np.einsum("kji,kj->ki", Linv, v.reshape(T, S)).ravel()
        w = op @ w
        return np.einsum("kij,kj->ki", Linv, w.reshape(T, S)).ravel()

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(T * S)
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iter):
        w = apply(v)
        new = float(v @ w)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        if abs(new - lam) <= tol * abs(new):
            return abs(new)
        lam = new
    raise PowerIterationError(f"power iteration did not converge in {max_iter} steps", abs(lam))


class CompactCDG:
    """Dense-array storage of a CDG matrix.

    ``diag`` is ``(T, S, S)``.  ``off[k, lf]`` is an ``(S, S_e)`` array for
    local face ``lf`` of element ``k``: the columns of ``A[k, nbr]`` on the
    neighbor's face dofs when ``k`` carries the face lifting, otherwise the
    transpose of the rows of ``A[k, nbr]`` on ``k``'s own face dofs.
    Boundary faces hold zeros.
    """

    def __init__(self, diag, off):
        self.diag = diag
        self.off = off

    @property
    def nbytes(self) -> int:
        return self.diag.nbytes + self.off.nbytes

    @classmethod
    def pack(cls, A: SystemMatrix, mesh, switches, face_nodes, tol: float = 0.0):
        """Raises ``ValueError`` if ``A`` has entries outside the compact footprint."""
        T, S = A.T, A.S
        Se = len(face_nodes[0])
        off = np.zeros((T, 3, S, Se))
        used = set()
        for k in range(T):
            for lf in range(3):
                kind, fid = mesh.face_of[(k, lf)]
                if kind != "i":
                    continue
                f = mesh.interior_faces[fid]
                if f.plus == k and f.local_plus == lf:
                    nbr, lnbr, mine = f.minus, f.local_minus, switches.s_plus[fid] == 1
                else:
                    nbr, lnbr, mine = f.plus, f.local_plus, switches.s_plus[fid] == 0
                B = A.block(k, nbr)
                if mine:
                    cols = list(face_nodes[lnbr])
                    kept = np.zeros_like(B)
                    kept[:, cols] = B[:, cols]
                    off[k, lf] = B[:, cols]
                else:
                    rows = list(face_nodes[lf])
                    kept = np.zeros_like(B)
                    kept[rows, :] = B[rows, :]
                    off[k, lf] = B[rows, :].T
                if np.abs(B - kept).max() > tol:
                    raise ValueError(f"block ({k}, {nbr}) exceeds the compact footprint")
                used.add((k, nbr))
        extra = [key for key, B in A.off.items() if key not in used and np.abs(B).max() > tol]
        if extra:
            raise ValueError(f"blocks between non-neighbors: {extra[:3]}")
        return cls(A.diag.copy(), off)

    def unpack(self, mesh, switches, face_nodes) -> SystemMatrix:
        T, S = self.diag.shape[:2]
        A = SystemMatrix(T, S)
        A.diag = self.diag.copy()
        for k in range(T):
            for lf in range(3):
                kind, fid = mesh.face_of[(k, lf)]
                if kind != "i":
                    continue
                f = mesh.interior_faces[fid]
                if f.plus == k and f.local_plus == lf:
                    nbr, lnbr, mine = f.minus, f.local_minus, switches.s_plus[fid] == 1
                else:
                    nbr, lnbr, mine = f.plus, f.local_plus, switches.s_plus[fid] == 0
                B = np.zeros((S, S))
                if mine:
                    B[:, list(face_nodes[lnbr])] = self.off[k, lf]
                else:
                    B[list(face_nodes[lf]), :] = self.off[k, lf].T
                A.add_block(k, nbr, B)
        return A
