"""Error norms, convergence rates, storage counts and sparsity census."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from math import comb

import numpy as np

from .forms import DGField, DGSpace


def _at_data_points(space: DGSpace):
    rule = space.data_rule
    x = space.map_points(rule.points)
    w = rule.weights[None, :] * space.detJ[:, None]
    return rule, x, w


def l2_error(space: DGSpace, u_h: DGField, u_exact) -> float:
    rule, x, w = _at_data_points(space)
    uh = u_h.coeffs @ space.basis.values(rule.points).T
    e = u_exact(x[..., 0], x[..., 1]) - uh
    return float(np.sqrt(np.sum(w * e * e)))


def h1_seminorm_error(space: DGSpace, u_h: DGField, grad_exact) -> float:
    """Broken seminorm ``(sum_K |u - u_h|_{1,K}^2)^{1/2}``."""
    rule, x, w = _at_data_points(space)
    dphi = space.physical_gradients(space.basis.ref_gradients(rule.points))
    guh = np.einsum("kqsd,ks->kqd", dphi, u_h.coeffs)
    e = grad_exact(x[..., 0], x[..., 1]) - guh
    return float(np.sqrt(np.sum(w[..., None] * e * e)))


def vector_l2_error(space: DGSpace, sigma: DGField, exact) -> float:
    rule, x, w = _at_data_points(space)
    s = np.einsum("kcs,qs->kqc", sigma.coeffs, space.basis.values(rule.points))
    e = exact(x[..., 0], x[..., 1]) - s
    return float(np.sqrt(np.sum(w[..., None] * e * e)))


def convergence_rate(errors, hs) -> float:
    """Observed order ``log(e1/e2) / log(h1/h2)``; ``nan`` when undefined."""
    e1, e2 = errors
    h1, h2 = hs
    if h1 == h2:
        raise ValueError("mesh sizes must differ")
    if not (e1 > 0 and e2 > 0):
        return math.nan
    return math.log(e1 / e2) / math.log(h1 / h2)


@dataclass(frozen=True)
class MemoryCount:
    d: int
    p: int
    S: int
    S_e: int
    alpha: int
    M_CDG: int
    M_LDG: int
    M_BR2: int


def memory_counts(d: int, p: int, alpha: int) -> MemoryCount:
    """Nonzeros per interior simplex element for the three schemes."""
    if d not in (1, 2, 3):
        raise ValueError("d must be 1, 2 or 3")
    if p < 1:
        raise ValueError("p must be at least 1")
    S = comb(p + d, d)
    Se = comb(p + d - 1, d - 1)
    cdg = S * S + (d + 1) * Se * S
    return MemoryCount(d, p, S, Se, alpha, cdg, cdg + alpha * Se * Se,
                       S * S + (d + 1) * (2 * S - Se) * Se)


@dataclass
class SparsityCensus:
    per_element: np.ndarray          # structural nonzeros in each element row-block
    interior: np.ndarray             # bool, element has no boundary face
    nonlocal_blocks: np.ndarray      # column blocks coupled to non-neighbors
    total: int

    @property
    def interior_counts(self) -> np.ndarray:
        return self.per_element[self.interior]

    @property
    def alpha_mean(self) -> float:
        v = self.nonlocal_blocks[self.interior]
        return float(v.mean()) if v.size else 0.0

    def alpha_distribution(self) -> dict:
        vals, counts = np.unique(self.nonlocal_blocks[self.interior], return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}


def sparsity_census(pattern: dict, mesh) -> SparsityCensus:
    T = mesh.num_elements
    per = np.zeros(T, dtype=int)
    nonlocal_ = np.zeros(T, dtype=int)
    for (i, j), m in pattern.items():
        per[i] += int(m.sum())
        if i != j and j not in mesh.neighbors(i):
            nonlocal_[i] += 1
    interior = np.array([mesh.is_interior_element(k) for k in range(T)])
    return SparsityCensus(per, interior, nonlocal_, int(per.sum()))


# ---------------------------------------------------------------- reports

CSV_FIELDS = ("scheme", "switch", "p", "n", "c11", "eta", "metric", "value", "rate", "status")


@dataclass
class ReportRow:
    scheme: str = ""
    switch: str = ""
    p: int | str = ""
    n: int | str = ""
    c11: str = ""
    eta: str = ""
    metric: str = ""
    value: float | str = ""
    rate: float | str = ""
    status: str = "ok"

    def sort_key(self):
        def num(v):
            return (0, float(v)) if v != "" else (1, 0.0)
        return (self.metric, self.scheme, self.switch, num(self.p), self.c11,
                self.eta, num(self.n))


@dataclass
class ConvergenceReport:
    rows: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def sorted_rows(self):
        return sorted(self.rows, key=ReportRow.sort_key)

    def fill_rates(self) -> None:
        """Rate from each error cell's next-coarser mesh in the same series."""
        series: dict = {}
        for r in self.rows:
            if r.metric in ("l2_error", "h1_error") and r.status == "ok":
                series.setdefault((r.metric, r.scheme, r.switch, r.p, r.c11, r.eta), []).append(r)
        for rows in series.values():
            rows.sort(key=lambda r: int(r.n))
            for prev, cur in zip(rows, rows[1:]):
                rate = convergence_rate((float(prev.value), float(cur.value)),
                                        (1.0 / int(prev.n), 1.0 / int(cur.n)))
                cur.rate = "" if math.isnan(rate) else round(rate, 1)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in self.sorted_rows():
            d = asdict(r)
            if isinstance(d["value"], float):
                d["value"] = f"{d['value']:.6e}"
            w.writerow(d)
        return buf.getvalue()

    def to_json(self) -> str:
        return json.dumps({"metadata": self.metadata,
                           "rows": [asdict(r) for r in self.sorted_rows()]},
                          indent=1, default=float)

    def write(self, path, fmt: str = "csv") -> None:
        with open(path, "w") as fh:
            fh.write(self.to_csv() if fmt == "csv" else self.to_json())
