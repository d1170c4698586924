"""Nodal sets and critical points of sampled fields.

d=2 uses marching squares (cell-centre disambiguation of saddles) with
union-find over crossed grid edges; d=3 uses the scikit-image marching cubes
mesh and only counts components.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import DegenerateField, ResolutionTooCoarse, ValidationError
from .parallel import chunked_map
from .spherical import Field

H_MAX = 1 / 8


@dataclass
class FieldGrid:
    d: int
    R: float
    h: float
    axis: np.ndarray
    values: np.ndarray            # shape (n,)*d, index order (x, y[, z])
    perturbed: bool = False

    def points(self) -> np.ndarray:
        mesh = np.meshgrid(*([self.axis] * self.d), indexing="ij")
        return np.stack(mesh, axis=-1).reshape(-1, self.d)


def sample_field(f: Field, R: float, h: float = 0.05, threads: int = 1) -> FieldGrid:
    """Real part of ``f`` on the cube ``[-R, R]^d`` with spacing close to ``h``."""
    if h > H_MAX:
        raise ResolutionTooCoarse(f"spacing {h} exceeds {H_MAX}")
    m = int(math.ceil(R / h))
    axis = np.linspace(-R, R, 2 * m + 1)
    grid = FieldGrid(f.d, R, float(axis[1] - axis[0]), axis, np.empty(0))
    X = grid.points()
    chunks = [X[s:s + 8192] for s in range(0, len(X), 8192)]
    vals = np.concatenate(chunked_map(lambda c: f.value(c).real, chunks, threads))
    grid.values = vals.reshape((len(axis),) * f.d)
    if not np.all(np.isfinite(grid.values)):
        raise ValidationError("field produced non-finite samples")
    return grid


@dataclass
class NodalComponent:
    vertices: np.ndarray
    closed: bool
    inside_ball: bool
    area: float | None = None          # d=2, closed curves
    mean_radius: float | None = None
    circularity: float | None = None   # max |r - mean r| / mean r about the centroid
    euler: int | None = None           # d=3 meshes

    def as_json(self) -> dict:
        return {
            "closed": self.closed, "inside_ball": self.inside_ball,
            "vertices": int(len(self.vertices)), "area": self.area,
            "mean_radius": self.mean_radius, "circularity": self.circularity,
            "euler": self.euler,
        }


class _UnionFind:
    def __init__(self, n):
        self.parent = np.arange(n)

    def find(self, a):
        p = self.parent
        root = a
        while p[root] != root:
            root = p[root]
        while p[a] != root:
            p[a], a = root, p[a]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def _prepare(grid: FieldGrid) -> np.ndarray:
    v = grid.values
    if np.abs(v).max() < 1e-12:
        raise DegenerateField("field vanishes to 1e-12 on the whole grid")
    if np.any(v == 0):
        v = np.where(v == 0, 1e-13, v)
        grid.perturbed = True
    return v


def extract_components(grid: FieldGrid, ball: float | None = None) -> list[NodalComponent]:
    """Connected pieces of the zero set; ``ball`` defaults to the grid radius."""
    v = _prepare(grid)
    ball = grid.R if ball is None else ball
    if grid.d == 2:
        return _components_2d(grid, v, ball)
    if grid.d == 3:
        return _components_3d(grid, v, ball)
    raise ValidationError("nodal extraction supports d = 2, 3")


def _components_2d(grid, v, ball):
    n = v.shape[0]
    ax = grid.axis
    pos = v > 0
    # edge ids: horizontal (i, j)-(i+1, j) then vertical (i, j)-(i, j+1)
    nh = (n - 1) * n

    def hid(i, j):
        return i * n + j

    def vid(i, j):
        return nh + i * (n - 1) + j

    cross_h = pos[:-1, :] != pos[1:, :]
    cross_v = pos[:, :-1] != pos[:, 1:]
    # cell (i, j) has corners (i,j), (i+1,j), (i+1,j+1), (i,j+1)
    edges_of_cell = [
        lambda i, j: hid(i, j), lambda i, j: vid(i + 1, j),
        lambda i, j: hid(i, j + 1), lambda i, j: vid(i, j),
    ]
    ch = np.stack([cross_h[:, :-1], cross_v[1:, :], cross_h[:, 1:], cross_v[:-1, :]], axis=-1)
    cells = np.argwhere(ch.any(axis=-1))
    uf = _UnionFind(nh + n * (n - 1))
    adj: dict = {}

    def link(a, b):
        uf.union(a, b)
        adj.setdefault(a, []).append(b)
        adj.setdefault(b, []).append(a)

    for i, j in cells:
        hits = [edges_of_cell[e](i, j) for e in range(4) if ch[i, j, e]]
        if len(hits) == 2:
            link(hits[0], hits[1])
        elif len(hits) == 4:
            centre = v[i, j] + v[i + 1, j] + v[i + 1, j + 1] + v[i, j + 1]
            e0, e1, e2, e3 = hits
            # corners (i,j) and (i+1,j+1) share a sign; the centre decides
            # whether they are connected through the cell
            if (centre > 0) == pos[i, j]:
                link(e0, e1)
                link(e2, e3)
            else:
                link(e0, e3)
                link(e1, e2)
    if not adj:
        return []

    def point(e):
        if e < nh:
            i, j = divmod(e, n)
            f0, f1 = v[i, j], v[i + 1, j]
            t = f0 / (f0 - f1)
            return (ax[i] + t * (ax[i + 1] - ax[i]), ax[j])
        i, j = divmod(e - nh, n - 1)
        f0, f1 = v[i, j], v[i, j + 1]
        t = f0 / (f0 - f1)
        return (ax[i], ax[j] + t * (ax[j + 1] - ax[j]))

    groups: dict = {}
    for e in sorted(adj):
        groups.setdefault(uf.find(e), []).append(e)
    out = []
    for root in sorted(groups):
        members = groups[root]
        closed = all(len(adj[e]) == 2 for e in members)
        order = _walk(members, adj, closed)
        P = np.array([point(e) for e in order])
        comp = NodalComponent(P, closed, bool(np.linalg.norm(P, axis=1).max() <= ball))
        if closed:
            x, y = P[:, 0], P[:, 1]
            comp.area = float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))
            c = P.mean(axis=0)
            r = np.linalg.norm(P - c, axis=1)
            comp.mean_radius = float(r.mean())
            comp.circularity = float(np.abs(r - r.mean()).max() / r.mean())
        out.append(comp)
    return out


def _walk(members, adj, closed):
    start = members[0] if closed else next(e for e in members if len(adj[e]) == 1)
    order, prev, cur = [start], None, start
    while True:
        nxt = [e for e in adj[cur] if e != prev]
        if not nxt or nxt[0] == start:
            break
        prev, cur = cur, nxt[0]
        order.append(cur)
        if len(order) > len(members):
            break
    return order


def _components_3d(grid, v, ball):
    from skimage.measure import marching_cubes

    h = grid.h
    verts, faces, _, _ = marching_cubes(v, 0.0, spacing=(h, h, h))
    verts = verts + grid.axis[0]
    nv = len(verts)
    if nv == 0:
        return []
    rows = np.concatenate([faces[:, 0], faces[:, 1], faces[:, 2]])
    cols = np.concatenate([faces[:, 1], faces[:, 2], faces[:, 0]])
    A = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(nv, nv))
    ncomp, labels = connected_components(A, directed=False)
    e = np.sort(np.stack([rows, cols], axis=1), axis=1)
    e_uni, e_count = np.unique(e, axis=0, return_counts=True)
    face_lab = labels[faces[:, 0]]
    out = []
    for c in range(ncomp):
        vmask = labels == c
        emask = labels[e_uni[:, 0]] == c
        V, E, F = int(vmask.sum()), int(emask.sum()), int((face_lab == c).sum())
        closed = bool(np.all(e_count[emask] == 2))
        P = verts[vmask]
        out.append(NodalComponent(P, closed, bool(np.linalg.norm(P, axis=1).max() <= ball),
                                  euler=V - E + F,
                                  mean_radius=float(np.linalg.norm(P, axis=1).mean())))
    return out


@dataclass
class CriticalPoint:
    location: np.ndarray
    kind: str
    value: float
    grad_norm: float
    hessian_det: float
    nondegenerate: bool

    def as_json(self) -> dict:
        return {"location": self.location.tolist(), "kind": self.kind, "value": self.value,
                "grad_norm": self.grad_norm, "hessian_det": self.hessian_det,
                "nondegenerate": self.nondegenerate}


@dataclass
class CriticalReport:
    points: list
    unresolved: list = field(default_factory=list)


def _seed_cells(grid: FieldGrid, G: np.ndarray) -> np.ndarray:
    """Cells in which every gradient component changes sign."""
    d = grid.d
    ok = None
    for c in range(d):
        g = G[..., c] > 0
        corners = [g[tuple(slice(o, o + g.shape[0] - 1) for o in off)]
                   for off in np.ndindex(*([2] * d))]
        stack = np.stack(corners)
        change = stack.any(axis=0) & ~stack.all(axis=0)
        ok = change if ok is None else ok & change
    return np.argwhere(ok)


def find_critical_points(f: Field, grid: FieldGrid, ball: float | None = None,
                         tol: float = 1e-12, max_iter: int = 50) -> CriticalReport:
    """Newton's method on the analytic gradient from every sign-change cell."""
    ball = grid.R if ball is None else ball
    X = grid.points()
    G = f.gradient(X).real.reshape(grid.values.shape + (grid.d,))
    cells = _seed_cells(grid, G)
    found: list[CriticalPoint] = []
    unresolved = []
    for cell in cells:
        x = grid.axis[cell] + 0.5 * grid.h
        if np.linalg.norm(x) > ball:
            continue
        x, ok = _newton(f, x, tol, max_iter, grid.h)
        if not ok:
            unresolved.append(cell.tolist())
            continue
        if np.linalg.norm(x) > ball:
            continue
        if any(np.linalg.norm(x - c.location) < grid.h / 2 for c in found):
            continue
        found.append(_classify(f, x))
    return CriticalReport(found, unresolved)


def _newton(f, x, tol, max_iter, h):
    x0 = x.copy()
    g = f.gradient(x[None])[0].real
    for _ in range(max_iter):
        gn = np.linalg.norm(g)
        if gn <= tol:
            return x, True
        H = f.hessian(x[None])[0].real
        try:
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            return x, False
        t = 1.0
        while t > 1e-6:
            y = x - t * step
            gy = f.gradient(y[None])[0].real
            if np.linalg.norm(gy) < gn:
                break
            t *= 0.5
        else:
            return x, gn <= 1e-10
        x, g = y, gy
        if np.linalg.norm(x - x0) > 4 * h:
            return x, False
    return x, np.linalg.norm(g) <= 1e-10


def _classify(f, x) -> CriticalPoint:
    H = f.hessian(x[None])[0].real
    ev = np.linalg.eigvalsh(H)
    det = float(np.prod(ev))
    nondeg = abs(det) > 1e-8 * float(np.linalg.norm(H)) ** 2
    kind = "max" if np.all(ev < 0) else "min" if np.all(ev > 0) else "saddle"
    g = float(np.linalg.norm(f.gradient(x[None])[0].real))
    return CriticalPoint(x, kind, float(f.value(x[None])[0].real), g, det, bool(nondeg))
