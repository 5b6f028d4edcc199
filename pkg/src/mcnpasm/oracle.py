"""Point-membership evaluator used to check that operations keep geometry intact.

Surfaces are evaluated as signed, distance-like functions (negative
inside).  Points closer than ``tol`` to a surface are reported as
ambiguous rather than guessed.
"""
from __future__ import annotations

import numpy as np

from .algebra import Transform3D, to_aux
from .errors import OnSurface, UnsupportedMnemonic
from .geometry import CellComplement, Complement, Intersection, SurfaceSense, Union
from .model import Deck

TOL = 1e-9

SUPPORTED = ("p", "px", "py", "pz", "so", "s", "sx", "sy", "sz", "cx", "cy", "cz",
             "c/x", "c/y", "c/z", "sph", "rpp", "rcc")


def _rpp_facets(c, q):
    x, y, z = q[:, 0], q[:, 1], q[:, 2]
    return [x - c[1], c[0] - x, y - c[3], c[2] - y, z - c[5], c[4] - z]


def _rcc(c, q):
    base = np.array(c[0:3])
    h = np.array(c[3:6])
    r = c[6]
    hl = np.linalg.norm(h)
    axis = h / hl
    rel = q - base
    t = rel @ axis
    radial = np.linalg.norm(rel - np.outer(t, axis), axis=1)
    return [radial - r, t - hl, -t]


def surface_function(mnemonic: str, coeffs, q: np.ndarray, facet=None) -> np.ndarray:
    """Signed value of a surface at auxiliary-frame points ``q`` (n x 3)."""
    c = [float(x) for x in coeffs]
    x, y, z = q[:, 0], q[:, 1], q[:, 2]
    m = mnemonic
    if facet is not None and m not in ("rpp", "rcc"):
        raise UnsupportedMnemonic(f"facets of {m!r}")
    if m == "p" and len(c) == 4:
        n = np.array(c[:3])
        return (q @ n - c[3]) / np.linalg.norm(n)
    if m in ("px", "py", "pz"):
        return q[:, "xyz".index(m[1])] - c[0]
    if m == "so":
        return np.linalg.norm(q, axis=1) - c[0]
    if m in ("s", "sph"):
        return np.linalg.norm(q - np.array(c[:3]), axis=1) - c[3]
    if m in ("sx", "sy", "sz"):
        center = np.zeros(3)
        center["xyz".index(m[1])] = c[0]
        return np.linalg.norm(q - center, axis=1) - c[1]
    if m in ("cx", "cy", "cz"):
        k = "xyz".index(m[1])
        others = [i for i in range(3) if i != k]
        return np.linalg.norm(q[:, others], axis=1) - c[0]
    if m in ("c/x", "c/y", "c/z"):
        k = "xyz".index(m[2])
        others = [i for i in range(3) if i != k]
        return np.linalg.norm(q[:, others] - np.array(c[:2]), axis=1) - c[2]
    if m == "rpp":
        parts = _rpp_facets(c, q)
    elif m == "rcc":
        parts = _rcc(c, q)
    else:
        raise UnsupportedMnemonic(f"surface mnemonic {m!r} is not supported by the oracle")
    if facet is not None:
        return parts[facet - 1]
    return np.max(np.vstack(parts), axis=0)


def _surface_values(deck: Deck, sid: int, pts: np.ndarray, facet=None) -> np.ndarray:
    s = deck.surface(sid)
    q = pts
    if s.transform is not None:
        q = to_aux(deck.transform(s.transform).transform, pts)
    return surface_function(s.mnemonic, s.coefficients, q, facet)


def surface_sense(surface, transforms, p) -> int:
    """Sign of ``surface`` at point ``p``; ``transforms`` maps tr id -> Transform3D."""
    q = np.atleast_2d(np.asarray(p, dtype=float))
    if surface.transform is not None:
        q = to_aux(transforms[surface.transform], q)
    v = float(surface_function(surface.mnemonic, surface.coefficients, q)[0])
    if abs(v) < TOL:
        raise OnSurface(f"point {list(p)} lies on surface {surface.id}")
    return 1 if v > 0 else -1


def _cell_transform(deck: Deck, val) -> Transform3D:
    return deck.transform(val).transform if isinstance(val, int) else val


def cell_membership(deck: Deck, cell_id: int, pts, _stack=()):
    """``(inside, ambiguous)`` boolean arrays for points in the cell's own frame."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    if cell_id in _stack:
        raise ValueError(f"cyclic cell complement through cell {cell_id}")
    cell = deck.cell(cell_id)
    local = pts
    if cell.trcl is not None:
        local = to_aux(_cell_transform(deck, cell.trcl), pts)
    amb = np.zeros(len(pts), dtype=bool)

    def ev(node):
        nonlocal amb
        if isinstance(node, SurfaceSense):
            v = _surface_values(deck, node.surface, local, node.facet)
            amb |= np.abs(v) < TOL
            return (v > 0) if node.sign > 0 else (v < 0)
        if isinstance(node, CellComplement):
            inside, a = cell_membership(deck, node.cell, pts, _stack + (cell_id,))
            amb |= a
            return ~inside
        if isinstance(node, Complement):
            return ~ev(node.child)
        if isinstance(node, Intersection):
            out = np.ones(len(pts), dtype=bool)
            for ch in node.children:
                out &= ev(ch)
            return out
        if isinstance(node, Union):
            out = np.zeros(len(pts), dtype=bool)
            for ch in node.children:
                out |= ev(ch)
            return out
        raise TypeError(node)

    inside = ev(cell.geometry)
    return inside, amb


def point_in_cell(deck: Deck, cell_id: int, p) -> bool:
    inside, amb = cell_membership(deck, cell_id, p)
    if amb[0]:
        raise OnSurface(f"point {list(p)} is within {TOL} of a surface of cell {cell_id}")
    return bool(inside[0])


def membership_matrix(deck: Deck, cell_ids, pts):
    """``(M, ambiguous)`` with ``M[i, j]`` true when point i is in cell j."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    cols, amb = [], np.zeros(len(pts), dtype=bool)
    for cid in cell_ids:
        inside, a = cell_membership(deck, cid, pts)
        cols.append(inside)
        amb |= a
    return np.column_stack(cols) if cols else np.zeros((len(pts), 0), bool), amb


def top_level_cells(deck: Deck) -> list[int]:
    return [c.id for c in deck.cells if not c.universe]


def locate(deck: Deck, p) -> list[int]:
    """Chain of cell ids containing ``p``, descending into non-lattice fills."""
    p = np.asarray(p, dtype=float)
    path = []
    universe = None
    while True:
        candidates = [c for c in deck.cells if (c.universe or None) == universe]
        hit = None
        for c in candidates:
            if point_in_cell(deck, c.id, p):
                hit = c
                break
        if hit is None:
            return path
        path.append(hit.id)
        f = hit.fill
        if f is None or f.array is not None or "lat" in hit.params:
            return path
        if hit.trcl is not None:
            p = to_aux(_cell_transform(deck, hit.trcl), p)
        if f.transform is not None:
            p = to_aux(_cell_transform(deck, f.transform), p)
        universe = f.universe


def sample_points(rng: np.random.Generator, lo, hi, n: int) -> np.ndarray:
    lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    return lo + (hi - lo) * rng.random((n, 3))


def sample_clear_points(deck: Deck, cell_ids, rng, lo, hi, n: int, max_rounds: int = 50):
    """``n`` points away from every surface of the given cells (ambiguous ones are redrawn)."""
    out = []
    for _ in range(max_rounds):
        pts = sample_points(rng, lo, hi, n)
        _, amb = membership_matrix(deck, cell_ids, pts)
        out.extend(pts[~amb])
        if len(out) >= n:
            return np.array(out[:n])
    raise RuntimeError("could not draw enough points off the surfaces")
