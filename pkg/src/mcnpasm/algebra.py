"""Rigid-transformation algebra behind MCNP ``tr``/``trcl`` cards.

A transform maps auxiliary (card) coordinates to main coordinates as

    p_main = M^t p_aux + T

where ``M`` is the row-wise cosine matrix written on the card
(``B1..B9``, row ``i`` = auxiliary axis ``i`` in main coordinates) and ``T``
the displacement vector.  All angles in this module are degrees.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import CardSyntaxError, ZeroAxis

ORTHO_TOL = 1e-9
REPAIR_TOL = 1e-6


def cosd(angle: float) -> float:
    """Cosine of an angle in degrees, exact on multiples of 90."""
    r = math.fmod(angle, 360.0)
    if r % 90.0 == 0.0:
        return (1.0, 0.0, -1.0, 0.0)[int(r // 90.0) % 4]
    return math.cos(math.radians(angle))


def sind(angle: float) -> float:
    r = math.fmod(angle, 360.0)
    if r % 90.0 == 0.0:
        return (0.0, 1.0, 0.0, -1.0)[int(r // 90.0) % 4]
    return math.sin(math.radians(angle))


@dataclass(frozen=True, eq=False)
class Transform3D:
    """Rotation matrix (card convention) plus translation in cm."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = np.array(self.rotation, dtype=float).reshape(3, 3)
        tr = np.array(self.translation, dtype=float).reshape(3)
        rot.setflags(write=False)
        tr.setflags(write=False)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", tr)

    @classmethod
    def identity(cls) -> "Transform3D":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def translation_only(cls, shift) -> "Transform3D":
        return cls(np.eye(3), shift)

    def __eq__(self, other):
        if not isinstance(other, Transform3D):
            return NotImplemented
        return bool(
            np.array_equal(self.rotation, other.rotation)
            and np.array_equal(self.translation, other.translation)
        )

    def __hash__(self):
        return hash((self.rotation.tobytes(), self.translation.tobytes()))

    def __repr__(self):
        return (
            f"Transform3D(rotation={self.rotation.tolist()}, "
            f"translation={self.translation.tolist()})"
        )

    def isclose(self, other: "Transform3D", tol: float = 1e-12) -> bool:
        return bool(
            np.max(np.abs(self.rotation - other.rotation)) <= tol
            and np.max(np.abs(self.translation - other.translation)) <= tol
        )

    def is_identity(self) -> bool:
        return self == Transform3D.identity()

    def inverse(self) -> "Transform3D":
        m = self.rotation
        return Transform3D(m.T, -m @ self.translation)


def orthonormality_error(m) -> float:
    m = np.asarray(m, dtype=float)
    return float(np.max(np.abs(m.T @ m - np.eye(3))))


def is_rotation(m, tol: float = ORTHO_TOL) -> bool:
    return orthonormality_error(m) <= tol and abs(np.linalg.det(m) - 1.0) <= tol


def gram_schmidt(m) -> np.ndarray:
    """Orthonormalise the rows of ``m``; the third row is rebuilt as r0 x r1."""
    m = np.asarray(m, dtype=float)
    r0 = m[0] / np.linalg.norm(m[0])
    r1 = m[1] - np.dot(m[1], r0) * r0
    r1 = r1 / np.linalg.norm(r1)
    r2 = np.cross(r0, r1)
    return np.array([r0, r1, r2])


def apply_to_point(t: Transform3D, p) -> np.ndarray:
    """Map auxiliary coordinates to main ones: ``M^t p + T``.

    Accepts a single point or an ``(n, 3)`` array of points.
    """
    p = np.asarray(p, dtype=float)
    return p @ t.rotation + t.translation


def to_aux(t: Transform3D, p) -> np.ndarray:
    """Inverse of :func:`apply_to_point`: ``M (p - T)``."""
    p = np.asarray(p, dtype=float)
    return (p - t.translation) @ t.rotation.T


def _active(axis: str, angle: float) -> np.ndarray:
    c, s = cosd(angle), sind(angle)
    axis = axis.upper()
    if axis == "X":
        return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=float)
    if axis == "Y":
        return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=float)
    if axis == "Z":
        return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=float)
    raise ValueError(f"unknown axis {axis!r}")


def axis_rotation(axis: str, angle: float, shift=(0.0, 0.0, 0.0)) -> Transform3D:
    """Rotate geometry by ``angle`` degrees about a main axis, then shift it.

    The card matrix is the transpose of the right-handed active rotation,
    e.g. ``axis_rotation("Y", 1)`` gives the rows
    ``[0.9998477, 0, -0.0174524], [0, 1, 0], [0.0174524, 0, 0.9998477]``.
    """
    return Transform3D(_active(axis, angle).T, shift)


def arbitrary_axis_rotation(u, angle: float, shift=(0.0, 0.0, 0.0)) -> Transform3D:
    """Rodrigues rotation about the (normalised) direction ``u``."""
    u = np.asarray(u, dtype=float)
    n = float(np.linalg.norm(u))
    if n < 1e-12:
        raise ZeroAxis("rotation axis has zero length")
    u = u / n
    c, s = cosd(angle), sind(angle)
    k = np.array([[0, -u[2], u[1]], [u[2], 0, -u[0]], [-u[1], u[0], 0]])
    active = c * np.eye(3) + s * k + (1 - c) * np.outer(u, u)
    return Transform3D(active.T, shift)


def compose_surface_transform(old: Transform3D, incoming: Transform3D) -> Transform3D:
    """Update a surface ``tr`` card when the whole deck is moved by ``incoming``.

    M_new = M_old M_in ;  T_new = M_in^t T_old + T_in
    """
    m_in = incoming.rotation
    return Transform3D(
        old.rotation @ m_in, m_in.T @ old.translation + incoming.translation
    )


def compose_cell_transform(old: Transform3D, incoming: Transform3D) -> Transform3D:
    """Update a ``trcl``/``fill`` transform when the whole deck is moved.

    M_new = M_in^t M_old M_in ;  T_new = M_in^t T_old - M_new^t T_in + T_in
    """
    m_in, t_in = incoming.rotation, incoming.translation
    m_new = m_in.T @ old.rotation @ m_in
    t_new = m_in.T @ old.translation - m_new.T @ t_in + t_in
    return Transform3D(m_new, t_new)


def degrees_to_cosines(entries) -> np.ndarray:
    vals = [float(x) for x in entries]
    if len(vals) != 9:
        raise ValueError("expected 9 angles")
    return np.array([cosd(a) for a in vals]).reshape(3, 3)


def reverse_to_forward(rotation, displacement) -> Transform3D:
    """Convert an ``M = -1`` card (main origin given in auxiliary frame).

    With ``p_aux = M p_main + O`` the forward displacement is ``-M^t O``.
    """
    m = np.asarray(rotation, dtype=float)
    return Transform3D(m, -m.T @ np.asarray(displacement, dtype=float))


@dataclass(frozen=True)
class EulerXZX:
    a: float
    b: float
    g: float


def euler_xzx(m) -> EulerXZX:
    """Euler triple reported in assembly headers.

    The active rotation ``M^t`` is factored as ``Rz(g) Rx(b) Rz(a)`` with
    ``b`` in [0, 180].  When ``sin(b) < 1e-9`` the whole turn is folded into
    ``a`` and ``g = 0``.
    """
    r = np.asarray(m, dtype=float).T
    b = math.degrees(math.atan2(math.hypot(r[2, 0], r[2, 1]), r[2, 2]))
    if math.sin(math.radians(b)) < 1e-9:
        if r[2, 2] > 0:
            a = math.degrees(math.atan2(r[1, 0], r[0, 0]))
        else:
            a = math.degrees(math.atan2(-r[1, 0], r[0, 0]))
        return EulerXZX(a, b, 0.0)
    a = math.degrees(math.atan2(r[2, 0], r[2, 1]))
    g = math.degrees(math.atan2(r[0, 2], -r[1, 2]))
    return EulerXZX(a, b, g)


def euler_matrix(e: EulerXZX) -> np.ndarray:
    """Card matrix rebuilt from an :class:`EulerXZX` triple."""
    active = _active("Z", e.g) @ _active("X", e.b) @ _active("Z", e.a)
    return active.T


def to_tr_entries(t: Transform3D) -> list[float]:
    """``[T1, T2, T3, M11 .. M33]`` in card order."""
    return [float(x) for x in t.translation] + [float(x) for x in t.rotation.ravel()]


def complete_rotation(b) -> np.ndarray:
    """Build a full cosine matrix from a 9-slot list with ``None`` gaps.

    Supported layouts: all nine; no entries (identity); two full rows or
    two full columns (third by cross product); first row plus first column
    (``B1 B2 B3 B4 B7``).
    """
    if len(b) != 9:
        raise CardSyntaxError("rotation needs 9 slots")
    have = [x is not None for x in b]
    if not any(have):
        return np.eye(3)
    if all(have):
        return np.array(b, dtype=float).reshape(3, 3)
    grid = np.array([np.nan if x is None else x for x in b], dtype=float).reshape(3, 3)
    known = ~np.isnan(grid)
    # right-handed frames: v_i = v_{i+1} x v_{i+2} for rows and for columns
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        if known[j].all() and known[k].all() and not known[i].any():
            out = grid.copy()
            out[i] = np.cross(grid[j], grid[k])
            return out
        if known[:, j].all() and known[:, k].all() and not known[:, i].any():
            out = grid.copy()
            out[:, i] = np.cross(grid[:, j], grid[:, k])
            return out
    if known[0].all() and known[:, 0].all() and known.sum() == 5:
        a = grid[0, 0]
        if 1.0 - a * a < 1e-12:
            raise CardSyntaxError("five-entry rotation is undetermined when |B1| = 1")
        row = grid[0, 1:]
        col = grid[1:, 0]
        row_perp = np.array([-row[1], row[0]])
        col_perp = np.array([-col[1], col[0]])
        for sign in (1.0, -1.0):
            block = (-a * np.outer(col, row) + sign * np.outer(col_perp, row_perp)) / (1 - a * a)
            out = grid.copy()
            out[1:, 1:] = block
            if np.linalg.det(out) > 0:
                return out
    raise CardSyntaxError("unsupported pattern of rotation entries")
