"""Robbin-Salamon indices of Lagrangian path pairs via crossing forms.

The index of a pair is computed by the graph construction: the pair
(L0(t), L1(t)) becomes the single path L0(t) + L1(t) in
(R^{2n} + R^{2n}, omega + (-omega)) against the constant diagonal, and the
single-path index is the signature-weighted count of crossings,

    mu = 1/2 sign G(t0) + sum_interior sign G(t) + 1/2 sign G(t1),

where G(t) is the crossing form on the intersection, obtained by writing the
moving Lagrangian as a graph over itself at the crossing time and
differentiating the induced quadratic form.

Floating point appears only in crossing detection and in the finite-difference
derivative of the graph representation; every index is returned as an exact
`HalfInt`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .errors import (
    DimensionMismatchError,
    EndpointMismatchError,
    IrregularCrossingError,
)
from .halfint import HalfInt
from .symplin import (
    RANK_TOL,
    LagrangianPath,
    complex_structure,
    intersection_basis,
    omega_matrix,
)

TIME_TOL = 1e-10
FD_STEP = 1e-6
REGULARITY_TOL = 1e-8
DEFAULT_SCAN = 2048


@dataclass(frozen=True)
class Crossing:
    """One crossing of a path pair: time, intersection data, and regularity."""

    time: float
    intersection_dim: int
    crossing_form_signature: int
    regular: bool
    boundary: bool = False

    def check_invariants(self) -> None:
        if abs(self.crossing_form_signature) > self.intersection_dim:
            raise IrregularCrossingError(self.time, "signature exceeds dimension")
        if self.regular and (
            (self.crossing_form_signature - self.intersection_dim) % 2 != 0
        ):
            raise IrregularCrossingError(self.time, "signature parity violation")


class _ProductPath:
    """The pair (L0, L1) as one path in (R^{4n}, omega + (-omega))."""

    def __init__(self, path0: LagrangianPath, path1: LagrangianPath):
        if path0.n != path1.n:
            raise DimensionMismatchError(
                f"paths have n={path0.n} and n={path1.n}"
            )
        if (
            abs(path0.domain[0] - path1.domain[0]) > 1e-12
            or abs(path0.domain[1] - path1.domain[1]) > 1e-12
        ):
            raise DimensionMismatchError(
                f"paths have domains {path0.domain} and {path1.domain}"
            )
        self.n = path0.n
        self.domain = path0.domain
        self.p0, self.p1 = path0, path1
        n2 = 2 * self.n
        o, j = omega_matrix(self.n), complex_structure(self.n)
        z = np.zeros((n2, n2))
        self.form = np.block([[o, z], [z, -o]])
        self.jmat = np.block([[j, z], [z, -j]])
        self.ref = np.vstack([np.eye(n2), np.eye(n2)]) / np.sqrt(2.0)
        self.scan = max(path0.sample_resolution, path1.sample_resolution, DEFAULT_SCAN)

    def frames(self, ts) -> np.ndarray:
        f0 = self.p0.frames(ts)
        f1 = self.p1.frames(ts)
        t, n2, n = f0.shape
        out = np.zeros((t, 2 * n2, 2 * n))
        out[:, :n2, :n] = f0
        out[:, n2:, n:] = f1
        return out

    def frame(self, t: float) -> np.ndarray:
        return self.frames(np.array([t]))[0]


class _CrossingEngine:
    """Signature-weighted crossing count of a moving frame against a fixed one."""

    def __init__(self, moving, ref, domain, form, jmat, scan=DEFAULT_SCAN):
        self.moving = moving  # object with frames(ts) / frame(t)
        self.ref = ref / np.linalg.norm(ref, axis=0, keepdims=True)
        self.domain = domain
        self.form = form
        self.jmat = jmat
        self.scan = scan

    # -- determinant scan ----------------------------------------------------

    def _dets(self, ts) -> np.ndarray:
        f = self.moving.frames(ts)
        f = f / np.linalg.norm(f, axis=1, keepdims=True)
        t = f.shape[0]
        ref = np.broadcast_to(self.ref, (t,) + self.ref.shape)
        return np.linalg.det(np.concatenate([f, ref], axis=2))

    def _det(self, t: float) -> float:
        return float(self._dets(np.array([t]))[0])

    def _bisect(self, a, b, da, db) -> float:
        while b - a > 1e-13:
            m = 0.5 * (a + b)
            dm = self._det(m)
            if dm == 0.0:
                return m
            if (da < 0) != (dm < 0):
                b, db = m, dm
            else:
                a, da = m, dm
        return 0.5 * (a + b)

    def _golden_min(self, a, b) -> float:
        phi = (np.sqrt(5.0) - 1) / 2
        x1 = b - phi * (b - a)
        x2 = a + phi * (b - a)
        f1, f2 = abs(self._det(x1)), abs(self._det(x2))
        while b - a > 1e-13:
            if f1 < f2:
                b, x2, f2 = x2, x1, f1
                x1 = b - phi * (b - a)
                f1 = abs(self._det(x1))
            else:
                a, x1, f1 = x1, x2, f2
                x2 = a + phi * (b - a)
                f2 = abs(self._det(x2))
        return 0.5 * (a + b)

    def _intersection(self, t: float):
        f = self.moving.frame(t)
        basis = intersection_basis(f, self.ref)
        return basis.shape[1], basis

    # -- crossing form ---------------------------------------------------------

    def _graph_matrix(self, b: np.ndarray, w: np.ndarray, t: float) -> np.ndarray:
        f = self.moving.frame(t)
        p = b.T @ f
        q = w.T @ f
        return q @ np.linalg.inv(p)

    def _form_derivative(self, t_star: float) -> Tuple[np.ndarray, np.ndarray]:
        """Symmetrized d/dt of the graph representation over the crossing frame."""
        f_star = self.moving.frame(t_star)
        b, _ = np.linalg.qr(f_star)
        w = self.jmat @ b
        t0, t1 = self.domain
        h = min(FD_STEP, (t1 - t0) / 16.0)
        s = lambda t: self._graph_matrix(b, w, t)

        def central(hh):
            return (s(t_star + hh) - s(t_star - hh)) / (2 * hh)

        def forward(hh):
            return (-3 * s(t_star) + 4 * s(t_star + hh) - s(t_star + 2 * hh)) / (2 * hh)

        def backward(hh):
            return (3 * s(t_star) - 4 * s(t_star - hh) + s(t_star - 2 * hh)) / (2 * hh)

        if t_star - t0 < 4 * h:
            d = forward
        elif t1 - t_star < 4 * h:
            d = backward
        else:
            d = central
        ds = (4 * d(h / 2) - d(h)) / 3.0  # Richardson extrapolation
        return b, (ds + ds.T) / 2.0

    def _crossing(self, t: float, boundary: bool) -> Crossing:
        dim, basis = self._intersection(t)
        b, gamma_full = self._form_derivative(t)
        u = b.T @ basis
        gamma = u.T @ gamma_full @ u
        gamma = (gamma + gamma.T) / 2.0
        eig = np.linalg.eigvalsh(gamma)
        scale = max(1.0, float(np.max(np.abs(eig)))) if eig.size else 1.0
        if eig.size and np.min(np.abs(eig)) <= REGULARITY_TOL * scale:
            raise IrregularCrossingError(t)
        sig = int(np.sum(eig > 0) - np.sum(eig < 0))
        c = Crossing(t, dim, sig, True, boundary)
        c.check_invariants()
        return c

    # -- main loop -------------------------------------------------------------

    def crossings(self) -> List[Crossing]:
        t0, t1 = self.domain
        ts = np.linspace(t0, t1, self.scan + 1)
        dets = self._dets(ts)
        interior_times: List[float] = []

        signs = np.sign(dets)
        for i in range(len(ts) - 1):
            if signs[i] != 0 and signs[i + 1] != 0 and signs[i] != signs[i + 1]:
                interior_times.append(
                    self._bisect(ts[i], ts[i + 1], dets[i], dets[i + 1])
                )
            elif signs[i + 1] == 0 and 0 < i + 1 < len(ts) - 1:
                interior_times.append(float(ts[i + 1]))

        # dips without a sign change (even-dimensional or tangential crossings)
        absd = np.abs(dets)
        for i in range(1, len(ts) - 1):
            if absd[i] < 1e-3 and absd[i] <= absd[i - 1] and absd[i] <= absd[i + 1]:
                t = self._golden_min(ts[i - 1], ts[i + 1])
                if abs(self._det(t)) < 1e-3:
                    interior_times.append(t)

        # merge, drop boundary hits, verify a genuine intersection
        interior_times.sort()
        merged: List[float] = []
        for t in interior_times:
            if merged and abs(t - merged[-1]) < 50 * TIME_TOL:
                continue
            if t - t0 < 50 * TIME_TOL or t1 - t < 50 * TIME_TOL:
                continue
            merged.append(t)

        out: List[Crossing] = []
        if self._intersection(t0)[0] > 0:
            out.append(self._crossing(t0, boundary=True))
        for t in merged:
            if self._intersection(t)[0] > 0:
                out.append(self._crossing(t, boundary=False))
        if self._intersection(t1)[0] > 0:
            out.append(self._crossing(t1, boundary=True))
        return out

    def index(self) -> Tuple[HalfInt, List[Crossing]]:
        halves = 0
        cs = self.crossings()
        for c in cs:
            halves += c.crossing_form_signature * (1 if c.boundary else 2)
        return HalfInt(halves), cs


def _pair_engine(pair, resolution=None) -> _CrossingEngine:
    path0, path1 = pair
    prod = _ProductPath(path0, path1)
    return _CrossingEngine(
        prod, prod.ref, prod.domain, prod.form, prod.jmat,
        scan=resolution or prod.scan,
    )


def rs_index(pair, resolution: int | None = None) -> HalfInt:
    """Signature-weighted crossing index of a pair of Lagrangian paths.

    Args:
        pair: tuple (path0, path1) of `LagrangianPath` with equal n and domain.
        resolution: optional override of the crossing-scan resolution.

    Raises:
        IrregularCrossingError: a crossing form is degenerate; the caller must
            perturb (degenerate chords are handled upstream, never silently
            perturbed here).
    """
    idx, _ = _pair_engine(pair, resolution).index()
    return idx


def rs_crossings(pair, resolution: int | None = None) -> List[Crossing]:
    """The crossings found while computing `rs_index` (for diagnostics)."""
    _, cs = _pair_engine(pair, resolution).index()
    return cs


def det2_winding(loop: LagrangianPath, max_refine: int = 18) -> int:
    """Winding number of det^2 along a loop of Lagrangian subspaces.

    The argument of det^2 is accumulated over a sample grid that is refined
    until successive arguments differ by less than pi/2.
    """
    f0, f1 = loop.endpoint_frames()
    from .symplin import lagrangian_intersection_dim

    if lagrangian_intersection_dim(f0, f1) != loop.n:
        raise EndpointMismatchError("loop endpoints span different subspaces")

    t0, t1 = loop.domain
    m = max(64, loop.sample_resolution)
    for _ in range(max_refine):
        ts = np.linspace(t0, t1, m + 1)
        frames = loop.frames(ts)
        q, _ = np.linalg.qr(frames)
        u = q[:, : loop.n, :] + 1j * q[:, loop.n :, :]
        d2 = np.linalg.det(u) ** 2
        args = np.angle(d2)
        steps = np.diff(args)
        steps = (steps + np.pi) % (2 * np.pi) - np.pi
        if np.max(np.abs(steps)) < np.pi / 2:
            total = float(np.sum(steps))
            winding = int(np.round(total / (2 * np.pi)))
            return winding
        m *= 2
    raise DimensionMismatchError("det^2 argument did not stabilize under refinement")


def chord_maslov(flow_path: LagrangianPath, reference: LagrangianPath, n: int) -> HalfInt:
    """Chord grading ``rs_index((flow_path, reference)) - n/2``."""
    if flow_path.n != n or reference.n != n:
        raise DimensionMismatchError("paths must have the stated n")
    return rs_index((flow_path, reference)) - HalfInt(n)
