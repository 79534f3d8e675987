"""Linear symplectic algebra on (R^{2n}, omega_st).

Coordinates are ordered (x_1..x_n, y_1..y_n).  The complex identification
z_j = x_j + i*y_j fixes the compatible complex structure J(x, y) = (-y, x)
(multiplication by i), and the standard form Sum_j dx_j ^ dy_j has matrix

    Omega = [[0, I], [-I, 0]],      omega(u, v) = u^T Omega v.

With this choice Omega @ J = Id, so omega(., J.) is the Euclidean metric.

Tolerances: bilinear identities (symplecticity, isotropy) are checked at
1e-10; rank decisions use a singular-value threshold of 1e-8 on frames with
normalized columns.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import (
    DegenerateFrameError,
    DimensionMismatchError,
    NonTransverseError,
)

BILINEAR_TOL = 1e-10
RANK_TOL = 1e-8
DET2_TOL = 1e-9


def omega_matrix(n: int) -> np.ndarray:
    """Matrix of the standard form Sum dx_j ^ dy_j in (x, y) order."""
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, I], [-I, Z]])


def complex_structure(n: int) -> np.ndarray:
    """Matrix of multiplication by i: J(x, y) = (-y, x)."""
    I = np.eye(n)
    Z = np.zeros((n, n))
    return np.block([[Z, -I], [I, Z]])


@dataclass(frozen=True)
class SymplecticForm:
    """The standard antisymmetric form on R^{2n}."""

    n: int
    matrix: np.ndarray

    @staticmethod
    def standard(n: int) -> "SymplecticForm":
        return SymplecticForm(n, omega_matrix(n))

    def validate(self) -> None:
        m = self.matrix
        if m.shape != (2 * self.n, 2 * self.n):
            raise DimensionMismatchError(f"form matrix must be {2*self.n}x{2*self.n}")
        if np.max(np.abs(m + m.T)) > BILINEAR_TOL:
            raise DegenerateFrameError("form matrix is not antisymmetric")
        if abs(np.linalg.det(m) - 1.0) > 1e-8:
            raise DegenerateFrameError("form matrix must have determinant 1")

    def __call__(self, u: np.ndarray, v: np.ndarray) -> float:
        return float(u @ self.matrix @ v)


@dataclass(frozen=True)
class SymplecticMatrix:
    """A 2n x 2n matrix preserving the standard form."""

    n: int
    entries: np.ndarray

    @staticmethod
    def from_array(m: np.ndarray) -> "SymplecticMatrix":
        m = np.asarray(m, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2 != 0:
            raise DimensionMismatchError(
                f"expected a square matrix of even dimension, got shape {m.shape}"
            )
        return SymplecticMatrix(m.shape[0] // 2, m)

    def validate(self) -> None:
        if not is_symplectic(self):
            raise DegenerateFrameError("matrix does not preserve the standard form")

    def inverse(self) -> "SymplecticMatrix":
        return SymplecticMatrix(self.n, np.linalg.inv(self.entries))

    def __matmul__(self, other):
        if isinstance(other, SymplecticMatrix):
            return SymplecticMatrix(self.n, self.entries @ other.entries)
        if isinstance(other, LagrangianFrame):
            return LagrangianFrame.from_columns(self.entries @ other.columns)
        return self.entries @ other


def is_symplectic(m) -> bool:
    """True iff ``M^T Omega M = Omega`` to within 1e-10 (max-norm).

    Accepts a `SymplecticMatrix` or a raw square array of even dimension.
    """
    a = m.entries if isinstance(m, SymplecticMatrix) else np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2 != 0:
        raise DimensionMismatchError(
            f"expected a square matrix of even dimension, got shape {a.shape}"
        )
    omega = omega_matrix(a.shape[0] // 2)
    return bool(np.max(np.abs(a.T @ omega @ a - omega)) < BILINEAR_TOL)


@dataclass(frozen=True)
class LagrangianFrame:
    """A 2n x n frame whose columns span a Lagrangian subspace."""

    n: int
    columns: np.ndarray

    @staticmethod
    def from_columns(z: np.ndarray, validate: bool = True) -> "LagrangianFrame":
        z = np.asarray(z, dtype=float)
        if z.ndim != 2 or z.shape[0] != 2 * z.shape[1]:
            raise DimensionMismatchError(
                f"expected a 2n x n frame, got shape {z.shape}"
            )
        fr = LagrangianFrame(z.shape[1], z)
        if validate:
            fr.validate()
        return fr

    @staticmethod
    def horizontal(n: int) -> "LagrangianFrame":
        """R^n x {0}."""
        return LagrangianFrame(n, np.vstack([np.eye(n), np.zeros((n, n))]))

    @staticmethod
    def vertical(n: int) -> "LagrangianFrame":
        """{0} x R^n."""
        return LagrangianFrame(n, np.vstack([np.zeros((n, n)), np.eye(n)]))

    @staticmethod
    def graph(a: np.ndarray) -> "LagrangianFrame":
        """The graph {(x, A x)} of a symmetric matrix over R^n x {0}."""
        a = np.asarray(a, dtype=float)
        n = a.shape[0]
        return LagrangianFrame.from_columns(np.vstack([np.eye(n), a]))

    @staticmethod
    def complex_line(theta: float) -> "LagrangianFrame":
        """The line e^{i theta} R in R^2."""
        return LagrangianFrame(1, np.array([[np.cos(theta)], [np.sin(theta)]]))

    def validate(self) -> None:
        z = self.columns
        cn = z / np.linalg.norm(z, axis=0, keepdims=True)
        sv = np.linalg.svd(cn, compute_uv=False)
        if sv[-1] <= RANK_TOL:
            raise DegenerateFrameError(
                f"frame is rank deficient (smallest singular value {sv[-1]:.3e})"
            )
        omega = omega_matrix(self.n)
        iso = np.max(np.abs(cn.T @ omega @ cn))
        if iso > BILINEAR_TOL:
            raise DegenerateFrameError(
                f"frame is not isotropic (|Z^T Omega Z| = {iso:.3e})"
            )

    def orthonormalized(self) -> "LagrangianFrame":
        q, _ = np.linalg.qr(self.columns)
        return LagrangianFrame(self.n, q)

    def to_json(self) -> dict:
        return {"schema": "v1", "n": self.n, "columns": self.columns.tolist()}

    @staticmethod
    def from_json(obj: dict) -> "LagrangianFrame":
        return LagrangianFrame.from_columns(np.asarray(obj["columns"], dtype=float))


def lagrangian_intersection_dim(l1: LagrangianFrame, l2: LagrangianFrame) -> int:
    """dim(span L1 ∩ span L2), via 2n - rank[L1 | L2] at threshold 1e-8."""
    if l1.n != l2.n:
        raise DimensionMismatchError(f"frames have n={l1.n} and n={l2.n}")
    l1.validate()
    l2.validate()
    return _intersection_dim_arrays(l1.columns, l2.columns)


def _normalize_columns(f: np.ndarray) -> np.ndarray:
    return f / np.linalg.norm(f, axis=0, keepdims=True)


def _intersection_dim_arrays(f1: np.ndarray, f2: np.ndarray) -> int:
    m = np.hstack([_normalize_columns(f1), _normalize_columns(f2)])
    sv = np.linalg.svd(m, compute_uv=False)
    rank = int(np.sum(sv > RANK_TOL))
    return m.shape[1] - rank


def intersection_basis(f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of span F1 ∩ span F2."""
    a = np.hstack([_normalize_columns(f1), _normalize_columns(f2)])
    _, sv, vt = np.linalg.svd(a)
    null_mask = np.zeros(a.shape[1], dtype=bool)
    null_mask[len(sv):] = True
    null_mask[: len(sv)] |= sv <= RANK_TOL
    kernel = vt[null_mask].T  # columns (c1; c2) with F1 c1 + F2 c2 = 0
    if kernel.shape[1] == 0:
        return np.zeros((f1.shape[0], 0))
    k1 = _normalize_columns(f1) @ kernel[: f1.shape[1]]
    q, r = np.linalg.qr(k1)
    keep = np.abs(np.diag(r)) > RANK_TOL
    return q[:, keep]


def det_squared(l: LagrangianFrame) -> complex:
    """det^2 of a unitary frame spanning the same subspace.

    The real frame is orthonormalized; viewed in C^n via z_j = x_j + i*y_j an
    orthonormal Lagrangian frame is unitary, so det^2 lands on the unit
    circle and depends only on the subspace (two frames for one subspace
    differ by O(n), whose determinant squares to 1).
    """
    l.validate()
    q = l.orthonormalized().columns
    u = q[: l.n, :] + 1j * q[l.n :, :]
    d = np.linalg.det(u)
    return complex(d * d)


def symplectic_gram_schmidt(l0: LagrangianFrame, l1: LagrangianFrame) -> SymplecticMatrix:
    """A symplectic matrix A with A L0 = R^n x 0 and A L1 = 0 x R^n.

    Requires L0 transverse to L1.  Built by pairing an orthonormal basis of
    L0 with the omega-dual basis inside L1.
    """
    if l0.n != l1.n:
        raise DimensionMismatchError(f"frames have n={l0.n} and n={l1.n}")
    n = l0.n
    if lagrangian_intersection_dim(l0, l1) != 0:
        raise NonTransverseError("L0 and L1 must be transverse")
    u = l0.orthonormalized().columns
    w = _normalize_columns(l1.columns)
    omega = omega_matrix(n)
    b = u.T @ omega @ w
    w_dual = w @ np.linalg.inv(b)
    t = np.hstack([u, w_dual])  # maps the standard symplectic basis to (u, w_dual)
    a = SymplecticMatrix(n, np.linalg.inv(t))
    a.validate()
    return a


# ---------------------------------------------------------------------------
# Lagrangian paths
# ---------------------------------------------------------------------------


class LagrangianPath:
    """A path of Lagrangian frames on a closed interval.

    Concrete paths are `GeneratorPath` (a quadratic-Hamiltonian flow applied
    to an initial frame), `SampledPath` (a dense table with linear frame
    interpolation), or `FunctionPath` (an arbitrary closed form; not
    serializable).
    """

    n: int
    domain: tuple
    sample_resolution: int

    def frame_array(self, t: float) -> np.ndarray:
        raise NotImplementedError

    def frames(self, ts: np.ndarray) -> np.ndarray:
        """Stacked frames, shape (len(ts), 2n, n)."""
        return np.stack([self.frame_array(float(t)) for t in np.asarray(ts)])

    def frame(self, t: float) -> LagrangianFrame:
        return LagrangianFrame.from_columns(self.frame_array(t), validate=False)

    def endpoint_frames(self):
        t0, t1 = self.domain
        return self.frame(t0), self.frame(t1)

    def restricted(self, t0: float, t1: float) -> "LagrangianPath":
        lo, hi = self.domain
        if not (lo - 1e-12 <= t0 < t1 <= hi + 1e-12):
            raise DimensionMismatchError(f"[{t0}, {t1}] is not inside {self.domain}")
        return FunctionPath(
            self.n, self.frame_array, (t0, t1), self.sample_resolution,
            frames_fn=self.frames,
        )

    def reparametrized(self, tau: Callable[[float], float],
                       domain: tuple = (0.0, 1.0)) -> "LagrangianPath":
        """Precompose with a monotone time change ``tau``."""
        return FunctionPath(
            self.n, lambda t: self.frame_array(tau(t)), domain,
            self.sample_resolution,
            frames_fn=lambda ts: self.frames([tau(float(t)) for t in ts]),
        )

    def transformed(self, mat_path) -> "LagrangianPath":
        """Apply a (time-dependent) symplectic matrix to every frame.

        ``mat_path`` is a callable ``t -> 2n x 2n`` matrix; a `GeneratorPath`
        may be passed directly, in which case evaluation is batched.
        """
        if isinstance(mat_path, GeneratorPath):
            return FunctionPath(
                self.n,
                lambda t: mat_path.matrix(t) @ self.frame_array(t),
                self.domain,
                self.sample_resolution,
                frames_fn=lambda ts: mat_path.matrices(ts) @ self.frames(ts),
            )
        return FunctionPath(
            self.n,
            lambda t: mat_path(t) @ self.frame_array(t),
            self.domain,
            self.sample_resolution,
        )

    def validate(self, samples: int = 7) -> None:
        t0, t1 = self.domain
        for t in np.linspace(t0, t1, samples):
            self.frame(float(t)).validate()

    def to_json(self) -> dict:
        raise NotImplementedError(f"{type(self).__name__} is not serializable")


class FunctionPath(LagrangianPath):
    """A path given by an arbitrary frame-valued callable (in-memory only)."""

    def __init__(self, n, fn, domain=(0.0, 1.0), sample_resolution=512,
                 frames_fn=None):
        self.n = n
        self._fn = fn
        self._frames_fn = frames_fn
        self.domain = (float(domain[0]), float(domain[1]))
        self.sample_resolution = sample_resolution

    def frame_array(self, t: float) -> np.ndarray:
        return np.asarray(self._fn(t), dtype=float)

    def frames(self, ts):
        if self._frames_fn is not None:
            return np.asarray(self._frames_fn(np.asarray(ts)), dtype=float)
        return super().frames(ts)


class ConstantPath(FunctionPath):
    def __init__(self, frame: LagrangianFrame, domain=(0.0, 1.0)):
        super().__init__(frame.n, lambda t: frame.columns, domain)
        self.base_frame = frame

    def frames(self, ts):
        return np.broadcast_to(
            self.base_frame.columns, (len(ts), 2 * self.n, self.n)
        ).copy()


class GeneratorPath(LagrangianPath):
    """Frames ``Psi(t) @ F0`` where ``Psi' = J S(t) Psi`` and ``Psi(t0) = Id``.

    ``S`` is a symmetric 2n x 2n matrix (constant) or a callable ``t -> S(t)``.
    Constant generators are advanced exactly with the matrix exponential;
    time-dependent ones with fixed-step RK4 on an internal grid.
    """

    def __init__(self, s, frame0: LagrangianFrame, domain=(0.0, 1.0),
                 sample_resolution=512, grid=2048):
        self.n = frame0.n
        self.domain = (float(domain[0]), float(domain[1]))
        self.sample_resolution = sample_resolution
        self._f0 = frame0.columns
        self._j = complex_structure(self.n)
        if callable(s):
            self._s_fn, self._s_const = s, None
        else:
            s = np.asarray(s, dtype=float)
            if np.max(np.abs(s - s.T)) > BILINEAR_TOL:
                raise DimensionMismatchError("generator S must be symmetric")
            self._s_fn, self._s_const = None, s
        self._grid_n = grid
        self._eig = self._try_eig() if self._s_const is not None else None
        self._ts, self._psis = self._build_grid()

    # -- internal integration ------------------------------------------------

    def _m(self, t):
        s = self._s_const if self._s_const is not None else self._s_fn(t)
        return self._j @ s

    def _try_eig(self):
        # Diagonalize the constant generator once so that off-grid queries
        # avoid a matrix exponential; fall back to expm if ill conditioned.
        m = self._m(0.0)
        try:
            lam, v = np.linalg.eig(m)
            vinv = np.linalg.inv(v)
        except np.linalg.LinAlgError:
            return None
        if np.linalg.cond(v) > 1e8:
            return None
        probe = 0.37
        approx = (v * np.exp(lam * probe)) @ vinv
        if np.max(np.abs(approx.real - expm(m * probe))) > 1e-10:
            return None
        return lam, v, vinv

    def _advance(self, dt: float) -> np.ndarray:
        if self._eig is not None:
            lam, v, vinv = self._eig
            return ((v * np.exp(lam * dt)) @ vinv).real
        return expm(self._m(0.0) * dt)

    def _build_grid(self):
        t0, t1 = self.domain
        ts = np.linspace(t0, t1, self._grid_n + 1)
        dt = (t1 - t0) / self._grid_n
        dim = 2 * self.n
        psis = np.empty((self._grid_n + 1, dim, dim))
        psis[0] = np.eye(dim)
        if self._s_const is not None:
            step = self._advance(dt)
            for i in range(self._grid_n):
                psis[i + 1] = step @ psis[i]
        else:
            for i in range(self._grid_n):
                psis[i + 1] = self._rk4(psis[i], ts[i], dt)
        return ts, psis

    def _rk4(self, psi, t, dt):
        k1 = self._m(t) @ psi
        k2 = self._m(t + dt / 2) @ (psi + dt / 2 * k1)
        k3 = self._m(t + dt / 2) @ (psi + dt / 2 * k2)
        k4 = self._m(t + dt) @ (psi + dt * k3)
        return psi + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    def matrix(self, t: float) -> np.ndarray:
        """The fundamental solution Psi(t)."""
        t0, t1 = self.domain
        t = min(max(t, t0), t1)
        i = int(np.searchsorted(self._ts, t, side="right")) - 1
        i = min(max(i, 0), self._grid_n)
        dt = t - self._ts[i]
        if abs(dt) < 1e-15:
            return self._psis[i]
        if self._s_const is not None:
            return self._advance(dt) @ self._psis[i]
        sub = max(1, int(np.ceil(abs(dt) * self._grid_n / (t1 - t0) * 4)))
        psi, tt = self._psis[i], self._ts[i]
        h = dt / sub
        for _ in range(sub):
            psi = self._rk4(psi, tt, h)
            tt += h
        return psi

    def matrices(self, ts) -> np.ndarray:
        """Fundamental solutions at many times, shape (T, 2n, 2n)."""
        ts = np.clip(np.asarray(ts, dtype=float), self.domain[0], self.domain[1])
        idx = np.clip(np.searchsorted(self._ts, ts, side="right") - 1, 0, self._grid_n)
        dts = ts - self._ts[idx]
        base = self._psis[idx]
        on_node = np.abs(dts) < 1e-15
        if np.all(on_node):
            return base
        if self._eig is not None:
            lam, v, vinv = self._eig
            steps = np.einsum(
                "ij,tj,jk->tik", v, np.exp(np.outer(dts, lam)), vinv
            ).real
            return steps @ base
        out = base.copy()
        for i in np.nonzero(~on_node)[0]:
            out[i] = self.matrix(float(ts[i]))
        return out

    # -- path interface --------------------------------------------------------

    def frame_array(self, t: float) -> np.ndarray:
        return self.matrix(t) @ self._f0

    def frames(self, ts):
        return self.matrices(np.asarray(ts)) @ self._f0

    def to_json(self) -> dict:
        if self._s_const is None:
            raise NotImplementedError("only constant-S generator paths serialize")
        return {
            "schema": "v1",
            "n": self.n,
            "kind": "generator",
            "domain": list(self.domain),
            "S": self._s_const.tolist(),
            "frame0": self._f0.tolist(),
            "sample_resolution": self.sample_resolution,
        }


class SampledPath(LagrangianPath):
    """A dense sample table with linear frame interpolation."""

    def __init__(self, times: Sequence[float], frames: np.ndarray,
                 sample_resolution: Optional[int] = None):
        times = np.asarray(times, dtype=float)
        frames = np.asarray(frames, dtype=float)
        if frames.ndim != 3 or frames.shape[0] != len(times):
            raise DimensionMismatchError("frames must have shape (T, 2n, n)")
        if np.any(np.diff(times) <= 0):
            raise DimensionMismatchError("times must be strictly increasing")
        self.n = frames.shape[2]
        if frames.shape[1] != 2 * self.n:
            raise DimensionMismatchError("frames must have shape (T, 2n, n)")
        self._times = times
        self._frames = frames
        self.domain = (float(times[0]), float(times[-1]))
        self.sample_resolution = sample_resolution or len(times)

    def frame_array(self, t: float) -> np.ndarray:
        ts = self._times
        t = min(max(t, ts[0]), ts[-1])
        i = int(np.searchsorted(ts, t, side="right")) - 1
        i = min(max(i, 0), len(ts) - 2)
        w = (t - ts[i]) / (ts[i + 1] - ts[i])
        return (1 - w) * self._frames[i] + w * self._frames[i + 1]

    def to_json(self) -> dict:
        return {
            "schema": "v1",
            "n": self.n,
            "kind": "samples",
            "times": self._times.tolist(),
            "frames": self._frames.tolist(),
            "sample_resolution": self.sample_resolution,
        }


def path_from_json(obj: dict) -> LagrangianPath:
    kind = obj.get("kind")
    if kind == "generator":
        return GeneratorPath(
            np.asarray(obj["S"], dtype=float),
            LagrangianFrame.from_columns(np.asarray(obj["frame0"], dtype=float)),
            tuple(obj.get("domain", (0.0, 1.0))),
            obj.get("sample_resolution", 512),
        )
    if kind == "samples":
        return SampledPath(
            obj["times"], np.asarray(obj["frames"], dtype=float),
            obj.get("sample_resolution"),
        )
    raise DimensionMismatchError(f"unknown path kind {kind!r}")


def path_to_json_str(path: LagrangianPath) -> str:
    return json.dumps(path.to_json())


def rotation_path(n: int, speeds, domain=(0.0, 1.0),
                  frame0: Optional[LagrangianFrame] = None) -> GeneratorPath:
    """The product path applying e^{i s_j t} to the j-th coordinate line.

    ``speeds`` is a scalar or a length-n sequence of angular speeds; the
    generator is S = diag(speeds, speeds).
    """
    speeds = np.broadcast_to(np.asarray(speeds, dtype=float), (n,))
    s = np.diag(np.concatenate([speeds, speeds]))
    return GeneratorPath(s, frame0 or LagrangianFrame.horizontal(n), domain)


def canonical_short_path(l0: LagrangianFrame, l1: LagrangianFrame) -> GeneratorPath:
    """The short quarter-turn path from L0 to L1 for transverse L0, L1.

    With A symplectic mapping L0 to R^n x 0 and L1 to 0 x R^n, the path is
    t -> A^{-1} (e^{-i pi t / 2} R)^n.  Realized as a generator path with
    S = -(pi/2) A^T A, which conjugates the model rotation by A^{-1}.
    """
    a = symplectic_gram_schmidt(l0, l1)
    s = -(np.pi / 2) * (a.entries.T @ a.entries)
    f0 = a.inverse() @ LagrangianFrame.horizontal(l0.n)
    return GeneratorPath(s, f0, (0.0, 1.0))


def direct_sum_frames(f1: np.ndarray, f2: np.ndarray) -> np.ndarray:
    """Direct sum of frames, re-interleaved into (x..., y...) coordinate order."""
    n1, n2 = f1.shape[1], f2.shape[1]
    n = n1 + n2
    out = np.zeros((2 * n, n))
    out[:n1, :n1] = f1[:n1]
    out[n : n + n1, :n1] = f1[n1:]
    out[n1:n, n1:] = f2[:n2]
    out[n + n1 :, n1:] = f2[n2:]
    return out


def direct_sum_paths(p1: LagrangianPath, p2: LagrangianPath) -> FunctionPath:
    if p1.domain != p2.domain:
        raise DimensionMismatchError("paths must share their domain")
    return FunctionPath(
        p1.n + p2.n,
        lambda t: direct_sum_frames(p1.frame_array(t), p2.frame_array(t)),
        p1.domain,
        max(p1.sample_resolution, p2.sample_resolution),
    )


def random_symplectic(n: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """A random symplectic matrix exp(J S) with S symmetric."""
    a = rng.normal(size=(2 * n, 2 * n), scale=scale)
    s = (a + a.T) / 2
    return expm(complex_structure(n) @ s)


def random_lagrangian_frame(n: int, rng: np.random.Generator) -> LagrangianFrame:
    m = random_symplectic(n, rng)
    return LagrangianFrame.from_columns(m @ LagrangianFrame.horizontal(n).columns)
