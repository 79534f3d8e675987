"""Filtered graded chain complexes over GF(2), homology, and direct limits.

Complexes are desk scale, so GF(2) linear algebra uses dense uint8 arrays
with XOR elimination.  A complex stores generators (id, degree, action) and a
differential matrix D with D[i, j] = 1 meaning generator j maps onto
generator i; validity demands D^2 = 0, degree drop exactly one, and a
*strict* action decrease on every entry (equality would break the
well-definedness of action-window subquotients).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import (
    DimensionMismatchError,
    IncoherentSystemError,
    ShapeMismatchError,
)


# ---------------------------------------------------------------------------
# GF(2) primitives
# ---------------------------------------------------------------------------


def gf2_rank(m: np.ndarray) -> int:
    """Rank over GF(2) by Gaussian elimination with XOR row operations."""
    r = (np.asarray(m, dtype=np.uint8) % 2).copy()
    rows, cols = r.shape
    rank = 0
    for c in range(cols):
        pivot = None
        for i in range(rank, rows):
            if r[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        if pivot != rank:
            r[[rank, pivot]] = r[[pivot, rank]]
        for i in range(rows):
            if i != rank and r[i, c]:
                r[i] ^= r[rank]
        rank += 1
        if rank == rows:
            break
    return rank


def gf2_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (np.asarray(a, dtype=np.uint8) @ np.asarray(b, dtype=np.uint8)) % 2


def gf2_eventual_rank(t: np.ndarray) -> int:
    """rank(T^m) for m = dim, where it has stabilized."""
    t = np.asarray(t, dtype=np.uint8) % 2
    if t.size == 0:
        return 0
    p = t.copy()
    for _ in range(t.shape[0]):
        p = gf2_matmul(p, t)
    return gf2_rank(p)


# ---------------------------------------------------------------------------
# Filtered complexes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Generator:
    id: str
    degree: int
    action: float


@dataclass
class ValidationReport:
    ok: bool
    d2_violations: List[Tuple[str, str]]
    degree_violations: List[Tuple[str, str]]
    action_violations: List[Tuple[str, str]]

    def to_json(self) -> dict:
        return {
            "schema": "v1",
            "pass": self.ok,
            "d2_violations": [list(v) for v in self.d2_violations],
            "degree_violations": [list(v) for v in self.degree_violations],
            "action_violations": [list(v) for v in self.action_violations],
        }


class FilteredZ2Complex:
    """Generators with degree and action, and a GF(2) differential."""

    def __init__(self, generators: Sequence[Generator], entries: Sequence[Tuple[str, str]]):
        self.generators = list(generators)
        ids = [g.id for g in self.generators]
        if len(set(ids)) != len(ids):
            raise DimensionMismatchError("generator ids must be unique")
        self.index = {g.id: i for i, g in enumerate(self.generators)}
        n = len(self.generators)
        self.d = np.zeros((n, n), dtype=np.uint8)
        for out_id, in_id in entries:
            if out_id not in self.index or in_id not in self.index:
                raise DimensionMismatchError(
                    f"unknown generator in entry ({out_id!r}, {in_id!r})"
                )
            self.d[self.index[out_id], self.index[in_id]] ^= 1

    # -- construction helpers -------------------------------------------------

    @staticmethod
    def from_matrix(generators: Sequence[Generator], d: np.ndarray) -> "FilteredZ2Complex":
        c = FilteredZ2Complex(generators, [])
        d = np.asarray(d, dtype=np.uint8) % 2
        if d.shape != c.d.shape:
            raise ShapeMismatchError("differential shape mismatch")
        c.d = d.copy()
        return c

    def entries(self) -> List[Tuple[str, str]]:
        out = []
        rows, cols = np.nonzero(self.d)
        for r, c in zip(rows, cols):
            out.append((self.generators[r].id, self.generators[c].id))
        return out

    # -- validation -------------------------------------------------------------

    def validate(self) -> ValidationReport:
        d2 = gf2_matmul(self.d, self.d)
        d2_viol = [
            (self.generators[r].id, self.generators[c].id)
            for r, c in zip(*np.nonzero(d2))
        ]
        deg_viol = []
        act_viol = []
        for r, c in zip(*np.nonzero(self.d)):
            gout, gin = self.generators[r], self.generators[c]
            if gout.degree != gin.degree - 1:
                deg_viol.append((gout.id, gin.id))
            if not (gout.action < gin.action):
                act_viol.append((gout.id, gin.id))
        ok = not (d2_viol or deg_viol or act_viol)
        return ValidationReport(ok, d2_viol, deg_viol, act_viol)

    # -- homology ---------------------------------------------------------------

    def degrees(self) -> List[int]:
        return sorted({g.degree for g in self.generators})

    def _degree_indices(self, k: int) -> np.ndarray:
        return np.array(
            [i for i, g in enumerate(self.generators) if g.degree == k], dtype=int
        )

    def boundary_matrix(self, k: int) -> np.ndarray:
        """The block of d mapping degree-k generators to degree k-1."""
        rows = self._degree_indices(k - 1)
        cols = self._degree_indices(k)
        if len(rows) == 0 or len(cols) == 0:
            return np.zeros((len(rows), len(cols)), dtype=np.uint8)
        return self.d[np.ix_(rows, cols)]

    def homology(self) -> Dict[int, int]:
        """dim ker d_k - rank d_{k+1} per degree k (zero entries omitted)."""
        out: Dict[int, int] = {}
        for k in self.degrees():
            nk = len(self._degree_indices(k))
            rk = gf2_rank(self.boundary_matrix(k))
            rk1 = gf2_rank(self.boundary_matrix(k + 1))
            dim = nk - rk - rk1
            if dim:
                out[k] = dim
        return out

    # -- filtration --------------------------------------------------------------

    def subquotient(self, a: float, b: float = np.inf) -> "FilteredZ2Complex":
        """Generators with action in (a, b]; differential restricted and
        projected.  Well defined because the action decrease is strict."""
        if not a < b:
            raise DimensionMismatchError(f"need a < b, got a={a}, b={b}")
        keep = [i for i, g in enumerate(self.generators) if a < g.action <= b]
        gens = [self.generators[i] for i in keep]
        sub = FilteredZ2Complex(gens, [])
        if keep:
            sub.d = self.d[np.ix_(keep, keep)].copy()
        return sub

    # -- serialization ------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "schema": "v1",
            "generators": [
                {"id": g.id, "degree": g.degree, "action": g.action}
                for g in self.generators
            ],
            "differential": [list(e) for e in self.entries()],
        }

    @staticmethod
    def from_json(obj: dict) -> "FilteredZ2Complex":
        gens = [
            Generator(g["id"], int(g["degree"]), float(g["action"]))
            for g in obj["generators"]
        ]
        return FilteredZ2Complex(gens, [tuple(e) for e in obj["differential"]])

    def direct_sum(self, other: "FilteredZ2Complex") -> "FilteredZ2Complex":
        gens = self.generators + [
            Generator(g.id, g.degree, g.action) for g in other.generators
        ]
        c = FilteredZ2Complex(gens, [])
        n1 = len(self.generators)
        c.d[:n1, :n1] = self.d
        c.d[n1:, n1:] = other.d
        return c


def validate_complex(c: FilteredZ2Complex) -> ValidationReport:
    return c.validate()


def homology(c: FilteredZ2Complex) -> Dict[int, int]:
    rep = c.validate()
    if not rep.ok:
        raise DimensionMismatchError("complex fails validation; run validate_complex")
    return c.homology()


def filtration_subquotient(c: FilteredZ2Complex, a: float, b: float = np.inf
                           ) -> FilteredZ2Complex:
    return c.subquotient(a, b)


# ---------------------------------------------------------------------------
# Chain maps
# ---------------------------------------------------------------------------


class ChainMap:
    """A degree-preserving GF(2) map of filtered complexes."""

    def __init__(self, source: FilteredZ2Complex, target: FilteredZ2Complex,
                 entries: Sequence[Tuple[str, str]], monotone: bool = False):
        self.source = source
        self.target = target
        self.monotone = monotone
        self.matrix = np.zeros(
            (len(target.generators), len(source.generators)), dtype=np.uint8
        )
        for tgt_id, src_id in entries:
            self.matrix[target.index[tgt_id], source.index[src_id]] ^= 1

    @staticmethod
    def identity(c: FilteredZ2Complex) -> "ChainMap":
        m = ChainMap(c, c, [])
        m.matrix = np.eye(len(c.generators), dtype=np.uint8)
        return m

    @staticmethod
    def from_matrix(source, target, matrix, monotone=False) -> "ChainMap":
        m = ChainMap(source, target, [], monotone)
        matrix = np.asarray(matrix, dtype=np.uint8) % 2
        if matrix.shape != m.matrix.shape:
            raise ShapeMismatchError(
                f"chain map shape {matrix.shape} does not match "
                f"({len(target.generators)}, {len(source.generators)})"
            )
        m.matrix = matrix
        return m

    def validate(self) -> None:
        for r, c in zip(*np.nonzero(self.matrix)):
            gt, gs = self.target.generators[r], self.source.generators[c]
            if gt.degree != gs.degree:
                raise ShapeMismatchError(
                    f"entry ({gt.id}, {gs.id}) does not preserve degree"
                )
            if self.monotone and gt.action > gs.action:
                raise ShapeMismatchError(
                    f"monotone map increases action on ({gt.id}, {gs.id})"
                )
        lhs = gf2_matmul(self.target.d, self.matrix)
        rhs = gf2_matmul(self.matrix, self.source.d)
        if np.any(lhs != rhs):
            raise ShapeMismatchError("map does not commute with the differentials")

    def compose(self, first: "ChainMap") -> "ChainMap":
        """self o first."""
        if first.target is not self.source and (
            len(first.target.generators) != len(self.source.generators)
        ):
            raise ShapeMismatchError("maps are not composable")
        out = ChainMap(first.source, self.target, [],
                       monotone=self.monotone and first.monotone)
        out.matrix = gf2_matmul(self.matrix, first.matrix)
        return out

    def to_json(self) -> dict:
        entries = [
            [self.target.generators[r].id, self.source.generators[c].id]
            for r, c in zip(*np.nonzero(self.matrix))
        ]
        return {
            "schema": "v1",
            "source": self.source.to_json(),
            "target": self.target.to_json(),
            "entries": entries,
            "monotone": self.monotone,
        }

    @staticmethod
    def from_json(obj: dict) -> "ChainMap":
        src = FilteredZ2Complex.from_json(obj["source"])
        tgt = FilteredZ2Complex.from_json(obj["target"])
        return ChainMap(src, tgt, [tuple(e) for e in obj["entries"]],
                        obj.get("monotone", False))


def check_square(psi_i: ChainMap, psi_ip1: ChainMap, phi_m: ChainMap,
                 phi_handle: ChainMap) -> bool:
    """Commutativity psi_{i+1} o phi_M = phi_handle o psi_i over GF(2)."""
    left = psi_ip1.compose(phi_m)
    right = phi_handle.compose(psi_i)
    if left.matrix.shape != right.matrix.shape:
        raise ShapeMismatchError("square sides have different shapes")
    return bool(np.all(left.matrix == right.matrix))


# ---------------------------------------------------------------------------
# Directed systems and direct limits
# ---------------------------------------------------------------------------


class DirectedSystem:
    """A finite chain of graded GF(2) spaces with degree-preserving maps.

    ``stages[i]`` maps degree -> dimension; ``maps[i]`` maps degree -> a
    (dim_{i+1}(deg) x dim_i(deg)) matrix, one map per consecutive pair.
    Optional ``long_maps[(i, j)]`` are checked against the composition of the
    consecutive maps (coherence).
    """

    def __init__(self, stages: Sequence[Dict[int, int]],
                 maps: Sequence[Dict[int, np.ndarray]],
                 long_maps: Optional[Dict[Tuple[int, int], Dict[int, np.ndarray]]] = None):
        if len(maps) != len(stages) - 1:
            raise ShapeMismatchError("need exactly one map per consecutive pair")
        self.stages = [dict(s) for s in stages]
        self.maps = []
        for i, m in enumerate(maps):
            checked: Dict[int, np.ndarray] = {}
            for deg in set(self.stages[i]) | set(self.stages[i + 1]):
                d_in = self.stages[i].get(deg, 0)
                d_out = self.stages[i + 1].get(deg, 0)
                mat = np.asarray(m.get(deg, np.zeros((d_out, d_in))), dtype=np.uint8) % 2
                if mat.size == 0:
                    mat = mat.reshape(d_out, d_in) if 0 in (d_out, d_in) else mat
                if mat.shape != (d_out, d_in):
                    raise ShapeMismatchError(
                        f"map {i}: degree {deg} needs shape {(d_out, d_in)}, "
                        f"got {mat.shape}"
                    )
                checked[deg] = mat
            self.maps.append(checked)
        self.long_maps = long_maps or {}

    def degrees(self) -> List[int]:
        out = set()
        for s in self.stages:
            out |= set(s)
        return sorted(out)

    def composed(self, i: int, j: int, degree: int) -> np.ndarray:
        """The composite transition stage i -> stage j in one degree."""
        if not 0 <= i <= j < len(self.stages):
            raise ShapeMismatchError("invalid stage range")
        dim_i = self.stages[i].get(degree, 0)
        acc = np.eye(dim_i, dtype=np.uint8)
        for s in range(i, j):
            acc = gf2_matmul(self.maps[s].get(
                degree, np.zeros((self.stages[s + 1].get(degree, 0),
                                  self.stages[s].get(degree, 0)))), acc)
        return acc

    def validate(self) -> None:
        for (i, j), by_deg in self.long_maps.items():
            for deg, mat in by_deg.items():
                mat = np.asarray(mat, dtype=np.uint8) % 2
                if np.any(mat != self.composed(i, j, deg)):
                    raise IncoherentSystemError(
                        f"long map {i}->{j} in degree {deg} does not equal the "
                        "composition of the consecutive maps"
                    )

    def subsampled(self, indices: Sequence[int]) -> "DirectedSystem":
        """The system restricted to a subchain of stages (cofinal if it
        contains the last stage)."""
        idx = sorted(indices)
        stages = [self.stages[i] for i in idx]
        maps = []
        for a, b in zip(idx, idx[1:]):
            maps.append({deg: self.composed(a, b, deg) for deg in self.degrees()})
        return DirectedSystem(stages, maps)

    def to_json(self) -> dict:
        return {
            "schema": "v1",
            "stages": [{str(d): v for d, v in s.items()} for s in self.stages],
            "maps": [
                {str(d): m.tolist() for d, m in mp.items()} for mp in self.maps
            ],
        }

    @staticmethod
    def from_json(obj: dict) -> "DirectedSystem":
        stages = [{int(d): int(v) for d, v in s.items()} for s in obj["stages"]]
        maps = [
            {int(d): np.asarray(m, dtype=np.uint8) for d, m in mp.items()}
            for mp in obj["maps"]
        ]
        return DirectedSystem(stages, maps)


@dataclass
class DirectLimitResult:
    dims: Dict[int, int]
    stabilized: Dict[int, bool]
    finite_quotient_dims: Dict[int, int]

    def to_json(self) -> dict:
        return {
            "schema": "v1",
            "dims": {str(d): v for d, v in self.dims.items()},
            "stabilized": {str(d): v for d, v in self.stabilized.items()},
            "finite_quotient_dims": {
                str(d): v for d, v in self.finite_quotient_dims.items()
            },
        }


def direct_limit(sys: DirectedSystem, window: int = 3) -> DirectLimitResult:
    """Direct limit dimensions per degree.

    Two computations are reported.  ``finite_quotient_dims`` is the literal
    quotient of the direct sum of the given stages by the span of
    embed_{i+1}(T_i v) - embed_i(v) over all pairs inside the window (for the
    finite chain this always leaves the last stage untouched).  When the tail
    of the system is stable -- the last ``window`` stages have equal
    dimensions and identical matrices -- the infinite system it extrapolates
    to has limit equal to the eventual rank of the repeated map, and that
    value is reported in ``dims``; otherwise ``dims`` falls back to the
    finite quotient.
    """
    sys.validate()
    dims: Dict[int, int] = {}
    stab: Dict[int, bool] = {}
    finite: Dict[int, int] = {}
    n_stages = len(sys.stages)
    for deg in sys.degrees():
        sizes = [s.get(deg, 0) for s in sys.stages]
        total = sum(sizes)
        offs = np.cumsum([0] + sizes)
        rels = []
        for i in range(n_stages - 1):
            t = sys.maps[i].get(deg, np.zeros((sizes[i + 1], sizes[i])))
            for col in range(sizes[i]):
                v = np.zeros(total, dtype=np.uint8)
                v[offs[i] + col] = 1
                v[offs[i + 1] : offs[i + 1] + sizes[i + 1]] ^= t[:, col]
                rels.append(v)
        rank = gf2_rank(np.array(rels, dtype=np.uint8)) if rels else 0
        fin = total - rank
        finite[deg] = fin

        tail_ok = n_stages >= window and len(set(sizes[-window:])) == 1
        if tail_ok and n_stages >= window:
            tail_maps = [
                sys.maps[i].get(deg, np.zeros((sizes[i + 1], sizes[i])))
                for i in range(n_stages - window, n_stages - 1)
            ]
            if tail_maps:
                t0 = tail_maps[0]
                tail_ok = all(
                    m.shape == t0.shape and np.all(m == t0) for m in tail_maps
                )
            else:
                tail_ok = window == 1
        if tail_ok:
            t0 = sys.maps[-1].get(deg, np.zeros((sizes[-1], sizes[-1]))) \
                if n_stages >= 2 else np.zeros((sizes[-1], sizes[-1]))
            val = gf2_eventual_rank(t0) if sizes[-1] else 0
            dims[deg] = val
            stab[deg] = True
        else:
            dims[deg] = fin
            stab[deg] = False
    return DirectLimitResult(dims, stab, finite)


# ---------------------------------------------------------------------------
# Model builders
# ---------------------------------------------------------------------------


def identity_system(length: int, degree: int = 0) -> DirectedSystem:
    stages = [{degree: 1} for _ in range(length)]
    maps = [{degree: np.array([[1]], dtype=np.uint8)} for _ in range(length - 1)]
    return DirectedSystem(stages, maps)


def zero_map_system(length: int, degree: int = 0) -> DirectedSystem:
    stages = [{degree: 1} for _ in range(length)]
    maps = [{degree: np.array([[0]], dtype=np.uint8)} for _ in range(length - 1)]
    return DirectedSystem(stages, maps)


def model_flow_system(n: int, stages: int) -> DirectedSystem:
    """Stage k holds one generator in degree n*k; degree-preserving
    transitions are forced to zero between distinct degrees."""
    st = [{n * k: 1} for k in range(stages)]
    maps = [dict() for _ in range(stages - 1)]
    return DirectedSystem(st, maps)
