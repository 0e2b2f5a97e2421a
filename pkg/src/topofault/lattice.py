"""Periodic cubic chain complex and its dual.

Cells are addressed by their midpoints on the doubled integer grid: a cell
with coordinates ``(x, y, z)`` in ``{0, ..., 2*size-1}`` has dimension equal
to the number of odd coordinates.  Under this addressing the dual complex is
the same grid shifted by ``(1, 1, 1)``, so duality is a coordinate shift and
the boundary map is pure arithmetic.

The z axis plays the role of simulated time throughout the package.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator

import numpy as np
import scipy.sparse as sp

TIME_AXIS = 2


class InvalidSpecError(ValueError):
    pass


class Topology(str, enum.Enum):
    PERIODIC = "periodic"


@dataclass(frozen=True)
class LatticeSpec:
    size_x: int
    size_y: int
    size_z: int
    topology: Topology = Topology.PERIODIC

    def __post_init__(self) -> None:
        for name in ("size_x", "size_y", "size_z"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise InvalidSpecError(f"{name} must be a positive integer, got {value!r}")
        if Topology(self.topology) is not Topology.PERIODIC:
            raise InvalidSpecError(f"unsupported topology {self.topology!r}")

    @classmethod
    def cubic(cls, size: int) -> "LatticeSpec":
        return cls(size, size, size)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (self.size_x, self.size_y, self.size_z)


@dataclass(frozen=True, order=True)
class Cell:
    coords: tuple[int, int, int]

    @property
    def dim(self) -> int:
        return sum(c & 1 for c in self.coords)

    def __iter__(self) -> Iterator[int]:
        return iter(self.coords)


class Lattice3D:
    """Immutable indexed periodic complex.

    Cell ids are linear indices into the doubled grid, so every dimension
    shares one id space of size ``8 * size_x * size_y * size_z``.
    """

    def __init__(self, spec: LatticeSpec):
        self.spec = spec
        self.shape = tuple(2 * s for s in spec.sizes)
        nx_, ny_, nz_ = self.shape
        self.n_cells = nx_ * ny_ * nz_
        grid = np.indices(self.shape).reshape(3, -1).T  # id -> coords, x fastest below
        # linear id = x + nx*(y + ny*z)
        ids = grid[:, 0] + nx_ * (grid[:, 1] + ny_ * grid[:, 2])
        order = np.argsort(ids)
        self._coords = grid[order].astype(np.int64)
        self._dims = (self._coords & 1).sum(axis=1)
        self._boundary = self._build_boundary()
        self._mirror = self.ids_of(1 - self._coords)
        self._by_dim = [np.flatnonzero(self._dims == k) for k in range(4)]

    def __repr__(self) -> str:
        return f"Lattice3D({self.spec.size_x}x{self.spec.size_y}x{self.spec.size_z})"

    # -- indexing ---------------------------------------------------------
    def id_of(self, coords: Iterable[int]) -> int:
        x, y, z = (int(c) % n for c, n in zip(coords, self.shape))
        return x + self.shape[0] * (y + self.shape[1] * z)

    def ids_of(self, coords: np.ndarray) -> np.ndarray:
        c = np.mod(np.asarray(coords, dtype=np.int64), self.shape)
        return c[..., 0] + self.shape[0] * (c[..., 1] + self.shape[1] * c[..., 2])

    def coords_of(self, cell_id: int) -> tuple[int, int, int]:
        return tuple(int(v) for v in self._coords[cell_id])

    def cell(self, cell_id: int) -> Cell:
        return Cell(self.coords_of(cell_id))

    def dim_of(self, cell_id: int) -> int:
        return int(self._dims[cell_id])

    @property
    def coords(self) -> np.ndarray:
        return self._coords

    def cell_ids(self, dim: int) -> np.ndarray:
        """Sorted cell ids of one dimension."""
        return self._by_dim[dim]

    def count(self, dim: int) -> int:
        return len(self._by_dim[dim])

    def cells(self, dim: int) -> list[Cell]:
        return [self.cell(i) for i in self._by_dim[dim]]

    def axis_of_edge(self, cell_id: int) -> int:
        """Axis along which an edge (1-cell) points."""
        odd = np.flatnonzero(self._coords[cell_id] & 1)
        if len(odd) != 1:
            raise ValueError(f"cell {self.coords_of(cell_id)} is not an edge")
        return int(odd[0])

    # -- incidence --------------------------------------------------------
    def _build_boundary(self) -> sp.csr_matrix:
        rows, cols = [], []
        for axis in range(3):
            odd = np.flatnonzero(self._coords[:, axis] & 1)
            for step in (-1, 1):
                nb = self._coords[odd].copy()
                nb[:, axis] += step
                rows.append(self.ids_of(nb))
                cols.append(odd)
        rows = np.concatenate(rows)
        cols = np.concatenate(cols)
        data = np.ones(len(rows), dtype=np.uint8)
        m = sp.csr_matrix((data, (rows, cols)), shape=(self.n_cells, self.n_cells))
        # size-1 axes make opposite facets coincide; keep the mod-2 incidence
        m.data %= 2
        m.eliminate_zeros()
        return m

    @property
    def boundary_matrix(self) -> sp.csr_matrix:
        """Sparse mod-2 boundary on the full id space (column = cell, row = facet)."""
        return self._boundary

    @cached_property
    def coboundary_matrix(self) -> sp.csr_matrix:
        return self._boundary.T.tocsr()

    @cached_property
    def _boundary_csc(self) -> sp.csc_matrix:
        return self._boundary.tocsc()

    def facets(self, cell_id: int) -> np.ndarray:
        return np.sort(self._boundary_csc[:, [cell_id]].indices)

    def cofacets(self, cell_id: int) -> np.ndarray:
        return np.sort(self._boundary[[cell_id], :].indices)

    def dual_ids(self, ids: np.ndarray) -> np.ndarray:
        return self._mirror[np.asarray(ids)]

    def dump(self) -> str:
        """Line-oriented debug dump, one cell per line: ``dim x y z``."""
        lines = [f"{d} {x} {y} {z}" for (x, y, z), d in zip(self._coords.tolist(), self._dims.tolist())]
        return "\n".join(lines) + "\n"


def build_lattice(spec: LatticeSpec) -> Lattice3D:
    return Lattice3D(spec)


@dataclass(frozen=True, eq=False)
class Chain:
    """Mod-2 chain of same-dimension cells, stored as a dense bit vector over cell ids."""

    lattice: Lattice3D
    dim: int
    bits: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        bits = np.asarray(self.bits, dtype=bool)
        if bits.shape != (self.lattice.n_cells,):
            raise ValueError("bit vector does not match the lattice")
        if bits.any() and np.any(self.lattice._dims[bits] != self.dim):
            raise ValueError(f"chain contains cells that are not of dimension {self.dim}")
        bits.flags.writeable = False
        object.__setattr__(self, "bits", bits)

    @classmethod
    def empty(cls, lattice: Lattice3D, dim: int) -> "Chain":
        return cls(lattice, dim, np.zeros(lattice.n_cells, dtype=bool))

    @classmethod
    def from_ids(cls, lattice: Lattice3D, dim: int, ids: Iterable[int]) -> "Chain":
        bits = np.zeros(lattice.n_cells, dtype=bool)
        for i in ids:
            bits[i] ^= True
        return cls(lattice, dim, bits)

    @classmethod
    def from_coords(cls, lattice: Lattice3D, coords: Iterable[Iterable[int]], dim: int | None = None) -> "Chain":
        coords = [tuple(c) for c in coords]
        if dim is None:
            if not coords:
                raise ValueError("cannot infer the dimension of an empty chain")
            dim = Cell(coords[0]).dim
        return cls.from_ids(lattice, dim, (lattice.id_of(c) for c in coords))

    @property
    def ids(self) -> np.ndarray:
        return np.flatnonzero(self.bits)

    def cells(self) -> set[Cell]:
        return {self.lattice.cell(i) for i in self.ids}

    def coord_set(self) -> set[tuple[int, int, int]]:
        return {self.lattice.coords_of(i) for i in self.ids}

    def __len__(self) -> int:
        return int(self.bits.sum())

    def __bool__(self) -> bool:
        return bool(self.bits.any())

    def __add__(self, other: "Chain") -> "Chain":
        if other.lattice is not self.lattice or other.dim != self.dim:
            raise ValueError("can only add chains of the same dimension on the same lattice")
        return Chain(self.lattice, self.dim, self.bits ^ other.bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Chain):
            return NotImplemented
        return other.lattice is self.lattice and other.dim == self.dim and np.array_equal(other.bits, self.bits)

    def __hash__(self) -> int:
        return hash((self.dim, self.bits.tobytes()))


def boundary(lattice: Lattice3D, c: Chain) -> Chain:
    if c.dim < 1:
        raise ValueError("the boundary of a 0-chain is undefined")
    out = (lattice.boundary_matrix @ c.bits.astype(np.uint8)) & 1
    return Chain(lattice, c.dim - 1, out.astype(bool))


def coboundary(lattice: Lattice3D, c: Chain) -> Chain:
    if c.dim > 2:
        raise ValueError("the coboundary of a 3-chain is undefined")
    out = (lattice.coboundary_matrix @ c.bits.astype(np.uint8)) & 1
    return Chain(lattice, c.dim + 1, out.astype(bool))


def dual(lattice: Lattice3D, c: Chain) -> Chain:
    """Map k-cells to (3-k)-cells by the point reflection x -> (1, 1, 1) - x.

    This is the (1, 1, 1) shift followed by an inversion of the grid.  It
    flips the parity of every coordinate, exchanges boundary and
    coboundary, and unlike the bare shift it is an involution.
    """
    bits = np.zeros(lattice.n_cells, dtype=bool)
    bits[lattice.dual_ids(c.ids)] = True
    return Chain(lattice, 3 - c.dim, bits)


def homology_class(lattice: Lattice3D, cycle: Chain) -> tuple[int, int, int]:
    """Winding parities of a 1-cycle along the three axes.

    Component ``a`` counts edges along axis ``a`` whose midpoint sits at
    doubled coordinate 1, i.e. the crossings of the plane between vertex
    layers 0 and 2.
    """
    if cycle.dim != 1:
        raise ValueError("homology_class expects a 1-chain")
    if boundary(lattice, cycle):
        raise ValueError("homology_class expects a cycle (empty boundary)")
    coords = lattice.coords[cycle.ids]
    out = []
    for axis in range(3):
        along = (coords[:, axis] & 1) == 1
        out.append(int(np.count_nonzero(along & (coords[:, axis] == 1)) & 1))
    return tuple(out)


def edge_crossing_matrix(lattice: Lattice3D) -> np.ndarray:
    """(3, n_edges) 0/1 matrix: row ``a`` marks the edges counted by homology component ``a``."""
    edges = lattice.cell_ids(1)
    coords = lattice.coords[edges]
    out = np.zeros((3, len(edges)), dtype=np.uint8)
    for axis in range(3):
        out[axis] = ((coords[:, axis] & 1) == 1) & (coords[:, axis] == 1)
    return out


def euler_characteristic(lattice: Lattice3D) -> int:
    return sum((-1) ** k * lattice.count(k) for k in range(4))


# -- 2+1D operation schedule ---------------------------------------------------


class Op(str, enum.Enum):
    HADAMARD = "Hadamard"
    ENTANGLING_PHASE = "EntanglingPhase"
    MEASURE = "Measure"
    PREPARE = "Prepare"


@dataclass(frozen=True)
class ScheduleEntry:
    time_step: int
    location: tuple[tuple[int, int], ...]
    op: Op


PERIOD = 6

# Sites of the 2D layer on the doubled grid, by parity class:
#   "h" (odd, even)  code qubit: x-edge / xz-face
#   "v" (even, odd)  code qubit: y-edge / yz-face
#   "A" (odd, odd)   syndrome qubit: xy-face (dual time-like edge)
#   "B" (even, even) syndrome qubit: z-edge (primal time-like edge)
# Each row is (time step, site kind, op, neighbour offset for Λ(Z) or None).
# Code qubits: two Λ(Z) with one syndrome type, H, two with the other, H.
# Syndrome qubits: four Λ(Z), measure, prepare.
ELEMENTARY_SCHEDULE: tuple[tuple[int, str, Op, tuple[int, int] | None], ...] = (
    (1, "A", Op.ENTANGLING_PHASE, (0, -1)),
    (2, "A", Op.ENTANGLING_PHASE, (0, 1)),
    (3, "A", Op.ENTANGLING_PHASE, (-1, 0)),
    (4, "A", Op.ENTANGLING_PHASE, (1, 0)),
    (5, "A", Op.MEASURE, None),
    (6, "A", Op.PREPARE, None),
    (4, "B", Op.ENTANGLING_PHASE, (-1, 0)),
    (5, "B", Op.ENTANGLING_PHASE, (1, 0)),
    (6, "B", Op.ENTANGLING_PHASE, (0, -1)),
    (1, "B", Op.ENTANGLING_PHASE, (0, 1)),
    (2, "B", Op.MEASURE, None),
    (3, "B", Op.PREPARE, None),
    (3, "h", Op.HADAMARD, None),
    (6, "h", Op.HADAMARD, None),
    (2, "v", Op.HADAMARD, None),
    (5, "v", Op.HADAMARD, None),
)

_SITE_OFFSET = {"A": (1, 1), "B": (0, 0), "h": (1, 0), "v": (0, 1)}


def schedule_2d(spec: LatticeSpec) -> list[ScheduleEntry]:
    """Per-step operations on the 2D layer obtained by turning z into time.

    Entangling gates are listed once, at the syndrome site, as a pair of
    sites.  Locations wrap periodically on the doubled grid.
    """
    nx_, ny_ = 2 * spec.size_x, 2 * spec.size_y
    out = []
    for cx, cy in itertools.product(range(spec.size_x), range(spec.size_y)):
        for t, kind, op, offset in ELEMENTARY_SCHEDULE:
            ox, oy = _SITE_OFFSET[kind]
            site = ((2 * cx + ox) % nx_, (2 * cy + oy) % ny_)
            if offset is None:
                loc = (site,)
            else:
                loc = (site, ((site[0] + offset[0]) % nx_, (site[1] + offset[1]) % ny_))
            out.append(ScheduleEntry(t, loc, op))
    out.sort(key=lambda e: (e.time_step, e.location, e.op.value))
    return out


class EdgeKind(str, enum.Enum):
    SPACELIKE = "spacelike"
    TIMELIKE = "timelike"


def map_operation(kind: EdgeKind | str, measurement: str, trailing: str = "X") -> str:
    """2+1D replacement for a cluster qubit given its measurement basis.

    Space-like edges group preparation, trailing time-like Λ(Z) and
    measurement; ``trailing`` is the basis of the qubit at the far end of
    that Λ(Z).  Time-like edges group preparation and measurement.
    """
    kind = EdgeKind(kind)
    measurement = _basis(measurement)
    if kind is EdgeKind.SPACELIKE:
        if _basis(trailing) == "Z":
            return f"P_{measurement}"
        table = {"X": "H", "X+Y": "H exp(i pi/8 Z)", "X-Y": "H exp(i pi/8 Z)", "Y": "H exp(i pi/4 Z)", "Z": "P_X"}
        return table[measurement]
    if measurement == "Z":
        return "I"
    return f"{{|+>, P_{measurement}}}"


def _basis(name: str) -> str:
    name = name.upper().replace(" ", "").removeprefix("P_")
    if name not in {"X", "Y", "Z", "X+Y", "X-Y"}:
        raise ValueError(f"unknown measurement basis {name!r}")
    return name
