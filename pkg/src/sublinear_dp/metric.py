"""Metric spaces, datasets, center sets and average clustering costs."""

from __future__ import annotations

import csv
import enum
import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from sublinear_dp.errors import (
    EmptyCenterSet,
    EmptyDataset,
    InvalidMetric,
    InvalidPointRef,
)

TRIANGLE_TOL = 1e-9
# Full triangle-inequality validation is cubic; only done by default up to here.
VALIDATE_MAX_N = 512


class SpaceKind(enum.Enum):
    EXPLICIT_MATRIX = "explicit_matrix"
    EUCLIDEAN = "euclidean"


class CenterRole(enum.Enum):
    OPTIMAL = "optimal"
    BLACK_BOX_OUTPUT = "black_box_output"
    CANDIDATE = "candidate"


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.flags.writeable = False
    return a


def euclidean_distances(a, b):
    """Pairwise L2 distances between the rows of ``a`` and ``b``."""
    a = np.atleast_2d(np.asarray(a, dtype=np.float64))
    b = np.atleast_2d(np.asarray(b, dtype=np.float64))
    return cdist(a, b)


def _max_pairwise(points, block=1024):
    n = len(points)
    best = 0.0
    for start in range(0, n, block):
        chunk = euclidean_distances(points[start:start + block], points[start:])
        best = max(best, float(chunk.max()))
    return best


def validate_distance_matrix(dist, check_triangle=True, tol=TRIANGLE_TOL):
    """Raise :class:`InvalidMetric` unless ``dist`` is a metric on its rows."""
    dist = np.asarray(dist, dtype=np.float64)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise InvalidMetric(f"distance matrix must be square, got {dist.shape}")
    if dist.shape[0] < 1:
        raise InvalidMetric("metric space needs at least one point")
    if not np.all(np.isfinite(dist)):
        raise InvalidMetric("distances must be finite")
    if np.any(dist < 0):
        raise InvalidMetric("distances must be nonnegative")
    if np.any(np.diag(dist) != 0):
        raise InvalidMetric("diagonal must be zero")
    if not np.allclose(dist, dist.T, rtol=0.0, atol=tol):
        raise InvalidMetric("distance matrix must be symmetric")
    if check_triangle:
        for mid in range(dist.shape[0]):
            via = dist[:, mid][:, None] + dist[mid, :][None, :]
            if np.any(dist > via + tol):
                i, j = np.argwhere(dist > via + tol)[0]
                raise InvalidMetric(
                    f"triangle inequality violated: d({i},{j}) > d({i},{mid}) + d({mid},{j})"
                )


class MetricSpace:
    """A finite ground set V with a distance oracle.

    Build with :meth:`from_matrix` (arbitrary finite metric) or
    :meth:`from_points` (points of R^d under the L2 norm). Instances are
    immutable; the diameter is computed once and cached.
    """

    def __init__(self, kind, *, distances=None, points=None, labels=None):
        self.kind = kind
        self._distances = None if distances is None else _frozen(distances)
        self._points = None if points is None else _frozen(points)
        size = len(self._distances) if self._distances is not None else len(self._points)
        if size < 1:
            raise InvalidMetric("metric space needs at least one point")
        self.labels = tuple(labels) if labels is not None else tuple(str(i) for i in range(size))

    @classmethod
    def from_matrix(cls, distances, labels=None, validate=None):
        distances = np.asarray(distances, dtype=np.float64)
        if validate is None:
            validate = distances.shape[0] <= VALIDATE_MAX_N
        validate_distance_matrix(distances, check_triangle=validate)
        return cls(SpaceKind.EXPLICIT_MATRIX, distances=distances, labels=labels)

    @classmethod
    def from_points(cls, points, labels=None):
        points = np.asarray(points, dtype=np.float64)
        if points.ndim == 1:
            points = points[:, None]
        if points.ndim != 2 or points.shape[1] < 1:
            raise InvalidMetric("points must be an (n, d) array with d >= 1")
        if not np.all(np.isfinite(points)):
            raise InvalidMetric("coordinates must be finite")
        return cls(SpaceKind.EUCLIDEAN, points=points, labels=labels)

    @property
    def is_euclidean(self):
        return self.kind is SpaceKind.EUCLIDEAN

    @property
    def n(self):
        return len(self.labels)

    def __len__(self):
        return self.n

    @property
    def dimension(self):
        return self._points.shape[1] if self.is_euclidean else None

    @property
    def points(self):
        return self._points

    @property
    def distances(self):
        return self._distances

    @functools.cached_property
    def diameter(self):
        if self.is_euclidean:
            return _max_pairwise(self._points)
        return float(self._distances.max())

    def check_index(self, i):
        if isinstance(i, (bool, np.bool_)) or not isinstance(i, (int, np.integer)):
            raise InvalidPointRef(f"point reference must be an integer index, got {i!r}")
        if not 0 <= i < self.n:
            raise InvalidPointRef(f"point index {i} out of range for |V| = {self.n}")
        return int(i)

    def coords(self, ref):
        """Coordinates of a point reference (index into V, or a vector)."""
        if not self.is_euclidean:
            raise InvalidPointRef("coordinates exist only for Euclidean spaces")
        if isinstance(ref, (int, np.integer)) and not isinstance(ref, (bool, np.bool_)):
            return self._points[self.check_index(ref)]
        vec = np.asarray(ref, dtype=np.float64).reshape(-1)
        if vec.shape[0] != self.dimension:
            raise InvalidPointRef(f"expected a {self.dimension}-dimensional point, got {vec.shape[0]}")
        return vec

    def pairwise(self, rows, cols):
        """Distance block between two lists of point references.

        For explicit matrices both are index arrays; for Euclidean spaces
        either may also be an (m, d) coordinate array.
        """
        if self.is_euclidean:
            return euclidean_distances(self._as_coords(rows), self._as_coords(cols))
        r = self._as_indices(rows)
        c = self._as_indices(cols)
        return self._distances[np.ix_(r, c)]

    def _as_indices(self, refs):
        idx = np.asarray(refs)
        if idx.ndim != 1 or (idx.size and not np.issubdtype(idx.dtype, np.integer)):
            raise InvalidPointRef("expected a 1-d array of point indices")
        idx = idx.astype(np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.n):
            raise InvalidPointRef(f"point index out of range for |V| = {self.n}")
        return idx

    def _as_coords(self, refs):
        arr = np.asarray(refs)
        if arr.ndim == 1 and (arr.size == 0 or np.issubdtype(arr.dtype, np.integer)):
            return self._points[self._as_indices(arr)]
        arr = np.atleast_2d(arr.astype(np.float64))
        if arr.shape[1] != self.dimension:
            raise InvalidPointRef(f"expected {self.dimension}-dimensional points")
        return arr

    def scaled(self, factor):
        """Copy of the space with every distance multiplied by ``factor``."""
        if self.is_euclidean:
            return MetricSpace(SpaceKind.EUCLIDEAN, points=self._points * factor, labels=self.labels)
        return MetricSpace(SpaceKind.EXPLICIT_MATRIX, distances=self._distances * factor, labels=self.labels)

    def __repr__(self):
        extra = f", d={self.dimension}" if self.is_euclidean else ""
        return f"MetricSpace({self.kind.value}, n={self.n}{extra})"


@dataclass(frozen=True, eq=False)
class Dataset:
    """A multiset of members of ``space``, stored as point indices.

    Duplicates are allowed and each copy contributes to the cost.
    """

    space: MetricSpace
    members: np.ndarray

    def __post_init__(self):
        members = np.asarray(self.members)
        if members.size == 0:
            members = members.reshape(0).astype(np.int64)
        members = self.space._as_indices(members)
        members = members.copy()
        members.flags.writeable = False
        object.__setattr__(self, "members", members)

    @classmethod
    def full(cls, space):
        return cls(space, np.arange(space.n))

    def __len__(self):
        return len(self.members)

    @property
    def size(self):
        return len(self.members)

    @functools.cached_property
    def _distinct(self):
        idx, counts = np.unique(self.members, return_counts=True)
        return idx, counts.astype(np.float64)

    def distinct(self):
        """(distinct member indices, multiplicities), sorted by index."""
        return self._distinct

    def coords(self):
        return self.space.points[self.members]

    @functools.cached_property
    def diameter(self):
        idx, _ = self._distinct
        if len(idx) == 0:
            return 0.0
        if self.space.is_euclidean:
            return _max_pairwise(self.space.points[idx])
        return float(self.space.distances[np.ix_(idx, idx)].max())

    def subset(self, mask):
        return Dataset(self.space, self.members[np.asarray(mask, dtype=bool)])

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and other.space is self.space
            and np.array_equal(other.members, self.members)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class CenterSet:
    """k centers plus a tag saying where they came from.

    ``indices`` are positions in V (always set for explicit matrices). For
    Euclidean spaces ``coords`` holds the actual centers, which may be any
    points of R^d; ``indices`` is then optional.
    """

    indices: tuple | None = None
    coords: np.ndarray | None = None
    role: CenterRole = CenterRole.CANDIDATE
    extra: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.indices is not None:
            object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))
            if len(set(self.indices)) != len(self.indices):
                raise InvalidPointRef("center set contains duplicate centers")
        if self.coords is not None:
            c = np.array(self.coords, dtype=np.float64)
            if c.ndim == 1:
                c = c[:, None]
            c.flags.writeable = False
            object.__setattr__(self, "coords", c)
            if len(np.unique(c, axis=0)) != len(c):
                raise InvalidPointRef("center set contains duplicate centers")
        if self.k == 0:
            raise EmptyCenterSet("center set is empty")

    @classmethod
    def from_indices(cls, space, indices, role=CenterRole.CANDIDATE):
        indices = [space.check_index(int(i)) for i in indices]
        coords = space.points[indices] if space.is_euclidean else None
        return cls(indices=tuple(indices), coords=coords, role=role)

    @classmethod
    def from_coords(cls, coords, role=CenterRole.CANDIDATE):
        return cls(coords=coords, role=role)

    @property
    def k(self):
        if self.coords is not None:
            return len(self.coords)
        return 0 if self.indices is None else len(self.indices)

    def __len__(self):
        return self.k

    def refs(self, space):
        """Point references usable with :meth:`MetricSpace.pairwise`."""
        if space.is_euclidean:
            return self.coords if self.coords is not None else space.points[list(self.indices)]
        if self.indices is None:
            raise InvalidPointRef("metric-space centers must be members of V")
        return np.asarray(self.indices, dtype=np.int64)

    def to_json(self):
        out = {"role": self.role.value}
        if self.indices is not None:
            out["indices"] = list(self.indices)
        if self.coords is not None:
            out["coords"] = self.coords.tolist()
        return out

    def __eq__(self, other):
        if not isinstance(other, CenterSet):
            return NotImplemented
        same_coords = (self.coords is None and other.coords is None) or (
            self.coords is not None
            and other.coords is not None
            and np.array_equal(self.coords, other.coords)
        )
        return self.indices == other.indices and same_coords and self.role == other.role

    __hash__ = None


def distance(space, a, b):
    """Distance between two point references of ``space``."""
    if space.is_euclidean:
        return float(np.linalg.norm(space.coords(a) - space.coords(b)))
    return float(space.distances[space.check_index(a), space.check_index(b)])


def diameter(space):
    return space.diameter


def center_costs(dataset, centers, power=1):
    """(k, u) cost block between the centers and the distinct dataset members."""
    idx, _ = dataset.distinct()
    block = dataset.space.pairwise(centers.refs(dataset.space), idx)
    return block ** 2 if power == 2 else block


def _avg_cost(dataset, centers, power):
    if dataset.size == 0:
        raise EmptyDataset("cost is undefined for an empty dataset")
    if centers.k == 0:
        raise EmptyCenterSet("center set is empty")
    _, weights = dataset.distinct()
    block = center_costs(dataset, centers, power)
    return float(block.min(axis=0) @ weights) / dataset.size


def avg_cost_median(dataset, centers):
    """Mean distance from each dataset member to its nearest center."""
    return _avg_cost(dataset, centers, 1)


def avg_cost_means(dataset, centers):
    """Mean squared distance from each dataset member to its nearest center."""
    return _avg_cost(dataset, centers, 2)


def nearest_center(space, x, centers):
    """(position of nearest center, distance); lowest position wins ties."""
    if centers is None or centers.k == 0:
        raise EmptyCenterSet("center set is empty")
    if space.is_euclidean:
        row = euclidean_distances(space.coords(x)[None, :], centers.refs(space))[0]
    else:
        row = space.distances[space.check_index(x), list(centers.indices)]
    i = int(np.argmin(row))
    return i, float(row[i])


def load_points_csv(path):
    """Euclidean space from a CSV with one point per row (optional header)."""
    rows = _read_csv(path)
    try:
        data = [[float(v) for v in r] for r in rows]
    except ValueError:
        data = [[float(v) for v in r] for r in rows[1:]]
    if not data:
        raise InvalidMetric(f"{path}: no points")
    if len({len(r) for r in data}) != 1:
        raise InvalidMetric(f"{path}: rows have differing dimensions")
    return MetricSpace.from_points(np.array(data))


def load_matrix_csv(path, validate=None):
    """Explicit metric from a CSV distance matrix with a header row of labels."""
    rows = _read_csv(path)
    if len(rows) < 2:
        raise InvalidMetric(f"{path}: expected a header row and at least one row")
    labels = [s.strip() for s in rows[0]]
    body = rows[1:]
    # Tolerate a leading label column.
    if len(body[0]) == len(labels) + 1:
        body = [r[1:] for r in body]
    try:
        dist = np.array([[float(v) for v in r] for r in body])
    except ValueError as exc:
        raise InvalidMetric(f"{path}: {exc}") from exc
    if dist.shape != (len(labels), len(labels)):
        raise InvalidMetric(f"{path}: matrix shape {dist.shape} does not match {len(labels)} labels")
    return MetricSpace.from_matrix(dist, labels=labels, validate=validate)


def _read_csv(path):
    with open(path, newline="") as fh:
        return [r for r in csv.reader(fh) if r and any(s.strip() for s in r)]


def as_dataset(space, members: Sequence[int] | None = None):
    if members is None:
        return Dataset.full(space)
    return Dataset(space, np.asarray(members, dtype=np.int64))
