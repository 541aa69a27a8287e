"""Exceedance counting per replicate and cluster-size estimation across replicates.

Counting is exact, not approximate, but avoids triangulating the whole
scanning window.

The inradius is half the nearest-neighbour distance, so both inradius kinds
are counted from neighbour queries. A large inradius needs the nucleus to be
alone in its 3x3 block of a grid of side ``v0 / sqrt(2)``, which leaves few
candidates to check exactly.

Every exceedance of a circumradius is attached to an empty open disk of
radius above ``v0``:

* Voronoi circumradius: the circumdisk of an incident Delaunay triangle,
  with the nucleus on its boundary;
* Delaunay circumradius: the triangle's own circumdisk, centred at the nucleus.

Such a disk contains a whole empty cell of a grid of side ``v0 / sqrt(2)``,
so only neighbourhoods of empty grid cells need to be triangulated. Outside
those neighbourhoods no cell can be an exceedance. Inside them, truncating
the process can only *increase* the circumradius, so a cell that is not
counted is truly not an exceedance; counted cells are checked to be interior
to the triangulated box.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted, column_or_1d

from .constants import CharacteristicKind
from .exceptions import DegenerateTheta, GuardViolation, InsufficientData
from .geometry import Rect, Triangulation
from .palm import PalmSample

SQRT2 = math.sqrt(2.0)
DEFAULT_K_MAX = 9
DEFAULT_SUBSAMPLES = 100


@dataclass
class ExceedanceRecord:
    replicate: int
    cluster_size: int
    nuclei: np.ndarray = field(repr=False)
    guard_ok: bool = True
    retries: int = 0
    conditioning_radius: float = math.nan


# -- screening -----------------------------------------------------------------


@dataclass(frozen=True)
class _Region:
    count: Rect
    bbox: Rect
    rho_max: float


def _empty_disk_regions(points: np.ndarray, window: Rect, radius: float, centered: bool) -> list[_Region]:
    """Regions that may hold nuclei attached to an empty disk of radius > ``radius``.

    ``centered`` selects whether the nucleus is the disk's center (reach
    ``rho_max``) or lies on its boundary (reach ``2 rho_max``).
    """
    h = radius / SQRT2
    nx = max(1, math.ceil(window.width / h))
    ny = max(1, math.ceil(window.height / h))
    hx, hy = window.width / nx, window.height / ny
    ix = np.clip(((points[:, 0] - window.xmin) / hx).astype(np.intp), 0, nx - 1)
    iy = np.clip(((points[:, 1] - window.ymin) / hy).astype(np.intp), 0, ny - 1)
    occ = np.bincount(ix * ny + iy, minlength=nx * ny).reshape(nx, ny)
    labels, n = ndimage.label(occ == 0, structure=np.ones((3, 3), dtype=bool))
    if n == 0:
        return []
    hmax = max(hx, hy)
    regions = []
    for sx, sy in ndimage.find_objects(labels):
        bbox = Rect(
            window.xmin + sx.start * hx,
            window.ymin + sy.start * hy,
            window.xmin + sx.stop * hx,
            window.ymin + sy.stop * hy,
        )
        # An empty disk of radius rho holds a full block of cells whose bounding
        # box has side >= sqrt(2) rho - 2 h.
        rho_max = (max(bbox.width, bbox.height) + 2.0 * hmax) / SQRT2
        reach = rho_max if centered else 2.0 * rho_max
        regions.append(_Region(bbox.pad(reach), bbox, rho_max))
    return regions


def _box_points(points: np.ndarray, box: Rect) -> np.ndarray:
    return np.flatnonzero(box.contains(points))


def _count_in_box(kind, points, idx, box: Rect, count_rect: Rect, v0: float):
    """Counted keys, nucleus coordinates, and whether every counted cell is interior."""
    pts = points[idx]
    cand = count_rect.contains(pts)
    tri = Triangulation(pts)
    if kind is CharacteristicKind.CIRCUMRADIUS_VORONOI:
        hit = cand & (tri.voronoi_circumradii > v0)
        sel = np.flatnonzero(hit)
        ok = bool(np.all(tri.vertex_interior_mask(box)[sel]))
        return {int(idx[j]): pts[j] for j in sel}, ok

    centers, radii = tri.circumcenters, tri.circumradii
    hit = count_rect.contains(centers) & (radii > v0)
    sel = np.flatnonzero(hit)
    ok = bool(np.all(tri.triangle_interior_mask(box)[sel]))
    keys = [tuple(sorted(int(v) for v in idx[tri.triangles[t]])) for t in sel]
    return {k: centers[t] for k, t in zip(keys, sel)}, ok


def _count_large_inradius(points, v0, q_window: Rect, guard: Rect):
    # Any two points of a 3x3 block of cells of side <= v0/sqrt(2) are within 2*v0.
    h = v0 / SQRT2
    nx = max(1, math.ceil(guard.width / h))
    ny = max(1, math.ceil(guard.height / h))
    ix = np.clip(((points[:, 0] - guard.xmin) / (guard.width / nx)).astype(np.intp), 0, nx - 1)
    iy = np.clip(((points[:, 1] - guard.ymin) / (guard.height / ny)).astype(np.intp), 0, ny - 1)
    occ = np.bincount(ix * ny + iy, minlength=nx * ny).reshape(nx, ny)
    block = ndimage.convolve(occ, np.ones((3, 3), dtype=occ.dtype), mode="constant")
    cand = np.flatnonzero((block[ix, iy] == 1) & q_window.contains(points))
    hits = {}
    reach = 2.0 * v0
    for i in cand.tolist():
        x = points[i]
        near = np.abs(points - x).max(axis=1) <= reach
        near[i] = False
        if np.any(np.hypot(*(points[near] - x).T) <= reach):
            continue
        if not guard.contains_disks(x, reach)[0]:
            raise GuardViolation("large-inradius exceedance near the guard window border")
        hits[i] = x
    return hits


def _count_small_inradius(points, v0, q_window: Rect, guard: Rect):
    if not guard.contains_rect(q_window.pad(2.0 * v0)):
        raise GuardViolation("scanning window plus 2*v0 is not inside the guard window")
    inq = np.flatnonzero(q_window.contains(points))
    hits = set()
    if len(points) >= 2:
        tree = cKDTree(points)
        pairs = tree.query_pairs(2.0 * v0, output_type="ndarray")
        if len(pairs):
            d = np.hypot(*(points[pairs[:, 0]] - points[pairs[:, 1]]).T)
            close = pairs[d < 2.0 * v0].ravel()
            hits = set(np.intersect1d(close, inq).tolist())
    return {i: points[i] for i in sorted(hits)}


def count_cluster(
    sample: PalmSample,
    v0: float,
    q_window: Rect,
    guard_window: Rect | None = None,
    *,
    boundary_margin: float = 0.0,
    local_pad: float = 8.0,
    max_expansions: int = 4,
    replicate: int = 0,
) -> ExceedanceRecord:
    """Number of exceedance cells with nucleus in ``q_window``.

    Parameters
    ----------
    sample : PalmSample
    v0 : float
        Threshold; for the small inradius a cell is an exceedance when its
        inradius is *below* ``v0``.
    q_window : Rect
        Scanning window.
    guard_window : Rect, optional
        Region in which the point process is known; defaults to the sample's
        simulation window. Counted cells must be determined by points in it.
    boundary_margin : float
        When positive, an exceedance nucleus closer than this to the border
        of ``q_window`` is treated as a guard violation.

    Raises
    ------
    GuardViolation
        A counted cell could change if the process were extended beyond the
        guard window. The replicate must be re-run with a larger window.
    """
    kind = sample.kind
    guard = sample.window if guard_window is None else guard_window
    scan = q_window.intersect(guard)
    if scan is None:
        raise GuardViolation("scanning window does not meet the guard window")
    points = sample.points[guard.contains(sample.points)]

    if kind is CharacteristicKind.INRADIUS_SMALL:
        found = _count_small_inradius(points, v0, scan, guard)
    elif kind is CharacteristicKind.INRADIUS_LARGE:
        found = _count_large_inradius(points, v0, scan, guard)
    else:
        centered = kind is CharacteristicKind.CIRCUMRADIUS_DELAUNAY
        found = {}
        for region in _empty_disk_regions(points, guard, v0, centered):
            count_rect = region.count.intersect(scan)
            if count_rect is None:
                continue
            pad = local_pad
            for _ in range(max_expansions + 1):
                want = region.bbox.pad(2.0 * region.rho_max + pad)
                box = want.intersect(guard)
                keys, ok = _count_in_box(kind, points, _box_points(points, box), box, count_rect, v0)
                if ok:
                    break
                if box == guard:
                    raise GuardViolation(
                        f"{kind.value}: counted cell depends on points outside the guard window"
                    )
                pad *= 2.0
            else:
                raise GuardViolation(f"{kind.value}: local box expansion exhausted")
            found.update(keys)

    nuclei = np.array(list(found.values()), dtype=float).reshape(-1, 2)
    if boundary_margin > 0 and len(nuclei):
        if np.any(q_window.boundary_distance(nuclei) < boundary_margin):
            raise GuardViolation("exceedance nucleus within the margin of the scanning window border")
    return ExceedanceRecord(
        replicate=replicate,
        cluster_size=len(nuclei),
        nuclei=nuclei,
        guard_ok=True,
        conditioning_radius=sample.conditioning_radius,
    )


# -- aggregation -----------------------------------------------------------------


def _box_summary(values: np.ndarray) -> np.ndarray:
    """q1, median, q3, min, max along axis 0 (linear interpolation quantiles)."""
    q = np.percentile(values, [25.0, 50.0, 75.0], axis=0)
    return np.vstack([q, values.min(axis=0), values.max(axis=0)]).T


@dataclass
class ClusterStats:
    """Empirical cluster-size law and extremal index.

    ``p_hat[k-1]`` is the fraction of replicates with exactly ``k`` exceedances
    for ``k <= k_max``; ``overflow`` is the fraction with more. ``theta_hat``
    uses every record's actual size, overflow included.
    """

    k_max: int
    n_records: int
    n_subsamples: int
    subsample_size: int
    counts: list[int]
    overflow_count: int
    p_hat: list[float]
    overflow: float
    theta_hat: float
    theta_in_range: bool
    pi_hat: list[float]
    pi_sum: float
    subsample_p: list[list[float]]
    subsample_theta: list[float]
    p_summary: list[list[float]]
    theta_summary: list[float]

    SUMMARY_FIELDS = ("q1", "median", "q3", "min", "max")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ClusterStats":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})

    @property
    def theta_iqr(self) -> float:
        return self.theta_summary[2] - self.theta_summary[0]


def check_cluster_sizes(records) -> np.ndarray:
    """Coerce records or raw sizes into a 1-D integer array of sizes >= 1."""
    records = list(records) if not isinstance(records, np.ndarray) else records
    if len(records) and isinstance(records[0], ExceedanceRecord):
        bad = [r.replicate for r in records if not r.guard_ok]
        if bad:
            raise GuardViolation(f"records {bad[:5]} failed the guard check")
        records = [r.cluster_size for r in records]
    sizes = column_or_1d(np.asarray(records))
    if sizes.size == 0:
        raise InsufficientData("no records")
    if not np.issubdtype(sizes.dtype, np.integer):
        if not np.all(np.isfinite(sizes)) or np.any(sizes != np.round(sizes)):
            raise ValueError("cluster sizes must be integers")
        sizes = sizes.astype(np.int64)
    if np.any(sizes < 1):
        raise ValueError("cluster sizes must be >= 1 (the conditioned cell always counts)")
    return sizes.astype(np.int64)


def _theta_from_counts(sizes: np.ndarray) -> float:
    ks, cnt = np.unique(sizes, return_counts=True)
    return math.fsum(c / k for k, c in zip(ks.tolist(), cnt.tolist())) / len(sizes)


def theta_by_records(records) -> float:
    """Mean of ``1/k`` over records; the order-independent twin of ``sum_k p_k / k``."""
    sizes = check_cluster_sizes(records)
    return math.fsum((1.0 / sizes).tolist()) / len(sizes)


def estimate(records, k_max: int = DEFAULT_K_MAX, n_subsamples: int = DEFAULT_SUBSAMPLES) -> ClusterStats:
    """Cluster-size probabilities, extremal index and subsample box-plot statistics.

    Subsamples are consecutive blocks of ``len(records) // n_subsamples``
    records; a trailing remainder enters the full-sample estimates only.
    """
    sizes = check_cluster_sizes(records)
    n = len(sizes)
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if n_subsamples < 1:
        raise ValueError("n_subsamples must be >= 1")
    size = n // n_subsamples
    if size == 0:
        raise InsufficientData(f"{n} records cannot form {n_subsamples} subsamples")

    binned = np.minimum(sizes, k_max + 1)
    counts = np.bincount(binned, minlength=k_max + 2)[1:]
    p_hat = counts[:k_max] / n
    overflow = counts[k_max] / n
    theta = _theta_from_counts(sizes)
    pi_hat = p_hat / (np.arange(1, k_max + 1) * theta)

    blocks = sizes[: n_subsamples * size].reshape(n_subsamples, size)
    ks = np.arange(1, k_max + 1)
    sub_p = (blocks[:, :, None] == ks[None, None, :]).mean(axis=1)
    sub_theta = (1.0 / blocks).mean(axis=1)

    return ClusterStats(
        k_max=int(k_max),
        n_records=int(n),
        n_subsamples=int(n_subsamples),
        subsample_size=int(size),
        counts=counts[:k_max].tolist(),
        overflow_count=int(counts[k_max]),
        p_hat=p_hat.tolist(),
        overflow=float(overflow),
        theta_hat=float(theta),
        theta_in_range=bool(0.0 < theta <= 1.0),
        pi_hat=pi_hat.tolist(),
        pi_sum=float(math.fsum(pi_hat.tolist())),
        subsample_p=sub_p.tolist(),
        subsample_theta=sub_theta.tolist(),
        p_summary=_box_summary(sub_p).tolist(),
        theta_summary=_box_summary(sub_theta[:, None])[0].tolist(),
    )


def derived_pi(stats: ClusterStats) -> np.ndarray:
    """Blocks cluster-size law from the Palm law via ``p_k = k * theta * pi_k``."""
    if stats.theta_hat == 0:
        raise DegenerateTheta("theta_hat is zero")
    k = np.arange(1, stats.k_max + 1)
    return np.asarray(stats.p_hat) / (k * stats.theta_hat)


class ExtremalIndexEstimator(BaseEstimator):
    """Estimate the cluster-size law ``p`` and the extremal index from Palm cluster sizes.

    Parameters
    ----------
    k_max : int, default=9
        Largest tabulated cluster size; larger sizes are pooled as overflow
        but still enter ``theta_`` exactly.
    n_subsamples : int, default=100
        Number of consecutive blocks for the box-plot statistics.

    Attributes
    ----------
    p_ : ndarray of shape (k_max,)
    theta_ : float
    pi_ : ndarray of shape (k_max,)
    overflow_ : float
    stats_ : ClusterStats
    """

    def __init__(self, k_max: int = DEFAULT_K_MAX, n_subsamples: int = DEFAULT_SUBSAMPLES):
        self.k_max = k_max
        self.n_subsamples = n_subsamples

    def fit(self, X, y=None):
        stats = estimate(X, self.k_max, self.n_subsamples)
        self.stats_ = stats
        self.p_ = np.asarray(stats.p_hat)
        self.theta_ = stats.theta_hat
        self.pi_ = derived_pi(stats)
        self.overflow_ = stats.overflow
        self.subsample_theta_ = np.asarray(stats.subsample_theta)
        self.n_records_ = stats.n_records
        return self

    def score(self, X, y=None) -> float:
        """Mean log-probability of held-out cluster sizes under ``p_`` (overflow pooled)."""
        check_is_fitted(self)
        sizes = check_cluster_sizes(X)
        probs = np.append(self.p_, self.overflow_)
        with np.errstate(divide="ignore"):
            return float(np.mean(np.log(probs[np.minimum(sizes, self.k_max + 1) - 1])))
