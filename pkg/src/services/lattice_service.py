"""Synthetic crystal data: dislocated grids, Burgers circuits and cut-and-project point sets."""

import itertools
import logging
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import null_space, qr
from scipy.spatial import ConvexHull, cKDTree

from src.config import RunConfig
from src.errors import (
    CoreOnFacet,
    DegenerateFrame,
    InvalidSpec,
    LoopNotClosed,
    PointBudgetExceeded,
    SegmentOnFacet,
    SegmentOutsideBody,
    WindowUnbounded,
)
from src.models.body import SimplicialBody
from src.models.configuration import Configuration, StandaloneField
from src.models.lattice import (
    BurgersSplit,
    CutProjectResult,
    CutProjectSpec,
    DislocatedCrystal,
    DislocationSpec,
)
from .compatibility_service import tangent_maps
from .geometry import structured_grid

logger = logging.getLogger(__name__)

# barycentric slack when clipping loop segments against cells
CLIP_EPS = 1e-12
# two cells claiming more than this fraction of one segment share a facet with it
OVERLAP_EPS = 1e-9

BURGERS_CONVENTION = "sum over loop segments of (F - I) dx; counterclockwise loops are positive"


def loop_vertices(body: SimplicialBody, loop: Sequence[int]) -> np.ndarray:
    """Loop as an index array, rejecting vertices the body does not have."""
    loop = np.asarray(loop, dtype=np.int64).reshape(-1)
    bad = loop[(loop < 0) | (loop >= body.n_vertices)]
    if len(bad):
        raise InvalidSpec(f"loop vertex {int(bad[0])} is out of range for {body.n_vertices} vertices")
    return loop


def all_barycentric(body: SimplicialBody, point: np.ndarray) -> np.ndarray:
    """Barycentric coordinates (n_cells, dim+1) of one point in every reference cell."""
    E = body.edge_matrices()
    origin = body.ref_coords[body.cells[:, 0]]
    local = np.linalg.solve(E, (point - origin)[..., None])[..., 0]
    return np.column_stack([1.0 - local.sum(axis=1), local])


def edge_displacement(p: np.ndarray, theta: np.ndarray, b: float, nu: float) -> np.ndarray:
    """Isotropic edge dislocation along +x with slip plane y = 0, angle supplied unwrapped."""
    x, y = p[..., 0], p[..., 1]
    r2 = x * x + y * y
    k = b / (2.0 * np.pi)
    ux = k * (theta + x * y / (2.0 * (1.0 - nu) * r2))
    uy = -k * (
        (1.0 - 2.0 * nu) / (4.0 * (1.0 - nu)) * np.log(r2)
        + (x * x - y * y) / (4.0 * (1.0 - nu) * r2)
    )
    return np.stack([ux, uy], axis=-1)


def edge_distortion(p: np.ndarray, b: float, nu: float) -> np.ndarray:
    """Gradient of `edge_displacement`, shape (..., 2, 2)."""
    x, y = p[..., 0], p[..., 1]
    r2 = x * x + y * y
    r4 = r2 * r2
    k = b / (2.0 * np.pi)
    a = 1.0 / (2.0 * (1.0 - nu))
    c1 = (1.0 - 2.0 * nu) / (4.0 * (1.0 - nu))
    c2 = 1.0 / (4.0 * (1.0 - nu))
    beta = np.empty(p.shape[:-1] + (2, 2))
    beta[..., 0, 0] = k * (-y / r2 + a * y * (y * y - x * x) / r4)
    beta[..., 0, 1] = k * (x / r2 + a * x * (x * x - y * y) / r4)
    beta[..., 1, 0] = -k * (2.0 * c1 * x / r2 + 4.0 * c2 * x * y * y / r4)
    beta[..., 1, 1] = -k * (2.0 * c1 * y / r2 - 4.0 * c2 * x * x * y / r4)
    return beta


def unwrapped_angles(p: np.ndarray) -> np.ndarray:
    """atan2 per cell vertex, shifted by 2 pi where a cell straddles the branch cut.

    p has shape (n_cells, 3, 2).
    """
    theta = np.arctan2(p[..., 1], p[..., 0])
    straddles = (theta.max(axis=1) - theta.min(axis=1)) > np.pi
    theta[straddles] = np.where(theta[straddles] < 0, theta[straddles] + 2.0 * np.pi, theta[straddles])
    return theta


def orthonormal_frames(frame) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal rows spanning the frame and its complement, jointly positively oriented."""
    frame = np.atleast_2d(np.asarray(frame, dtype=float))
    n = frame.shape[0]
    Q, R = qr(frame.T, mode="economic")
    diag = np.diag(R)
    if np.any(np.abs(diag) <= 1e-12 * max(1.0, np.abs(frame).max())):
        raise DegenerateFrame(f"frame vectors are linearly dependent (|R| diagonal {np.abs(diag).tolist()})")
    parallel = (Q * np.sign(diag)).T
    perp = null_space(parallel).T
    if perp.shape[0] != frame.shape[1] - n:
        raise DegenerateFrame("complement of the frame has the wrong dimension")
    if np.linalg.det(np.vstack([parallel, perp])) < 0:
        perp[-1] *= -1.0
    return parallel, perp


class LatticeService:
    """Generators and diagnostics for crystal-like test data."""

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig()

    # Dislocations

    def make_dislocated(self, spec: DislocationSpec) -> DislocatedCrystal:
        """Punctured grid with the field of an isolated dislocation over the identity base."""
        full = structured_grid(spec.shape, spec.spacing, spec.origin)
        core = spec.core_point()
        lam = all_barycentric(full, core)
        slack = 1e-9
        inside = np.all(lam >= -slack, axis=1)
        if not np.any(inside):
            raise CoreOnFacet(f"core {core.tolist()} lies outside the grid")
        core_cell = int(np.flatnonzero(inside)[0])
        if lam[core_cell].min() <= slack:
            raise CoreOnFacet(f"core {core.tolist()} lies on a facet of cell {core_cell}; move it into a cell interior")

        removed = {core_cell}
        if spec.core_radius > 0:
            near = np.linalg.norm(full.barycenters() - core, axis=1) <= spec.core_radius
            removed.update(np.flatnonzero(near).tolist())

        # the removed core cell may sit on the singularity
        with np.errstate(divide="ignore", invalid="ignore"):
            field = self._dislocation_field(full, core, spec)
            dets = np.linalg.det(field)
        flipped = set(np.flatnonzero(~(dets > 0)).tolist()) - removed
        if flipped:
            logger.warning(f"Removing {len(flipped)} core-adjacent cells with det(F) <= 0")
            removed.update(flipped)

        keep = np.array([c for c in range(full.n_cells) if c not in removed], dtype=np.int64)
        body = full.submesh(keep)
        renumber = np.full(full.n_vertices, -1, dtype=np.int64)
        renumber[np.unique(full.cells[keep])] = np.arange(body.n_vertices)
        hole = sorted(
            int(renumber[v]) for v in np.unique(full.cells[sorted(removed)]) if renumber[v] >= 0
        )
        configuration = Configuration(body, body.ref_coords.copy(), field[keep])
        logger.info(
            f"Dislocated grid {spec.shape}: kind={spec.kind}, b={list(spec.burgers)}, "
            f"core cell {core_cell}, {len(removed)} cells removed"
        )
        return DislocatedCrystal(
            configuration=configuration,
            core=core,
            core_cell=core_cell,
            removed_cells=sorted(removed),
            hole_vertices=hole,
        )

    def _dislocation_field(self, body: SimplicialBody, core: np.ndarray, spec: DislocationSpec) -> np.ndarray:
        b = np.asarray(spec.burgers, dtype=float)
        magnitude = float(np.linalg.norm(b))
        e1 = b / magnitude
        rotation = np.array([[e1[0], -e1[1]], [e1[1], e1[0]]])
        eye = np.eye(2)

        if spec.sampling == "barycenter":
            p = (body.barycenters() - core) @ rotation
            if spec.kind == "edge":
                beta = rotation @ edge_distortion(p, magnitude, spec.nu) @ rotation.T
            else:
                r2 = np.sum(p * p, axis=1)
                grad_theta = np.column_stack([-p[:, 1], p[:, 0]]) / r2[:, None] @ rotation.T
                beta = np.einsum("i,cj->cij", b, grad_theta) / (2.0 * np.pi)
            return eye + beta

        # volterra: cellwise gradient of the interpolated multivalued displacement
        p = (body.ref_coords[body.cells] - core) @ rotation
        theta = unwrapped_angles(p)
        if spec.kind == "edge":
            u = edge_displacement(p, theta, magnitude, spec.nu) @ rotation.T
        else:
            u = theta[..., None] * b / (2.0 * np.pi)
        U = np.transpose(u[:, 1:, :] - u[:, :1, :], (0, 2, 1))
        E = body.edge_matrices()
        grad = np.swapaxes(np.linalg.solve(np.swapaxes(E, 1, 2), np.swapaxes(U, 1, 2)), 1, 2)
        return eye + grad

    # Burgers circuits

    def ring_loop(self, body: SimplicialBody, center, radius: float) -> list[int]:
        """Counterclockwise square loop of grid vertices around a point, first vertex repeated.

        The square has half-width `radius` rounded to whole mesh spacings and
        is centred on the vertex nearest `center`.
        """
        if body.dim != 2:
            raise InvalidSpec("ring loops are defined on planar bodies")
        tree = cKDTree(body.ref_coords)
        h = body.min_edge_length()
        _, nearest = tree.query(np.asarray(center, dtype=float))
        c = body.ref_coords[nearest]
        steps = max(1, int(round(radius / h)))
        corners = [(-1, -1), (1, -1), (1, 1), (-1, 1)]
        points = []
        for (ax, ay), (bx, by) in zip(corners, corners[1:] + corners[:1]):
            for s in range(2 * steps):
                t = s / (2 * steps)
                points.append(c + steps * h * np.array([ax + t * (bx - ax), ay + t * (by - ay)]))
        distance, loop = tree.query(np.array(points))
        if np.any(distance > 1e-9 * h):
            raise InvalidSpec(
                f"ring of radius {radius} around {np.asarray(center, dtype=float).tolist()} leaves the grid"
            )
        loop = [int(v) for v in loop]
        return loop + loop[:1]

    def fitting_ring_radius(self, body: SimplicialBody, center, radius: float) -> float:
        """`radius` reduced so the ring keeps one mesh spacing clear of the bounding box."""
        h = body.min_edge_length()
        _, nearest = cKDTree(body.ref_coords).query(np.asarray(center, dtype=float))
        c = body.ref_coords[nearest]
        lo, hi = body.ref_coords.min(axis=0), body.ref_coords.max(axis=0)
        room = float(min((c - lo).min(), (hi - c).min())) - h
        return min(float(radius), room)

    @staticmethod
    def default_loop_shift(body: SimplicialBody) -> np.ndarray:
        """Rigid loop offset that moves grid-edge loops off every facet."""
        return 0.25 * body.min_edge_length() * np.array([1.0, 0.5, 0.25][: body.dim])

    def burgers_circuit(
        self,
        field: StandaloneField | Configuration,
        loop: Sequence[int],
        shift: Optional[Sequence[float]] = None,
    ) -> np.ndarray:
        """Circulation of (F - I) around a closed vertex polyline, optionally shifted rigidly."""
        body = field.body
        loop = loop_vertices(body, loop)
        if len(loop) < 2 or loop[0] != loop[-1]:
            raise LoopNotClosed(f"vertex loop must end at its first vertex {int(loop[0]) if len(loop) else None}")
        points = body.ref_coords[loop]
        if shift is not None:
            points = points + np.asarray(shift, dtype=float)
        return self.circulation(field, points)

    def circulation(self, field: StandaloneField | Configuration, points) -> np.ndarray:
        """Sum over segments of (F_c - I) dx, splitting each segment by the cells it crosses."""
        body = field.body
        F = field.field
        points = np.asarray(points, dtype=float)
        scale = max(1.0, body.diameter())
        if len(points) < 2 or np.linalg.norm(points[0] - points[-1]) > 1e-12 * scale:
            raise LoopNotClosed("loop must end where it starts")

        distortion = F - np.eye(body.dim)
        E = body.edge_matrices()
        origin = body.ref_coords[body.cells[:, 0]]
        total = np.zeros(body.dim)
        for s in range(len(points) - 1):
            a, b = points[s], points[s + 1]
            sign = 1.0
            if tuple(b) < tuple(a):
                a, b, sign = b, a, -1.0
            total += sign * self._segment_integral(s, a, b, E, origin, distortion)
        logger.debug(f"Circulation over {len(points) - 1} segments: {total.tolist()}")
        return total

    @staticmethod
    def _segment_integral(segment, a, b, E, origin, distortion) -> np.ndarray:
        def bary(point):
            local = np.linalg.solve(E, (point - origin)[..., None])[..., 0]
            return np.column_stack([1.0 - local.sum(axis=1), local])

        la, lb = bary(a), bary(b)
        d = lb - la
        lower = np.zeros(len(la))
        upper = np.ones(len(la))
        with np.errstate(divide="ignore", invalid="ignore"):
            bound = (-CLIP_EPS - la) / d
        rising, falling = d > 0, d < 0
        lower = np.maximum(lower, np.where(rising, bound, -np.inf).max(axis=1))
        upper = np.minimum(upper, np.where(falling, bound, np.inf).min(axis=1))
        flat_outside = np.any((d == 0) & (la < -CLIP_EPS), axis=1)
        hit = np.flatnonzero((upper - lower > CLIP_EPS) & ~flat_outside)
        if len(hit) == 0:
            raise SegmentOutsideBody(segment)

        order = hit[np.argsort(lower[hit], kind="stable")]
        lo, hi = lower[order], upper[order]
        if lo[0] > CLIP_EPS or hi[-1] < 1.0 - CLIP_EPS:
            raise SegmentOutsideBody(segment)
        for k in range(1, len(order)):
            overlap = min(hi[k], hi[k - 1]) - lo[k]
            if overlap > OVERLAP_EPS:
                raise SegmentOnFacet(segment, sorted(int(c) for c in order[k - 1 : k + 1]))
            if lo[k] > hi[k - 1] + CLIP_EPS:
                raise SegmentOutsideBody(segment)

        # partition [0, 1] at the midpoints of consecutive clip slacks
        cuts = 0.5 * (hi[:-1] + lo[1:])
        weights = np.diff(np.concatenate([[0.0], cuts, [1.0]]))
        return np.einsum("c,cij,j->i", weights, distortion[order], b - a)

    # Random configurations

    def random_configuration(
        self,
        body: SimplicialBody,
        rng: Optional[np.random.Generator] = None,
        jitter: float = 0.1,
        plastic: float = 0.2,
    ) -> Configuration:
        """Jittered, affinely placed base with field T(base) (I + plastic * U)."""
        rng = rng or np.random.default_rng(self.config.rng_seed)
        n = body.dim
        h = body.min_edge_length()
        base = body.ref_coords + rng.uniform(-jitter * h, jitter * h, size=body.ref_coords.shape)
        # ||0.3 U||_2 < 1 keeps det(A) > 0
        A = np.eye(n) + 0.3 * rng.uniform(-1.0, 1.0, size=(n, n))
        base = base @ A.T + rng.uniform(-5.0, 5.0, size=n)
        P = np.eye(n) + plastic * rng.uniform(-1.0, 1.0, size=(body.n_cells, n, n))
        return Configuration(body, base, tangent_maps(body, base) @ P)

    # Quasicrystals

    def cut_and_project(self, spec: CutProjectSpec) -> CutProjectResult:
        """Integer points whose perpendicular projection falls in the window, projected onto the frame."""
        parallel, perp = orthonormal_frames(spec.frame)
        n = spec.physical_dim
        G, h, window_vertices = self._window(spec, perp)
        empty = CutProjectResult(
            points=np.empty((0, n)),
            lattice_points=np.empty((0, 2 * n), dtype=np.int64),
            parallel_basis=parallel,
            perp_basis=perp,
            window_vertices=window_vertices,
        )
        if G is None:
            return empty

        # strip: |parallel z|_inf <= extent and G (perp z) <= h
        A = np.vstack([parallel, -parallel, G @ perp])
        c = np.concatenate([np.full(n, spec.extent), np.full(n, spec.extent), h])
        radius = np.sqrt(n * spec.extent**2 + np.max(np.sum(window_vertices**2, axis=1)))
        span = np.arange(-int(np.ceil(radius)), int(np.ceil(radius)) + 1)

        free = np.stack(np.meshgrid(*([span] * (2 * n - 1)), indexing="ij"), axis=-1).reshape(-1, 2 * n - 1)
        slack = c[None, :] - free @ A[:, :-1].T
        last = A[:, -1]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = slack / last
        low = np.where(last < 0, ratio, -np.inf).max(axis=1)
        high = np.where(last > 0, ratio, np.inf).min(axis=1)
        feasible = np.all(np.where(last == 0, slack >= 0, True), axis=1)
        low = np.maximum(low, span[0])
        high = np.minimum(high, span[-1])
        first = np.ceil(low - 1e-12).astype(np.int64)
        final = np.floor(high + 1e-12).astype(np.int64)
        counts = np.where(feasible, np.maximum(final - first + 1, 0), 0)
        total = int(counts.sum())
        if total > spec.max_points:
            raise PointBudgetExceeded(total, spec.max_points)

        rows = np.repeat(np.arange(len(free)), counts)
        offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        lattice = np.column_stack([free[rows], first[rows] + offsets]).astype(np.int64)
        # the one-unit rounding slack above can admit points just outside
        inside = np.all(lattice @ A.T <= c + 1e-12, axis=1)
        lattice = lattice[inside]

        points = lattice @ parallel.T
        order = np.lexsort(points.T[::-1])
        logger.info(f"Cut-and-project: {len(order)} points in E_par of dim {n}")
        return CutProjectResult(
            points=points[order],
            lattice_points=lattice[order],
            parallel_basis=parallel,
            perp_basis=perp,
            window_vertices=window_vertices,
        )

    def _window(self, spec: CutProjectSpec, perp: np.ndarray):
        """Window as constraints G w <= h in perpendicular coordinates, with its vertices."""
        n = spec.physical_dim
        shift = spec.window_shift * np.ones(n)
        if spec.window == "canonical":
            if not np.isfinite(spec.window_scale):
                raise WindowUnbounded(f"window scale {spec.window_scale} is not finite")
            if spec.window_scale <= 0:
                return None, None, np.empty((0, n))
            cube = np.array(list(itertools.product([0.0, 1.0], repeat=2 * n)))
            projected = cube @ perp.T
            center = projected.mean(axis=0)
            projected = center + spec.window_scale * (projected - center) + shift
            if n == 1:
                lo, hi = projected.min(), projected.max()
                return np.array([[1.0], [-1.0]]), np.array([hi, -lo]), np.array([[lo], [hi]])
            hull = ConvexHull(projected)
            G, h = hull.equations[:, :-1], -hull.equations[:, -1]
            return G, h, projected[hull.vertices]

        if spec.half_widths is None:
            raise WindowUnbounded("box window needs half_widths")
        half = np.asarray(spec.half_widths, dtype=float)
        if half.shape != (n,) or not np.all(np.isfinite(half)):
            raise WindowUnbounded(f"box half-widths {spec.half_widths} do not bound the window")
        if np.any(half <= 0):
            return None, None, np.empty((0, n))
        G = np.vstack([np.eye(n), -np.eye(n)])
        h = np.concatenate([half + shift, half - shift])
        vertices = np.array(list(itertools.product(*[(-w, w) for w in half]))) + shift
        return G, h, vertices

    def split_burgers(self, b_hat, frame) -> BurgersSplit:
        """Orthogonal split of a 2n-dimensional Burgers vector into frame and complement parts."""
        b_hat = np.asarray(b_hat, dtype=float)
        parallel, perp = orthonormal_frames(frame)
        if b_hat.shape != (parallel.shape[1],):
            raise DegenerateFrame(f"Burgers vector of shape {b_hat.shape} for a frame in R^{parallel.shape[1]}")
        b_par = parallel @ b_hat
        b_perp = perp @ b_hat
        return BurgersSplit(
            parallel=b_par,
            perp=b_perp,
            parallel_embedded=parallel.T @ b_par,
            perp_embedded=perp.T @ b_perp,
        )
