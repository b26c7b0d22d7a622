"""Finite groupoids over configurations and the body-point orbit space."""

import logging
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components
from scipy.spatial import cKDTree

from src.config import RunConfig
from src.errors import (
    AxiomsNotVerified,
    BodyMismatch,
    ClosureExplosion,
    DiffeoNotInvertible,
    WitnessInconsistency,
)
from src.models.configuration import Configuration
from src.models.diffeo import SpaceDiffeo
from src.models.groupoid import (
    AxiomCheck,
    AxiomReport,
    BodyPointSpace,
    FiniteGroupoid,
    PlacedPointSet,
)
from src.models.point_configuration import PointConfigurationSet
from .decomposition_service import relative_deviation
from .equivalence_service import find_affine_displacement, point_scale

logger = logging.getLogger(__name__)

Edge = tuple[int, int, Optional[SpaceDiffeo]]


def graph_components(n_nodes: int, rows, cols) -> list[list[int]]:
    """Connected components as sorted index lists, ordered by lowest member."""
    if n_nodes == 0:
        return []
    graph = coo_matrix(
        (np.ones(len(rows)), (np.asarray(rows, dtype=np.int64), np.asarray(cols, dtype=np.int64))),
        shape=(n_nodes, n_nodes),
    )
    _, labels = connected_components(graph, directed=False)
    groups: dict[int, list[int]] = {}
    for node, label in enumerate(labels):
        groups.setdefault(int(label), []).append(node)
    return sorted(groups.values(), key=lambda members: members[0])


def _safe_inverse(g: Optional[SpaceDiffeo]) -> Optional[SpaceDiffeo]:
    if g is None:
        return None
    try:
        return g.inverse()
    except DiffeoNotInvertible:
        return None


def _safe_compose(outer: Optional[SpaceDiffeo], inner: Optional[SpaceDiffeo]) -> Optional[SpaceDiffeo]:
    if outer is None or inner is None:
        return None
    return outer.compose(inner)


def discrete_groupoid(n_objects: int) -> FiniteGroupoid:
    """Identity morphisms only."""
    return close_groupoid(n_objects, [], bound=max(1, n_objects))


def pair_groupoid(n_objects: int) -> FiniteGroupoid:
    """Exactly one morphism for every ordered pair of objects."""
    edges = [(i, j, None) for i in range(n_objects) for j in range(n_objects) if i != j]
    return close_groupoid(n_objects, edges, bound=max(1, n_objects**2))


def close_groupoid(
    n_objects: int,
    edges: Sequence[Edge],
    bound: int,
    images: Optional[Sequence[np.ndarray]] = None,
    tol: float = 1e-9,
) -> FiniteGroupoid:
    """Close generating displacements under composition and inversion.

    A morphism is the restriction of a displacement to the source image, so
    it is fixed by its source and target: each orbit of k objects carries
    k * k morphisms. Identities come first (morphism o is the identity of
    object o), then every orbit's pairs in lexicographic order. Witnesses are
    composed along a breadth-first tree from the orbit's lowest object and
    checked against the images when given.
    """
    rows = [e[0] for e in edges]
    cols = [e[1] for e in edges]
    orbits = graph_components(n_objects, rows, cols)
    total = sum(len(orbit) ** 2 for orbit in orbits)
    if total > bound:
        raise ClosureExplosion(bound)

    step: dict[tuple[int, int], Optional[SpaceDiffeo]] = {}
    for i, j, g in edges:
        step.setdefault((i, j), g)
        step.setdefault((j, i), _safe_inverse(g))

    # witness from the orbit root to every member
    from_root: dict[int, Optional[SpaceDiffeo]] = {}
    if edges:
        graph = coo_matrix(
            (np.ones(len(edges)), (rows, cols)), shape=(n_objects, n_objects)
        ).tocsr()
    for orbit in orbits:
        root = orbit[0]
        from_root[root] = SpaceDiffeo.identity(images[root].shape[1]) if images is not None else None
        if len(orbit) == 1:
            continue
        order, predecessors = breadth_first_order(graph, root, directed=False, return_predecessors=True)
        for v in order[1:]:
            p = int(predecessors[v])
            from_root[int(v)] = _safe_compose(step[(p, int(v))], from_root[p])

    groupoid = FiniteGroupoid(n_objects=n_objects)
    key: dict[tuple[int, int], int] = {}
    for o in range(n_objects):
        identity = None if images is None else SpaceDiffeo.identity(images[o].shape[1])
        key[(o, o)] = groupoid.add_morphism(o, o, identity)
    for orbit in orbits:
        for s in orbit:
            for t in orbit:
                if s != t:
                    witness = _safe_compose(from_root[t], _safe_inverse(from_root[s]))
                    key[(s, t)] = groupoid.add_morphism(s, t, witness)
    groupoid.identity = [key[(o, o)] for o in range(n_objects)]

    by_target: dict[int, list[int]] = {}
    for m in range(groupoid.n_morphisms):
        by_target.setdefault(groupoid.target[m], []).append(m)
    for m in range(groupoid.n_morphisms):
        s, t = groupoid.source[m], groupoid.target[m]
        groupoid.inverse[m] = key[(t, s)]
        for m1 in by_target.get(s, []):
            groupoid.compose[(m, m1)] = key[(groupoid.source[m1], t)]

    if images is not None:
        _check_witnesses(groupoid, images, tol)
    logger.info(
        f"Groupoid closed: {n_objects} objects, {groupoid.n_morphisms} morphisms, "
        f"{len(orbits)} orbits"
    )
    return groupoid


def _check_witnesses(groupoid: FiniteGroupoid, images: Sequence[np.ndarray], tol: float) -> None:
    """Every witness must carry its source image onto its target image pointwise."""
    for m, g in enumerate(groupoid.witnesses):
        if g is None:
            continue
        s, t = groupoid.source[m], groupoid.target[m]
        if len(images[s]) == 0:
            continue
        distances = np.linalg.norm(g.apply(images[s]) - images[t], axis=1)
        worst = int(np.argmax(distances))
        if distances[worst] > tol * point_scale(images[s], images[t]):
            raise WitnessInconsistency(s, t, worst, float(distances[worst]))


def verify_axioms(groupoid: FiniteGroupoid) -> AxiomReport:
    """Check the five groupoid axioms exhaustively, reporting the first counterexample of each."""
    g = groupoid
    n_m = g.n_morphisms

    def valid(m) -> bool:
        return isinstance(m, (int, np.integer)) and 0 <= m < n_m

    checks = []

    # surjectivity of source and target
    sources, targets = set(g.source), set(g.target)
    missing = next((o for o in range(g.n_objects) if o not in sources or o not in targets), None)
    checks.append(
        AxiomCheck(
            axiom="surjectivity",
            passed=missing is None,
            counterexample=None if missing is None else [missing],
            detail="" if missing is None else f"object {missing} is not both a source and a target",
        )
    )

    # composition is defined on composable pairs with the right endpoints
    bad = None
    for m2, m1 in g.composable_pairs():
        m = g.compose.get((m2, m1))
        if not valid(m) or g.source[m] != g.source[m1] or g.target[m] != g.target[m2]:
            bad = [m2, m1]
            break
    if bad is None:
        for (m2, m1) in g.compose:
            if not (valid(m1) and valid(m2)) or g.target[m1] != g.source[m2]:
                bad = [m2, m1]
                break
    checks.append(
        AxiomCheck(
            axiom="composition",
            passed=bad is None,
            counterexample=bad,
            detail="" if bad is None else f"compose{tuple(bad)} is missing or has wrong endpoints",
        )
    )

    # associativity over all composable triples
    bad = None
    pairs = list(g.composable_pairs())
    by_source: dict[int, list[int]] = {}
    for m in range(n_m):
        by_source.setdefault(g.source[m], []).append(m)
    for m2, m1 in pairs:
        for m3 in by_source.get(g.target[m2], []):
            inner = g.compose.get((m2, m1))
            outer = g.compose.get((m3, m2))
            left = g.compose.get((m3, inner)) if valid(inner) else None
            right = g.compose.get((outer, m1)) if valid(outer) else None
            if left is None or left != right:
                bad = [m3, m2, m1]
                break
        if bad is not None:
            break
    checks.append(
        AxiomCheck(
            axiom="associativity",
            passed=bad is None,
            counterexample=bad,
            detail="" if bad is None else f"(m3 m2) m1 != m3 (m2 m1) for {tuple(bad)}",
        )
    )

    # identity laws
    bad = None
    if len(g.identity) != g.n_objects:
        bad = [len(g.identity)]
    else:
        for o, e in enumerate(g.identity):
            if not valid(e) or g.source[e] != o or g.target[e] != o:
                bad = [o]
                break
        if bad is None:
            for m in range(n_m):
                right_unit = g.compose.get((m, g.identity[g.source[m]]))
                left_unit = g.compose.get((g.identity[g.target[m]], m))
                if right_unit != m or left_unit != m:
                    bad = [m]
                    break
    checks.append(
        AxiomCheck(
            axiom="identity",
            passed=bad is None,
            counterexample=bad,
            detail="" if bad is None else f"identity law fails at {bad}",
        )
    )

    # inverse laws
    bad = None
    if len(g.identity) == g.n_objects:
        for m in range(n_m):
            inv = g.inverse.get(m)
            if (
                not valid(inv)
                or g.source[inv] != g.target[m]
                or g.target[inv] != g.source[m]
                or g.compose.get((inv, m)) != g.identity[g.source[m]]
                or g.compose.get((m, inv)) != g.identity[g.target[m]]
            ):
                bad = [m] if inv is None else [m, inv]
                break
    else:
        bad = [len(g.identity)]
    checks.append(
        AxiomCheck(
            axiom="inverse",
            passed=bad is None,
            counterexample=bad,
            detail="" if bad is None else f"inverse law fails at {bad}",
        )
    )

    report = AxiomReport(checks=checks)
    logger.debug(f"Axioms: {[c.axiom for c in report.failed()] or 'all pass'}")
    return report


def orbits(groupoid: FiniteGroupoid) -> list[list[int]]:
    """Objects linked by morphisms, ordered by lowest object index."""
    report = verify_axioms(groupoid)
    if not report.passed:
        failed = ", ".join(c.axiom for c in report.failed())
        raise AxiomsNotVerified(f"groupoid fails axioms: {failed}")
    return graph_components(groupoid.n_objects, groupoid.source, groupoid.target)


def witnesses_for_orbit(groupoid: FiniteGroupoid, orbit: Sequence[int]) -> dict[tuple[int, int], SpaceDiffeo]:
    """Witness displacement for every ordered pair of distinct objects in the orbit."""
    members = set(orbit)
    witnesses = {}
    for m in range(groupoid.n_morphisms):
        s, t = groupoid.source[m], groupoid.target[m]
        if s != t and s in members and t in members and groupoid.witnesses[m] is not None:
            witnesses[(s, t)] = groupoid.witnesses[m]
    return witnesses


def placed_points(configs: Sequence[np.ndarray], tol: float = 1e-9) -> PlacedPointSet:
    """Disjoint union of the images, merging coincident points of one configuration."""
    points, config_ids, image_of = [], [], []
    offset = 0
    for i, k in enumerate(configs):
        k = np.asarray(k, dtype=float)
        pairs = np.empty((0, 2), dtype=np.int64)
        if len(k):
            pairs = cKDTree(k).query_pairs(tol * point_scale(k), output_type="ndarray")
        groups = graph_components(len(k), pairs[:, 0], pairs[:, 1])
        local = np.empty(len(k), dtype=np.int64)
        for element, members in enumerate(groups):
            local[members] = element
            points.append(k[members[0]])
            config_ids.append(i)
        image_of.append(local + offset)
        offset += len(groups)
    dim = np.asarray(configs[0]).shape[1] if configs else 0
    return PlacedPointSet(
        points=np.array(points, dtype=float).reshape(-1, dim),
        config_ids=np.array(config_ids, dtype=np.int64),
        image_of=image_of,
    )


class GroupoidService:
    """Groupoids over point and bundle configuration families."""

    def __init__(self, config: Optional[RunConfig] = None):
        self.config = config or RunConfig()

    def verify_axioms(self, groupoid: FiniteGroupoid) -> AxiomReport:
        return verify_axioms(groupoid)

    def orbits(self, groupoid: FiniteGroupoid) -> list[list[int]]:
        return orbits(groupoid)

    def configuration_groupoid(self, pcs: PointConfigurationSet) -> FiniteGroupoid:
        """Groupoid over the configurations of a finite protobody."""
        tol = self.config.tol_rel
        configs = pcs.configs
        edges: list[Edge] = []
        n = len(configs)
        if pcs.searches_affine:
            for i in range(n):
                for j in range(i + 1, n):
                    found = find_affine_displacement(configs[i], configs[j], tol)
                    if found is not None:
                        edges.append((i, j, found.as_diffeo()))
        else:
            for g in pcs.group:
                for i in range(n):
                    moved = g.apply(configs[i])
                    for j in range(n):
                        if i != j and np.abs(moved - configs[j]).max(initial=0.0) <= tol * point_scale(configs[i], configs[j]):
                            edges.append((i, j, g))
        logger.info(f"Configuration groupoid: {n} objects, {len(edges)} generating displacements")
        return close_groupoid(n, edges, self.config.closure_bound, images=configs, tol=tol)

    def bundle_groupoid(self, configs: Sequence[Configuration]) -> FiniteGroupoid:
        """Groupoid over bundle configurations: affine g with g(base1) = base2 and A field1 = field2."""
        tol = self.config.tol_rel
        for i, c in enumerate(configs[1:], start=1):
            if not c.body.same_as(configs[0].body):
                raise BodyMismatch(f"configuration {i} lives over a different body than configuration 0")
        edges: list[Edge] = []
        for i in range(len(configs)):
            for j in range(i + 1, len(configs)):
                found = find_affine_displacement(configs[i].base, configs[j].base, tol)
                if found is None:
                    continue
                if relative_deviation(configs[j].field, found.matrix @ configs[i].field) <= tol:
                    edges.append((i, j, found.as_diffeo()))
        return close_groupoid(
            len(configs), edges, self.config.closure_bound, images=[c.base for c in configs], tol=tol
        )

    def witnesses_for_orbit(self, groupoid: FiniteGroupoid, orbit: Sequence[int]):
        return witnesses_for_orbit(groupoid, orbit)

    def placed_points(self, configs: Sequence[np.ndarray]) -> PlacedPointSet:
        return placed_points(configs, self.config.tol_rel)

    def body_points(
        self,
        configs: Sequence[np.ndarray],
        witnesses: Optional[Mapping[tuple[int, int], SpaceDiffeo]] = None,
    ) -> BodyPointSpace:
        """Orbit space of placed points under the witnesses of one embodiment class.

        (y, i) and (y', j) are identified when y' = g(y) for the witness g
        carrying configuration i to configuration j. Each configuration's
        image must map bijectively onto the orbits.
        """
        configs = [np.asarray(k, dtype=float) for k in configs]
        tol = self.config.tol_rel
        if witnesses is None:
            labels = [str(p) for p in range(len(configs[0]))] if configs else []
            groupoid = self.configuration_groupoid(PointConfigurationSet(labels, configs))
            found = orbits(groupoid)
            if len(found) > 1:
                raise BodyMismatch(f"configurations fall into {len(found)} embodiments, expected 1")
            witnesses = witnesses_for_orbit(groupoid, found[0] if found else [])

        placed = placed_points(configs, tol)
        trees = {}
        rows, cols = [], []
        for (i, j), g in sorted(witnesses.items(), key=lambda item: item[0]):
            source = placed.elements_of(i)
            target = placed.elements_of(j)
            if len(source) == 0:
                continue
            if j not in trees:
                trees[j] = cKDTree(placed.points[target])
            distances, nearest = trees[j].query(g.apply(placed.points[source]))
            scale = point_scale(placed.points[source], placed.points[target])
            worst = int(np.argmax(distances))
            if distances[worst] > tol * scale:
                raise WitnessInconsistency(i, j, int(source[worst]), float(distances[worst]))
            rows.extend(source.tolist())
            cols.extend(target[nearest].tolist())

        groups = graph_components(len(placed.points), rows, cols)
        orbit_of = np.empty(len(placed.points), dtype=np.int64)
        for k, members in enumerate(groups):
            orbit_of[members] = k

        projection = []
        for i in range(len(configs)):
            elements = placed.elements_of(i)
            hit = orbit_of[elements]
            if len(np.unique(hit)) != len(elements) or len(elements) != len(groups):
                raise WitnessInconsistency(
                    i, i, int(elements[0]) if len(elements) else -1, 0.0,
                    message=(
                        f"image of configuration {i} ({len(elements)} points) is not in "
                        f"bijection with the {len(groups)} body points"
                    ),
                )
            projection.append({int(e): int(o) for e, o in zip(elements, hit)})

        logger.info(f"Body points: {len(groups)} orbits over {len(configs)} configurations")
        return BodyPointSpace(placed=placed, orbits=groups, projection=projection)
