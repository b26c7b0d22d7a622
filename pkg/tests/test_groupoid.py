import numpy as np
import pytest

from src.errors import AxiomsNotVerified, BodyMismatch, ClosureExplosion, WitnessInconsistency
from src.models.diffeo import SpaceDiffeo
from src.models.point_configuration import PointConfigurationSet
from src.services import EquivalenceService, GroupoidService
from src.services.groupoid_service import (
    close_groupoid,
    discrete_groupoid,
    orbits,
    pair_groupoid,
    verify_axioms,
)

SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
AXIOMS = ["surjectivity", "composition", "associativity", "identity", "inverse"]


@pytest.fixture
def service(config) -> GroupoidService:
    return GroupoidService(config)


def test_pair_groupoid_satisfies_every_axiom():
    g = pair_groupoid(4)
    assert g.n_morphisms == 16
    report = verify_axioms(g)
    assert [c.axiom for c in report.checks] == AXIOMS
    assert report.passed
    assert orbits(g) == [[0, 1, 2, 3]]


def test_discrete_groupoid_has_singleton_orbits():
    g = discrete_groupoid(3)
    assert g.n_morphisms == 3
    assert g.identity == [0, 1, 2]
    assert orbits(g) == [[0], [1], [2]]


def test_closure_counts_k_squared_per_orbit():
    g = close_groupoid(5, [(0, 2, None), (2, 4, None), (1, 3, None)], bound=100)
    assert g.n_morphisms == 9 + 4
    assert verify_axioms(g).passed
    assert orbits(g) == [[0, 2, 4], [1, 3]]
    assert len(g.hom(0, 4)) == 1


def test_closure_explosion():
    with pytest.raises(ClosureExplosion):
        close_groupoid(5, [(i, i + 1, None) for i in range(4)], bound=10)


def test_mutated_tables_fail_verification():
    """Any single corruption of a valid table is caught."""
    rng = np.random.default_rng(11)
    valid = pair_groupoid(4)
    for trial in range(100):
        g = valid.copy()
        if trial % 2 == 0:
            pair = list(g.compose)[rng.integers(len(g.compose))]
            choices = [m for m in range(g.n_morphisms) if m != g.compose[pair]]
            g.compose[pair] = int(rng.choice(choices))
        else:
            m = int(rng.integers(g.n_morphisms))
            choices = [x for x in range(g.n_morphisms) if x != g.inverse[m]]
            g.inverse[m] = int(rng.choice(choices))
        assert not verify_axioms(g).passed, f"trial {trial} was not detected"


def test_missing_identity_is_reported():
    g = pair_groupoid(2)
    g.identity = g.identity[:1]
    report = verify_axioms(g)
    assert not report.check("identity").passed
    assert not report.check("inverse").passed
    with pytest.raises(AxiomsNotVerified):
        orbits(g)


def test_dangling_composition_is_reported():
    g = pair_groupoid(2)
    del g.compose[next(iter(g.compose))]
    report = verify_axioms(g)
    assert not report.check("composition").passed
    assert report.check("composition").counterexample is not None


def test_configuration_groupoid_of_point_family(service):
    moved = SpaceDiffeo.rotation(0.5, [3.0, 1.0]).apply(SQUARE)
    mirrored = SQUARE * [1.0, -1.0]
    pcs = PointConfigurationSet(["a", "b", "c", "d"], [SQUARE, moved, mirrored])
    g = service.configuration_groupoid(pcs)
    assert service.verify_axioms(g).passed
    assert service.orbits(g) == [[0, 1], [2]]
    assert g.n_morphisms == 4 + 1
    (m,) = g.hom(0, 1)
    np.testing.assert_allclose(g.witnesses[m].apply(SQUARE), moved, atol=1e-12)


def test_explicit_group_only_uses_the_listed_displacements(service):
    shift = SpaceDiffeo.translation_by([1.0, 0.0])
    configs = [SQUARE, SQUARE + [1.0, 0.0], SQUARE + [5.0, 0.0]]
    g = service.configuration_groupoid(PointConfigurationSet(["a", "b", "c", "d"], configs, [shift]))
    assert service.orbits(g) == [[0, 1], [2]]


def test_inconsistent_witness_is_rejected():
    images = [SQUARE, SQUARE + 1.0]
    wrong = SpaceDiffeo.translation_by([2.0, 0.0])
    with pytest.raises(WitnessInconsistency):
        close_groupoid(2, [(0, 1, wrong)], bound=10, images=images)


def test_body_points_of_injective_family(service):
    configs = [SQUARE, SpaceDiffeo.rotation(1.0).apply(SQUARE)]
    space = service.body_points(configs)
    assert space.count == 4
    assert space.body_point_of(0, 2) == space.body_point_of(1, 2)
    assert space.body_point_of(0, 0) != space.body_point_of(0, 1)


def test_body_points_merge_coincident_points(service):
    collapsed = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
    configs = [collapsed, collapsed + [2.0, -1.0]]
    space = service.body_points(configs)
    assert space.count == 3
    assert space.body_point_of(0, 0) == space.body_point_of(0, 3)
    assert space.body_point_of(1, 3) == space.body_point_of(0, 0)


def test_body_points_need_a_single_embodiment(service):
    with pytest.raises(BodyMismatch):
        service.body_points([SQUARE, SQUARE * [1.0, -1.0]])


def test_bundle_groupoid_orbits_match_the_embodiment_partition(config, lattice, grid2d, service):
    equivalence = EquivalenceService(config)
    c0 = lattice.random_configuration(grid2d, np.random.default_rng(3))
    c1 = equivalence.decomposition.push_forward(c0, SpaceDiffeo.affine([[1.1, 0.2], [0.0, 0.9]], [1.0, 1.0]))
    c2 = lattice.random_configuration(grid2d, np.random.default_rng(4))
    configs = [c0, c1, c2]
    g = service.bundle_groupoid(configs)
    found = service.orbits(g)
    assert found == [[0, 1], [2]]
    assert found == [cls.members for cls in equivalence.partition_into_embodiments(configs)]


def test_body_point_count_matches_image_size(service):
    rng = np.random.default_rng(5)
    for trial in range(20):
        n_points = int(rng.integers(5, 51))
        n_configs = int(rng.integers(2, 6))
        base = rng.uniform(-1.0, 1.0, size=(n_points, 2))
        configs = [base]
        for _ in range(n_configs - 1):
            g = SpaceDiffeo.rotation(rng.uniform(-np.pi, np.pi), rng.uniform(-3.0, 3.0, size=2))
            configs.append(g.apply(base))
        assert service.body_points(configs).count == n_points, f"trial {trial}"
