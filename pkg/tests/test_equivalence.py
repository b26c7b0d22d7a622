import numpy as np
import pytest

from src.errors import BodyMismatch, ProvidedRepresentativeNotInClass
from src.models.diffeo import SpaceDiffeo
from src.services import EquivalenceService
from src.services.equivalence_service import BASE_EMBODIMENT, find_affine_displacement
from src.services.geometry import structured_grid


@pytest.fixture
def service(config) -> EquivalenceService:
    return EquivalenceService(config)


@pytest.fixture
def family(service, lattice, grid2d):
    """c0; c1 displaced from c0; c2 unrelated; c3 with c2's embodiment over c0's base."""
    c0 = lattice.random_configuration(grid2d, np.random.default_rng(1))
    c1 = service.decomposition.push_forward(c0, SpaceDiffeo.rotation(0.7, [2.0, 1.0]))
    c2 = lattice.random_configuration(grid2d, np.random.default_rng(2))
    c3 = service.decomposition.realize(service.decomposition.embodiment_of(c2), c0.base)
    return [c0, c1, c2, c3]


def test_find_affine_displacement_recovers_the_map():
    k1 = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [2.0, 3.0]])
    A = np.array([[2.0, 1.0], [0.0, 1.5]])
    c = np.array([-1.0, 4.0])
    found = find_affine_displacement(k1, k1 @ A.T + c)
    np.testing.assert_allclose(found.matrix, A, atol=1e-12)
    np.testing.assert_allclose(found.translation, c, atol=1e-12)
    assert not found.degenerate


def test_find_affine_displacement_rejects_reflections_and_non_affine_maps():
    k1 = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    assert find_affine_displacement(k1, k1 * [1.0, -1.0]) is None
    bent = k1.copy()
    bent[3] = [1.5, 1.0]
    assert find_affine_displacement(k1, bent) is None


def test_degenerate_correspondence_is_flagged():
    k1 = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    found = find_affine_displacement(k1, k1 + [0.0, 3.0])
    assert found is not None
    assert found.degenerate
    np.testing.assert_allclose(k1 @ found.matrix.T + found.translation, k1 + [0.0, 3.0], atol=1e-12)


def test_compatibility_is_invariant_under_displacement(service, family):
    c0, c1, c2, c3 = family
    assert service.are_compatible(c0, c1)
    assert service.are_compatible(c2, c3)
    assert not service.are_compatible(c0, c2)
    assert service.deviation(c0, c0) == 0.0


def test_partition_into_embodiments(service, family):
    classes = service.partition_into_embodiments(family)
    assert [cls.members for cls in classes] == [[0, 1], [2, 3]]
    assert [cls.representative for cls in classes] == [0, 2]
    assert service.partition_into_embodiments([]) == []


def test_partition_rejects_mixed_bodies(service, lattice, family):
    other = lattice.random_configuration(structured_grid((3, 3)))
    with pytest.raises(BodyMismatch):
        service.partition_into_embodiments([family[0], other])


def test_every_class_maps_to_the_base_embodiment(service, family):
    classes = service.partition_into_embodiments(family)
    report = service.base_embodiment_map(family, classes)
    assert report.image == [BASE_EMBODIMENT]
    assert report.class_to_base == [0, 0]
    assert report.fibers_differ
    # class 1's representative has an unrelated jittered base
    assert report.witnesses[0].note == "affine"
    assert report.witnesses[1].displacement is None


def test_reference_displacements(service, family):
    classes = service.partition_into_embodiments(family)
    system = service.assign_references(family, classes, {0: 1})
    assert system.references == [1, 2]
    g = service.displacement_from_reference(system, family, 0)
    np.testing.assert_allclose(g.apply(family[1].base), family[0].base, atol=1e-9)
    # c3 sits on c0's base, which is not an affine image of c2's
    assert service.displacement_from_reference(system, family, 3) is None
    assert system.reference_for(3) == 2


def test_provided_reference_must_belong_to_the_class(service, family):
    classes = service.partition_into_embodiments(family)
    with pytest.raises(ProvidedRepresentativeNotInClass):
        service.assign_references(family, classes, {1: 0})


def test_partition_recovers_seed_embodiments(service, lattice):
    grid = structured_grid((4, 4))
    for seed in range(20):
        rng = np.random.default_rng(seed)
        seeds = [lattice.random_configuration(grid, rng) for _ in range(3)]
        family, labels = [], []
        for k, c in enumerate(seeds):
            for _ in range(4):
                A = SpaceDiffeo.rotation(rng.uniform(-np.pi, np.pi)).matrix * rng.uniform(0.5, 2.0)
                g = SpaceDiffeo.affine(A, rng.uniform(-5.0, 5.0, size=2))
                family.append(service.decomposition.push_forward(c, g))
                labels.append(k)
        order = rng.permutation(len(family))
        family = [family[i] for i in order]
        labels = [labels[i] for i in order]

        classes = service.partition_into_embodiments(family)
        assert len(classes) == 3, f"seed {seed}"
        for cls in classes:
            assert len({labels[i] for i in cls.members}) == 1, f"false merge for seed {seed}"


@pytest.fixture
def classes_family(service, lattice):
    """Three seed configurations, each with three affine displacements of itself."""
    grid = structured_grid((4, 3))
    rng = np.random.default_rng(31)
    family = []
    for _ in range(3):
        seed = lattice.random_configuration(grid, rng)
        family.append(seed)
        for _ in range(3):
            A = SpaceDiffeo.rotation(rng.uniform(-np.pi, np.pi)).matrix * rng.uniform(0.5, 2.0)
            family.append(service.decomposition.push_forward(seed, SpaceDiffeo.affine(A, rng.uniform(-5.0, 5.0, size=2))))
    return family


def test_compatibility_is_symmetric_and_transitive(service, classes_family):
    n = len(classes_family)
    related = [[service.are_compatible(a, b) for b in classes_family] for a in classes_family]
    for i in range(n):
        assert related[i][i]
        for j in range(n):
            assert related[i][j] == related[j][i]
            assert related[i][j] == (i // 4 == j // 4)
            for k in range(n):
                if related[i][j] and related[j][k]:
                    assert related[i][k]


def test_partition_does_not_depend_on_input_order(service, classes_family):
    def as_sets(members_of, order):
        return {frozenset(order[m] for m in cls.members) for cls in members_of}

    identity = list(range(len(classes_family)))
    expected = as_sets(service.partition_into_embodiments(classes_family), identity)
    assert expected == {frozenset(range(4 * k, 4 * k + 4)) for k in range(3)}
    rng = np.random.default_rng(5)
    for _ in range(10):
        order = [int(i) for i in rng.permutation(len(classes_family))]
        shuffled = [classes_family[i] for i in order]
        assert as_sets(service.partition_into_embodiments(shuffled), order) == expected
