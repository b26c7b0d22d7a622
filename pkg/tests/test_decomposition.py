import numpy as np
import pytest

from src.config import RunConfig
from src.errors import BodyMismatch, DegenerateCell, DiffeoNotInvertible, DiffeoValidationError
from src.models.configuration import Configuration
from src.models.diffeo import SpaceDiffeo
from src.models.embodiment import Embodiment
from src.services import CompatibilityService, DecompositionService
from src.services.decomposition_service import relative_deviation
from src.services.geometry import structured_grid


@pytest.fixture
def service(config) -> DecompositionService:
    return DecompositionService(config)


def test_decompose_multiplies_back(service, config, random_config):
    result = service.decompose(random_config)
    assert result.residual <= config.tol_decomp
    np.testing.assert_allclose(
        result.compatible.field @ result.anelastic.f_ae, random_config.field, atol=1e-12
    )
    assert CompatibilityService(config).is_holonomic(result.compatible).holonomic


def test_decompose_in_3d(service, config, random_config3d):
    result = service.decompose(random_config3d)
    assert result.residual <= config.tol_decomp
    assert not result.anelastic.is_identity()


def test_compatible_configuration_has_identity_embodiment(service, config, random_config):
    compatible = service.decompose(random_config).compatible
    assert service.embodiment_of(compatible).is_identity(config.tol_rel)


def test_affine_push_forward_keeps_the_embodiment(service, random_config):
    g = SpaceDiffeo.affine([[1.2, 0.3], [-0.1, 0.9]], [4.0, -2.0])
    moved = service.push_forward(random_config, g)
    np.testing.assert_allclose(moved.base, random_config.base @ g.matrix.T + g.translation)
    deviation = service.compare_embodiments(
        service.embodiment_of(random_config), service.embodiment_of(moved)
    )
    assert deviation < 1e-12


def test_user_push_forward_uses_the_tangent_at_barycenters(service, grid2d):
    def point_map(y):
        return y + 0.01 * np.column_stack([np.sin(y[:, 1]), np.zeros(len(y))])

    def tangent_map(y):
        t = np.broadcast_to(np.eye(2), (len(y), 2, 2)).copy()
        t[:, 0, 1] = 0.01 * np.cos(y[:, 1])
        return t

    g = SpaceDiffeo.user(2, point_map, tangent_map, name="wobble")
    configuration = Configuration.identity(grid2d)
    moved = service.push_forward(configuration, g)
    np.testing.assert_allclose(moved.base, point_map(grid2d.ref_coords))
    expected = tangent_map(grid2d.barycenters())
    np.testing.assert_allclose(moved.field, expected)


def test_user_diffeo_with_wrong_tangent_is_rejected():
    with pytest.raises(DiffeoValidationError, match="finite differences"):
        SpaceDiffeo.user(2, lambda y: 2.0 * y, lambda y: np.broadcast_to(np.eye(2), (len(y), 2, 2)))


def test_user_diffeo_without_inverse_cannot_be_inverted():
    g = SpaceDiffeo.user(
        2, lambda y: y + 1.0, lambda y: np.broadcast_to(np.eye(2), (len(y), 2, 2)).copy()
    )
    assert not g.invertible
    with pytest.raises(DiffeoNotInvertible):
        g.inverse()


def test_affine_diffeo_requires_positive_determinant():
    with pytest.raises(DiffeoValidationError):
        SpaceDiffeo.affine([[1.0, 0.0], [0.0, -1.0]])


def test_affine_compose_and_inverse():
    g = SpaceDiffeo.rotation(0.3, [1.0, 2.0])
    h = SpaceDiffeo.translation_by([0.5, -0.5])
    y = np.array([[0.2, 0.7], [3.0, -1.0]])
    np.testing.assert_allclose(g.compose(h).apply(y), g.apply(h.apply(y)))
    np.testing.assert_allclose(g.inverse().apply(g.apply(y)), y, atol=1e-14)


def test_push_forward_with_mismatched_dimension(service, random_config):
    with pytest.raises(BodyMismatch):
        service.push_forward(random_config, SpaceDiffeo.identity(3))


def test_ill_conditioned_tangent_is_degenerate(random_config):
    strict = DecompositionService(RunConfig(cond_max=1.0 + 1e-9))
    with pytest.raises(DegenerateCell, match="ill-conditioned"):
        strict.decompose(random_config)


def test_realize_round_trips_the_embodiment(service, random_config):
    embodiment = service.embodiment_of(random_config)
    base = random_config.base * 1.5
    realized = service.realize(embodiment, base)
    np.testing.assert_allclose(realized.base, base)
    assert service.compare_embodiments(embodiment, service.embodiment_of(realized)) < 1e-12


def test_view_I_total_is_the_tangent_map(service, random_config):
    factors = service.view_I_factors(random_config)
    T = service.decompose(random_config).compatible.field
    assert relative_deviation(T, factors.total) < 1e-12
    assert factors.pack is random_config


def test_material_vectors_pull_back_through_the_tangent_map(service):
    body = structured_grid((2, 2))
    configuration = Configuration(body, body.ref_coords * 3.0, np.broadcast_to(3.0 * np.eye(2), (8, 2, 2)))
    np.testing.assert_allclose(service.material_vectors(configuration, 0, [3.0, 6.0]), [[1.0, 2.0]])


def test_embodiments_form_a_group(random_config, service):
    e = service.embodiment_of(random_config)
    identity = Embodiment.identity(random_config.body)
    assert e.compose(e.inverse()).is_identity()
    assert service.compare_embodiments(e.compose(identity), e) == 0.0


def _random_affine(rng: np.random.Generator, dim: int) -> SpaceDiffeo:
    while True:
        A = np.eye(dim) + 0.5 * rng.uniform(-1.0, 1.0, size=(dim, dim))
        if np.linalg.det(A) > 0.1:
            return SpaceDiffeo.affine(A, rng.uniform(-10.0, 10.0, size=dim))


def test_factorization_over_many_random_configurations(lattice, config, service):
    rng = np.random.default_rng(2024)
    for trial in range(200):
        if trial % 2:
            shape = tuple(int(s) for s in rng.integers(1, 4, size=3))
        else:
            shape = tuple(int(s) for s in rng.integers(2, 12, size=2))
        configuration = lattice.random_configuration(structured_grid(shape), rng)
        result = service.decompose(configuration)
        assert result.residual <= config.tol_decomp, f"trial {trial} on grid {shape}"


def test_embodiment_ignores_affine_displacements(lattice, service, grid2d, grid3d):
    rng = np.random.default_rng(99)
    for body in (grid2d, grid3d):
        configuration = lattice.random_configuration(body, rng)
        reference = service.embodiment_of(configuration)
        for _ in range(100):
            moved = service.push_forward(configuration, _random_affine(rng, body.dim))
            assert service.compare_embodiments(reference, service.embodiment_of(moved)) < 1e-10


def _eye_stack(y: np.ndarray) -> np.ndarray:
    return np.broadcast_to(np.eye(2), (len(y), 2, 2)).copy()


def _waves():
    def point_map(y):
        return y + 0.1 * np.column_stack([np.sin(2.0 * y[:, 1]), np.sin(2.0 * y[:, 0])])

    def tangent_map(y):
        t = _eye_stack(y)
        t[:, 0, 1] = 0.2 * np.cos(2.0 * y[:, 1])
        t[:, 1, 0] = 0.2 * np.cos(2.0 * y[:, 0])
        return t

    return point_map, tangent_map


def _parabolic_shear():
    def point_map(y):
        return y + np.column_stack([0.1 * y[:, 1] ** 2, np.zeros(len(y))])

    def tangent_map(y):
        t = _eye_stack(y)
        t[:, 0, 1] = 0.2 * y[:, 1]
        return t

    return point_map, tangent_map


def _exponential_shear():
    def point_map(y):
        return y + np.column_stack([0.1 * np.exp(y[:, 1]), np.zeros(len(y))])

    def tangent_map(y):
        t = _eye_stack(y)
        t[:, 0, 1] = 0.1 * np.exp(y[:, 1])
        return t

    return point_map, tangent_map


def _bilinear():
    def point_map(y):
        xy = y[:, 0] * y[:, 1]
        return y + 0.05 * np.column_stack([xy, xy])

    def tangent_map(y):
        t = _eye_stack(y)
        t[:, 0, 0] += 0.05 * y[:, 1]
        t[:, 0, 1] = 0.05 * y[:, 0]
        t[:, 1, 0] = 0.05 * y[:, 1]
        t[:, 1, 1] += 0.05 * y[:, 0]
        return t

    return point_map, tangent_map


def _radial_cubic():
    def point_map(y):
        r2 = np.sum(y**2, axis=1)
        return y * (1.0 + 0.05 * r2)[:, None]

    def tangent_map(y):
        r2 = np.sum(y**2, axis=1)
        return (1.0 + 0.05 * r2)[:, None, None] * np.eye(2) + 0.1 * np.einsum("ni,nj->nij", y, y)

    return point_map, tangent_map


@pytest.mark.parametrize(
    "name, maps",
    [
        ("waves", _waves),
        ("parabolic-shear", _parabolic_shear),
        ("exponential-shear", _exponential_shear),
        ("bilinear", _bilinear),
        ("radial-cubic", _radial_cubic),
    ],
)
def test_non_affine_displacement_error_shrinks_with_refinement(service, name, maps):
    point_map, tangent_map = maps()
    g = SpaceDiffeo.user(2, point_map, tangent_map, name=name)
    deviations = []
    for n in (4, 8, 16, 32):
        configuration = Configuration.identity(structured_grid((n, n), spacing=1.0 / n))
        f_ae = service.embodiment_of(service.push_forward(configuration, g)).f_ae
        deviations.append(relative_deviation(np.broadcast_to(np.eye(2), f_ae.shape), f_ae))
    assert all(d > 0 for d in deviations)
    # first order in the mesh spacing
    for coarse, fine in zip(deviations, deviations[1:]):
        assert coarse / fine >= 1.5


def test_push_forward_then_back_restores_the_configuration(service, random_config):
    g = SpaceDiffeo.rotation(np.pi / 2.0, [1.0, -3.0])
    back = service.push_forward(service.push_forward(random_config, g), g.inverse())
    np.testing.assert_allclose(back.base, random_config.base, atol=1e-12)
    np.testing.assert_allclose(back.field, random_config.field, atol=1e-12)


def test_identity_embodiment_exactly_when_holonomic(lattice, config, service):
    compatibility = CompatibilityService(config)
    rng = np.random.default_rng(11)
    for trial in range(20):
        shape = tuple(int(s) for s in rng.integers(2, 7, size=2))
        plastic = lattice.random_configuration(structured_grid(shape), rng)
        compatible = service.decompose(plastic).compatible
        for configuration in (plastic, compatible):
            holonomic = compatibility.is_holonomic(configuration).holonomic
            assert service.embodiment_of(configuration).is_identity(config.tol_rel) == holonomic, f"trial {trial}"


def test_affine_tangent_ignores_the_point():
    g = SpaceDiffeo.affine([[1.2, 0.3], [-0.1, 0.9]], [4.0, -2.0])
    rng = np.random.default_rng(3)
    v = rng.uniform(-1.0, 1.0, size=2)
    points = rng.uniform(-10.0, 10.0, size=(10, 2))
    first = g.apply_tangent(points[0], v)
    np.testing.assert_allclose(first, g.matrix @ v, rtol=1e-14, atol=1e-15)
    for y in points[1:]:
        np.testing.assert_array_equal(g.apply_tangent(y, v), first)
