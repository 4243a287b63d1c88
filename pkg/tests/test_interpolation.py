import numpy as np
import pytest
from numpy.testing import assert_allclose

from polybo.errors import InsufficientNodesError, LengthMismatchError, OutOfBoundsError
from polybo.interpolation import (
    DomainTransform,
    NodeSequence,
    PolynomialSurrogate,
    chebyshev_lobatto,
    dds_fit,
    lagrange_basis_matrix,
    lagrange_to_newton,
    leja_chebyshev_nodes,
    leja_order,
    newton_evaluate,
    newton_matrix,
    unisolvent_grid,
)
from polybo.multiindex import build_multi_index_set

GRID = [(m, n, p) for m in (1, 2, 3) for n in range(1, 6) for p in (1, 2, np.inf)]


def test_chebyshev_lobatto_values():
    assert_allclose(chebyshev_lobatto(2).values, [1.0, 0.0, -1.0], atol=1e-15)
    assert_allclose(chebyshev_lobatto(1).values, [1.0, -1.0])
    assert np.any(np.isclose(chebyshev_lobatto(4).values, 0.7071067811865476))
    assert_allclose(chebyshev_lobatto(0).values, [1.0])


def test_leja_order_examples():
    assert_allclose(leja_order(NodeSequence([1.0, 0.0, -1.0])).values, [1.0, -1.0, 0.0])
    assert_allclose(leja_order(NodeSequence([1.0, -1.0])).values, [1.0, -1.0])
    assert_allclose(leja_order(NodeSequence([-1.0, 1.0])).values, [1.0, -1.0])
    assert_allclose(leja_order(NodeSequence([1.0])).values, [1.0])


def test_leja_order_ties_go_to_larger_node():
    r = np.sqrt(0.5)
    assert_allclose(leja_chebyshev_nodes(4).values, [1.0, -1.0, 0.0, r, -r], atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 5, 8, 13])
def test_leja_order_is_permutation(n):
    assert_allclose(np.sort(leja_chebyshev_nodes(n).values), np.sort(chebyshev_lobatto(n).values))


def test_node_sequence_validation():
    with pytest.raises(ValueError):
        NodeSequence([0.5, 0.5])
    with pytest.raises(ValueError):
        NodeSequence([1.5])
    with pytest.raises(ValueError):
        NodeSequence([])


def test_unisolvent_grid_lookup():
    nodes = NodeSequence([1.0, -1.0, 0.0])
    grid = unisolvent_grid(build_multi_index_set(1, 2, np.inf), nodes)
    assert_allclose(grid.points.ravel(), [1.0, -1.0, 0.0])

    grid = unisolvent_grid(build_multi_index_set(2, 1, np.inf), NodeSequence([1.0, -1.0]))
    assert_allclose(grid.points, [[1, 1], [-1, 1], [1, -1], [-1, -1]])


def test_unisolvent_grid_needs_enough_nodes():
    with pytest.raises(InsufficientNodesError):
        unisolvent_grid(build_multi_index_set(2, 3, 2), leja_chebyshev_nodes(2))


def test_newton_evaluate_examples():
    index_set = build_multi_index_set(2, 1, np.inf)
    nodes = NodeSequence([1.0, -1.0, 0.0])
    constant = PolynomialSurrogate(index_set, nodes, [1.0, 0.0, 0.0, 0.0])
    assert newton_evaluate(constant, np.array([0.3, -0.2])) == pytest.approx(1.0)

    cross = PolynomialSurrogate(index_set, nodes, [0.0, 0.0, 0.0, 1.0])
    assert newton_evaluate(cross, np.array([0.0, 0.0])) == pytest.approx(1.0)


def test_newton_matrix_shape():
    index_set = build_multi_index_set(3, 2, 2)
    matrix = newton_matrix(index_set, leja_chebyshev_nodes(2), np.zeros((7, 3)))
    assert matrix.shape == (7, len(index_set))


def test_dds_fit_linear_one_dimensional():
    surrogate = dds_fit(build_multi_index_set(1, 1, 1), NodeSequence([1.0, -1.0]), [1.0, -1.0])
    assert_allclose(surrogate.newton_coefficients, [1.0, 1.0])
    assert surrogate.evaluate_cube(np.array([0.25])) == pytest.approx(0.25)


def test_dds_fit_constant():
    index_set = build_multi_index_set(3, 3, 2)
    surrogate = dds_fit(index_set, leja_chebyshev_nodes(3), np.full(len(index_set), 7.0))
    expected = np.zeros(len(index_set))
    expected[0] = 7.0
    assert_allclose(surrogate.newton_coefficients, expected, atol=1e-12)


def test_dds_fit_reproduces_coordinate_function():
    index_set = build_multi_index_set(2, 1, 1)
    nodes = leja_chebyshev_nodes(1)
    grid = unisolvent_grid(index_set, nodes)
    surrogate = dds_fit(index_set, nodes, grid.points[:, 0])
    assert surrogate.evaluate_cube(np.array([0.3, -0.7])) == pytest.approx(0.3, abs=1e-12)


def test_dds_fit_product_on_tensor_grid():
    index_set = build_multi_index_set(2, 2, np.inf)
    nodes = leja_chebyshev_nodes(2)
    grid = unisolvent_grid(index_set, nodes)
    values = grid.points[:, 0] * grid.points[:, 1]
    surrogate = dds_fit(index_set, nodes, values)
    assert_allclose(surrogate.evaluate_cube(grid.points), values, atol=1e-13)


def test_dds_fit_length_mismatch():
    index_set = build_multi_index_set(2, 2, 2)
    with pytest.raises(LengthMismatchError):
        dds_fit(index_set, leja_chebyshev_nodes(2), np.ones(len(index_set) + 1))


@pytest.mark.parametrize("m,n,p", GRID)
def test_interpolation_is_exact_on_the_polynomial_space(m, n, p, rng, random_polynomial):
    index_set = build_multi_index_set(m, n, p)
    nodes = leja_chebyshev_nodes(n)
    grid = unisolvent_grid(index_set, nodes)
    g = random_polynomial(index_set)

    surrogate = dds_fit(index_set, nodes, g(grid.points))
    probe = rng.uniform(-1.0, 1.0, size=(100, m))
    truth = g(probe)
    scale = max(1.0, np.max(np.abs(truth)))
    assert np.max(np.abs(surrogate.evaluate_cube(probe) - truth)) <= 1e-10 * scale


def test_error_decays_spectrally_for_analytic_functions(rng):
    def f(points):
        return np.exp(points[:, 0] + points[:, 1])

    probe = rng.uniform(-1.0, 1.0, size=(500, 2))
    errors = {}
    for n in (2, 6):
        index_set = build_multi_index_set(2, n, 2)
        nodes = leja_chebyshev_nodes(n)
        surrogate = dds_fit(index_set, nodes, f(unisolvent_grid(index_set, nodes).points))
        errors[n] = np.max(np.abs(surrogate.evaluate_cube(probe) - f(probe)))
    assert errors[6] <= errors[2] / 10.0


@pytest.mark.parametrize("m,n,p", GRID)
def test_lagrange_basis_is_kronecker_delta_on_grid(m, n, p):
    index_set = build_multi_index_set(m, n, p)
    nodes = leja_chebyshev_nodes(n)
    grid = unisolvent_grid(index_set, nodes)
    assert_allclose(lagrange_basis_matrix(index_set, nodes, grid.points), np.eye(len(index_set)), atol=1e-10)


def test_lagrange_partition_of_unity(rng):
    index_set = build_multi_index_set(2, 4, 2)
    points = rng.uniform(-1.0, 1.0, size=(25, 2))
    rows = lagrange_basis_matrix(index_set, leja_chebyshev_nodes(4), points)
    assert_allclose(rows.sum(axis=1), 1.0, atol=1e-10)


def test_lagrange_hat_functions():
    row = lagrange_basis_matrix(build_multi_index_set(1, 1, np.inf), NodeSequence([1.0, -1.0]), np.array([[0.0]]))
    assert_allclose(row, [[0.5, 0.5]])


def test_lagrange_basis_empty_points():
    index_set = build_multi_index_set(2, 2, 2)
    assert lagrange_basis_matrix(index_set, leja_chebyshev_nodes(2), np.empty((0, 2))).shape == (0, 6)


def test_lagrange_to_newton_is_cached_and_read_only():
    index_set = build_multi_index_set(2, 3, 2)
    nodes = leja_chebyshev_nodes(3)
    transform = lagrange_to_newton(index_set, nodes)
    assert transform is lagrange_to_newton(index_set, nodes)
    assert not transform.flags.writeable


def test_surrogate_lagrange_coefficients_are_grid_values(rng):
    index_set = build_multi_index_set(2, 3, 2)
    nodes = leja_chebyshev_nodes(3)
    values = rng.normal(size=len(index_set))
    assert_allclose(dds_fit(index_set, nodes, values).lagrange_coefficients, values, atol=1e-12)


def test_surrogate_with_domain_transform():
    index_set = build_multi_index_set(1, 1, 1)
    nodes = leja_chebyshev_nodes(1)
    surrogate = dds_fit(index_set, nodes, [1.0, -1.0]).with_domain(DomainTransform([0.0], [10.0]))
    assert surrogate(np.array([[5.0], [10.0]])) == pytest.approx([0.0, 1.0])


def test_domain_transform_examples():
    transform = DomainTransform([-5.0, 0.0], [5.0, 10.0])
    assert_allclose(transform.forward(np.array([0.0, 10.0])), [0.0, 1.0])
    assert_allclose(transform.forward(np.array([-5.0, 0.0])), [-1.0, -1.0])

    log_transform = DomainTransform([1.0], [100.0], [True])
    assert log_transform.forward(np.array([10.0]))[0] == pytest.approx(0.0, abs=1e-15)
    assert log_transform.inverse(np.array([0.0]))[0] == pytest.approx(10.0)


def test_domain_transform_round_trip(rng):
    transform = DomainTransform([-500.0, 1e-3], [500.0, 1e3], [False, True])
    x = np.column_stack([rng.uniform(-500, 500, 50), 10 ** rng.uniform(-3, 3, 50)])
    assert_allclose(transform.inverse(transform.forward(x)), x, rtol=1e-12)


def test_domain_transform_errors():
    transform = DomainTransform([-5.0], [5.0])
    with pytest.raises(OutOfBoundsError):
        transform.forward(np.array([5.1]))
    with pytest.raises(OutOfBoundsError):
        DomainTransform([1.0], [1.0])
    with pytest.raises(OutOfBoundsError):
        DomainTransform([0.0], [10.0], [True])
