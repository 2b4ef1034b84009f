import logging

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from components.blocklinalg import BlockTridiagonalSystem, factorize, solve, solve_system
from utils.errors import InvalidInputError, SingularBlockError


def random_system(rng, count):
    diag = rng.normal(size=(count, 5, 5)) + 20.0 * np.eye(5)
    sub = rng.normal(size=(count - 1, 5, 5))
    sup = rng.normal(size=(count - 1, 5, 5))
    rhs = rng.normal(size=(count, 5))
    return BlockTridiagonalSystem(diag=diag, sub=sub, sup=sup, rhs=rhs)


def identity_system(count, rhs=None):
    return BlockTridiagonalSystem(
        diag=np.tile(np.eye(5), (count, 1, 1)),
        sub=np.zeros((count - 1, 5, 5)),
        sup=np.zeros((count - 1, 5, 5)),
        rhs=np.zeros((count, 5)) if rhs is None else rhs,
    )


def test_identity_system():
    rhs = np.arange(20.0).reshape(4, 5)
    system = identity_system(4, rhs)
    fact = factorize(system)
    assert_allclose(fact.alpha, system.diag)
    assert_allclose(fact.gamma, np.zeros((3, 5, 5)))
    assert_allclose(solve(fact, rhs), rhs)


def test_single_diagonal_block():
    system = BlockTridiagonalSystem(
        diag=[2.0 * np.eye(5)], sub=np.zeros((0, 5, 5)), sup=[], rhs=[[2.0, 4.0, 6.0, 8.0, 10.0]]
    )
    fact = factorize(system)
    assert fact.gamma.shape == (0, 5, 5)
    assert_allclose(fact.alpha[0], 2.0 * np.eye(5))
    assert_allclose(solve_system(system), [[1.0, 2.0, 3.0, 4.0, 5.0]])


def test_lu_factors_reassemble_the_matrix():
    rng = np.random.default_rng(3)
    system = random_system(rng, 3)
    fact = factorize(system)

    lower = np.zeros((15, 15))
    upper = np.eye(15)
    for j in range(3):
        rows = slice(5 * j, 5 * j + 5)
        lower[rows, rows] = fact.alpha[j]
        if j > 0:
            lower[rows, 5 * (j - 1) : 5 * j] = system.sub[j - 1]
        if j < 2:
            upper[rows, 5 * (j + 1) : 5 * (j + 2)] = fact.gamma[j]
    dense = system.to_dense()
    assert np.max(np.abs(lower @ upper - dense)) <= 1e-10 * np.max(np.abs(dense))


def test_random_systems_match_dense_solve():
    rng = np.random.default_rng(20240611)
    for _ in range(200):
        system = random_system(rng, int(rng.integers(1, 13)))
        dense = system.to_dense()
        assert np.linalg.cond(dense) < 1e6
        expected = np.linalg.solve(dense, system.rhs.ravel())
        delta = solve_system(system).ravel()
        assert np.linalg.norm(delta - expected) <= 1e-8 * np.linalg.norm(expected)


def test_residual_bound():
    rng = np.random.default_rng(11)
    system = random_system(rng, 9)
    delta = solve_system(system)
    residual = np.max(np.abs(system.matvec(delta) - system.rhs))
    a_norm = np.max(np.sum(np.abs(system.to_dense()), axis=1))
    assert residual <= 1e-10 * (a_norm * np.max(np.abs(delta)) + np.max(np.abs(system.rhs)))


def test_solve_is_linear():
    rng = np.random.default_rng(5)
    system = random_system(rng, 6)
    fact = factorize(system)
    r1, r2 = rng.normal(size=(2, 6, 5))
    combined = solve(fact, 2.5 * r1 - 0.75 * r2)
    assert_allclose(combined, 2.5 * solve(fact, r1) - 0.75 * solve(fact, r2), rtol=1e-10, atol=1e-10)


def test_solve_is_deterministic():
    rng = np.random.default_rng(7)
    system = random_system(rng, 5)
    assert_array_equal(solve_system(system), solve_system(system))


def test_caller_system_is_untouched():
    rng = np.random.default_rng(9)
    diag = rng.normal(size=(4, 5, 5)) + 20.0 * np.eye(5)
    original = diag.copy()
    system = BlockTridiagonalSystem(diag=diag, sub=np.ones((3, 5, 5)), sup=np.ones((3, 5, 5)), rhs=np.ones((4, 5)))
    solve_system(system)
    assert_array_equal(diag, original)
    assert_array_equal(system.diag, original)
    assert not system.diag.flags.writeable


def test_singular_block_reports_its_index(caplog):
    rng = np.random.default_rng(13)
    system = random_system(rng, 5)
    diag = np.array(system.diag)
    sub = np.array(system.sub)
    diag[2] = 0.0
    sub[1] = 0.0
    singular = BlockTridiagonalSystem(diag=diag, sub=sub, sup=system.sup, rhs=system.rhs)
    with caplog.at_level(logging.DEBUG, logger="components.blocklinalg"):
        with pytest.raises(SingularBlockError) as excinfo:
            factorize(singular)
    assert excinfo.value.block_index == 2
    assert "block 2" in caplog.text


def test_matvec_matches_dense():
    rng = np.random.default_rng(17)
    system = random_system(rng, 4)
    x = rng.normal(size=(4, 5))
    assert_allclose(system.matvec(x).ravel(), system.to_dense() @ x.ravel(), rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize(
    "changes",
    [
        {"diag": np.zeros((3, 4, 4))},
        {"sub": np.zeros((3, 5, 5))},
        {"sup": np.zeros((1, 5, 5))},
        {"rhs": np.zeros((3, 4))},
    ],
)
def test_inconsistent_shapes_are_rejected(changes):
    bands = dict(diag=np.tile(np.eye(5), (3, 1, 1)), sub=np.zeros((2, 5, 5)), sup=np.zeros((2, 5, 5)), rhs=np.zeros((3, 5)))
    bands.update(changes)
    with pytest.raises(InvalidInputError):
        BlockTridiagonalSystem(**bands)


def test_non_finite_entries_are_rejected():
    rhs = np.zeros((3, 5))
    rhs[1, 2] = np.nan
    with pytest.raises(InvalidInputError, match="rhs"):
        identity_system(3, rhs)


def test_rhs_dimension_mismatch_on_solve():
    fact = factorize(identity_system(3))
    with pytest.raises(InvalidInputError):
        solve(fact, np.zeros((4, 5)))
