"""Block-tridiagonal LU elimination with 5x5 blocks.

    [D_0 F_0                ] [d_0]   [T_0]
    [E_1 D_1 F_1            ] [d_1]   [T_1]
    [    ...  ...  ...      ] [...] = [...]
    [            E_J-1 D_J-1] [d_J-1] [T_J-1]

Factorization A = L U with L block lower bidiagonal (alpha_j on the diagonal,
E_j below) and U unit block upper bidiagonal (Gamma_j above):

    alpha_0 = D_0,  alpha_j Gamma_j = F_j,  alpha_j = D_j - E_j Gamma_j-1

Each alpha_j is LU-factorized with partial pivoting inside the block; there is
no pivoting across block boundaries.
"""

import logging
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import LinAlgWarning, lu_factor, lu_solve

from utils.errors import InvalidInputError, SingularBlockError

logger = logging.getLogger(__name__)

BLOCK_SIZE = 5


def _frozen(array) -> np.ndarray:
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class BlockTridiagonalSystem:
    """Bands of a block-tridiagonal system; stored as (count, 5, 5) arrays"""

    diag: np.ndarray
    sub: np.ndarray
    sup: np.ndarray
    rhs: np.ndarray

    def __post_init__(self):
        diag = _frozen(self.diag)
        if diag.ndim != 3 or diag.shape[0] < 1 or diag.shape[1:] != (BLOCK_SIZE, BLOCK_SIZE):
            raise InvalidInputError(f"diag must have shape (J, 5, 5) with J >= 1, got {diag.shape}")
        count = diag.shape[0]

        bands = []
        for name, band in (("sub", self.sub), ("sup", self.sup)):
            band = _frozen(band)
            if band.size == 0:
                band = band.reshape(0, BLOCK_SIZE, BLOCK_SIZE)
            if band.shape != (count - 1, BLOCK_SIZE, BLOCK_SIZE):
                raise InvalidInputError(f"{name} must have shape ({count - 1}, 5, 5), got {band.shape}")
            bands.append(band)
        sub, sup = bands

        rhs = _frozen(self.rhs)
        if rhs.shape != (count, BLOCK_SIZE):
            raise InvalidInputError(f"rhs must have shape ({count}, 5), got {rhs.shape}")
        for name, band in (("diag", diag), ("sub", sub), ("sup", sup), ("rhs", rhs)):
            if not np.all(np.isfinite(band)):
                raise InvalidInputError(f"{name} contains non-finite entries")
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "sub", sub)
        object.__setattr__(self, "sup", sup)
        object.__setattr__(self, "rhs", rhs)

    @property
    def block_count(self) -> int:
        return self.diag.shape[0]

    def to_dense(self) -> np.ndarray:
        """Assemble the full (5J x 5J) matrix"""
        size = BLOCK_SIZE * self.block_count
        dense = np.zeros((size, size))
        for j in range(self.block_count):
            rows = slice(BLOCK_SIZE * j, BLOCK_SIZE * (j + 1))
            dense[rows, rows] = self.diag[j]
            if j > 0:
                dense[rows, BLOCK_SIZE * (j - 1) : BLOCK_SIZE * j] = self.sub[j - 1]
            if j < self.block_count - 1:
                dense[rows, BLOCK_SIZE * (j + 1) : BLOCK_SIZE * (j + 2)] = self.sup[j]
        return dense

    def matvec(self, x) -> np.ndarray:
        """Block product A x for x of shape (J, 5)"""
        x = np.asarray(x, dtype=float).reshape(self.block_count, BLOCK_SIZE)
        y = np.einsum("jab,jb->ja", self.diag, x)
        if self.block_count > 1:
            y[1:] += np.einsum("jab,jb->ja", self.sub, x[:-1])
            y[:-1] += np.einsum("jab,jb->ja", self.sup, x[1:])
        return y


@dataclass(frozen=True)
class BlockLuFactorization:
    """Block LU factors; alpha blocks are kept together with their pivoted LU"""

    alpha: np.ndarray
    gamma: np.ndarray
    sub: np.ndarray
    lu: np.ndarray
    pivots: np.ndarray

    @property
    def block_count(self) -> int:
        return self.alpha.shape[0]


def _factor_block(block: np.ndarray, index: int):
    scale = max(1.0, float(np.max(np.abs(block))))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", LinAlgWarning)
        lu, piv = lu_factor(block, check_finite=False)
    if np.min(np.abs(np.diag(lu))) <= np.finfo(float).eps * scale:
        logger.debug("pivot of block %d below %.3e; block is singular", index, np.finfo(float).eps * scale)
        raise SingularBlockError(index)
    return lu, piv


def factorize(system: BlockTridiagonalSystem) -> BlockLuFactorization:
    """Forward recurrence for alpha_j and Gamma_j; never touches the caller's system"""
    count = system.block_count
    alpha = np.empty((count, BLOCK_SIZE, BLOCK_SIZE))
    gamma = np.empty((max(count - 1, 0), BLOCK_SIZE, BLOCK_SIZE))
    lu = np.empty((count, BLOCK_SIZE, BLOCK_SIZE))
    pivots = np.empty((count, BLOCK_SIZE), dtype=np.int32)

    alpha[0] = system.diag[0]
    for j in range(count):
        if j > 0:
            alpha[j] = system.diag[j] - system.sub[j - 1] @ gamma[j - 1]
        lu[j], pivots[j] = _factor_block(alpha[j], j)
        if j < count - 1:
            gamma[j] = lu_solve((lu[j], pivots[j]), system.sup[j], check_finite=False)
    pivots.setflags(write=False)

    return BlockLuFactorization(
        alpha=_frozen(alpha),
        gamma=_frozen(gamma),
        sub=system.sub,
        lu=_frozen(lu),
        pivots=pivots,
    )


def solve(fact: BlockLuFactorization, rhs) -> np.ndarray:
    """Forward sweep alpha_j G_j = T_j - E_j G_j-1, backward sweep d_j = G_j - Gamma_j d_j+1"""
    rhs = np.asarray(rhs, dtype=float)
    count = fact.block_count
    if rhs.shape != (count, BLOCK_SIZE):
        raise InvalidInputError(f"rhs must have shape ({count}, 5), got {rhs.shape}")

    g = np.empty((count, BLOCK_SIZE))
    for j in range(count):
        t = rhs[j] if j == 0 else rhs[j] - fact.sub[j - 1] @ g[j - 1]
        g[j] = lu_solve((fact.lu[j], fact.pivots[j]), t, check_finite=False)

    delta = np.empty_like(g)
    delta[-1] = g[-1]
    for j in range(count - 2, -1, -1):
        delta[j] = g[j] - fact.gamma[j] @ delta[j + 1]
    return delta


def solve_system(system: BlockTridiagonalSystem) -> np.ndarray:
    """Factorize and solve in one call"""
    return solve(factorize(system), system.rhs)
