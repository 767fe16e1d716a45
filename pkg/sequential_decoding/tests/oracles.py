"""Reference computations the tests compare against, written with plain numpy."""
import itertools
import math

import numpy as np

from sequential_decoding.ensembles import Ensemble


def random_density_matrix(rng, dim, rank=None):
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_ensemble(rng, size=2, dim=2):
    probs = rng.dirichlet(np.ones(size))
    return Ensemble(probs, tuple(random_density_matrix(rng, dim) for _ in range(size)))


def kron_all(factors):
    out = np.eye(1, dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def window_projector(factors, lo, hi):
    """Projector onto eigenvector products of factor_1 (x) ... (x) factor_n with log2 eigenvalue product in [lo, hi].

    Built from numpy.linalg.eigh directly so tests do not lean on the package's own spectral code.
    """
    pieces = [np.linalg.eigh(f) for f in factors]
    dim = int(np.prod([f.shape[0] for f in factors]))
    p = np.zeros((dim, dim), dtype=complex)
    for index in itertools.product(*[range(f.shape[0]) for f in factors]):
        values = [pieces[site][0][k] for site, k in enumerate(index)]
        if min(values) <= 1e-12:
            continue
        log = sum(math.log2(v) for v in values)
        if lo <= log <= hi:
            v = kron_all([pieces[site][1][:, [k]] for site, k in enumerate(index)])
            p += v @ v.conj().T
    return p


def site_permutation(perm, local_dim):
    """Unitary sending |x_0 ... x_{n-1}> to |x_perm[0] ... x_perm[n-1]>."""
    n = len(perm)
    dim = local_dim ** n
    u = np.zeros((dim, dim))
    for index in itertools.product(range(local_dim), repeat=n):
        moved = tuple(index[perm[k]] for k in range(n))
        u[np.ravel_multi_index(moved, (local_dim,) * n), np.ravel_multi_index(index, (local_dim,) * n)] = 1.0
    return u
