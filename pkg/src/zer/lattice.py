"""Block-circulant bookkeeping for translation-invariant matrices on a ring.

Modes are ordered cell-major, ``index = cell * m + orbital``.  A
translation-invariant matrix ``M`` is fixed by its first block row
``B[d] = M[cell x, cell x + d]`` (indices mod ``L``), and its Bloch form is

    M(k) = sum_d exp(i k d) B[d],       k = 2 pi j / L,

which is the matrix of ``M`` between Bloch states ``exp(i k x) / sqrt(L)``.
"""

import numpy as np


def momenta(n_cells):
    return 2 * np.pi * np.arange(n_cells) / n_cells


def circular_distance(a, b, n_cells):
    """Signed distance ``a - b`` folded into ``[-L/2, L/2)``."""
    return (np.asarray(a) - b + n_cells / 2) % n_cells - n_cells / 2


def bloch_from_blocks(blocks, n_cells):
    """``M(k)`` for every momentum from a ``{d: B[d]}`` mapping (d taken mod L)."""
    ks = momenta(n_cells)
    first = next(iter(blocks.values()))
    out = np.zeros((n_cells,) + first.shape, dtype=complex)
    for d, B in blocks.items():
        out += np.exp(1j * ks * d)[:, None, None] * B
    return out


def blocks_from_bloch(mk):
    """Inverse of :func:`bloch_from_blocks`: array ``B[d]`` for ``d = 0..L-1``."""
    return np.fft.fft(mk, axis=0) / mk.shape[0]


def circulant(bd):
    """Dense ``(L*m, L*p)`` matrix with block ``[x, y] = bd[(y - x) mod L]``."""
    n_cells, m, p = bd.shape
    x = np.arange(n_cells)
    d = (x[None, :] - x[:, None]) % n_cells
    return bd[d].transpose(0, 2, 1, 3).reshape(n_cells * m, n_cells * p)


def dense_from_bloch(mk):
    return circulant(blocks_from_bloch(mk))


def first_block_row(matrix, m):
    n_cells = matrix.shape[0] // m
    return matrix[:m].reshape(m, n_cells, m).transpose(1, 0, 2)


def translation_defect(matrix, m):
    """Max-norm distance of ``matrix`` from its block-circulant projection."""
    return float(np.abs(matrix - circulant(first_block_row(matrix, m))).max())


def bloch_from_dense(matrix, m):
    bd = first_block_row(matrix, m)
    n_cells = bd.shape[0]
    # M(k) = sum_d e^{ikd} B[d]  ==  L * ifft over d
    return np.fft.ifft(bd, axis=0) * n_cells


def translation_operator(n_cells, m, shift=1):
    """Unitary ``T`` with ``(T v)[cell x] = v[cell x - shift]``."""
    perm = (np.arange(n_cells) - shift) % n_cells
    idx = (perm[:, None] * m + np.arange(m)[None, :]).ravel()
    t = np.zeros((n_cells * m, n_cells * m))
    t[np.arange(n_cells * m), idx] = 1.0
    return t
