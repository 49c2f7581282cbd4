"""Pure-numpy versions of the compiled kernels."""
import numpy as np


def wishart_coords(Z, basis):
    G = np.einsum("mjp,mjq->mpq", Z, Z)
    return np.einsum("mpq,apq->ma", G, basis)


def centered_moments(C, mean):
    Y = C - mean
    S2 = Y.T @ Y
    Y2 = Y * Y
    S4 = Y2.T @ Y2
    return S2, S4
