"""Independent reference implementations for the test suite.

Everything here goes through a different route than the code under test:
the dense matrix is assembled word by word from shift_preimages, spectra
come from numpy's general eigensolver, integrals from scipy quadrature.
"""

import numpy as np

from ruelle_rand.symbolic import all_words, shift_preimages, word_index


def dense_matrix(potential) -> np.ndarray:
    """Full m^n x m^n transfer matrix, assembled entrywise."""
    m, n = potential.alphabet.m, potential.level
    M = m**n
    A = np.zeros((M, M))
    for w in all_words(n, potential.alphabet):
        k = word_index(w)
        for u in shift_preimages(w):
            j = word_index(u)
            A[k, j] += np.exp(potential.phi[j])
    return A


def dense_perron(potential):
    """(lambda, h normalized h[0]=1, nu normalized sum 1) by dense solve."""
    A = dense_matrix(potential)
    lams, vecs = np.linalg.eig(A)
    i = np.argmax(lams.real)
    lam = lams[i].real
    h = vecs[:, i].real
    h = h / h[0]
    lams_t, vecs_t = np.linalg.eig(A.T)
    j = np.argmax(lams_t.real)
    nu = vecs_t[:, j].real
    nu = nu / nu.sum()
    return lam, h, nu
