# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled longest-common-subsequence length over integer sequences."""

from cpython.mem cimport PyMem_Calloc, PyMem_Free


cdef Py_ssize_t _lcs(const int[:] a, const int[:] b) nogil:
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0]
    cdef Py_ssize_t i, j, diag, up, best
    cdef Py_ssize_t *row
    if n == 0 or m == 0:
        return 0
    with gil:
        row = <Py_ssize_t *> PyMem_Calloc(m + 1, sizeof(Py_ssize_t))
        if row == NULL:
            raise MemoryError()
    for i in range(n):
        diag = 0
        for j in range(m):
            up = row[j + 1]
            if a[i] == b[j]:
                best = diag + 1
            elif up >= row[j]:
                best = up
            else:
                best = row[j]
            row[j + 1] = best
            diag = up
    best = row[m]
    with gil:
        PyMem_Free(row)
    return best


def lcs_length_codes(a, b):
    """LCS length of two buffers of C ints (``array('i')`` or similar)."""
    cdef const int[:] va = a
    cdef const int[:] vb = b
    return _lcs(va, vb)
