# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels; behaviorally identical to subquest._fastpath_py."""
from cpython.unicode cimport PyUnicode_GET_LENGTH, PyUnicode_READ_CHAR

BACKEND = "cython"


def levenshtein(str a, str b):
    """Unit-cost insert/delete/substitute edit distance."""
    cdef Py_ssize_t la = PyUnicode_GET_LENGTH(a)
    cdef Py_ssize_t lb = PyUnicode_GET_LENGTH(b)
    if a == b:
        return 0
    if la == 0:
        return lb
    if lb == 0:
        return la
    cdef list prev = list(range(lb + 1))
    cdef list curr = [0] * (lb + 1)
    cdef Py_ssize_t i, j
    cdef Py_UCS4 ca
    cdef long cost, d_ins, d_del, d_sub, best
    for i in range(1, la + 1):
        curr[0] = i
        ca = PyUnicode_READ_CHAR(a, i - 1)
        for j in range(1, lb + 1):
            cost = 0 if ca == PyUnicode_READ_CHAR(b, j - 1) else 1
            d_del = <long> prev[j] + 1
            d_ins = <long> curr[j - 1] + 1
            d_sub = <long> prev[j - 1] + cost
            best = d_del if d_del < d_ins else d_ins
            if d_sub < best:
                best = d_sub
            curr[j] = best
        prev, curr = curr, prev
    return prev[lb]


def lcs_pairs(list xs, list ys):
    """Matched (i, j) index pairs of one longest common subsequence.
    Backtracking prefers deletions from `xs`, matching the pure twin."""
    cdef Py_ssize_t m = len(xs)
    cdef Py_ssize_t n = len(ys)
    if m == 0 or n == 0:
        return []
    cdef list table = [[0] * (n + 1) for _ in range(m + 1)]
    cdef Py_ssize_t i, j
    cdef list row, prev_row
    cdef object xi
    cdef long up, left
    for i in range(1, m + 1):
        xi = xs[i - 1]
        row = <list> table[i]
        prev_row = <list> table[i - 1]
        for j in range(1, n + 1):
            if xi == ys[j - 1]:
                row[j] = <long> prev_row[j - 1] + 1
            else:
                up = <long> prev_row[j]
                left = <long> row[j - 1]
                row[j] = up if up >= left else left
    cdef list pairs = []
    i, j = m, n
    while i > 0 and j > 0:
        if xs[i - 1] == ys[j - 1]:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif <long> (<list> table[i - 1])[j] >= <long> (<list> table[i])[j - 1]:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs
