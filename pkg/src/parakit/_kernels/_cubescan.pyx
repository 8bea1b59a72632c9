"""Compiled cube-scan kernels.

scan2/scan3 sweep every cube of one level (fixed radius): per-axis window
starts and weight matrices define each cube's cells and quadrature
weights. mode 0 scores a cube by the weighted mean absolute deviation
about its weighted mean; mode 1 minimizes the deviation over the
centering constant (lower weighted median). Returns the best score and
the row-major index of the best cube.
"""

from libc.math cimport fabs
from libc.stdlib cimport free, malloc, qsort


ctypedef struct Pair:
    double v
    double w


cdef int pair_cmp(const void* a, const void* b) noexcept nogil:
    cdef double av = (<const Pair*> a).v
    cdef double bv = (<const Pair*> b).v
    if av < bv:
        return -1
    elif av > bv:
        return 1
    return 0


cdef inline double median_objective(Pair* scratch, Py_ssize_t cnt, double wsum) noexcept nogil:
    cdef Py_ssize_t m
    cdef double half = 0.5 * wsum
    cdef double cum = 0.0
    cdef double c = scratch[cnt - 1].v
    cdef double acc = 0.0
    qsort(scratch, cnt, sizeof(Pair), pair_cmp)
    for m in range(cnt):
        cum += scratch[m].w
        if cum >= half:
            c = scratch[m].v
            break
    for m in range(cnt):
        acc += scratch[m].w * fabs(scratch[m].v - c)
    return acc / wsum


def scan2(const double[:, ::1] values,
          const long long[::1] s0, const long long[::1] s1,
          const double[:, ::1] w0, const double[:, ::1] w1,
          int mode):
    cdef Py_ssize_t P0 = s0.shape[0], P1 = s1.shape[0]
    cdef Py_ssize_t L0 = w0.shape[1], L1 = w1.shape[1]
    cdef Py_ssize_t p0, p1, a, b, i0, i1, cnt
    cdef double W, S, wa, w, u, mean, acc, val, best
    cdef Py_ssize_t best_idx = 0
    cdef Pair* scratch = NULL
    if mode == 1:
        scratch = <Pair*> malloc(L0 * L1 * sizeof(Pair))
        if scratch == NULL:
            raise MemoryError()
    best = -1.0
    try:
        with nogil:
            for p0 in range(P0):
                i0 = s0[p0]
                for p1 in range(P1):
                    i1 = s1[p1]
                    W = 0.0
                    if mode == 0:
                        S = 0.0
                        for a in range(L0):
                            wa = w0[p0, a]
                            if wa == 0.0:
                                continue
                            for b in range(L1):
                                w = wa * w1[p1, b]
                                if w == 0.0:
                                    continue
                                W += w
                                S += w * values[i0 + a, i1 + b]
                        if W <= 0.0:
                            val = 0.0
                        else:
                            mean = S / W
                            acc = 0.0
                            for a in range(L0):
                                wa = w0[p0, a]
                                if wa == 0.0:
                                    continue
                                for b in range(L1):
                                    w = wa * w1[p1, b]
                                    if w == 0.0:
                                        continue
                                    acc += w * fabs(values[i0 + a, i1 + b] - mean)
                            val = acc / W
                    else:
                        cnt = 0
                        for a in range(L0):
                            wa = w0[p0, a]
                            if wa == 0.0:
                                continue
                            for b in range(L1):
                                w = wa * w1[p1, b]
                                if w == 0.0:
                                    continue
                                scratch[cnt].v = values[i0 + a, i1 + b]
                                scratch[cnt].w = w
                                W += w
                                cnt += 1
                        if cnt == 0 or W <= 0.0:
                            val = 0.0
                        else:
                            val = median_objective(scratch, cnt, W)
                    if val > best:
                        best = val
                        best_idx = p0 * P1 + p1
    finally:
        if scratch != NULL:
            free(scratch)
    return best, best_idx


def scan3(const double[:, :, ::1] values,
          const long long[::1] s0, const long long[::1] s1, const long long[::1] s2,
          const double[:, ::1] w0, const double[:, ::1] w1, const double[:, ::1] w2,
          int mode):
    cdef Py_ssize_t P0 = s0.shape[0], P1 = s1.shape[0], P2 = s2.shape[0]
    cdef Py_ssize_t L0 = w0.shape[1], L1 = w1.shape[1], L2 = w2.shape[1]
    cdef Py_ssize_t p0, p1, p2, a, b, c, i0, i1, i2, cnt
    cdef double W, S, wa, wab, w, mean, acc, val, best
    cdef Py_ssize_t best_idx = 0
    cdef Pair* scratch = NULL
    if mode == 1:
        scratch = <Pair*> malloc(L0 * L1 * L2 * sizeof(Pair))
        if scratch == NULL:
            raise MemoryError()
    best = -1.0
    try:
        with nogil:
            for p0 in range(P0):
                i0 = s0[p0]
                for p1 in range(P1):
                    i1 = s1[p1]
                    for p2 in range(P2):
                        i2 = s2[p2]
                        W = 0.0
                        if mode == 0:
                            S = 0.0
                            for a in range(L0):
                                wa = w0[p0, a]
                                if wa == 0.0:
                                    continue
                                for b in range(L1):
                                    wab = wa * w1[p1, b]
                                    if wab == 0.0:
                                        continue
                                    for c in range(L2):
                                        w = wab * w2[p2, c]
                                        if w == 0.0:
                                            continue
                                        W += w
                                        S += w * values[i0 + a, i1 + b, i2 + c]
                            if W <= 0.0:
                                val = 0.0
                            else:
                                mean = S / W
                                acc = 0.0
                                for a in range(L0):
                                    wa = w0[p0, a]
                                    if wa == 0.0:
                                        continue
                                    for b in range(L1):
                                        wab = wa * w1[p1, b]
                                        if wab == 0.0:
                                            continue
                                        for c in range(L2):
                                            w = wab * w2[p2, c]
                                            if w == 0.0:
                                                continue
                                            acc += w * fabs(values[i0 + a, i1 + b, i2 + c] - mean)
                                val = acc / W
                        else:
                            cnt = 0
                            for a in range(L0):
                                wa = w0[p0, a]
                                if wa == 0.0:
                                    continue
                                for b in range(L1):
                                    wab = wa * w1[p1, b]
                                    if wab == 0.0:
                                        continue
                                    for c in range(L2):
                                        w = wab * w2[p2, c]
                                        if w == 0.0:
                                            continue
                                        scratch[cnt].v = values[i0 + a, i1 + b, i2 + c]
                                        scratch[cnt].w = w
                                        W += w
                                        cnt += 1
                            if cnt == 0 or W <= 0.0:
                                val = 0.0
                            else:
                                val = median_objective(scratch, cnt, W)
                        if val > best:
                            best = val
                            best_idx = (p0 * P1 + p1) * P2 + p2
    finally:
        if scratch != NULL:
            free(scratch)
    return best, best_idx
