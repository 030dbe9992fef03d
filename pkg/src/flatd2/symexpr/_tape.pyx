# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch evaluator for :class:`flatd2.symexpr.evaluate.Tape`.

Same opcodes and error model as the NumPy fallback; loops run point-major so
each point touches only a node-sized scratch buffer.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, tan, asin, sqrt, exp, log, fabs, pow

cnp.import_array()

cdef double EPS = 1.1102230246251565e-16


def run_tape(const int[::1] ops, const int[::1] ipay, const double[::1] fpay,
             const int[::1] arg_ptr, const int[::1] arg_idx, const long long[::1] roots,
             const double[:, ::1] inputs):
    cdef Py_ssize_t npts = inputs.shape[0]
    cdef Py_ssize_t nn = ops.shape[0]
    cdef Py_ssize_t nr = roots.shape[0]
    out_v = np.empty((npts, nr))
    out_e = np.empty((npts, nr))
    cdef double[:, ::1] ov = out_v
    cdef double[:, ::1] oe = out_e
    cdef double[::1] val = np.empty(nn)
    cdef double[::1] err = np.empty(nn)
    cdef Py_ssize_t p, i, j, a0, a1, m, c
    cdef int op, n
    cdef double v, e, a, ea, d, prod, s, sa, b
    for p in range(npts):
        for i in range(nn):
            op = ops[i]
            a0 = arg_ptr[i]
            a1 = arg_ptr[i + 1]
            if op == 0:
                v = fpay[i]
                e = fabs(v) * EPS
            elif op == 1:
                v = inputs[p, ipay[i]]
                e = fabs(v) * EPS
            elif op == 2:
                s = 0.0
                sa = 0.0
                e = 0.0
                for j in range(a0, a1):
                    c = arg_idx[j]
                    s += val[c]
                    sa += fabs(val[c])
                    e += err[c]
                v = s
                e += (a1 - a0) * EPS * sa
            elif op == 3:
                # first-order product rule for the propagated bound
                prod = fpay[i]
                m = a1 - a0
                for j in range(a0, a1):
                    c = arg_idx[j]
                    prod *= val[c]
                e = _mul_err(val, err, arg_idx, a0, a1, fabs(fpay[i]))
                v = prod
                e += (m + 1) * EPS * fabs(prod)
            elif op == 4:
                c = arg_idx[a0]
                b = val[c]
                n = ipay[i]
                v = pow(b, <double> n)
                e = abs(n) * pow(fabs(b), <double> (n - 1)) * err[c] + (abs(n) + 1) * EPS * fabs(v)
            else:
                c = arg_idx[a0]
                a = val[c]
                ea = err[c]
                if op == 5:
                    v = sin(a)
                    d = fabs(cos(a))
                elif op == 6:
                    v = cos(a)
                    d = fabs(sin(a))
                elif op == 7:
                    v = tan(a)
                    d = 1.0 + v * v
                elif op == 8:
                    if fabs(a) > 1.0:
                        v = float("nan")
                        d = v
                    else:
                        v = asin(a)
                        d = 1.0 / sqrt(1.0 - a * a)
                elif op == 9:
                    if a < 0.0:
                        v = float("nan")
                        d = v
                    else:
                        v = sqrt(a)
                        d = 0.5 / v
                elif op == 10:
                    v = exp(a)
                    d = v
                else:
                    if a <= 0.0:
                        v = float("nan") if a < 0.0 else -float("inf")
                        d = v
                    else:
                        v = log(a)
                        d = 1.0 / a
                e = d * ea + 2.0 * EPS * fabs(v) + EPS * fabs(a) * d
            val[i] = v
            err[i] = e
        for j in range(nr):
            ov[p, j] = val[roots[j]]
            oe[p, j] = err[roots[j]]
    return out_v, out_e


cdef inline double _mul_err(double[::1] val, double[::1] err, const int[::1] arg_idx,
                            Py_ssize_t a0, Py_ssize_t a1, double acoef):
    # sum_j err_j * prod_{k != j} |val_k|, O(m^2) but m is small
    cdef double total = 0.0, t
    cdef Py_ssize_t j, k
    for j in range(a0, a1):
        t = err[arg_idx[j]]
        if t == 0.0:
            continue
        for k in range(a0, a1):
            if k != j:
                t *= fabs(val[arg_idx[k]])
        total += t
    return acoef * total
