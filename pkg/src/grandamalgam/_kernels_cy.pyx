# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled evaluation kernels: postfix expression programs on quadrature
nodes, fused with the |.|^r reductions.  Semantics mirror _kernels_py.
The hot loops run without the GIL so claim-level threading scales."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, log, pow

cnp.import_array()

DEF OP_CONST = 1
DEF OP_POWER = 2
DEF OP_INDICATOR = 3
DEF OP_SUM = 4
DEF OP_PRODUCT = 5
DEF OP_SCALE = 6
DEF OP_TRUNC = 7

DEF MAX_STACK = 64

BACKEND = "cython"


cdef inline double _eval_one(const int* ops, const double* args, Py_ssize_t n_ops,
                             double u, double* stack) noexcept nogil:
    cdef Py_ssize_t i, k, j
    cdef Py_ssize_t top = 0
    cdef double a0, a1, a2, acc, x
    cdef int op
    for i in range(n_ops):
        a0 = args[3 * i]
        a1 = args[3 * i + 1]
        a2 = args[3 * i + 2]
        op = ops[i]
        if op == OP_CONST:
            stack[top] = a0
            top += 1
        elif op == OP_POWER:
            stack[top] = a0 * pow(fabs(u + a1), a2)
            top += 1
        elif op == OP_INDICATOR:
            stack[top] = 1.0 if (u >= a0 and u <= a1) else 0.0
            top += 1
        elif op == OP_SUM:
            k = <Py_ssize_t> a0
            acc = 0.0
            for j in range(top - k, top):
                acc += stack[j]
            top -= k
            stack[top] = acc
            top += 1
        elif op == OP_PRODUCT:
            k = <Py_ssize_t> a0
            acc = 1.0
            for j in range(top - k, top):
                acc *= stack[j]
            top -= k
            stack[top] = acc
            top += 1
        elif op == OP_SCALE:
            stack[top - 1] = a0 * stack[top - 1]
        elif op == OP_TRUNC:
            x = fabs(stack[top - 1])
            stack[top - 1] = x if x < a0 else a0
    return stack[top - 1]


def eval_program(cnp.ndarray[cnp.int32_t, ndim=1] ops,
                 cnp.ndarray[cnp.float64_t, ndim=2] args,
                 cnp.ndarray[cnp.float64_t, ndim=1] u):
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t n_ops = ops.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double stack[MAX_STACK]
    cdef const int* ops_p = <const int*> ops.data
    cdef const double* args_p = <const double*> args.data
    cdef const double* u_p = <const double*> u.data
    cdef double* out_p = <double*> out.data
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out_p[i] = _eval_one(ops_p, args_p, n_ops, u_p[i], stack)
    return out


def weighted_pow_sums(cnp.ndarray[cnp.int32_t, ndim=1] ops,
                      cnp.ndarray[cnp.float64_t, ndim=2] args,
                      cnp.ndarray[cnp.float64_t, ndim=1] u,
                      cnp.ndarray[cnp.float64_t, ndim=1] w,
                      cnp.ndarray[cnp.float64_t, ndim=1] rs):
    """out[j] = sum_i w[i] * |f(u[i])|^rs[j], reusing the |f| evaluations."""
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t m = rs.shape[0]
    cdef Py_ssize_t n_ops = ops.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.empty(n, dtype=np.float64)
    cdef double stack[MAX_STACK]
    cdef const int* ops_p = <const int*> ops.data
    cdef const double* args_p = <const double*> args.data
    cdef const double* u_p = <const double*> u.data
    cdef const double* w_p = <const double*> w.data
    cdef const double* rs_p = <const double*> rs.data
    cdef double* out_p = <double*> out.data
    cdef double* v_p = <double*> v.data
    cdef Py_ssize_t i, j
    cdef double acc, vi
    with nogil:
        for i in range(n):
            v_p[i] = fabs(_eval_one(ops_p, args_p, n_ops, u_p[i], stack))
        for j in range(m):
            acc = 0.0
            for i in range(n):
                vi = v_p[i]
                if vi > 0.0 and w_p[i] != 0.0:
                    acc += w_p[i] * pow(vi, rs_p[j])
            out_p[j] = acc
    return out


def regularized_pow_sums(cnp.ndarray[cnp.int32_t, ndim=1] ops,
                         cnp.ndarray[cnp.float64_t, ndim=2] args,
                         cnp.ndarray[cnp.float64_t, ndim=1] u_eval,
                         cnp.ndarray[cnp.float64_t, ndim=1] log_u,
                         cnp.ndarray[cnp.float64_t, ndim=1] log_w,
                         cnp.ndarray[cnp.float64_t, ndim=1] rs,
                         double alpha):
    """Singular-layer sums: out[j] = sum_i exp(log_w[i] + alpha*r*log_u[i]) *
    (|f(u_eval[i])| * u_eval[i]^(-alpha))^r."""
    cdef Py_ssize_t n = u_eval.shape[0]
    cdef Py_ssize_t m = rs.shape[0]
    cdef Py_ssize_t n_ops = ops.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] h = np.empty(n, dtype=np.float64)
    cdef double stack[MAX_STACK]
    cdef const int* ops_p = <const int*> ops.data
    cdef const double* args_p = <const double*> args.data
    cdef const double* ue_p = <const double*> u_eval.data
    cdef const double* lu_p = <const double*> log_u.data
    cdef const double* lw_p = <const double*> log_w.data
    cdef const double* rs_p = <const double*> rs.data
    cdef double* out_p = <double*> out.data
    cdef double* h_p = <double*> h.data
    cdef Py_ssize_t i, j
    cdef double acc, r, arg, hi
    with nogil:
        for i in range(n):
            hi = fabs(_eval_one(ops_p, args_p, n_ops, ue_p[i], stack))
            if alpha != 0.0 and hi > 0.0:
                hi = hi * pow(ue_p[i], -alpha)
            h_p[i] = hi
        for j in range(m):
            r = rs_p[j]
            acc = 0.0
            for i in range(n):
                if h_p[i] > 0.0:
                    arg = lw_p[i] + alpha * r * lu_p[i]
                    if arg > -745.0:
                        acc += exp(arg) * pow(h_p[i], r)
            out_p[j] = acc
    return out
