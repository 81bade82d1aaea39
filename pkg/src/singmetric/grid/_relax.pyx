# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled red-black projected SOR sweeps on the periodic N x N grid."""
from libc.math cimport fabs

cimport numpy as cnp

cnp.import_array()


cdef double _half_sweep(double[:, ::1] phi, const double[:, ::1] obstacle,
                        const double[:, ::1] rhs, double omega, int color) noexcept nogil:
    cdef Py_ssize_t n = phi.shape[0]
    cdef Py_ssize_t i, j, ip, im, jp, jm, j0
    cdef double gs, z, upd, worst = 0.0
    for i in range(n):
        ip = i + 1 if i + 1 < n else 0
        im = i - 1 if i > 0 else n - 1
        j0 = (i + color) & 1
        for j in range(j0, n, 2):
            jp = j + 1 if j + 1 < n else 0
            jm = j - 1 if j > 0 else n - 1
            gs = 0.25 * (phi[ip, j] + phi[im, j] + phi[i, jp] + phi[i, jm]) + rhs[i, j]
            z = phi[i, j] + omega * (gs - phi[i, j])
            if z > obstacle[i, j]:
                z = obstacle[i, j]
            upd = fabs(z - phi[i, j])
            if upd > worst:
                worst = upd
            phi[i, j] = z
    return worst


def sweep(double[:, ::1] phi, const double[:, ::1] obstacle, const double[:, ::1] rhs,
          double omega):
    """One red-black sweep in place; returns the sup-norm of the update."""
    cdef double a, b
    with nogil:
        a = _half_sweep(phi, obstacle, rhs, omega, 0)
        b = _half_sweep(phi, obstacle, rhs, omega, 1)
    return a if a > b else b


def relax(double[:, ::1] phi, const double[:, ::1] obstacle, const double[:, ::1] rhs,
          double omega, double tol, long max_iters):
    """Sweep until the update drops below ``tol``; returns ``(iters, last_update)``."""
    cdef long it = 0
    cdef double upd = 0.0, a, b
    with nogil:
        while it < max_iters:
            a = _half_sweep(phi, obstacle, rhs, omega, 0)
            b = _half_sweep(phi, obstacle, rhs, omega, 1)
            upd = a if a > b else b
            it += 1
            if upd < tol:
                break
    return it, upd
