# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Fused pointwise kernels of the time step (compiled variant).

Arrays are C-contiguous and passed flattened; complex arrays arrive as their
interleaved float64 views (``re, im, re, im, ...``).  ``_kernels_py`` holds
the reference semantics.
"""


def nonlinear_terms(const double[::1] u, const double[::1] lap_u, double inv_eps2,
                    double[::1] fp, double[::1] w):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double ui, f
    with nogil:
        for i in range(n):
            ui = u[i]
            f = (ui - 6.0 * ui * ui) * inv_eps2
            fp[i] = f
            w[i] = (1.0 - 12.0 * ui) * inv_eps2 * (lap_u[i] - f)


def scale_spectral(const double[::1] ch, const double[::1] m, double[::1] out):
    cdef Py_ssize_t i, n = m.shape[0]
    with nogil:
        for i in range(n):
            out[2 * i] = m[i] * ch[2 * i]
            out[2 * i + 1] = m[i] * ch[2 * i + 1]


def combine_spectral(const double[::1] uh, const double[::1] fph,
                     const double[::1] wh, const double[::1] a,
                     const double[::1] b, const double[::1] c,
                     double[::1] out):
    cdef Py_ssize_t i, j, n = a.shape[0]
    with nogil:
        for i in range(n):
            j = 2 * i
            out[j] = a[i] * uh[j] - b[i] * fph[j] + c[i] * wh[j]
            out[j + 1] = a[i] * uh[j + 1] - b[i] * fph[j + 1] + c[i] * wh[j + 1]


def project(double[::1] u, double cap, bint clamp):
    """Clamp ``u`` at ``cap`` in place; return False if a non-finite value is met."""
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double x
    cdef int bad = 0
    # x - x is nan for nan and +-inf; an integer OR keeps the loops vectorizable
    with nogil:
        if clamp:
            for i in range(n):
                x = u[i]
                bad |= (x - x) != 0.0
                u[i] = cap if x > cap else x
        else:
            for i in range(n):
                x = u[i]
                bad |= (x - x) != 0.0
    return bad == 0
