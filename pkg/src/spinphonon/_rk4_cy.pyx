# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 kernel for the Lindblad right-hand side.

Same contract as _rk4_py: sparse (CSR) drift matrix A and jump operators
C_j, Hermitian-state shortcut, fixed-step classical RK4.  Internally the
state and all scratch buffers are stored in planar (split real/imaginary)
form so the hot loops are plain double-precision streaming FMAs the
compiler can vectorize.  Jump operators with at most one nonzero per row
(scaled ladder operators, the common case) use a direct gather update

    (C Y C^dag)_{ij} = c_i conj(c_j) Y_{m(i) m(j)}

instead of two sparse-dense products.  The whole multi-step segment runs
without the GIL.
"""

import numpy as np
import scipy.sparse as sp

ctypedef double complex cplx


cdef void _csr_mm(const double* dre, const double* dim_, const int* indices,
                  const int* indptr, const double* Bre, const double* Bim,
                  double* Ore, double* Oim, int d) noexcept nogil:
    # O = S @ B with S in CSR form; B, O planar dense row-major d x d.
    cdef int i, p, c, n, start
    cdef double vr, vi
    cdef const double* br
    cdef const double* bi
    cdef double* orr
    cdef double* ori
    for i in range(d):
        orr = Ore + i * d
        ori = Oim + i * d
        start = indptr[i]
        n = indptr[i + 1] - start
        if n == 0:
            for c in range(d):
                orr[c] = 0.0
                ori[c] = 0.0
            continue
        vr = dre[start]
        vi = dim_[start]
        br = Bre + indices[start] * d
        bi = Bim + indices[start] * d
        for c in range(d):
            orr[c] = vr * br[c] - vi * bi[c]
            ori[c] = vr * bi[c] + vi * br[c]
        for p in range(start + 1, start + n):
            vr = dre[p]
            vi = dim_[p]
            br = Bre + indices[p] * d
            bi = Bim + indices[p] * d
            for c in range(d):
                orr[c] = orr[c] + vr * br[c] - vi * bi[c]
                ori[c] = ori[c] + vr * bi[c] + vi * br[c]


cdef void _rhs(const double* are, const double* aim, const int* Aind,
               const int* Aptr,
               int n_gather, const int* goff, const int* grows,
               const int* gcols, const double* gvr, const double* gvi,
               int n_gen, const double* cre, const double* cim,
               const int* Cind, const int* Cptr,
               const double* Yre, const double* Yim,
               double* Ore, double* Oim,
               double* s1re, double* s1im, double* s2re, double* s2im,
               int d) noexcept nogil:
    cdef int i, c, j, p, q, idx, ib, cb, ihi, chi
    cdef double vr, vi, wr, wi, yr, yi
    cdef const int* ptr
    cdef const double* yrr
    cdef const double* yri
    cdef double* orr
    cdef double* ori
    _csr_mm(are, aim, Aind, Aptr, Yre, Yim, s1re, s1im, d)  # s1 = A Y
    # O = s1 + s1^dag, tiled so both triangles stay cache-resident
    for ib in range(0, d, 48):
        ihi = min(ib + 48, d)
        for cb in range(ib, d, 48):
            chi = min(cb + 48, d)
            for i in range(ib, ihi):
                for c in range(max(cb, i), chi):
                    Ore[i * d + c] = s1re[i * d + c] + s1re[c * d + i]
                    Ore[c * d + i] = Ore[i * d + c]
                    Oim[i * d + c] = s1im[i * d + c] - s1im[c * d + i]
                    Oim[c * d + i] = -Oim[i * d + c]
    for j in range(n_gather):
        for p in range(goff[j], goff[j + 1]):
            vr = gvr[p]
            vi = gvi[p]
            yrr = Yre + gcols[p] * d
            yri = Yim + gcols[p] * d
            orr = Ore + grows[p] * d
            ori = Oim + grows[p] * d
            for q in range(goff[j], goff[j + 1]):
                # w = v_p * conj(v_q); O_row[r_q] += w * Y_row[c_q]
                wr = vr * gvr[q] + vi * gvi[q]
                wi = vi * gvr[q] - vr * gvi[q]
                yr = yrr[gcols[q]]
                yi = yri[gcols[q]]
                orr[grows[q]] = orr[grows[q]] + wr * yr - wi * yi
                ori[grows[q]] = ori[grows[q]] + wr * yi + wi * yr
    for j in range(n_gen):
        ptr = Cptr + j * (d + 1)
        _csr_mm(cre, cim, Cind, ptr, Yre, Yim, s1re, s1im, d)  # s1 = C Y
        for i in range(d):
            for c in range(d):
                s2re[i * d + c] = s1re[c * d + i]      # s2 = (C Y)^dag = Y C^dag
                s2im[i * d + c] = -s1im[c * d + i]
        _csr_mm(cre, cim, Cind, ptr, s2re, s2im, s1re, s1im, d)  # s1 = C Y C^dag
        for idx in range(d * d):
            Ore[idx] = Ore[idx] + s1re[idx]
            Oim[idx] = Oim[idx] + s1im[idx]


class Plan:
    def __init__(self, A, c_ops):
        A = sp.csr_matrix(A, dtype=complex)
        A.sort_indices()
        d = A.shape[0]
        self.dim = d
        self.a_re = np.ascontiguousarray(A.data.real)
        self.a_im = np.ascontiguousarray(A.data.imag)
        self.a_indices = np.ascontiguousarray(A.indices, dtype=np.int32)
        self.a_indptr = np.ascontiguousarray(A.indptr, dtype=np.int32)

        gather, generic = [], []
        for c in c_ops:
            c = sp.csr_matrix(c, dtype=complex)
            c.sort_indices()
            row_nnz = np.diff(c.indptr)
            if np.all(row_nnz <= 1):
                rows = np.flatnonzero(row_nnz == 1)
                gather.append((rows, c.indices[c.indptr[rows]], c.data[c.indptr[rows]]))
            else:
                generic.append(c)

        self.n_gather = len(gather)
        goff = np.zeros(self.n_gather + 1, dtype=np.int32)
        for j, (rows, _, _) in enumerate(gather):
            goff[j + 1] = goff[j] + rows.size
        self.g_off = goff
        if gather:
            vals = np.concatenate([g[2] for g in gather])
            self.g_rows = np.ascontiguousarray(
                np.concatenate([g[0] for g in gather]), dtype=np.int32)
            self.g_cols = np.ascontiguousarray(
                np.concatenate([g[1] for g in gather]), dtype=np.int32)
            self.g_vre = np.ascontiguousarray(vals.real)
            self.g_vim = np.ascontiguousarray(vals.imag)
        else:
            self.g_rows = np.zeros(0, dtype=np.int32)
            self.g_cols = np.zeros(0, dtype=np.int32)
            self.g_vre = np.zeros(0)
            self.g_vim = np.zeros(0)

        self.n_generic = len(generic)
        data_parts, index_parts = [], []
        indptr = np.zeros((max(self.n_generic, 1), d + 1), dtype=np.int32)
        offset = 0
        for j, c in enumerate(generic):
            data_parts.append(np.asarray(c.data, dtype=np.complex128))
            index_parts.append(np.asarray(c.indices, dtype=np.int32))
            indptr[j, :] = c.indptr.astype(np.int64) + offset
            offset += c.nnz
        if data_parts:
            cdata = np.concatenate(data_parts)
            self.c_re = np.ascontiguousarray(cdata.real)
            self.c_im = np.ascontiguousarray(cdata.imag)
            self.c_indices = np.ascontiguousarray(
                np.concatenate(index_parts), dtype=np.int32)
        else:
            self.c_re = np.zeros(0)
            self.c_im = np.zeros(0)
            self.c_indices = np.zeros(0, dtype=np.int32)
        self.c_indptr = np.ascontiguousarray(indptr.ravel())


def make_plan(A, c_ops):
    return Plan(A, c_ops)


def run_steps(plan, rho, double dt, long n_steps):
    """Advance rho by n_steps fixed RK4 steps; returns a new array."""
    cdef int d = plan.dim
    rho = np.asarray(rho, dtype=np.complex128)

    # planar state and scratch buffers: [0] = real plane, [1] = imaginary
    r_buf = np.empty((2, d, d))
    r_buf[0] = rho.real
    r_buf[1] = rho.imag
    bufs = [np.empty((2, d, d)) for _ in range(5)]

    cdef double[:, :, ::1] r_v = r_buf
    cdef double[:, :, ::1] y_v = bufs[0]
    cdef double[:, :, ::1] k_v = bufs[1]
    cdef double[:, :, ::1] acc_v = bufs[2]
    cdef double[:, :, ::1] s1_v = bufs[3]
    cdef double[:, :, ::1] s2_v = bufs[4]

    cdef double[::1] a_re = plan.a_re
    cdef double[::1] a_im = plan.a_im
    cdef int[::1] a_indices = plan.a_indices
    cdef int[::1] a_indptr = plan.a_indptr
    cdef int[::1] g_off = plan.g_off
    cdef int[::1] g_rows = plan.g_rows
    cdef int[::1] g_cols = plan.g_cols
    cdef double[::1] g_vre = plan.g_vre
    cdef double[::1] g_vim = plan.g_vim
    cdef double[::1] c_re = plan.c_re
    cdef double[::1] c_im = plan.c_im
    cdef int[::1] c_indices = plan.c_indices
    cdef int[::1] c_indptr = plan.c_indptr
    cdef int n_gather = plan.n_gather
    cdef int n_gen = plan.n_generic

    cdef double* r = &r_v[0, 0, 0]
    cdef double* y = &y_v[0, 0, 0]
    cdef double* k = &k_v[0, 0, 0]
    cdef double* acc = &acc_v[0, 0, 0]
    cdef double* s1 = &s1_v[0, 0, 0]
    cdef double* s2 = &s2_v[0, 0, 0]
    cdef const double* ar = &a_re[0] if a_re.shape[0] > 0 else NULL
    cdef const double* ai = &a_im[0] if a_im.shape[0] > 0 else NULL
    cdef const int* aj = &a_indices[0] if a_indices.shape[0] > 0 else NULL
    cdef const int* ap = &a_indptr[0]
    cdef const int* go = &g_off[0]
    cdef const int* gr = &g_rows[0] if g_rows.shape[0] > 0 else NULL
    cdef const int* gc = &g_cols[0] if g_cols.shape[0] > 0 else NULL
    cdef const double* gvr = &g_vre[0] if g_vre.shape[0] > 0 else NULL
    cdef const double* gvi = &g_vim[0] if g_vim.shape[0] > 0 else NULL
    cdef const double* cr = &c_re[0] if c_re.shape[0] > 0 else NULL
    cdef const double* cim = &c_im[0] if c_im.shape[0] > 0 else NULL
    cdef const int* cj = &c_indices[0] if c_indices.shape[0] > 0 else NULL
    cdef const int* cp = &c_indptr[0]

    cdef long step
    cdef int idx, n2 = d * d
    cdef double h6 = dt / 6.0, h3 = dt / 3.0, h2 = dt / 2.0

    with nogil:
        for step in range(n_steps):
            _rhs(ar, ai, aj, ap, n_gather, go, gr, gc, gvr, gvi,
                 n_gen, cr, cim, cj, cp,
                 r, r + n2, k, k + n2, s1, s1 + n2, s2, s2 + n2, d)
            for idx in range(2 * n2):
                acc[idx] = r[idx] + h6 * k[idx]
                y[idx] = r[idx] + h2 * k[idx]
            _rhs(ar, ai, aj, ap, n_gather, go, gr, gc, gvr, gvi,
                 n_gen, cr, cim, cj, cp,
                 y, y + n2, k, k + n2, s1, s1 + n2, s2, s2 + n2, d)
            for idx in range(2 * n2):
                acc[idx] = acc[idx] + h3 * k[idx]
                y[idx] = r[idx] + h2 * k[idx]
            _rhs(ar, ai, aj, ap, n_gather, go, gr, gc, gvr, gvi,
                 n_gen, cr, cim, cj, cp,
                 y, y + n2, k, k + n2, s1, s1 + n2, s2, s2 + n2, d)
            for idx in range(2 * n2):
                acc[idx] = acc[idx] + h3 * k[idx]
                y[idx] = r[idx] + dt * k[idx]
            _rhs(ar, ai, aj, ap, n_gather, go, gr, gc, gvr, gvi,
                 n_gen, cr, cim, cj, cp,
                 y, y + n2, k, k + n2, s1, s1 + n2, s2, s2 + n2, d)
            for idx in range(2 * n2):
                r[idx] = acc[idx] + h6 * k[idx]

    out = np.empty((d, d), dtype=np.complex128)
    out.real = r_buf[0]
    out.imag = r_buf[1]
    return out
