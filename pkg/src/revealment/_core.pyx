# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled batch trial kernels.

Mirrors revealment._core_py function for function; the test suite checks
the two backends bit for bit.  All loops run per trial over C arrays, so
the hot path never touches Python objects.
"""

import numpy as np

ctypedef unsigned char u8
ctypedef unsigned long long u64
ctypedef long long i64
ctypedef signed char i8

_FEATURE_NP = np.array(
    [0, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 0, 0], dtype=np.uint8
)
cdef const u8[::1] FEATURE = _FEATURE_NP


cdef inline i64 _flush_flags(u8[::1] flags, i64[::1] read_counts, Py_ssize_t n):
    """Count set flags into the accumulator and clear them."""
    cdef i64 cnt = 0
    cdef Py_ssize_t pos
    for pos in range(n):
        if flags[pos]:
            cnt += 1
            read_counts[pos] += 1
            flags[pos] = 0
    return cnt


def nonmono_lv_batch(const u8[:, ::1] bits, Py_ssize_t H, Py_ssize_t W,
                     Py_ssize_t slots, const i64[::1] t0s,
                     i64[::1] read_counts, i8[::1] values, i64[::1] nreads):
    cdef Py_ssize_t B = bits.shape[0]
    cdef Py_ssize_t n = bits.shape[1]
    cur_np = np.zeros(H, dtype=np.int64)
    g_np = np.zeros(H, dtype=np.int64)
    tmp_np = np.zeros(H, dtype=np.int64)
    incyc_np = np.zeros(H, dtype=np.uint8)
    flags_np = np.zeros(n, dtype=np.uint8)
    cdef i64[::1] cur = cur_np
    cdef i64[::1] g = g_np
    cdef i64[::1] tmp = tmp_np
    cdef u8[::1] incyc = incyc_np
    cdef u8[::1] flags = flags_np
    cdef const u8[::1] row
    cdef Py_ssize_t b, s, i, j, t, pos, base, h0, t0, s0, best, k
    cdef i64 h
    cdef int bit, nib, xoracc

    for b in range(B):
        row = bits[b]
        t0 = t0s[b]
        for i in range(H):
            cur[i] = i
        for s in range(W):
            t = (t0 + s) % W
            for i in range(H):
                h = cur[i]
                if slots == 1:
                    pos = h + H * t
                    bit = row[pos]
                    flags[pos] = 1
                else:
                    base = 4 * (h + H * t)
                    bit = 0
                    for j in range(4):
                        bit ^= row[base + j]
                        flags[base + j] = 1
                cur[i] = (2 * h + bit) % H
        # cycle vertices of the first-return map: image of a power >= H
        for i in range(H):
            g[i] = cur[i]
        k = 1
        while k < H:
            for i in range(H):
                tmp[i] = g[g[i]]
            for i in range(H):
                g[i] = tmp[i]
            k <<= 1
        for i in range(H):
            incyc[i] = 0
        for i in range(H):
            incyc[g[i]] = 1
        # retrace the cyclic orbits (no new reads)
        s0 = (W - t0) % W
        best = H
        xoracc = 0
        for h0 in range(H):
            if not incyc[h0]:
                continue
            h = h0
            for s in range(W):
                if s == s0 and h < best:
                    best = h
                t = (t0 + s) % W
                if slots == 1:
                    bit = row[h + H * t]
                else:
                    base = 4 * (h + H * t)
                    nib = (row[base] | (row[base + 1] << 1)
                           | (row[base + 2] << 2) | (row[base + 3] << 3))
                    xoracc ^= FEATURE[nib]
                    bit = (nib ^ (nib >> 1) ^ (nib >> 2) ^ (nib >> 3)) & 1
                h = (2 * h + bit) % H
        if slots == 1:
            values[b] = <i8>(2 * row[best] - 1)
        else:
            values[b] = <i8>(2 * (xoracc & 1) - 1)
        nreads[b] = _flush_flags(flags, read_counts, n)


def nonmono_mc_batch(const u8[:, ::1] bits, Py_ssize_t H, Py_ssize_t W,
                     Py_ssize_t slots, const i64[::1] t0s,
                     const i64[:, ::1] starts, i64[::1] read_counts,
                     i8[::1] values, i64[::1] nreads):
    cdef Py_ssize_t B = bits.shape[0]
    cdef Py_ssize_t n = bits.shape[1]
    cdef Py_ssize_t m = starts.shape[1]
    cdef Py_ssize_t HW = H * W
    owner_np = np.zeros(HW, dtype=np.int64)
    disc_np = np.zeros(H, dtype=np.uint8)
    flags_np = np.zeros(n, dtype=np.uint8)
    cdef i64[::1] owner = owner_np
    cdef u8[::1] disc = disc_np
    cdef u8[::1] flags = flags_np
    cdef const u8[::1] row
    cdef Py_ssize_t b, p, i, j, t0, flat, cflat, base
    cdef i64 h, t, ch, ct, j0, ow
    cdef int bit, nib, accv

    for b in range(B):
        row = bits[b]
        t0 = t0s[b]
        for i in range(HW):
            owner[i] = -1
        for i in range(H):
            disc[i] = 0
        accv = 0
        for p in range(m):
            h = starts[b, p]
            t = t0
            while True:
                flat = h + H * t
                ow = owner[flat]
                if ow >= 0:
                    if ow == p:
                        # closed its own loop: walk the cycle once
                        ch = h
                        ct = t
                        while True:
                            cflat = ch + H * ct
                            if ct == 0:
                                disc[ch] = 1
                            if slots == 1:
                                bit = row[cflat]
                            else:
                                base = 4 * cflat
                                nib = (row[base] | (row[base + 1] << 1)
                                       | (row[base + 2] << 2)
                                       | (row[base + 3] << 3))
                                accv ^= FEATURE[nib]
                                bit = (nib ^ (nib >> 1) ^ (nib >> 2)
                                       ^ (nib >> 3)) & 1
                            ch = (2 * ch + bit) % H
                            ct = ct + 1
                            if ct == W:
                                ct = 0
                            if ch + H * ct == flat:
                                break
                    break
                owner[flat] = p
                if slots == 1:
                    bit = row[flat]
                    flags[flat] = 1
                else:
                    base = 4 * flat
                    bit = 0
                    for j in range(4):
                        bit ^= row[base + j]
                        flags[base + j] = 1
                h = (2 * h + bit) % H
                t = t + 1
                if t == W:
                    t = 0
        if slots == 1:
            j0 = 0
            while not disc[j0]:
                j0 += 1
            values[b] = <i8>(2 * row[j0] - 1)
        else:
            values[b] = <i8>(2 * (accv & 1) - 1)
        nreads[b] = _flush_flags(flags, read_counts, n)


def mono_lv_values_batch(const u8[:, ::1] bits, Py_ssize_t H, Py_ssize_t W,
                         Py_ssize_t offset, const i64[::1] t0s,
                         i64[::1] read_counts, u64[::1] masks,
                         i64[::1] nreads):
    if H > 64:
        raise ValueError(f"origin masks need H <= 64, got H={H}")
    cdef Py_ssize_t B = bits.shape[0]
    cdef Py_ssize_t n = bits.shape[1]
    fwd_np = np.zeros((W + 1) * H, dtype=np.uint64)
    bv_np = np.zeros(H, dtype=np.uint64)
    bn_np = np.zeros(H, dtype=np.uint64)
    flags_np = np.zeros(n, dtype=np.uint8)
    cdef u64[::1] fwd = fwd_np
    cdef u64[::1] bv = bv_np
    cdef u64[::1] bn = bn_np
    cdef u8[::1] flags = flags_np
    cdef const u8[::1] row
    cdef Py_ssize_t b, s, h, t, base, t0, s0
    cdef u64 lab, acc, out

    for b in range(B):
        row = bits[b]
        t0 = t0s[b]
        s0 = (W - t0) % W
        for h in range(H):
            fwd[h] = (<u64>1) << h
        for s in range(W):
            t = (t0 + s) % W
            for h in range(H):
                fwd[(s + 1) * H + h] = 0
            for h in range(H):
                lab = fwd[s * H + h]
                if lab == 0:
                    continue
                base = offset + 2 * (h + H * t)
                flags[base] = 1
                flags[base + 1] = 1
                if row[base]:
                    fwd[(s + 1) * H + (2 * h) % H] |= lab
                if row[base + 1]:
                    fwd[(s + 1) * H + (2 * h + 1) % H] |= lab
        for h in range(H):
            bv[h] = (<u64>1) << h
        out = 0
        for s in range(W - 1, -1, -1):
            t = (t0 + s) % W
            for h in range(H):
                acc = 0
                if fwd[s * H + h] != 0:
                    base = offset + 2 * (h + H * t)
                    if row[base]:
                        acc |= bv[(2 * h) % H]
                    if row[base + 1]:
                        acc |= bv[(2 * h + 1) % H]
                bn[h] = acc
            for h in range(H):
                bv[h] = bn[h]
            if s == s0:
                out = 0
                for h in range(H):
                    if fwd[s * H + h] & bv[h]:
                        out |= (<u64>1) << h
        masks[b] = out
        nreads[b] = _flush_flags(flags, read_counts, n)


def mono_lv_reads_batch(const u8[:, ::1] bits, Py_ssize_t H, Py_ssize_t W,
                        Py_ssize_t offset, const i64[::1] t0s,
                        i64[::1] read_counts, i64[::1] nreads):
    cdef Py_ssize_t B = bits.shape[0]
    cdef Py_ssize_t n = bits.shape[1]
    r_np = np.zeros(H, dtype=np.uint8)
    rn_np = np.zeros(H, dtype=np.uint8)
    flags_np = np.zeros(n, dtype=np.uint8)
    cdef u8[::1] reached = r_np
    cdef u8[::1] rnext = rn_np
    cdef u8[::1] flags = flags_np
    cdef const u8[::1] row
    cdef Py_ssize_t b, s, h, t, base, t0

    for b in range(B):
        row = bits[b]
        t0 = t0s[b]
        for h in range(H):
            reached[h] = 1
        for s in range(W):
            t = (t0 + s) % W
            for h in range(H):
                rnext[h] = 0
            for h in range(H):
                if not reached[h]:
                    continue
                base = offset + 2 * (h + H * t)
                flags[base] = 1
                flags[base + 1] = 1
                if row[base]:
                    rnext[(2 * h) % H] = 1
                if row[base + 1]:
                    rnext[(2 * h + 1) % H] = 1
            for h in range(H):
                reached[h] = rnext[h]
        nreads[b] = _flush_flags(flags, read_counts, n)


def mono_mc_batch(const u8[:, ::1] bits, Py_ssize_t H, Py_ssize_t W,
                  Py_ssize_t offset, const u8[:, ::1] seed_masks,
                  i64[::1] read_counts, u64[::1] masks, i64[::1] nreads,
                  bint want_values):
    cdef Py_ssize_t B = bits.shape[0]
    cdef Py_ssize_t n = bits.shape[1]
    cdef Py_ssize_t HW = H * W
    cdef Py_ssize_t depth_cap = 2 * W
    if want_values and H > 64:
        raise ValueError(f"origin masks need H <= 64, got H={H}")
    if depth_cap + 1 > 63:
        raise ValueError(f"depth masks need W <= 31, got W={W}")

    # per-vertex predecessor and edge-bit tables
    flat_np = np.arange(HW, dtype=np.int64)
    hco = flat_np % H
    tprev = (flat_np // H - 1) % W
    pred0_np = (hco >> 1) + H * tprev
    pred1_np = pred0_np + H // 2
    epos0_np = offset + 2 * pred0_np + (hco & 1)
    epos1_np = offset + 2 * pred1_np + (hco & 1)
    cdef i64[::1] pred0 = pred0_np
    cdef i64[::1] pred1 = pred1_np
    cdef i64[::1] epos0 = epos0_np
    cdef i64[::1] epos1 = epos1_np

    d_np = np.zeros(HW, dtype=np.uint64)
    dn_np = np.zeros(HW, dtype=np.uint64)
    readm_np = np.zeros(HW, dtype=np.uint8)
    expw_np = np.zeros(HW, dtype=np.uint8)
    fwd_np = np.zeros((W + 1) * H, dtype=np.uint64)
    bv_np = np.zeros(H, dtype=np.uint64)
    bn_np = np.zeros(H, dtype=np.uint64)
    flags_np = np.zeros(n, dtype=np.uint8)
    cdef u64[::1] D = d_np
    cdef u64[::1] Dn = dn_np
    cdef u8[::1] readm = readm_np
    cdef u8[::1] expw = expw_np
    cdef u64[::1] fwd = fwd_np
    cdef u64[::1] bv = bv_np
    cdef u64[::1] bn = bn_np
    cdef u8[::1] flags = flags_np
    cdef const u8[::1] row
    cdef Py_ssize_t b, i, s, h, base, vflat
    cdef u64 capmask = ((<u64>1) << (depth_cap + 1)) - 1
    cdef u64 readmask_bits = ((<u64>1) << depth_cap) - 1
    cdef u64 earlymask = ((<u64>1) << (W + 1)) - 1
    cdef u64 acc, lab, disc

    for b in range(B):
        row = bits[b]
        for i in range(HW):
            D[i] = seed_masks[b, i]
        for s in range(depth_cap):
            for i in range(HW):
                acc = 0
                if row[epos0[i]]:
                    acc |= D[pred0[i]]
                if row[epos1[i]]:
                    acc |= D[pred1[i]]
                Dn[i] = (D[i] | (acc << 1)) & capmask
            for i in range(HW):
                D[i] = Dn[i]
        for i in range(HW):
            readm[i] = 1 if (D[i] & readmask_bits) else 0
            expw[i] = 1 if (D[i] & earlymask) else 0
            if readm[i]:
                base = offset + 2 * i
                flags[base] = 1
                flags[base + 1] = 1
        disc = 0
        if want_values:
            for h in range(H):
                fwd[h] = (<u64>1) << h
            for s in range(W):
                for h in range(H):
                    fwd[(s + 1) * H + h] = 0
                for h in range(H):
                    lab = fwd[s * H + h]
                    if lab == 0:
                        continue
                    vflat = h + H * s
                    if not readm[vflat]:
                        continue
                    base = offset + 2 * vflat
                    if row[base]:
                        fwd[(s + 1) * H + (2 * h) % H] |= lab
                    if row[base + 1]:
                        fwd[(s + 1) * H + (2 * h + 1) % H] |= lab
            for h in range(H):
                bv[h] = (<u64>1) << h
            for s in range(W - 1, -1, -1):
                for h in range(H):
                    acc = 0
                    vflat = h + H * s
                    if fwd[s * H + h] != 0 and readm[vflat]:
                        base = offset + 2 * vflat
                        if row[base]:
                            acc |= bv[(2 * h) % H]
                        if row[base + 1]:
                            acc |= bv[(2 * h + 1) % H]
                    bn[h] = acc
                for h in range(H):
                    bv[h] = bn[h]
                for h in range(H):
                    vflat = h + H * s
                    if expw[vflat]:
                        disc |= fwd[s * H + h] & bv[h]
        masks[b] = disc
        nreads[b] = _flush_flags(flags, read_counts, n)


def winding_count_batch(const u8[:, ::1] bits, Py_ssize_t H, Py_ssize_t W,
                        Py_ssize_t offset, i64[::1] counts):
    cdef Py_ssize_t B = bits.shape[0]
    m_np = np.zeros(H * H, dtype=np.int64)
    mn_np = np.zeros(H * H, dtype=np.int64)
    e0_np = np.zeros(H, dtype=np.int64)
    e1_np = np.zeros(H, dtype=np.int64)
    p0_np = np.arange(H, dtype=np.int64) >> 1
    p1_np = p0_np + H // 2
    cdef i64[::1] M = m_np
    cdef i64[::1] Mn = mn_np
    cdef i64[::1] e0 = e0_np
    cdef i64[::1] e1 = e1_np
    cdef i64[::1] p0 = p0_np
    cdef i64[::1] p1 = p1_np
    cdef const u8[::1] row
    cdef Py_ssize_t b, t, u, j
    cdef i64 tr

    for b in range(B):
        row = bits[b]
        for u in range(H):
            for j in range(H):
                M[u * H + j] = 1 if u == j else 0
        for t in range(W):
            for j in range(H):
                e0[j] = row[offset + 2 * (p0[j] + H * t) + (j & 1)]
                e1[j] = row[offset + 2 * (p1[j] + H * t) + (j & 1)]
            for u in range(H):
                for j in range(H):
                    Mn[u * H + j] = (M[u * H + p0[j]] * e0[j]
                                     + M[u * H + p1[j]] * e1[j])
                for j in range(H):
                    M[u * H + j] = Mn[u * H + j]
        tr = 0
        for u in range(H):
            tr += M[u * H + u]
        counts[b] = tr
