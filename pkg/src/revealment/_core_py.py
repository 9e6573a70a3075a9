"""NumPy implementations of the batch trial kernels.

Signature-compatible fallback for the compiled module revealment._core;
revealment.kernels picks whichever is importable.  All kernels consume a
(B, n) uint8 matrix of input bits plus per-trial coins, write per-trial
values in place, accumulate distinct-position read counts into
read_counts, and write per-trial distinct read totals into nreads.
"""

from __future__ import annotations

import numpy as np

_ALL1 = np.uint64(0xFFFFFFFFFFFFFFFF)
_ONE = np.uint64(1)

# nibble -> 1 iff its one or two set bits are cyclically consecutive
_FEATURE_TABLE = np.array(
    [0, 1, 1, 1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 0, 0, 0], dtype=np.uint8
)


def _identity_masks(B: int, H: int) -> np.ndarray:
    return np.tile(_ONE << np.arange(H, dtype=np.uint64), (B, 1))


def nonmono_lv_batch(bits, H, W, slots, t0s, read_counts, values, nreads):
    """Full-frontier routing-ensemble evaluator, one row per trial."""
    B, n = bits.shape
    rows = np.arange(B)[:, None]
    flags = np.zeros((B, n), dtype=np.uint8)
    cur = np.tile(np.arange(H, dtype=np.int64), (B, 1))
    for s in range(W):
        t = (t0s + s) % W
        flat = cur + (H * t)[:, None]
        if slots == 1:
            b = np.take_along_axis(bits, flat, axis=1).astype(np.int64)
            flags[rows, flat] = 1
        else:
            base = 4 * flat
            b = np.zeros((B, H), dtype=np.int64)
            for j in range(4):
                bj = np.take_along_axis(bits, base + j, axis=1)
                flags[rows, base + j] = 1
                b ^= bj.astype(np.int64)
        cur = (2 * cur + b) % H

    # vertices of the first-return map that lie on cycles = image of a
    # power of the map at least H
    G = cur.copy()
    k = 1
    while k < H:
        G = np.take_along_axis(G, G, axis=1)
        k *= 2
    cyc = np.zeros((B, H), dtype=bool)
    np.put_along_axis(cyc, G, True, axis=1)

    # retrace (no new reads): capture each column's slice-0 crossing and,
    # in the symmetric variant, fold in the per-vertex feature bits
    s0 = (W - t0s) % W
    cur2 = np.tile(np.arange(H, dtype=np.int64), (B, 1))
    cap = np.zeros((B, H), dtype=np.int64)
    acc = np.zeros((B, H), dtype=np.uint8)
    for s in range(W):
        cap = np.where((s0 == s)[:, None], cur2, cap)
        t = (t0s + s) % W
        flat = cur2 + (H * t)[:, None]
        if slots == 1:
            b = np.take_along_axis(bits, flat, axis=1).astype(np.int64)
        else:
            base = 4 * flat
            nib = np.zeros((B, H), dtype=np.int64)
            b = np.zeros((B, H), dtype=np.int64)
            for j in range(4):
                bj = np.take_along_axis(bits, base + j, axis=1).astype(np.int64)
                nib |= bj << j
                b ^= bj
            acc ^= _FEATURE_TABLE[nib]
        cur2 = (2 * cur2 + b) % H

    if slots == 1:
        h0 = np.where(cyc, cap, H).min(axis=1)
        vbit = bits[np.arange(B), h0].astype(np.int8)
        values[:] = 2 * vbit - 1
    else:
        x = np.bitwise_xor.reduce(np.where(cyc, acc, 0), axis=1)
        values[:] = 2 * x.astype(np.int8) - 1
    read_counts += flags.sum(axis=0, dtype=np.int64)
    nreads[:] = flags.sum(axis=1, dtype=np.int64)


def nonmono_mc_batch(bits, H, W, slots, t0s, starts, read_counts, values, nreads):
    """Sparse-start routing-ensemble evaluator.

    Paths run until they hit any previously traced vertex; a self-hit
    yields a newly discovered cycle, a merge inherits the earlier trace's
    cycle, which was already recorded.
    """
    B, n = bits.shape
    m = starts.shape[1]
    HW = H * W
    for bi in range(B):
        row = bits[bi]
        flags = np.zeros(n, dtype=np.uint8)
        owner = np.full(HW, -1, dtype=np.int64)
        disc = np.zeros(H, dtype=bool)
        accv = 0
        t0 = int(t0s[bi])
        for p in range(m):
            h, t = int(starts[bi, p]), t0
            while True:
                flat = h + H * t
                if owner[flat] >= 0:
                    if owner[flat] == p:
                        ch, ct = h, t
                        while True:
                            cflat = ch + H * ct
                            if ct == 0:
                                disc[ch] = True
                            if slots == 1:
                                b = int(row[cflat])
                            else:
                                base = 4 * cflat
                                nib = (
                                    int(row[base])
                                    | int(row[base + 1]) << 1
                                    | int(row[base + 2]) << 2
                                    | int(row[base + 3]) << 3
                                )
                                accv ^= int(_FEATURE_TABLE[nib])
                                b = (
                                    int(row[base])
                                    ^ int(row[base + 1])
                                    ^ int(row[base + 2])
                                    ^ int(row[base + 3])
                                )
                            ch = (2 * ch + b) % H
                            ct = (ct + 1) % W
                            if ch + H * ct == flat:
                                break
                    break
                owner[flat] = p
                if slots == 1:
                    b = int(row[flat])
                    flags[flat] = 1
                else:
                    base = 4 * flat
                    b = 0
                    for j in range(4):
                        b ^= int(row[base + j])
                        flags[base + j] = 1
                h = (2 * h + b) % H
                t = (t + 1) % W
        if slots == 1:
            j0 = int(np.flatnonzero(disc)[0])
            values[bi] = 2 * int(row[j0]) - 1
        else:
            values[bi] = 2 * (accv & 1) - 1
        read_counts += flags
        nreads[bi] = int(flags.sum())


def _edge_masks(bits, pos0, pos1):
    e0 = np.take_along_axis(bits, pos0, axis=1).astype(np.uint64) * _ALL1
    e1 = np.take_along_axis(bits, pos1, axis=1).astype(np.uint64) * _ALL1
    return e0, e1


def mono_lv_values_batch(bits, H, W, offset, t0s, read_counts, masks, nreads):
    """Frontier pass over the edge ensemble with origin-label masks.

    masks[b] gets bit j set iff slice-0 vertex (j,0) lies on an open
    winding cycle.  Limited to H <= 64 (one machine word of origins).
    """
    if H > 64:
        raise ValueError(f"origin masks need H <= 64, got H={H}")
    B, n = bits.shape
    rows = np.arange(B)[:, None]
    flags = np.zeros((B, n), dtype=np.uint8)
    hh = np.arange(H, dtype=np.int64)
    p0 = hh >> 1
    p1 = p0 + H // 2
    parity = hh & 1
    succ0 = (2 * hh) % H
    succ1 = (2 * hh + 1) % H

    fwd = [_identity_masks(B, H)]
    for s in range(W):
        t = ((t0s + s) % W)[:, None]
        lab = fwd[-1]
        reached = lab != 0
        base = offset + 2 * (hh[None, :] + H * t)
        flags[rows, base] |= reached
        flags[rows, base + 1] |= reached
        pos0 = offset + 2 * (p0[None, :] + H * t) + parity[None, :]
        pos1 = offset + 2 * (p1[None, :] + H * t) + parity[None, :]
        e0, e1 = _edge_masks(bits, pos0, pos1)
        fwd.append((lab[:, p0] & e0) | (lab[:, p1] & e1))

    s0 = (W - t0s) % W
    bwd = _identity_masks(B, H)
    out = np.zeros(B, dtype=np.uint64)
    jpow = _ONE << np.arange(H, dtype=np.uint64)
    for s in range(W - 1, -1, -1):
        t = ((t0s + s) % W)[:, None]
        pos0 = offset + 2 * (hh[None, :] + H * t)
        e0, e1 = _edge_masks(bits, pos0, pos0 + 1)
        bwd = (bwd[:, succ0] & e0) | (bwd[:, succ1] & e1)
        hit = s0 == s
        if hit.any():
            onc = (fwd[s] & bwd) != 0
            packed = np.bitwise_or.reduce(
                np.where(onc, jpow[None, :], np.uint64(0)), axis=1
            )
            out = np.where(hit, packed, out)
    masks[:] = out
    read_counts += flags.sum(axis=0, dtype=np.int64)
    nreads[:] = flags.sum(axis=1, dtype=np.int64)


def mono_lv_reads_batch(bits, H, W, offset, t0s, read_counts, nreads):
    """Read pattern of the frontier evaluator only; works at any H."""
    B, n = bits.shape
    rows = np.arange(B)[:, None]
    flags = np.zeros((B, n), dtype=np.uint8)
    hh = np.arange(H, dtype=np.int64)
    p0 = hh >> 1
    p1 = p0 + H // 2
    parity = hh & 1
    reached = np.ones((B, H), dtype=bool)
    for s in range(W):
        t = ((t0s + s) % W)[:, None]
        base = offset + 2 * (hh[None, :] + H * t)
        flags[rows, base] |= reached
        flags[rows, base + 1] |= reached
        pos0 = offset + 2 * (p0[None, :] + H * t) + parity[None, :]
        pos1 = offset + 2 * (p1[None, :] + H * t) + parity[None, :]
        e0 = np.take_along_axis(bits, pos0, axis=1) != 0
        e1 = np.take_along_axis(bits, pos1, axis=1) != 0
        reached = (reached[:, p0] & e0) | (reached[:, p1] & e1)
    read_counts += flags.sum(axis=0, dtype=np.int64)
    nreads[:] = flags.sum(axis=1, dtype=np.int64)


def mono_mc_batch(
    bits, H, W, offset, seed_masks, read_counts, masks, nreads, want_values
):
    """Sparse exploration of the edge ensemble via per-vertex depth masks.

    Bit s of a vertex's mask: an open path of length s from a seed ends
    there.  Vertices reached at depth < 2W have both edge bits read; a
    cycle counts as discovered iff one of its vertices was reached at
    depth <= W, certified inside the read subgraph only.
    """
    if 2 * W + 1 > 63:
        raise ValueError(f"depth masks need W <= 31, got W={W}")
    B, n = bits.shape
    HW = H * W
    flat = np.arange(HW, dtype=np.int64)
    hco = flat % H
    tprev = (flat // H - 1) % W
    pred0 = (hco >> 1) + H * tprev
    pred1 = pred0 + H // 2
    whichv = hco & 1
    e0 = bits[:, offset + 2 * pred0 + whichv].astype(np.uint64) * _ALL1
    e1 = bits[:, offset + 2 * pred1 + whichv].astype(np.uint64) * _ALL1

    depth_cap = 2 * W
    capmask = np.uint64((1 << (depth_cap + 1)) - 1)
    D = seed_masks.astype(np.uint64)
    for _ in range(depth_cap):
        D = (D | (((D[:, pred0] & e0) | (D[:, pred1] & e1)) << _ONE)) & capmask
    readm = (D & np.uint64((1 << depth_cap) - 1)) != 0
    expw = (D & np.uint64((1 << (W + 1)) - 1)) != 0

    flags = np.zeros((B, n), dtype=np.uint8)
    vbase = offset + 2 * flat
    flags[:, vbase] = readm
    flags[:, vbase + 1] = readm
    read_counts += flags.sum(axis=0, dtype=np.int64)
    nreads[:] = flags.sum(axis=1, dtype=np.int64)

    if not want_values:
        masks[:] = 0
        return
    if H > 64:
        raise ValueError(f"origin masks need H <= 64, got H={H}")
    hh = np.arange(H, dtype=np.int64)
    p0 = hh >> 1
    p1 = p0 + H // 2
    parity = hh & 1
    succ0 = (2 * hh) % H
    succ1 = (2 * hh + 1) % H
    rm = readm.astype(np.uint64) * _ALL1

    lab = _identity_masks(B, H)
    fwd = [lab]
    for s in range(W):
        src0 = p0 + H * s
        src1 = p1 + H * s
        g0 = (bits[:, offset + 2 * src0 + parity].astype(np.uint64) * _ALL1) & rm[:, src0]
        g1 = (bits[:, offset + 2 * src1 + parity].astype(np.uint64) * _ALL1) & rm[:, src1]
        lab = (lab[:, p0] & g0) | (lab[:, p1] & g1)
        fwd.append(lab)
    bwd = _identity_masks(B, H)
    disc = np.zeros(B, dtype=np.uint64)
    for s in range(W - 1, -1, -1):
        vflat = hh + H * s
        g0 = (bits[:, offset + 2 * vflat].astype(np.uint64) * _ALL1) & rm[:, vflat]
        g1 = (bits[:, offset + 2 * vflat + 1].astype(np.uint64) * _ALL1) & rm[:, vflat]
        bwd = (bwd[:, succ0] & g0) | (bwd[:, succ1] & g1)
        contrib = np.where(expw[:, vflat], fwd[s] & bwd, np.uint64(0))
        disc |= np.bitwise_or.reduce(contrib, axis=1)
    masks[:] = disc


def winding_count_batch(bits, H, W, offset, counts):
    """Exact winding-cycle count per trial via path-count propagation."""
    B = bits.shape[0]
    hh = np.arange(H, dtype=np.int64)
    p0 = hh >> 1
    p1 = p0 + H // 2
    parity = hh & 1
    M = np.tile(np.eye(H, dtype=np.int64), (B, 1, 1))
    for t in range(W):
        pos0 = offset + 2 * (p0 + H * t) + parity
        pos1 = offset + 2 * (p1 + H * t) + parity
        e0 = bits[:, pos0].astype(np.int64)[:, None, :]
        e1 = bits[:, pos1].astype(np.int64)[:, None, :]
        M = M[:, :, p0] * e0 + M[:, :, p1] * e1
    counts[:] = M[:, hh, hh].sum(axis=1)
