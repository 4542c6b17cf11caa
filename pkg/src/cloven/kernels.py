"""Hot loops over packed cell codes.

Every function here is numba-compilable and also runs unchanged as plain
Python on numpy arrays when the JIT is disabled (see :mod:`cloven._jit`).
Codes are left-aligned 2-bit token strings split over two ``uint64`` words;
``ntok`` gives each code's token count.
"""

from __future__ import annotations

import numpy as np

from ._jit import njit

CLOSE, IN, OUT, LEAF = 0, 1, 2, 3

SIGN_PREORDER = 0
SIGN_RELATIVE = 1

_U3 = np.uint64(3)


@njit
def decode(hi, lo, n, toks):
    """Write the ``n`` tokens of code ``(hi, lo)`` into ``toks``."""
    for p in range(n):
        if p < 32:
            toks[p] = np.int64((hi >> np.uint64(62 - 2 * p)) & _U3)
        else:
            toks[p] = np.int64((lo >> np.uint64(126 - 2 * p)) & _U3)


@njit
def encode(toks, n):
    hi = np.uint64(0)
    lo = np.uint64(0)
    for p in range(n):
        t = np.uint64(toks[p])
        if p < 32:
            hi |= t << np.uint64(62 - 2 * p)
        else:
            lo |= t << np.uint64(126 - 2 * p)
    return hi, lo


@njit
def find_code(hi_arr, lo_arr, h, l):
    """Index of ``(h, l)`` in the sorted code arrays, or -1."""
    a = 0
    b = hi_arr.shape[0]
    while a < b:
        m = (a + b) >> 1
        if hi_arr[m] < h or (hi_arr[m] == h and lo_arr[m] < l):
            a = m + 1
        else:
            b = m
    if a < hi_arr.shape[0] and hi_arr[a] == h and lo_arr[a] == l:
        return a
    return -1


@njit
def census(hi, lo, ntok, is_out, class_bit):
    """Per cell: vertex count, bivalent count and bitmask of cut classes.

    ``class_bit[g1, g2]`` is the bit index of the class ``{g1, g2}``.
    """
    m = hi.shape[0]
    n_leaves = is_out.shape[0]
    nverts = np.zeros(m, dtype=np.int16)
    nbiv = np.zeros(m, dtype=np.int8)
    cmask = np.zeros(m, dtype=np.uint64)
    toks = np.zeros(128, dtype=np.int64)
    stack = np.zeros(64, dtype=np.int64)
    items = np.zeros(64, dtype=np.int64)
    outs = np.zeros(64, dtype=np.int64)
    first = np.zeros(64, dtype=np.int64)
    for c in range(m):
        n = ntok[c]
        decode(hi[c], lo[c], n, toks)
        depth = 0
        items[0] = 0
        outs[0] = 0
        leaf = 0
        nv = 1
        b = 0
        mask = np.uint64(0)
        for p in range(n):
            t = toks[p]
            if t == LEAF:
                items[depth] += 1
                if is_out[leaf]:
                    outs[depth] += 1
                leaf += 1
            elif t == CLOSE:
                # closing a child: parent edge counts as one more half-edge
                val = items[depth] + 1
                od = outs[depth] + (1 if stack[depth] == IN else 0)
                if val == 2 and od == 2:
                    b += 1
                    g1 = (first[depth] - 1) % n_leaves
                    g2 = leaf - 1
                    if g1 > g2:
                        g1, g2 = g2, g1
                    mask |= np.uint64(1) << np.uint64(class_bit[g1, g2])
                depth -= 1
            else:
                items[depth] += 1
                if t == OUT:
                    outs[depth] += 1
                depth += 1
                stack[depth] = t
                items[depth] = 0
                outs[depth] = 0
                first[depth] = leaf
                nv += 1
        if items[0] == 2 and outs[0] == 2:
            b += 1
            mask |= np.uint64(1) << np.uint64(class_bit[0, n_leaves - 1])
        nverts[c] = nv
        nbiv[c] = b
        cmask[c] = mask
    return nverts, nbiv, cmask


@njit
def contraction_sign(rule, child_index, parent_index):
    """Incidence sign of contracting the edge above preorder vertex ``child_index``."""
    if rule == SIGN_PREORDER:
        e = child_index - 1
    else:
        e = child_index - parent_index - 1
    return 1 if e % 2 == 0 else -1


@njit
def coboundary(hi, lo, ntok, nverts, rule):
    """CSR of the contraction differential: row = cell, entries = (target, sign).

    A target missing from the code table is reported as index -1.
    """
    m = hi.shape[0]
    ptr = np.zeros(m + 1, dtype=np.int64)
    for c in range(m):
        ptr[c + 1] = ptr[c] + nverts[c] - 1
    idx = np.empty(ptr[m], dtype=np.int64)
    sgn = np.empty(ptr[m], dtype=np.int8)
    toks = np.zeros(128, dtype=np.int64)
    out = np.zeros(128, dtype=np.int64)
    match = np.zeros(128, dtype=np.int64)
    vid = np.zeros(128, dtype=np.int64)
    stack = np.zeros(128, dtype=np.int64)
    vstack = np.zeros(128, dtype=np.int64)
    for c in range(m):
        n = ntok[c]
        decode(hi[c], lo[c], n, toks)
        depth = 0
        vstack[0] = 0
        nv = 0
        for p in range(n):
            t = toks[p]
            if t == IN or t == OUT:
                nv += 1
                vid[p] = nv
                match[p] = vstack[depth]  # parent's preorder index
                depth += 1
                stack[depth] = p
                vstack[depth] = nv
            elif t == CLOSE:
                match[stack[depth]] = match[stack[depth]] * 128 + p
                depth -= 1
        w = ptr[c]
        for p in range(n):
            t = toks[p]
            if t != IN and t != OUT:
                continue
            parent = match[p] // 128
            q = match[p] % 128
            k = 0
            for r in range(n):
                if r != p and r != q:
                    out[k] = toks[r]
                    k += 1
            h, l = encode(out, k)
            idx[w] = find_code(hi, lo, h, l)
            sgn[w] = contraction_sign(rule, vid[p], parent)
            w += 1
    return ptr, idx, sgn


@njit
def transpose_csr(ptr, idx, sgn, m):
    """Incoming adjacency of a CSR differential (same entries, by target)."""
    cnt = np.zeros(m + 1, dtype=np.int64)
    for e in range(idx.shape[0]):
        cnt[idx[e] + 1] += 1
    for i in range(m):
        cnt[i + 1] += cnt[i]
    tidx = np.empty(idx.shape[0], dtype=np.int64)
    tsgn = np.empty(idx.shape[0], dtype=np.int8)
    fill = cnt[:m].copy()
    for c in range(m):
        for e in range(ptr[c], ptr[c + 1]):
            t = idx[e]
            tidx[fill[t]] = c
            tsgn[fill[t]] = sgn[e]
            fill[t] += 1
    return cnt, tidx, tsgn


@njit
def d_squared_defects(ptr, idx, sgn, member):
    """Number of (source, target) pairs where the masked two-step sum is nonzero.

    Only paths running entirely through cells with ``member`` set are summed.
    Returns ``(defects, source, target)`` with the first witness or -1.
    """
    m = ptr.shape[0] - 1
    cap = 1
    for c in range(m):
        d = ptr[c + 1] - ptr[c]
        if d > cap:
            cap = d
    cap = cap * cap
    keys = np.empty(cap, dtype=np.int64)
    vals = np.empty(cap, dtype=np.int64)
    defects = 0
    ws = -1
    wt = -1
    for c in range(m):
        if not member[c]:
            continue
        k = 0
        for e in range(ptr[c], ptr[c + 1]):
            t = idx[e]
            if not member[t]:
                continue
            for f in range(ptr[t], ptr[t + 1]):
                u = idx[f]
                if not member[u]:
                    continue
                keys[k] = u
                vals[k] = sgn[e] * sgn[f]
                k += 1
        if k == 0:
            continue
        order = np.argsort(keys[:k], kind="mergesort")
        total = 0
        for j in range(k):
            total += vals[order[j]]
            last = j == k - 1 or keys[order[j + 1]] != keys[order[j]]
            if last:
                if total != 0:
                    defects += 1
                    if ws < 0:
                        ws = c
                        wt = keys[order[j]]
                total = 0
    return defects, ws, wt


@njit
def mask_inclusion_defects(ptr, idx, cmask):
    """Edges whose target carries a cut class its source lacks, and the first such source."""
    bad = 0
    first = -1
    for c in range(ptr.shape[0] - 1):
        for e in range(ptr[c], ptr[c + 1]):
            if cmask[idx[e]] & ~cmask[c]:
                if bad == 0:
                    first = c
                bad += 1
    return bad, first


ACE, QUEEN, KING = 1, 2, 3
_FLOW_LIMIT = 1 << 60


@njit
def _heap_push(keys, vals, size, key, val):
    i = size
    keys[i] = key
    vals[i] = val
    while i > 0:
        parent = (i - 1) >> 1
        if keys[parent] >= keys[i]:
            break
        keys[parent], keys[i] = keys[i], keys[parent]
        vals[parent], vals[i] = vals[i], vals[parent]
        i = parent
    return size + 1


@njit
def _heap_pop(keys, vals, size):
    top = vals[0]
    size -= 1
    keys[0] = keys[size]
    vals[0] = vals[size]
    i = 0
    while True:
        a = 2 * i + 1
        b = a + 1
        big = i
        if a < size and keys[a] > keys[big]:
            big = a
        if b < size and keys[b] > keys[big]:
            big = b
        if big == i:
            break
        keys[big], keys[i] = keys[i], keys[big]
        vals[big], vals[i] = vals[i], vals[big]
        i = big
    return top, size


@njit
def morse_reduce(ptr, idx, tptr, tidx, members, degree, alive, ind, queued, kind, partner, stamp):
    """Coreduction matching of the subcomplex induced on ``members``.

    ``members`` must be sorted by ascending degree.  Faces of a cell are its
    sources under the differential.  A cell with exactly one live face is
    paired with it (king over queen); candidates are served lowest degree
    first and first-come first-served within a degree, which keeps the
    number of critical cells close to the Betti numbers in practice.  When
    nothing can be paired, the lowest-degree live cell has no live faces and
    becomes critical (an ace).  ``kind``, ``partner`` and ``stamp`` receive
    the matching; ``stamp`` is the removal step, shared by both cells of a
    pair.  ``alive``, ``ind`` and ``queued`` are scratch and come back
    cleared.  Returns the aces in removal order.
    """
    nm = members.shape[0]
    for j in range(nm):
        alive[members[j]] = True
    for j in range(nm):
        c = members[j]
        a = 0
        for e in range(tptr[c], tptr[c + 1]):
            if alive[tidx[e]]:
                a += 1
        ind[c] = a
    keys = np.empty(nm, dtype=np.int64)
    heap = np.empty(nm, dtype=np.int64)
    size = 0
    aces = np.empty(nm, dtype=np.int64)
    na = 0
    scan = 0
    step = 0
    ticket = 0
    pair = np.empty(2, dtype=np.int64)
    while True:
        if size == 0:
            while scan < nm and not alive[members[scan]]:
                scan += 1
            if scan == nm:
                break
            c = members[scan]
            kind[c] = ACE
            partner[c] = -1
            stamp[c] = step
            aces[na] = c
            na += 1
            pair[0] = c
            pair[1] = -1
        else:
            c, size = _heap_pop(keys, heap, size)
            queued[c] = False
            if not alive[c] or ind[c] != 1:
                continue
            q = -1
            for e in range(tptr[c], tptr[c + 1]):
                if alive[tidx[e]]:
                    q = tidx[e]
                    break
            kind[c] = KING
            kind[q] = QUEEN
            partner[c] = q
            partner[q] = c
            stamp[c] = step
            stamp[q] = step
            pair[0] = q
            pair[1] = c
        step += 1
        for j in range(2):
            x = pair[j]
            if x < 0:
                continue
            alive[x] = False
            for e in range(ptr[x], ptr[x + 1]):
                y = idx[e]
                if alive[y]:
                    ind[y] -= 1
                    if ind[y] == 1 and not queued[y]:
                        ticket += 1
                        # max-heap: lowest degree first, then oldest ticket
                        size = _heap_push(keys, heap, size, -(degree[y] << 40) - ticket, y)
                        queued[y] = True
    for j in range(nm):
        ind[members[j]] = 0
        queued[members[j]] = False
    return aces[:na]


@njit
def _face_sign(tptr, tidx, tsgn, cell, face):
    for e in range(tptr[cell], tptr[cell + 1]):
        if tidx[e] == face:
            return np.int64(tsgn[e])
    return np.int64(0)


@njit
def morse_boundary(tptr, tidx, tsgn, aces, kind, partner, stamp, coef, inheap):
    """Boundary of every ace in the Morse complex, by gradient flow.

    Starting from the faces of an ace, each queen is replaced by the other
    faces of its king (scaled by the unit incidence), in decreasing removal
    order; kings drop out and aces accumulate.  A pair's other faces were
    removed strictly earlier, so every cell is expanded at most once per ace.
    Returns ``(rows, cols, vals, ok)`` with rows and cols as ace cell ids;
    ``ok`` is False if a coefficient outgrew the int64 guard.
    """
    rows = []
    cols = []
    vals = []
    cap = 16
    keys = np.empty(cap, dtype=np.int64)
    heap = np.empty(cap, dtype=np.int64)
    ok = True
    for j in range(aces.shape[0]):
        c = aces[j]
        size = 0
        for e in range(tptr[c], tptr[c + 1]):
            f = tidx[e]
            if kind[f] == 0:
                continue
            coef[f] += tsgn[e]
            if not inheap[f]:
                if size == keys.shape[0]:
                    keys = np.concatenate((keys, np.empty(size, dtype=np.int64)))
                    heap = np.concatenate((heap, np.empty(size, dtype=np.int64)))
                size = _heap_push(keys, heap, size, stamp[f], f)
                inheap[f] = True
        while size > 0:
            f, size = _heap_pop(keys, heap, size)
            inheap[f] = False
            x = coef[f]
            coef[f] = 0
            if x == 0:
                continue
            if kind[f] == ACE:
                rows.append(f)
                cols.append(c)
                vals.append(x)
            elif kind[f] == QUEEN:
                king = partner[f]
                w = _face_sign(tptr, tidx, tsgn, king, f)
                for e in range(tptr[king], tptr[king + 1]):
                    g = tidx[e]
                    if g == f or kind[g] == 0:
                        continue
                    coef[g] -= x * w * tsgn[e]
                    if coef[g] > _FLOW_LIMIT or coef[g] < -_FLOW_LIMIT:
                        ok = False
                    if not inheap[g]:
                        if size == keys.shape[0]:
                            keys = np.concatenate((keys, np.empty(size, dtype=np.int64)))
                            heap = np.concatenate((heap, np.empty(size, dtype=np.int64)))
                        size = _heap_push(keys, heap, size, stamp[g], g)
                        inheap[g] = True
    n = len(rows)
    r = np.empty(n, dtype=np.int64)
    cc = np.empty(n, dtype=np.int64)
    v = np.empty(n, dtype=np.int64)
    for i in range(n):
        r[i] = rows[i]
        cc[i] = cols[i]
        v[i] = vals[i]
    return r, cc, v, ok


@njit
def submask_pairs(cmask, fam_masks, order):
    """Incidences (family, cell) for every nonempty class subset of every cell.

    Cells are visited in ``order``.  ``fam_masks`` is sorted; a subset
    missing from it is returned as family -1 (a realized class set that the
    family table does not contain).
    """
    total = 0
    for c in order:
        b = 0
        x = cmask[c]
        while x:
            x &= x - np.uint64(1)
            b += 1
        total += (1 << b) - 1
    fam = np.empty(total, dtype=np.int32)
    cell = np.empty(total, dtype=np.int32)
    w = 0
    nf = fam_masks.shape[0]
    for c in order:
        full = cmask[c]
        sub = full
        while sub:
            a = 0
            b = nf
            while a < b:
                mid = (a + b) >> 1
                if fam_masks[mid] < sub:
                    a = mid + 1
                else:
                    b = mid
            fam[w] = a if a < nf and fam_masks[a] == sub else -1
            cell[w] = c
            w += 1
            sub = (sub - np.uint64(1)) & full
    return fam, cell


@njit
def family_members(fam, cell, n_families):
    """Group ``(family, cell)`` incidences into CSR, keeping incidence order."""
    cnt = np.zeros(n_families + 1, dtype=np.int64)
    for i in range(fam.shape[0]):
        if fam[i] >= 0:
            cnt[fam[i] + 1] += 1
    for f in range(n_families):
        cnt[f + 1] += cnt[f]
    out = np.empty(cnt[n_families], dtype=np.int32)
    fill = cnt[:n_families].copy()
    for i in range(fam.shape[0]):
        f = fam[i]
        if f >= 0:
            out[fill[f]] = cell[i]
            fill[f] += 1
    return cnt, out


@njit
def family_reductions(ptr, idx, tptr, tidx, degree, fam_ptr, fam_cells, alive, ind, queued, kind, partner, stamp):
    """Morse-reduce every family; returns ace counts and the first ace's degree."""
    nf = fam_ptr.shape[0] - 1
    n_aces = np.zeros(nf, dtype=np.int64)
    ace_deg = np.full(nf, -1, dtype=np.int64)
    for f in range(nf):
        if fam_ptr[f + 1] == fam_ptr[f]:
            continue
        members = fam_cells[fam_ptr[f]:fam_ptr[f + 1]].astype(np.int64)
        aces = morse_reduce(ptr, idx, tptr, tidx, members, degree, alive, ind, queued, kind, partner, stamp)
        n_aces[f] = aces.shape[0]
        ace_deg[f] = degree[aces[0]]
        for j in range(members.shape[0]):
            kind[members[j]] = 0
    return n_aces, ace_deg


@njit
def family_d_squared(ptr, idx, sgn, fam_ptr, fam_cells, flag, acc, mark):
    """Masked two-step defects per family.

    ``flag`` (bool), ``acc`` and ``mark`` (int64) are zeroed scratch of
    length m; ``mark`` holds the generation that last touched a target.
    """
    nf = fam_ptr.shape[0] - 1
    defects = np.zeros(nf, dtype=np.int64)
    cap = 1
    for c in range(ptr.shape[0] - 1):
        d = ptr[c + 1] - ptr[c]
        if d > cap:
            cap = d
    touched = np.empty(cap * cap, dtype=np.int64)
    gen = 0
    for f in range(nf):
        a = fam_ptr[f]
        b = fam_ptr[f + 1]
        for j in range(a, b):
            flag[fam_cells[j]] = True
        bad = 0
        for j in range(a, b):
            c = fam_cells[j]
            gen += 1
            k = 0
            for e in range(ptr[c], ptr[c + 1]):
                t = idx[e]
                if not flag[t]:
                    continue
                for g in range(ptr[t], ptr[t + 1]):
                    u = idx[g]
                    if flag[u]:
                        if mark[u] != gen:
                            mark[u] = gen
                            acc[u] = 0
                            touched[k] = u
                            k += 1
                        acc[u] += sgn[e] * sgn[g]
            for i in range(k):
                if acc[touched[i]] != 0:
                    bad += 1
        defects[f] = bad
        for j in range(a, b):
            flag[fam_cells[j]] = False
    return defects
