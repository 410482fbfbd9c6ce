"""Pure-Python path-enumeration kernels.

Reference implementation of the compiled kernels in ``_ckernels.pyx``. Both
enumerate fine-grained paths with a fixed initial site ``q0`` in
lexicographic order of ``(q1, ..., qn)``, build path amplitudes as running
products of step-kernel entries and accumulate with Neumaier compensated
summation. Complex products are spelled out in real arithmetic in the same
order on both sides, so the two backends agree bit-for-bit.
"""

import numpy as np

BACKEND = "python"


def neumaier_sum(values):
    s = 0.0
    c = 0.0
    for x in values:
        x = float(x)
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c


def path_block(us_re, us_im, psi0_re, psi0_im, psif_re, psif_im, q0):
    """Amplitudes and weights of all paths starting at ``q0``.

    Returns ``(amp_re, amp_im, weight)`` arrays of length ``d**n``.
    """
    ur = us_re.tolist()
    ui = us_im.tolist()
    n = len(ur)
    d = len(psi0_re)
    fr = [float(x) for x in psif_re]
    fi = [float(x) for x in psif_im]
    p0r = float(psi0_re[q0])
    p0i = float(psi0_im[q0])
    total = d ** n
    out_r = [0.0] * total
    out_i = [0.0] * total
    out_w = [0.0] * total

    q = [0] * (n + 1)
    q[0] = q0
    pre_r = [0.0] * (n + 1)
    pre_i = [0.0] * (n + 1)
    pre_r[0] = 1.0
    start = 0
    for idx in range(total):
        for k in range(start, n):
            a = pre_r[k]
            b = pre_i[k]
            c = ur[k][q[k + 1]][q[k]]
            e = ui[k][q[k + 1]][q[k]]
            pre_r[k + 1] = a * c - b * e
            pre_i[k + 1] = a * e + b * c
        ar = pre_r[n]
        ai = pre_i[n]
        tr = ar * p0r - ai * p0i
        ti = ar * p0i + ai * p0r
        qf = q[n]
        out_r[idx] = ar
        out_i[idx] = ai
        out_w[idx] = fr[qf] * tr + fi[qf] * ti
        # odometer over q[1..n]; `start` is the first kernel to recompute
        j = n
        while j >= 1:
            q[j] += 1
            if q[j] < d:
                break
            q[j] = 0
            j -= 1
        start = j - 1 if j >= 1 else 0
    return np.array(out_r), np.array(out_i), np.array(out_w)


def class_block(us_re, us_im, q0, time_step, node_cell, node_child, node_last,
                n_classes):
    """Column ``q0`` of every Schrodinger class operator, by path summation.

    ``time_step[k]`` is 1 when a chain step sits at grid time ``k``. The chain
    is a tree of nodes: ``node_cell[node][site]`` gives the cell hit at that
    node's time, ``node_child[node][cell]`` the next node, or the class index
    when ``node_last[node]`` is set. Returns ``(re, im)`` of shape
    ``(n_classes, d)`` holding ``<qf|C_alpha|q0>``.
    """
    ur = us_re.tolist()
    ui = us_im.tolist()
    n = len(ur)
    d = len(ur[0])
    tstep = [int(x) for x in time_step]
    ncell = node_cell.tolist()
    nchild = node_child.tolist()
    nlast = [int(x) for x in node_last]

    s_r = [0.0] * (n_classes * d)
    c_r = [0.0] * (n_classes * d)
    s_i = [0.0] * (n_classes * d)
    c_i = [0.0] * (n_classes * d)

    q = [0] * (n + 1)
    q[0] = q0
    pre_r = [0.0] * (n + 1)
    pre_i = [0.0] * (n + 1)
    pre_r[0] = 1.0
    # state[k]: tree node reached after times <= k (>= 0), or -(class+1) once a leaf is hit
    state = [0] * (n + 1)
    start = 0
    for _ in range(d ** n):
        for k in range(start, n):
            a = pre_r[k]
            b = pre_i[k]
            c = ur[k][q[k + 1]][q[k]]
            e = ui[k][q[k + 1]][q[k]]
            pre_r[k + 1] = a * c - b * e
            pre_i[k + 1] = a * e + b * c
            st = state[k]
            if tstep[k + 1] and st >= 0:
                cell = ncell[st][q[k + 1]]
                nxt = nchild[st][cell]
                st = -(nxt + 1) if nlast[st] else nxt
            state[k + 1] = st
        cls = -state[n] - 1
        pos = cls * d + q[n]
        for s_arr, c_arr, x in ((s_r, c_r, pre_r[n]), (s_i, c_i, pre_i[n])):
            s = s_arr[pos]
            t = s + x
            if abs(s) >= abs(x):
                c_arr[pos] += (s - t) + x
            else:
                c_arr[pos] += (x - t) + s
            s_arr[pos] = t
        j = n
        while j >= 1:
            q[j] += 1
            if q[j] < d:
                break
            q[j] = 0
            j -= 1
        start = j - 1 if j >= 1 else 0
    re = np.array([s_r[i] + c_r[i] for i in range(n_classes * d)]).reshape(n_classes, d)
    im = np.array([s_i[i] + c_i[i] for i in range(n_classes * d)]).reshape(n_classes, d)
    return re, im
