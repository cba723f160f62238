"""Inner solver loops, jitted when numba is available.

All kernels advance jump-adapted Euler states through a merged timeline of
event times, checkpoint times, Wiener-grid boundaries (when the small-jump
Gaussian refinement is on) and the horizon.  Coefficient functions arrive as
compiled scalar callables and are inlined by numba.  Randomness never enters
a kernel: streams and normal pools are drawn outside, so results are
bit-identical across jit/nojit and any thread count.

Node recording writes one node per interior drift substep and one node per
stop (post jump/kick), with the segment rate chosen so that the pre-jump
value is exactly recoverable from the previous node.

Status codes: 0 ok, 1 blowup guard tripped, 2 thinning band exceeded u_bound.
"""

from __future__ import annotations

import math

from ._jit import kernel_jit

STATUS_OK = 0
STATUS_BLOWUP = 1
STATUS_DOMINATION = 2


@kernel_jit
def couple_iv_kernel(
    ev_times, ev_sizes, x0, xt0, mu, h, horizon, cps,
    sigma_f, b_f, guard, drift_free,
    sig_eps, w_step, normals,
    deltas, seg_sup,
    record, node_t, node_x, node_xt, node_jump, node_rate_x, node_rate_xt,
):
    x = x0
    xt = xt0
    t = 0.0
    i = 0
    j = 0
    kw = 0
    n = len(ev_times)
    m = len(cps)
    nn = 0
    last_t = 0.0
    last_x = x
    last_xt = xt
    if record:
        node_t[0] = 0.0
        node_x[0] = x
        node_xt[0] = xt
        node_jump[0] = 0
        node_rate_x[0] = 0.0
        node_rate_xt[0] = 0.0
        nn = 1
    while True:
        te = ev_times[i] if i < n else math.inf
        tc = cps[j] if j < m else math.inf
        tw = min(w_step * (kw + 1), horizon) if sig_eps > 0.0 else math.inf
        tn = min(min(te, tc), min(tw, horizon))
        dt = tn - t
        if dt > 0.0 and not drift_free:
            nsub = int(math.ceil(dt / h))
            step = dt / nsub
            for k in range(nsub):
                rx = b_f(x) - sigma_f(x) * mu
                rxt = b_f(xt) - sigma_f(xt) * mu
                x += rx * step
                xt += rxt * step
                ad = abs(x - xt)
                if j < m and ad > seg_sup[j]:
                    seg_sup[j] = ad
                if record and k < nsub - 1:
                    node_t[nn] = t + (k + 1) * step
                    node_x[nn] = x
                    node_xt[nn] = xt
                    node_jump[nn] = 0
                    node_rate_x[nn] = rx
                    node_rate_xt[nn] = rxt
                    last_t = node_t[nn]
                    last_x = x
                    last_xt = xt
                    nn += 1
        t = tn
        if not (math.isfinite(x) and math.isfinite(xt)) or abs(x) > guard or abs(xt) > guard:
            return STATUS_BLOWUP, nn, t, x, xt
        if sig_eps > 0.0 and tn == tw:
            cell = tw - w_step * kw
            kick = sig_eps * math.sqrt(cell) * normals[kw]
            x += sigma_f(x) * kick
            xt += sigma_f(xt) * kick
            kw += 1
            ad = abs(x - xt)
            if j < m and ad > seg_sup[j]:
                seg_sup[j] = ad
            if not (math.isfinite(x) and math.isfinite(xt)) or abs(x) > guard or abs(xt) > guard:
                return STATUS_BLOWUP, nn, t, x, xt
        pre_x = x
        pre_xt = xt
        jumped = False
        while i < n and ev_times[i] == tn:
            z = ev_sizes[i]
            x = x + sigma_f(x) * z
            xt = xt + sigma_f(xt) * z
            i += 1
            jumped = True
            ad = abs(x - xt)
            if j < m and ad > seg_sup[j]:
                seg_sup[j] = ad
            if not (math.isfinite(x) and math.isfinite(xt)) or abs(x) > guard or abs(xt) > guard:
                return STATUS_BLOWUP, nn, tn, x, xt
        if record and tn > last_t:
            node_t[nn] = tn
            node_x[nn] = x
            node_xt[nn] = xt
            node_jump[nn] = 1 if jumped else 0
            node_rate_x[nn] = (pre_x - last_x) / (tn - last_t)
            node_rate_xt[nn] = (pre_xt - last_xt) / (tn - last_t)
            last_t = tn
            last_x = x
            last_xt = xt
            nn += 1
        if j < m and cps[j] == tn:
            deltas[j] = x - xt
            ad = abs(x - xt)
            if ad > seg_sup[j]:
                seg_sup[j] = ad
            j += 1
        if t >= horizon and j >= m and i >= n:
            return STATUS_OK, nn, t, x, xt


@kernel_jit
def path_iv_kernel(
    ev_times, ev_sizes, x0, mu, h, horizon, cps,
    sigma_f, b_f, guard, drift_free,
    sig_eps, w_step, normals,
    cp_values, seg_sup,
    record, node_t, node_x, node_jump, node_rate,
):
    x = x0
    t = 0.0
    i = 0
    j = 0
    kw = 0
    n = len(ev_times)
    m = len(cps)
    nn = 0
    last_t = 0.0
    last_x = x
    if record:
        node_t[0] = 0.0
        node_x[0] = x
        node_jump[0] = 0
        node_rate[0] = 0.0
        nn = 1
    if m > 0 and abs(x) > seg_sup[0]:
        seg_sup[0] = abs(x)
    while True:
        te = ev_times[i] if i < n else math.inf
        tc = cps[j] if j < m else math.inf
        tw = min(w_step * (kw + 1), horizon) if sig_eps > 0.0 else math.inf
        tn = min(min(te, tc), min(tw, horizon))
        dt = tn - t
        if dt > 0.0 and not drift_free:
            nsub = int(math.ceil(dt / h))
            step = dt / nsub
            for k in range(nsub):
                r = b_f(x) - sigma_f(x) * mu
                x += r * step
                if j < m and abs(x) > seg_sup[j]:
                    seg_sup[j] = abs(x)
                if record and k < nsub - 1:
                    node_t[nn] = t + (k + 1) * step
                    node_x[nn] = x
                    node_jump[nn] = 0
                    node_rate[nn] = r
                    last_t = node_t[nn]
                    last_x = x
                    nn += 1
        t = tn
        if not math.isfinite(x) or abs(x) > guard:
            return STATUS_BLOWUP, nn, t, x
        if sig_eps > 0.0 and tn == tw:
            cell = tw - w_step * kw
            x += sigma_f(x) * sig_eps * math.sqrt(cell) * normals[kw]
            kw += 1
            if j < m and abs(x) > seg_sup[j]:
                seg_sup[j] = abs(x)
            if not math.isfinite(x) or abs(x) > guard:
                return STATUS_BLOWUP, nn, t, x
        pre_x = x
        jumped = False
        while i < n and ev_times[i] == tn:
            x = x + sigma_f(x) * ev_sizes[i]
            i += 1
            jumped = True
            if j < m and abs(x) > seg_sup[j]:
                seg_sup[j] = abs(x)
            if not math.isfinite(x) or abs(x) > guard:
                return STATUS_BLOWUP, nn, tn, x
        if record and tn > last_t:
            node_t[nn] = tn
            node_x[nn] = x
            node_jump[nn] = 1 if jumped else 0
            node_rate[nn] = (pre_x - last_x) / (tn - last_t)
            last_t = tn
            last_x = x
            nn += 1
        if j < m and cps[j] == tn:
            cp_values[j] = x
            if abs(x) > seg_sup[j]:
                seg_sup[j] = abs(x)
            j += 1
        if t >= horizon and j >= m and i >= n:
            return STATUS_OK, nn, t, x


@kernel_jit
def couple_fv_kernel(
    ev_times, ev_sizes, ev_us, y0, yt0, h, horizon, cps,
    gamma_f, b_f, u_bound, guard, drift_free, m_small,
    deltas, seg_sup,
    record, node_t, node_x, node_xt, node_jump, node_rate_x, node_rate_xt,
):
    y = y0
    yt = yt0
    t = 0.0
    i = 0
    j = 0
    n = len(ev_times)
    m = len(cps)
    nn = 0
    last_t = 0.0
    last_y = y
    last_yt = yt
    hw = max(abs(gamma_f(y)), abs(gamma_f(yt)))
    if hw > u_bound:
        return STATUS_DOMINATION, nn, 0.0, hw, y, yt
    if record:
        node_t[0] = 0.0
        node_x[0] = y
        node_xt[0] = yt
        node_jump[0] = 0
        node_rate_x[0] = 0.0
        node_rate_xt[0] = 0.0
        nn = 1
    while True:
        te = ev_times[i] if i < n else math.inf
        tc = cps[j] if j < m else math.inf
        tn = min(min(te, tc), horizon)
        dt = tn - t
        if dt > 0.0 and not drift_free:
            nsub = int(math.ceil(dt / h))
            step = dt / nsub
            for k in range(nsub):
                ry = b_f(y) + gamma_f(y) * m_small
                ryt = b_f(yt) + gamma_f(yt) * m_small
                y += ry * step
                yt += ryt * step
                g = abs(gamma_f(y))
                gt = abs(gamma_f(yt))
                if g > hw:
                    hw = g
                if gt > hw:
                    hw = gt
                if hw > u_bound:
                    return STATUS_DOMINATION, nn, t + (k + 1) * step, hw, y, yt
                ad = abs(y - yt)
                if j < m and ad > seg_sup[j]:
                    seg_sup[j] = ad
                if record and k < nsub - 1:
                    node_t[nn] = t + (k + 1) * step
                    node_x[nn] = y
                    node_xt[nn] = yt
                    node_jump[nn] = 0
                    node_rate_x[nn] = ry
                    node_rate_xt[nn] = ryt
                    last_t = node_t[nn]
                    last_y = y
                    last_yt = yt
                    nn += 1
        t = tn
        if not (math.isfinite(y) and math.isfinite(yt)) or abs(y) > guard or abs(yt) > guard:
            return STATUS_BLOWUP, nn, t, hw, y, yt
        pre_y = y
        pre_yt = yt
        jumped = False
        while i < n and ev_times[i] == tn:
            z = ev_sizes[i]
            u = ev_us[i]
            g = gamma_f(y)
            gt = gamma_f(yt)
            ag = abs(g)
            agt = abs(gt)
            if ag > hw:
                hw = ag
            if agt > hw:
                hw = agt
            if hw > u_bound:
                return STATUS_DOMINATION, nn, tn, hw, y, yt
            if (0.0 < u < g) or (g < u < 0.0):
                y = y + z
                jumped = True
            if (0.0 < u < gt) or (gt < u < 0.0):
                yt = yt + z
                jumped = True
            i += 1
            if jumped:
                ad = abs(y - yt)
                if j < m and ad > seg_sup[j]:
                    seg_sup[j] = ad
                if not (math.isfinite(y) and math.isfinite(yt)) or abs(y) > guard or abs(yt) > guard:
                    return STATUS_BLOWUP, nn, tn, hw, y, yt
        if record and tn > last_t:
            node_t[nn] = tn
            node_x[nn] = y
            node_xt[nn] = yt
            node_jump[nn] = 1 if jumped else 0
            node_rate_x[nn] = (pre_y - last_y) / (tn - last_t)
            node_rate_xt[nn] = (pre_yt - last_yt) / (tn - last_t)
            last_t = tn
            last_y = y
            last_yt = yt
            nn += 1
        if j < m and cps[j] == tn:
            deltas[j] = y - yt
            ad = abs(y - yt)
            if ad > seg_sup[j]:
                seg_sup[j] = ad
            j += 1
        if t >= horizon and j >= m and i >= n:
            return STATUS_OK, nn, t, hw, y, yt


@kernel_jit
def path_fv_kernel(
    ev_times, ev_sizes, ev_us, y0, h, horizon, cps,
    gamma_f, b_f, u_bound, guard, drift_free, m_small,
    cp_values, seg_sup, accept_flags,
    record, node_t, node_x, node_jump, node_rate,
):
    y = y0
    t = 0.0
    i = 0
    j = 0
    n = len(ev_times)
    m = len(cps)
    nn = 0
    last_t = 0.0
    last_y = y
    hw = abs(gamma_f(y))
    if hw > u_bound:
        return STATUS_DOMINATION, nn, 0.0, hw, y
    if record:
        node_t[0] = 0.0
        node_x[0] = y
        node_jump[0] = 0
        node_rate[0] = 0.0
        nn = 1
    if m > 0 and abs(y) > seg_sup[0]:
        seg_sup[0] = abs(y)
    while True:
        te = ev_times[i] if i < n else math.inf
        tc = cps[j] if j < m else math.inf
        tn = min(min(te, tc), horizon)
        dt = tn - t
        if dt > 0.0 and not drift_free:
            nsub = int(math.ceil(dt / h))
            step = dt / nsub
            for k in range(nsub):
                r = b_f(y) + gamma_f(y) * m_small
                y += r * step
                g = abs(gamma_f(y))
                if g > hw:
                    hw = g
                if hw > u_bound:
                    return STATUS_DOMINATION, nn, t + (k + 1) * step, hw, y
                if j < m and abs(y) > seg_sup[j]:
                    seg_sup[j] = abs(y)
                if record and k < nsub - 1:
                    node_t[nn] = t + (k + 1) * step
                    node_x[nn] = y
                    node_jump[nn] = 0
                    node_rate[nn] = r
                    last_t = node_t[nn]
                    last_y = y
                    nn += 1
        t = tn
        if not math.isfinite(y) or abs(y) > guard:
            return STATUS_BLOWUP, nn, t, hw, y
        pre_y = y
        jumped = False
        while i < n and ev_times[i] == tn:
            z = ev_sizes[i]
            u = ev_us[i]
            g = gamma_f(y)
            ag = abs(g)
            if ag > hw:
                hw = ag
            if hw > u_bound:
                return STATUS_DOMINATION, nn, tn, hw, y
            if (0.0 < u < g) or (g < u < 0.0):
                y = y + z
                accept_flags[i] = 1
                jumped = True
                if j < m and abs(y) > seg_sup[j]:
                    seg_sup[j] = abs(y)
                if not math.isfinite(y) or abs(y) > guard:
                    return STATUS_BLOWUP, nn, tn, hw, y
            i += 1
        if record and tn > last_t:
            node_t[nn] = tn
            node_x[nn] = y
            node_jump[nn] = 1 if jumped else 0
            node_rate[nn] = (pre_y - last_y) / (tn - last_t)
            last_t = tn
            last_y = y
            nn += 1
        if j < m and cps[j] == tn:
            cp_values[j] = y
            if abs(y) > seg_sup[j]:
                seg_sup[j] = abs(y)
            j += 1
        if t >= horizon and j >= m and i >= n:
            return STATUS_OK, nn, t, hw, y
