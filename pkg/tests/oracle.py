"""Pure-Python reference evaluator.

Nested loops over Python complex numbers only; shares no code with the
package so it can check both the numpy path and the autodiff graph.
"""

import math


def combined(h_d, g, h_r, phi):
    """h_d[m] + sum_n g[m][n] phi[n] h_r[n] for every antenna m."""
    out = []
    for m in range(len(h_d)):
        acc = complex(h_d[m])
        for n in range(len(phi)):
            acc += complex(g[m][n]) * complex(phi[n]) * complex(h_r[n])
        out.append(acc)
    return out


def inner(h, col):
    return sum(complex(a) * complex(b) for a, b in zip(h, col))


def column(w, k):
    return [w[m][k] for m in range(len(w))]


def order(gains):
    # strongest first, equal gains keep the smaller index first
    idx = list(range(len(gains)))
    idx.sort(key=lambda i: (-gains[i], i))
    return idx


def sinr(h, w, a, p_t, noise, perm, rank):
    target = perm[rank]
    sig = a[target] * p_t * abs(inner(h, column(w, target))) ** 2
    interf = 0.0
    for r in range(rank + 1, len(perm)):
        i = perm[r]
        interf += a[i] * p_t * abs(inner(h, column(w, i))) ** 2
    return sig / (interf + noise)


def sum_secrecy(h_d, g, h_r, h_ed, h_er, w, a, phi, p_t, noise, internal_eve=None):
    """Sum secrecy rate; ``internal_eve`` is a 0-based user index or None (external)."""
    K = len(h_d)
    users = [combined(h_d[k], g, h_r[k], phi) for k in range(K)]
    gains = [sum(abs(x) ** 2 for x in u) for u in users]
    perm = order(gains)
    eve = users[internal_eve] if internal_eve is not None else combined(h_ed, g, h_er, phi)
    total = 0.0
    per_user = [0.0] * K
    for rank in range(K):
        k = perm[rank]
        r_user = math.log2(1.0 + sinr(users[k], w, a, p_t, noise, perm, rank))
        if internal_eve is not None and k == internal_eve:
            sec = r_user
        else:
            r_eve = math.log2(1.0 + sinr(eve, w, a, p_t, noise, perm, rank))
            sec = max(0.0, r_user - r_eve)
        per_user[k] = sec
        total += sec
    return total, per_user


def realization_args(real):
    """Unpack a package realization into nested Python lists."""
    return (real.h_direct.tolist(), real.g.tolist(), real.h_irs_user.tolist(),
            real.h_eve_direct.tolist(), real.h_eve_irs.tolist())


def pilot(h_d, g, h_r, pattern, beam, power):
    """Noise-free received pilot for one snapshot."""
    eff = combined(h_d, g, h_r, pattern)
    return inner(eff, beam) * math.sqrt(power)
