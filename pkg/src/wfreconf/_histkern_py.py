"""Pure-Python history enumeration kernel.

Truth tables are Python ints with ``nbits`` significant bits.  A spec is a
triple ``(vertex_tables, arc_triples, forced_mask)`` where ``arc_triples``
lists ``(src, dst, table)`` and ``forced_mask`` is or-ed into every history
before that spec is evaluated.  A history ``h`` is reported when the
conjunction over all specs of

    AND_{a in h} f_a  AND  AND_{a not in h, b in h} NOT f_ab

has a satisfying row.
"""


def consistent_subsets(n, nbits, specs, universe_mask):
    full = (1 << nbits) - 1
    prepared = []
    for vert, arcs, forced in specs:
        incoming = [[] for _ in range(n)]
        for src, dst, table in arcs:
            incoming[dst].append((src, ~table & full))
        prepared.append((list(vert), incoming, forced))
    out = []
    for h in range(1 << n):
        if h & ~universe_mask:
            continue
        acc = full
        for vert, incoming, forced in prepared:
            hh = h | forced
            j = 0
            bits = hh
            while bits and acc:
                if bits & 1:
                    acc &= vert[j]
                    for src, neg in incoming[j]:
                        if not (hh >> src) & 1:
                            acc &= neg
                bits >>= 1
                j += 1
            if not acc:
                break
        if acc:
            out.append(h)
    return out
