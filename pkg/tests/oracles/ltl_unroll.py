"""LTL by unrolling a lasso whose loop is the last position.

A run of ``n`` labelled positions is read as the infinite word
``w[0] .. w[n-1] w[n-1] ...``; checking the first ``n + 2`` positions of the
unrolled word is enough because every suffix from ``n - 1`` on is identical.
"""


def word(labels, extra=2):
    return list(labels) + [labels[-1]] * extra


def holds(f, w, i=0):
    """``f`` is a tuple formula: ("atom", a) ("not", f) ("and", f, g) ("or", f, g) ("U", f, g) ("G", f)."""
    kind = f[0]
    if kind == "atom":
        return f[1] in w[i]
    if kind == "not":
        return not holds(f[1], w, i)
    if kind == "and":
        return holds(f[1], w, i) and holds(f[2], w, i)
    if kind == "or":
        return holds(f[1], w, i) or holds(f[2], w, i)
    if kind == "G":
        return all(holds(f[1], w, j) for j in range(i, len(w)))
    if kind == "U":
        for j in range(i, len(w)):
            if holds(f[2], w, j):
                return True
            if not holds(f[1], w, j):
                return False
        return False
    raise ValueError(f)
