"""Independent oracle: enumerate every path step by step (no DP, no package imports)."""
from collections import Counter
from itertools import product

STEPS = {
    "king": [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)],
    "simple": [(1, 0), (0, 1), (-1, 0), (0, -1)],
    "diagonal": [(1, 1), (-1, 1), (-1, -1), (1, -1)],
    "tandem": [(1, 0), (-1, 1), (0, -1)],
    "gouyou-beauchamps": [(1, 0), (-1, 0), (-1, 1), (1, -1)],
    "kreweras": [(-1, 0), (0, -1), (1, 1)],
}


def in_cone(p):
    return p[0] >= 0 or p[1] >= 0


def in_quadrant(p):
    return p[0] >= 0 and p[1] >= 0


def walks(model, n, start=(0, 0), region="C", rule="forbid"):
    """Counter of endpoints over all admissible paths of length n."""
    ends = Counter()
    ok = in_cone if region == "C" else in_quadrant
    for path in product(STEPS[model], repeat=n):
        p = start
        for s in path:
            q = (p[0] + s[0], p[1] + s[1])
            if not ok(q) or (region == "C" and rule == "forbid" and {p, q} == {(-1, 0), (0, -1)}):
                break
            p = q
        else:
            ends[p] += 1
    return ends
