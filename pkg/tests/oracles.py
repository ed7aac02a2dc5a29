"""Independent reference computations used to check the library.

Each oracle takes a different route from the implementation it checks:
plain-Python summation instead of vectorized NumPy, closed-form stationary
points instead of numerical minimization, active-set enumeration instead of
bisection.
"""
import csv
import itertools
import math
from pathlib import Path

DATA = Path(__file__).parent / "data"


def h2_bits(p):
    if p in (0.0, 1.0):
        return 0.0
    return math.fsum([-p * math.log2(p), -(1 - p) * math.log2(1 - p)])


def mi_bits(joint):
    """Mutual information of a nested-list joint pmf by explicit summation."""
    px = [math.fsum(row) for row in joint]
    py = [math.fsum(col) for col in zip(*joint)]
    terms = []
    for x, row in enumerate(joint):
        for y, p in enumerate(row):
            if p > 0:
                terms.append(p * math.log2(p / (px[x] * py[y])))
    return math.fsum(terms)


def cond_entropy_bits(joint):
    """H(X|Y) = -sum p(x,y) log p(x|y)."""
    py = [math.fsum(col) for col in zip(*joint)]
    return math.fsum(-p * math.log2(p / py[y]) for row in joint for y, p in enumerate(row) if p > 0)


def eve_bound_grid(lam, points=10**6, refine=3):
    """Grid search of 2/x + log2(1/(1 - x lam/2)) over (0, min(20, 2/lam)),
    refined by successively finer grids around the best point."""
    hi = min(20.0, 2.0 / lam)
    f = lambda x: 2.0 / x - math.log2(1.0 - x * lam / 2.0)
    lo_x, hi_x = 0.0, hi
    best = None
    for _ in range(refine + 1):
        step = (hi_x - lo_x) / points
        xs = (lo_x + step * (k + 0.5) for k in range(points))
        best = min(xs, key=f)
        lo_x, hi_x = max(best - 2 * step, 1e-300), min(best + 2 * step, hi * (1 - 1e-15))
        points = 2000
    return f(best)


def eve_bound_closed_form(lam):
    """Stationary point of lam/u - log2(1-u): u^2 + c u - c = 0 with c = lam ln 2."""
    c = lam * math.log(2.0)
    u = (-c + math.sqrt(c * c + 4 * c)) / 2
    return lam / u - math.log2(1 - u)


def waterfill_active_set(sv, noise, power):
    """Largest k with a consistent water level over the k strongest channels."""
    floors = [noise / s**2 for s in sv]
    best = None
    for k in range(1, len(sv) + 1):
        mu = (power + math.fsum(floors[:k])) / k
        if mu > floors[k - 1]:
            best = (mu, [max(0.0, mu - f) for f in floors])
    return best


def fig8_plotted():
    with open(DATA / "fig8_plotted.csv") as fh:
        return [tuple(float(v) for v in row.values()) for row in csv.DictReader(fh)]


def exhaustive_collision(row_a, row_b):
    return sum(1 for a, b in zip(row_a, row_b) if a == b) / len(row_a)


def exact_binary_mixture_mi(qa, qb):
    """I(U;Y) for uniform binary U by direct summation over the joint."""
    joint = [[0.5 * a for a in qa], [0.5 * b for b in qb]]
    return mi_bits(joint)


def discrete_tv(p, q):
    return 0.5 * math.fsum(abs(a - b) for a, b in zip(p, q))


def product_law(W, prior, m):
    """Output law of an m-letter memoryless channel by explicit enumeration."""
    L, Y = len(W), len(W[0])
    out = {}
    for xs in itertools.product(range(L), repeat=m):
        px = prior[xs] if m > 1 else prior[xs[0]]
        if px == 0:
            continue
        for ys in itertools.product(range(Y), repeat=m):
            p = px
            for x, y in zip(xs, ys):
                p *= W[x][y]
            out[ys] = out.get(ys, 0.0) + p
    return [out.get(ys, 0.0) for ys in itertools.product(range(Y), repeat=m)]
