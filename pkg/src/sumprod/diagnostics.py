"""Coverage scans, counting profiles and exponent estimates.

Set expressions use single identifiers for sets, integer literals, ``+``
(sumset), ``*`` (product set, or dilation when one side is an integer) and
``^k`` (k-fold product).  ``^`` binds tightest and ``+`` loosest.
"""

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .constructions.basic import alpha_k
from .errors import ExprError
from .intset import count_upto, dilate, make_set, pair_count_upto, power_set_k, product_set, sumset
from .tables import Table, emit_csv, emit_plotdata  # noqa: F401

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_]\w*)|(.))")


def tokenize(text):
    toks = []
    for num, name, op in _TOKEN.findall(text):
        if num:
            toks.append(("int", int(num)))
        elif name:
            toks.append(("name", name))
        elif op.strip():
            if op not in "+*^()":
                raise ExprError(f"unexpected character {op!r} in {text!r}")
            toks.append(("op", op))
    return toks


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, kind=None, value=None):
        tok = self.peek()
        if tok[0] is None or (kind and tok[0] != kind) or (value and tok[1] != value):
            want = value or kind or "token"
            raise ExprError(f"expected {want} at token {self.i} of {self.text!r}")
        self.i += 1
        return tok

    def parse(self):
        if not self.toks:
            raise ExprError("empty expression")
        node = self.expr()
        if self.i != len(self.toks):
            raise ExprError(f"trailing input at token {self.i} of {self.text!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+"):
            self.take()
            node = ("add", node, self.term())
        return node

    def term(self):
        node = self.factor()
        while self.peek() == ("op", "*"):
            self.take()
            node = ("mul", node, self.factor())
        return node

    def factor(self):
        node = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            k = self.take("int")[1]
            if k < 1:
                raise ExprError("exponent must be >= 1")
            node = ("pow", node, k)
        return node

    def atom(self):
        kind, val = self.peek()
        if kind == "int":
            self.take()
            return ("int", val)
        if kind == "name":
            self.take()
            return ("set", val)
        self.take("op", "(")
        node = self.expr()
        self.take("op", ")")
        return node


def parse_expr(text):
    """Parse into a tuple tree: ('set', name), ('int', v), ('add'|'mul', l, r), ('pow', x, k)."""
    return _Parser(text).parse()


def expr_names(node):
    if node[0] == "set":
        return {node[1]}
    if node[0] == "int":
        return set()
    if node[0] == "pow":
        return expr_names(node[1])
    return expr_names(node[1]) | expr_names(node[2])


def _eval(node, env, limit):
    kind = node[0]
    if kind == "int":
        return node[1]
    if kind == "set":
        A = env[node[1]]
        return A if A.capacity == limit else A.truncate(limit)
    if kind == "pow":
        x = _eval(node[1], env, limit)
        return x ** node[2] if isinstance(x, int) else power_set_k(x, node[2], limit)
    left = _eval(node[1], env, limit)
    right = _eval(node[2], env, limit)
    if kind == "mul":
        if isinstance(left, int) and isinstance(right, int):
            return left * right
        if isinstance(left, int):
            return dilate(right, left, limit)
        if isinstance(right, int):
            return dilate(left, right, limit)
        return product_set(left, right, limit)
    if isinstance(left, int) and isinstance(right, int):
        return left + right
    return sumset(_as_set(left, limit), _as_set(right, limit), limit)


def _as_set(x, limit):
    if isinstance(x, int):
        return make_set([x] if x <= limit else [], limit)
    return x


def eval_expr(expr, bindings, limit):
    """Evaluate a set expression (text or parsed tree) inside [0, limit]."""
    node = parse_expr(expr) if isinstance(expr, str) else expr
    missing = expr_names(node) - set(bindings)
    if missing:
        raise ExprError(f"unbound name(s): {', '.join(sorted(missing))}")
    for name in expr_names(node):
        if bindings[name].capacity < limit:
            bindings = dict(bindings)
            A = bindings[name]
            bindings[name] = A.truncate(limit)
    return _as_set(_eval(node, bindings, int(limit)), int(limit))


def dyadic_grid(lo, hi):
    """Powers of two in [max(lo, 2), hi]."""
    out = []
    X = 2
    while X <= hi:
        if X >= lo:
            out.append(X)
        X *= 2
    return out


@dataclass
class CoverageReport:
    expr: str
    start: int
    limit: int
    missing: list
    missing_count: int
    profile: list  # (t, missing_count, missing_fraction)
    necessary: list = field(default_factory=list)
    truncated: bool = False

    @property
    def covered(self):
        return self.missing_count == 0

    @property
    def first_gap(self):
        return self.missing[0] if self.missing else None

    def profile_table(self):
        return Table(("t", "missing_count", "missing_fraction"), list(self.profile))

    def necessary_table(self):
        return Table(("X", "A0_X", "A2_0_X", "pairs_X", "product", "holds"), list(self.necessary))


def necessary_condition(A, limit):
    """Rows (X, |A∩[0,X]|, |A²∩[0,X]|, pairs, product, X+1 <= product).

    A covering A*A+A ⊇ [0, X] forces every n <= X to be some s + a with
    s ∈ A²∩[0,X] and a ∈ A∩[0,X], so X + 1 <= |A²∩[0,X]|·|A∩[0,X]|.
    ``pairs`` is the multiplicity count of a·b <= X for a, b >= 1.
    """
    A = A if A.capacity == limit else A.truncate(limit)
    A2 = product_set(A, A, limit)
    z1 = 1 if 0 in A else 0
    z2 = 1 if 0 in A2 else 0
    rows = []
    for X in dyadic_grid(2, limit):
        a = count_upto(A, X) + z1
        s = count_upto(A2, X) + z2
        rows.append((X, a, s, pair_count_upto(A, A, X), a * s, X + 1 <= a * s))
    return rows


def coverage_report(expr, bindings, start, limit, max_list=1000):
    """Scan [start, limit] for elements missing from the expression's value."""
    start, limit = int(start), int(limit)
    if not 0 <= start <= limit:
        raise ValueError("need 0 <= start <= limit")
    S = eval_expr(expr, bindings, limit)
    miss_mask = ~S.mask()
    miss_mask[:start] = False
    missing = np.flatnonzero(miss_mask)
    csum = np.cumsum(miss_mask)
    profile = []
    for t in dyadic_grid(max(start, 2), limit) + ([limit] if limit >= 2 and limit & (limit - 1) else []):
        c = int(csum[t])
        profile.append((t, c, c / t))
    text = expr if isinstance(expr, str) else str(expr)
    rep = CoverageReport(text, start, limit, missing[:max_list].tolist(), int(missing.size),
                         profile, truncated=missing.size > max_list)
    node = parse_expr(expr) if isinstance(expr, str) else expr
    if rep.covered and start == 0 and node[0] == "add" and node[1][0] == "mul":
        l, r, s = node[1][1], node[1][2], node[2]
        if l == r == s and l[0] == "set":
            rep.necessary = necessary_condition(bindings[l[1]], limit)
    return rep


def alpha_kl(k, l):
    """(k + l - 2) / (k + l)."""
    return (k + l - 2) / (k + l)


def counting_profile(A, grid, t=0.5, s=0.0):
    """Rows (X, A(X), A(X) / (X^t (ln X)^s))."""
    rows = []
    for X in grid:
        X = int(X)
        c = count_upto(A, X)
        norm = X**t * (math.log(X) ** s if s else 1.0)
        rows.append((X, c, c / norm))
    return Table(("X", "count", "normalized"), rows)


@dataclass
class ExponentEstimate:
    alpha_hat: float
    beta_hat: float
    grid: list
    slopes: list  # (X_lo, X_hi, slope, rms residual) per window
    window: int

    @property
    def residuals(self):
        return [s[3] for s in self.slopes]

    def table(self):
        return Table(("X_lo", "X_hi", "slope", "residual"), list(self.slopes))


def exponent_estimate(A, grid=None, window=4, min_count=8):
    """Windowed least-squares slopes of ln A(X) against ln X.

    beta_hat is the largest window slope (limsup proxy), alpha_hat the
    smallest (liminf proxy).  Both are finite-scale estimates only.  The
    default grid is the dyadic X with A(X) >= min_count, where rounding
    in A(X) no longer dominates the slope.
    """
    if count_upto(A, A.capacity) < 2:
        raise ValueError("A needs at least two positive elements")
    if grid is None:
        grid = dyadic_grid(2, A.capacity)
        cnt = count_upto(A, np.asarray(grid))
        grid = [X for X, c in zip(grid, cnt) if c >= min_count]
    else:
        grid = [int(x) for x in grid]
    if len(grid) < 8:
        raise ValueError("need at least 8 grid points")
    counts = count_upto(A, np.asarray(grid))
    keep = counts > 0
    xs = np.log(np.asarray(grid, dtype=float)[keep])
    ys = np.log(counts[keep].astype(float))
    g = [int(x) for x in np.asarray(grid)[keep]]
    if xs.size < max(window, 2):
        raise ValueError("too few grid points with A(X) > 0")
    slopes = []
    for i in range(xs.size - window + 1):
        x, y = xs[i : i + window], ys[i : i + window]
        coef = np.polyfit(x, y, 1)
        res = y - np.polyval(coef, x)
        slopes.append((g[i], g[i + window - 1], float(coef[0]), float(np.sqrt(np.mean(res**2)))))
    vals = [s[2] for s in slopes]
    return ExponentEstimate(min(vals), max(vals), g, slopes, window)


@dataclass
class BoundCheck:
    k: int
    l: int
    alpha: float
    floor: float
    covered: bool
    max_ratio: float
    argmax: int
    max_sqrt_ratio: float
    rows: list  # (X, A(X), A(X) ln^alpha X / sqrt X, A^k(X), envelope ratio)

    @property
    def vacuous(self):
        return not self.covered

    @property
    def passed(self):
        return self.covered and self.max_ratio > self.floor

    def table(self):
        return Table(("X", "count", "ratio", "power_count", "envelope_ratio"), list(self.rows))


def thm11_bound_check(A, k, l, limit, floor=0.1, start=0):
    """Lower-envelope check of A(X) ln^alpha(k,l) X / sqrt(X) on dyadic X.

    The check only means something once A^k + A^l covers [start, limit];
    otherwise the result is marked vacuous.
    """
    limit = int(limit)
    expr = ("add", ("pow", ("set", "A"), k), ("pow", ("set", "A"), l))
    cov = coverage_report(expr, {"A": A}, start, limit)
    alpha = alpha_kl(k, l)
    Ak = power_set_k(A if A.capacity == limit else A.truncate(limit), k, limit)
    env_exp = k - 1 - k * alpha
    rows = []
    for X in dyadic_grid(2, limit):
        c = count_upto(A, X)
        lx = math.log(X)
        r = c * lx**alpha / math.sqrt(X)
        ck = count_upto(Ak, X)
        rows.append((X, c, r, ck, ck / (math.sqrt(X) * lx**env_exp)))
    best = max(rows, key=lambda r: r[2])
    sq = max(r[1] / math.sqrt(r[0]) for r in rows)
    return BoundCheck(k, l, alpha, floor, cov.covered, best[2], best[0], sq, rows)


__all__ = [
    "BoundCheck", "CoverageReport", "ExponentEstimate", "Table", "alpha_k", "alpha_kl",
    "counting_profile", "coverage_report", "dyadic_grid", "emit_csv", "emit_plotdata",
    "eval_expr", "exponent_estimate", "necessary_condition", "parse_expr", "thm11_bound_check",
    "tokenize",
]
