"""Exact arithmetic: rationals, polynomials, rational functions, linear solves.

Rationals are :class:`fractions.Fraction`. Engine hot loops convert them to
``int`` (when integral) or :class:`gmpy2.mpq` with :func:`fast_rat`; both
compare and hash equal to the corresponding ``Fraction``.
"""
from __future__ import annotations

import itertools
import math
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Sequence

import gmpy2

from .errors import PoleError, SingularMatrixError

NEG_INF = float("-inf")


# --------------------------------------------------------------------------
# scalars


def as_rat(x) -> Fraction:
    """Coerce ``x`` (int, Fraction, mpq, or a ``"p/q"`` string) to a Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, Rational):
        return Fraction(int(x.numerator), int(x.denominator))
    raise TypeError(f"cannot interpret {x!r} as an exact rational")


def format_rat(x) -> str:
    x = as_rat(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def fast_rat(x):
    """Engine representation of an exact scalar: ``int`` if integral, else ``mpq``."""
    x = as_rat(x)
    if x.denominator == 1:
        return x.numerator
    return gmpy2.mpq(x.numerator, x.denominator)


def to_fraction(x) -> Fraction:
    return as_rat(x)


def _sign(x) -> int:
    return (x > 0) - (x < 0)


# --------------------------------------------------------------------------
# univariate polynomials


class Poly:
    """Univariate polynomial with rational coefficients, lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [as_rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def x(cls) -> "Poly":
        return cls([0, 1])

    @classmethod
    def constant(cls, c) -> "Poly":
        return cls([c])

    @classmethod
    def from_roots(cls, roots: Iterable) -> "Poly":
        p = cls([1])
        for r in roots:
            p = p * cls([-as_rat(r), 1])
        return p

    @classmethod
    def from_strings(cls, items: Sequence[str]) -> "Poly":
        return cls(as_rat(s) for s in items)

    def to_strings(self) -> list[str]:
        return [format_rat(c) for c in self.coeffs]

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.coeffs == Poly([other]).coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "Poly(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mono = "" if i == 0 else ("X" if i == 1 else f"X^{i}")
            terms.append(f"{format_rat(c)}{'*' + mono if mono else ''}")
        return "Poly(" + " + ".join(terms) + ")"

    @staticmethod
    def _lift(other) -> "Poly":
        return other if isinstance(other, Poly) else Poly([other])

    def __add__(self, other):
        other = self._lift(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = self.coeffs + (Fraction(0),) * (n - len(self.coeffs))
        b = other.coeffs + (Fraction(0),) * (n - len(other.coeffs))
        return Poly(x + y for x, y in zip(a, b))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-c for c in self.coeffs)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        if not self.coeffs or not other.coeffs:
            return Poly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = Poly([1])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __call__(self, x):
        """Horner evaluation; works for scalars and numpy object/float arrays."""
        if not self.coeffs:
            return 0 * x
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        if len(self.coeffs) == 1:
            acc = acc + 0 * x
        return acc

    def compose(self, inner: "Poly") -> "Poly":
        acc = Poly()
        for c in reversed(self.coeffs):
            acc = acc * inner + c
        return acc

    def shift(self, a) -> "Poly":
        """Return ``p(X + a)``."""
        return self.compose(Poly([a, 1]))

    def derivative(self) -> "Poly":
        return Poly(i * c for i, c in enumerate(self.coeffs) if i > 0)

    def divmod(self, other: "Poly"):
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(other.coeffs) - 1
        quot = [Fraction(0)] * max(len(rem) - dq, 0)
        lead = other.coeffs[-1]
        for i in range(len(rem) - 1, dq - 1, -1):
            coef = rem[i] / lead
            quot[i - dq] = coef
            if coef:
                for j, b in enumerate(other.coeffs):
                    rem[i - dq + j] -= coef * b
        return Poly(quot), Poly(rem[:dq])

    def sign_at_infinity(self, positive: bool = True) -> int:
        if not self.coeffs:
            return 0
        s = _sign(self.leading)
        if not positive and self.degree % 2 == 1:
            s = -s
        return s

    def count_real_roots(self) -> int:
        """Number of distinct real roots, via a Sturm sequence."""
        if self.is_zero():
            raise ValueError("the zero polynomial vanishes everywhere")
        if self.degree == 0:
            return 0
        seq = [self, self.derivative()]
        while not seq[-1].is_zero():
            _, r = seq[-2].divmod(seq[-1])
            seq.append(-r)
        seq.pop()

        def changes(positive):
            signs = [p.sign_at_infinity(positive) for p in seq]
            signs = [s for s in signs if s]
            return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

        return changes(False) - changes(True)


def falling_factorial(k: int) -> Poly:
    """``X (X-1) ... (X-(k-1))``: zero on {0..k-1}, at least 1 on integers >= k."""
    return Poly.from_roots(range(k))


# --------------------------------------------------------------------------
# multivariate polynomials


class MPoly:
    """Sparse multivariate polynomial: exponent tuple -> rational coefficient."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: dict | None = None):
        self.nvars = nvars
        clean = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != nvars or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent vector {exp} for {nvars} variables")
            c = as_rat(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
        self.terms = {e: c for e, c in clean.items() if c}

    @classmethod
    def constant(cls, nvars, c) -> "MPoly":
        return cls(nvars, {(0,) * nvars: c})

    @classmethod
    def var(cls, nvars, i) -> "MPoly":
        exp = [0] * nvars
        exp[i] = 1
        return cls(nvars, {tuple(exp): 1})

    @classmethod
    def power_sum(cls, nvars, power, coeff=1) -> "MPoly":
        terms = {}
        for i in range(nvars):
            exp = [0] * nvars
            exp[i] = power
            terms[tuple(exp)] = coeff
        return cls(nvars, terms)

    def _check(self, other):
        if isinstance(other, MPoly):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return MPoly.constant(self.nvars, other)

    def __add__(self, other):
        other = self._check(other)
        terms = dict(self.terms)
        for e, c in other.terms.items():
            terms[e] = terms.get(e, Fraction(0)) + c
        return MPoly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self):
        return MPoly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) - self

    def __mul__(self, other):
        other = self._check(other)
        terms: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, Fraction(0)) + c1 * c2
        return MPoly(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        result = MPoly.constant(self.nvars, 1)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other):
        if not isinstance(other, MPoly):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __repr__(self):
        return f"MPoly({self.nvars}, {{{', '.join(f'{e}: {format_rat(c)}' for e, c in sorted(self.terms.items()))}}})"

    @property
    def degree(self):
        if not self.terms:
            return NEG_INF
        return max(sum(e) for e in self.terms)

    def __call__(self, point: Sequence):
        if len(point) != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {len(point)}")
        total = Fraction(0)
        for exp, c in self.terms.items():
            term = c
            for x, e in zip(point, exp):
                if e:
                    term = term * x**e
            total += term
        return total

    def permuted(self, perm: Sequence[int]) -> "MPoly":
        """Rename variable ``i`` to ``perm[i]``."""
        terms = {}
        for exp, c in self.terms.items():
            new = [0] * self.nvars
            for i, e in enumerate(exp):
                new[perm[i]] = e
            terms[tuple(new)] = c
        return MPoly(self.nvars, terms)

    def is_symmetric(self) -> bool:
        # adjacent transpositions generate the symmetric group
        for i in range(self.nvars - 1):
            perm = list(range(self.nvars))
            perm[i], perm[i + 1] = perm[i + 1], perm[i]
            if self.permuted(perm) != self:
                return False
        return True


# --------------------------------------------------------------------------
# rational functions


class RationalFn:
    """``num / den`` in one variable.

    Construction checks (Sturm sequence) that the denominator has no real root
    unless ``check_poles=False``.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: Poly, den: Poly, check_poles: bool = True):
        if den.is_zero():
            raise PoleError("denominator is identically zero")
        self.num = num
        self.den = den
        if check_poles and den.count_real_roots() > 0:
            raise PoleError(f"denominator {den} has a real root")

    @property
    def degree(self):
        return (self.num.degree, self.den.degree)

    def has_real_pole(self) -> bool:
        return self.den.count_real_roots() > 0

    def __call__(self, x):
        d = self.den(x)
        if d == 0:
            raise PoleError(f"pole at {x}")
        return self.num(x) / d

    def __eq__(self, other):
        if not isinstance(other, RationalFn):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __repr__(self):
        return f"RationalFn({self.num!r} / {self.den!r})"


# --------------------------------------------------------------------------
# exact linear algebra


def _rref(rows: list[list[Fraction]], ncols: int):
    """In-place reduced row echelon form; returns the pivot columns."""
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        p = rows[r][c]
        rows[r] = [v / p for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return pivots


def solve_linear_exact(matrix: Sequence[Sequence], rhs: Sequence) -> list[Fraction]:
    """Solve ``matrix @ x = rhs`` exactly by Gauss-Jordan elimination.

    Raises SingularMatrixError naming the columns without a pivot.
    """
    n = len(matrix)
    if any(len(row) != n for row in matrix):
        raise ValueError("matrix must be square")
    if len(rhs) != n:
        raise ValueError("right-hand side length mismatch")
    rows = [[as_rat(v) for v in row] + [as_rat(b)] for row, b in zip(matrix, rhs)]
    pivots = _rref(rows, n)
    if len(pivots) < n:
        missing = [c for c in range(n) if c not in pivots]
        raise SingularMatrixError("singular system", missing)
    return [rows[i][n] for i in range(n)]


def rank(vectors: Sequence[Sequence]) -> int:
    if not vectors:
        return 0
    rows = [[as_rat(v) for v in vec] for vec in vectors]
    return len(_rref(rows, len(rows[0])))


def mat_vec(matrix, vec):
    return [sum((a * b for a, b in zip(row, vec)), Fraction(0)) for row in matrix]


def lcm_denominator(values: Iterable) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, as_rat(v).denominator)
    return out


def product_grid(m: int, kmax: int, nondecreasing: bool = False):
    """All points of ``{0..kmax}^m`` (or its non-decreasing ones) in lexicographic order."""
    if nondecreasing:
        return itertools.combinations_with_replacement(range(kmax + 1), m)
    return itertools.product(range(kmax + 1), repeat=m)
