"""Exact arithmetic core: rationals, dense polynomials, finite fields, matrices.

Everything here is immutable and pure.  Rationals are backed by gmpy2's
GMP-based ``mpq`` when available; set ``HEIGHTLAB_PURE_RATIONAL=1`` in the
environment to force the pure-Python ``fractions.Fraction`` backend instead
(slower, dependency-free).  Both backends satisfy the same contracts and the
test suite passes under either.
"""

from __future__ import annotations

import math
import os
import random
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "RATIONAL_BACKEND",
    "QQ",
    "Rational",
    "rat_val",
    "int_val",
    "is_probable_prime",
    "factor_int",
    "rational_sqrt",
    "UniPoly",
    "poly_gcd",
    "resultant",
    "factor_rational_squarefree",
    "GF",
    "GFElem",
    "canonical_irreducible",
    "factor_mod_p",
    "gf_trace",
    "Matrix",
    "mat_pow",
    "matrix_rank",
    "first_linear_dependency",
]


def rational_sqrt(q):
    """Exact square root of a nonnegative rational, or None if not a square."""
    q = QQ(q)
    if q < 0:
        return None
    n, d = int(q.numerator), int(q.denominator)
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return QQ(rn, rd)
    return None

if os.environ.get("HEIGHTLAB_PURE_RATIONAL") == "1":
    RATIONAL_BACKEND = "fraction"
    _mpq = Fraction
else:
    try:
        from gmpy2 import mpq as _mpq  # type: ignore

        RATIONAL_BACKEND = "gmpy2"
    except ImportError:  # pragma: no cover - gmpy2 is a declared dependency
        RATIONAL_BACKEND = "fraction"
        _mpq = Fraction

#: Concrete rational type in use (``gmpy2.mpq`` or ``fractions.Fraction``).
Rational = type(_mpq(0))


def QQ(num=0, den=1):
    """Exact rational with reduced representation and positive denominator."""
    return _mpq(num, den)


def rat_str(q) -> str:
    """Serialize a rational as ``"num/den"`` (always with a denominator)."""
    q = QQ(q)
    return f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# Integer utilities
# ---------------------------------------------------------------------------


def int_val(n: int, p: int) -> int:
    """Exponent of the prime p in the nonzero integer n."""
    if n == 0:
        raise ZeroDivisionError("valuation of zero")
    n = abs(n)
    e = 0
    while n % p == 0:
        n //= p
        e += 1
    return e


def rat_val(q, p: int) -> int:
    """p-adic valuation of a nonzero rational: q = p^n * (k/l) with p coprime to k, l."""
    q = QQ(q)
    if q == 0:
        raise ZeroDivisionError("valuation of zero")
    if p < 2 or not is_probable_prime(p):
        raise ValueError(f"{p} is not prime")
    return int_val(q.numerator, p) - int_val(q.denominator, p)


_SMALL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin primality test, deterministic below 3.3e24."""
    if n < 2:
        return False
    for p in _SMALL_PRIMES:
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _SMALL_PRIMES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_rho(n: int, rng: random.Random) -> int:
    while True:
        c = rng.randrange(1, n)
        x = y = rng.randrange(2, n)
        d = 1
        while d == 1:
            x = (x * x + c) % n
            y = (y * y + c) % n
            y = (y * y + c) % n
            d = math.gcd(abs(x - y), n)
        if d != n:
            return d


def factor_int(n: int) -> dict[int, int]:
    """Prime factorization of a nonzero integer (sign dropped)."""
    n = abs(n)
    if n == 0:
        raise ZeroDivisionError("factorization of zero")
    out: dict[int, int] = {}
    for p in _SMALL_PRIMES:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    p = 41
    while p * p <= n and p < 100_000:
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
        p += 2
    rng = random.Random(0xC0FFEE)
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if m == 1:
            continue
        if is_probable_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        d = _pollard_rho(m, rng)
        stack.extend((d, m // d))
    return dict(sorted(out.items()))


# ---------------------------------------------------------------------------
# Dense univariate polynomials over a duck-typed commutative ring
# ---------------------------------------------------------------------------


def _is_zero(c) -> bool:
    if isinstance(c, UniPoly):
        return not c.coeffs
    return not c


def _exact_div(a, b):
    """Exact division in the coefficient ring; raises if not exact."""
    if isinstance(a, UniPoly) or isinstance(b, UniPoly):
        if not isinstance(a, UniPoly):
            a = UniPoly([a])
        if not isinstance(b, UniPoly):
            b = UniPoly([b])
        return a.exact_div(b)
    if isinstance(a, int) and isinstance(b, int):
        q, r = divmod(a, b)
        if r:
            raise ArithmeticError("inexact integer division")
        return q
    return a / b


class UniPoly:
    """Dense univariate polynomial; coefficient 0 is the constant term.

    Coefficients may be ints, rationals, GFElem, or UniPoly (for recursive
    bivariate use).  The zero polynomial has an empty coefficient tuple and
    degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = list(coeffs)
        while cs and _is_zero(cs[-1]):
            cs.pop()
        self.coeffs = tuple(cs)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def x(ring_one=1) -> "UniPoly":
        return UniPoly([0 * ring_one, ring_one])

    @staticmethod
    def const(c) -> "UniPoly":
        return UniPoly([c])

    # -- structure ---------------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lead(self):
        if not self.coeffs:
            raise ValueError("zero polynomial has no leading coefficient")
        return self.coeffs[-1]

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        return self.coeffs == UniPoly([other]).coeffs

    def __hash__(self):
        return hash(("UniPoly", self.coeffs))

    def __repr__(self) -> str:
        if not self.coeffs:
            return "UniPoly(0)"
        terms = []
        for i, c in enumerate(self.coeffs):
            if _is_zero(c):
                continue
            terms.append(f"({c})*t^{i}" if i else f"({c})")
        return "UniPoly(" + " + ".join(terms) + ")"

    # -- ring operations ---------------------------------------------------

    def _coerce(self, other) -> "UniPoly":
        if isinstance(other, UniPoly):
            return other
        return UniPoly([other])

    def __add__(self, other):
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] = out[i] + c
        return UniPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        other = self._coerce(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return UniPoly()
        out = [None] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if _is_zero(ca):
                continue
            for j, cb in enumerate(b):
                t = ca * cb
                out[i + j] = t if out[i + j] is None else out[i + j] + t
        return UniPoly([0 if c is None else c for c in out])

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative polynomial power")
        result = UniPoly([1])
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    def shift(self, k: int) -> "UniPoly":
        """Multiply by t^k."""
        if not self.coeffs:
            return self
        return UniPoly((0,) * k + self.coeffs)

    def scale(self, c) -> "UniPoly":
        return UniPoly([a * c for a in self.coeffs])

    def __call__(self, x):
        """Horner evaluation; x may live in any ring containing the coefficients."""
        acc = None
        for c in reversed(self.coeffs):
            acc = c if acc is None else acc * x + c
        if acc is None:
            return 0 * x
        return acc

    def derivative(self) -> "UniPoly":
        return UniPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    # -- division ----------------------------------------------------------

    def divmod(self, other: "UniPoly"):
        """Division with remainder; requires an invertible leading coefficient."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        inv_lead = _ring_inverse(other.lead)
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return UniPoly(), self
        quo = [0] * (dq + 1)
        for k in range(dq, -1, -1):
            c = rem[k + other.degree]
            if _is_zero(c):
                continue
            q = c * inv_lead
            quo[k] = q
            for i, oc in enumerate(other.coeffs):
                rem[k + i] = rem[k + i] - q * oc
        return UniPoly(quo), UniPoly(rem)

    def __mod__(self, other: "UniPoly"):
        return self.divmod(other)[1]

    def exact_div(self, other: "UniPoly") -> "UniPoly":
        """Quotient when the division is exact over the coefficient domain."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            if self.is_zero():
                return UniPoly()
            raise ArithmeticError("inexact polynomial division")
        quo = [0] * (dq + 1)
        for k in range(dq, -1, -1):
            c = rem[k + other.degree]
            if _is_zero(c):
                continue
            q = _exact_div(c, other.lead)
            quo[k] = q
            for i, oc in enumerate(other.coeffs):
                rem[k + i] = rem[k + i] - q * oc
        if any(not _is_zero(c) for c in rem):
            raise ArithmeticError("inexact polynomial division")
        return UniPoly(quo)

    def pseudo_divmod(self, other: "UniPoly"):
        """Pseudo-division: lead(other)^(deg excess + 1) * self = q*other + r."""
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        lead = other.lead
        rem = UniPoly(self.coeffs)
        quo = UniPoly()
        e = self.degree - other.degree + 1
        while not rem.is_zero() and rem.degree >= other.degree:
            t = UniPoly([rem.lead]).shift(rem.degree - other.degree)
            quo = quo.scale(lead) + t
            rem = rem.scale(lead) - t * other
            e -= 1
        for _ in range(max(e, 0)):
            quo = quo.scale(lead)
            rem = rem.scale(lead)
        return quo, rem

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        inv = _ring_inverse(self.lead)
        return self.scale(inv)


def _ring_inverse(c):
    if isinstance(c, GFElem):
        return c.inverse()
    if isinstance(c, int):
        if c in (1, -1):
            return c
        return QQ(1, c)
    return 1 / c


def _content_int(coeffs: Sequence) -> int:
    g = 0
    for c in coeffs:
        g = math.gcd(g, abs(int(c)))
    return g or 1


def poly_gcd(f: UniPoly, g: UniPoly) -> UniPoly:
    """Gcd of univariate polynomials over a field or over a UniPoly/int domain.

    Field coefficients: monic Euclid.  Integer or nested-polynomial
    coefficients: primitive pseudo-remainder sequence, primitive output.
    """
    if f.is_zero() and g.is_zero():
        return UniPoly()
    all_coeffs = f.coeffs + g.coeffs
    if any(isinstance(c, UniPoly) for c in all_coeffs):
        if f.is_zero() or g.is_zero():
            return _positivize(g if f.is_zero() else f)
        return _gcd_prs(
            f,
            g,
            lambda cs: _list_gcd([c if isinstance(c, UniPoly) else UniPoly([c]) for c in cs]),
        )
    if all(isinstance(c, int) for c in all_coeffs):
        if f.is_zero() or g.is_zero():
            return _positivize(g if f.is_zero() else f)
        return _gcd_prs(f, g, _content_int)
    if f.is_zero() or g.is_zero():
        return (g if f.is_zero() else f).monic()
    if not any(isinstance(c, GFElem) for c in all_coeffs):
        # rational coefficients: plain Euclid suffers exponential coefficient
        # blowup, so clear denominators and run the primitive integer PRS
        fi = _to_primitive_int(f)
        gi = _to_primitive_int(g)
        return _gcd_prs(fi, gi, _content_int).monic()
    a, b = f, g
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def _to_primitive_int(f: UniPoly) -> UniPoly:
    den = 1
    for c in f.coeffs:
        d = int(QQ(c).denominator)
        den = den * d // math.gcd(den, d)
    ints = [int(QQ(c) * den) for c in f.coeffs]
    g = _content_int(ints)
    return UniPoly([c // g for c in ints])


def _positivize(f: UniPoly) -> UniPoly:
    if f.coeffs and isinstance(f.lead, int) and f.lead < 0:
        return -f
    return f


def _list_gcd(polys: Sequence[UniPoly]) -> UniPoly:
    acc = UniPoly()
    for p in polys:
        acc = poly_gcd(acc, p)
    return acc


def _gcd_prs(f: UniPoly, g: UniPoly, content):
    def primitive(h: UniPoly):
        c = content(h.coeffs)
        if isinstance(c, UniPoly):
            if c.is_zero():
                return h
            return UniPoly([_exact_div(a, c) for a in h.coeffs])
        if c in (0, 1):
            return h
        return UniPoly([_exact_div(a, c) for a in h.coeffs])

    cf, cg = content(f.coeffs), content(g.coeffs)
    cont = poly_gcd(cf, cg) if isinstance(cf, UniPoly) else math.gcd(int(cf), int(cg))
    a, b = primitive(f), primitive(g)
    if a.degree < b.degree:
        a, b = b, a
    while not b.is_zero():
        _, r = a.pseudo_divmod(b)
        a, b = b, primitive(r)
    a = _positivize(a)
    if isinstance(cont, UniPoly):
        return UniPoly([c * cont for c in a.coeffs]) if not cont == 1 else a
    return a.scale(cont) if cont != 1 else a


# ---------------------------------------------------------------------------
# Resultants (fraction-free Bareiss on the Sylvester matrix)
# ---------------------------------------------------------------------------


def resultant(f: UniPoly, g: UniPoly):
    """Sylvester resultant; zero iff f and g share a root in a closure."""
    if f.is_zero() and g.is_zero():
        raise ValueError("undefined resultant of two zero polynomials")
    if f.is_zero() or g.is_zero():
        return 0
    m, n = f.degree, g.degree
    if m == 0:
        return f.coeffs[0] ** n
    if n == 0:
        return g.coeffs[0] ** m
    fc, gc, scale = _clear_rational(f, g)
    size = m + n
    rows = []
    for i in range(n):
        row = [0] * size
        for j, c in enumerate(reversed(fc.coeffs)):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [0] * size
        for j, c in enumerate(reversed(gc.coeffs)):
            row[i + j] = c
        rows.append(row)
    det = _bareiss_det(rows)
    if scale is None:
        return det
    return det * scale


def _clear_rational(f: UniPoly, g: UniPoly):
    """Clear rational denominators, returning integer polys and a back-scale."""

    def denom_lcm(h: UniPoly):
        d = 1
        for c in h.coeffs:
            if isinstance(c, int):
                continue
            if isinstance(c, UniPoly):
                return None
            d = d * QQ(c).denominator // math.gcd(d, int(QQ(c).denominator))
        return d

    df, dg = denom_lcm(f), denom_lcm(g)
    if df is None or dg is None:
        return f, g, None
    if df == 1 and dg == 1 and all(isinstance(c, int) for c in f.coeffs + g.coeffs):
        return f, g, None
    fi = UniPoly([int(QQ(c) * df) for c in f.coeffs])
    gi = UniPoly([int(QQ(c) * dg) for c in g.coeffs])
    scale = QQ(1, df**g.degree * dg**f.degree)
    return fi, gi, scale


def _bareiss_det(rows: list[list]):
    """Fraction-free determinant; entries from an integral domain with exact division."""
    n = len(rows)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if _is_zero(rows[k][k]):
            for i in range(k + 1, n):
                if not _is_zero(rows[i][k]):
                    rows[k], rows[i] = rows[i], rows[k]
                    sign = -sign
                    break
            else:
                return 0 * prev
        pivot = rows[k][k]
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = rows[i][j] * pivot - rows[i][k] * rows[k][j]
                rows[i][j] = _exact_div(num, prev)
            rows[i][k] = 0
        prev = pivot
    det = rows[n - 1][n - 1]
    return det if sign == 1 else -det


# ---------------------------------------------------------------------------
# Factorization over Q (squarefree input): mod-p factoring, Hensel lifting,
# subset recombination.  Degrees here stay small, so no lattice methods.
# ---------------------------------------------------------------------------


def factor_rational_squarefree(f: UniPoly) -> list[UniPoly]:
    """Irreducible factors over Q of a squarefree polynomial.

    Output factors are primitive with positive leading coefficient, sorted by
    (degree, coefficients).  The input must be squarefree.
    """
    F = _to_primitive_int(f)
    n = F.degree
    if n <= 0:
        return []
    if n == 1:
        return [_positivize(F)]
    lc = int(F.lead)
    # monic transform: G(t) = lc^(n-1) F(t/lc) is monic with integer coeffs
    G = UniPoly([int(c) * lc ** (n - 1 - i) for i, c in enumerate(F.coeffs)])
    out = []
    for g in _factor_monic_int(G):
        h = UniPoly([int(c) * lc**i for i, c in enumerate(g.coeffs)])
        hp = _to_primitive_int(h)
        out.append(_positivize(hp))
    prod = UniPoly([1])
    for h in out:
        prod = prod * h
    if _to_primitive_int(prod).coeffs != _positivize(F).coeffs:  # defensive
        raise ArithmeticError("factorization consistency check failed")
    out.sort(key=lambda h: (h.degree, tuple(int(c) for c in h.coeffs)))
    return out


def _factor_monic_int(G: UniPoly) -> list[UniPoly]:
    n = G.degree
    p = None
    modular = None
    candidate_p = 3
    while candidate_p < 2000:
        if is_probable_prime(candidate_p):
            try:
                factors = factor_mod_p(UniPoly([QQ(int(c)) for c in G.coeffs]), candidate_p)
            except ValueError:
                factors = None
            if factors is not None and all(e == 1 for _, e in factors):
                p = candidate_p
                modular = [fp for fp, _ in factors]
                break
        candidate_p += 2
    if p is None:  # pragma: no cover - squarefree polys have good primes
        raise ArithmeticError("no squarefree reduction prime found")
    if len(modular) == 1:
        return [G]

    norm2 = math.isqrt(sum(int(c) * int(c) for c in G.coeffs)) + 1
    bound = (1 << n) * norm2
    pk = p
    while pk <= 2 * bound:
        pk *= p

    lifted = _hensel_tree(
        [int(c) for c in G.coeffs],
        [[int(c.coeffs[0]) for c in fp.coeffs] for fp in modular],
        p,
        pk,
    )

    # subset recombination
    out = []
    remaining = list(lifted)
    Grem = [int(c) for c in G.coeffs]
    size = 1
    while 2 * size <= len(remaining):
        hit = False
        for subset in _subsets(len(remaining), size):
            cand = [1]
            for i in subset:
                cand = _pmul(cand, remaining[i], pk)
            cand = _centered(cand, pk)
            quo = _int_poly_exact_div(Grem, cand)
            if quo is not None:
                out.append(UniPoly(cand))
                Grem = quo
                remaining = [r for i, r in enumerate(remaining) if i not in subset]
                hit = True
                break
        if not hit:
            size += 1
    if len(Grem) > 1:
        out.append(UniPoly(Grem))
    return out


def _subsets(n: int, k: int):
    import itertools

    return itertools.combinations(range(n), k)


def _pmod(a: list[int], M: int) -> list[int]:
    a = [c % M for c in a]
    while a and a[-1] == 0:
        a.pop()
    return a


def _padd(a, b, M):
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = (out[i] + c) % M
    return _pmod(out, M)


def _psub(a, b, M):
    out = [0] * max(len(a), len(b))
    for i, c in enumerate(a):
        out[i] = c
    for i, c in enumerate(b):
        out[i] = (out[i] - c) % M
    return _pmod(out, M)


def _pmul(a, b, M):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca:
            for j, cb in enumerate(b):
                out[i + j] = (out[i + j] + ca * cb) % M
    return _pmod(out, M)


def _pdivmod_monic(a, b, M):
    """Division by a monic polynomial with coefficients mod M."""
    a = list(a)
    db = len(b) - 1
    quo = [0] * max(len(a) - db, 0)
    while len(a) - 1 >= db and a:
        c = a[-1] % M
        k = len(a) - 1 - db
        if c:
            quo[k] = c
            for i in range(db + 1):
                a[k + i] = (a[k + i] - c * b[i]) % M
        a.pop()
        while a and a[-1] % M == 0:
            a.pop()
    return _pmod(quo, M), _pmod(a, M)


def _centered(a: list[int], M: int) -> list[int]:
    half = M // 2
    out = [((c + half) % M) - half for c in a]
    while out and out[-1] == 0:
        out.pop()
    return out


def _int_poly_exact_div(a: list[int], b: list[int]) -> list[int] | None:
    """Exact quotient of integer coefficient lists, or None."""
    if not b:
        return None
    a = list(a)
    if len(a) < len(b):
        return None
    db = len(b) - 1
    quo = [0] * (len(a) - db)
    lead = b[-1]
    for k in range(len(a) - db - 1, -1, -1):
        c = a[k + db]
        if c % lead:
            return None
        q = c // lead
        quo[k] = q
        if q:
            for i in range(db + 1):
                a[k + i] -= q * b[i]
    if any(a):
        return None
    return quo


def _gfp_xgcd(a: list[int], b: list[int], p: int):
    """Extended gcd over GF(p) on coefficient lists: returns (g, s, t)."""
    r0, r1 = _pmod(a, p), _pmod(b, p)
    s0, s1 = [1], []
    t0, t1 = [], [1]
    while r1:
        inv = pow(r1[-1], -1, p)
        r1m = [c * inv % p for c in r1]
        q, r = _pdivmod_monic(r0, r1m, p)
        q = _pmul(q, [inv], p)
        r0, r1 = r1, r
        s0, s1 = s1, _psub(s0, _pmul(q, s1, p), p)
        t0, t1 = t1, _psub(t0, _pmul(q, t1, p), p)
    return r0, s0, t0


def _hensel_pair(F: list[int], g: list[int], h: list[int], p: int, target: int):
    """Lift F = g*h from mod p to mod target (a power of p); g, h monic and
    coprime mod p."""
    g0, s, t = _gfp_xgcd(g, h, p)
    if len(g0) != 1:
        raise ArithmeticError("modular factors are not coprime")
    inv = pow(g0[0], -1, p)
    s = _pmul(s, [inv], p)
    t = _pmul(t, [inv], p)

    m = p
    while m < target:
        m2 = m * m
        e = _psub(F, _pmul(g, h, m2), m2)
        q, r = _pdivmod_monic(_pmul(s, e, m2), h, m2)
        g2 = _padd(_padd(g, _pmul(t, e, m2), m2), _pmul(q, g, m2), m2)
        h2 = _padd(h, r, m2)
        b = _psub(_padd(_pmul(s, g2, m2), _pmul(t, h2, m2), m2), [1], m2)
        c, d = _pdivmod_monic(_pmul(s, b, m2), h2, m2)
        s2 = _psub(s, d, m2)
        t2 = _psub(_psub(t, _pmul(t, b, m2), m2), _pmul(c, g2, m2), m2)
        g, h, s, t = g2, h2, s2, t2
        m = m2
    return _pmod(g, target), _pmod(h, target)


def _hensel_tree(F: list[int], factors: list[list[int]], p: int, pk: int) -> list[list[int]]:
    """Lift a list of pairwise-coprime monic factors of a monic F mod p to mod pk."""
    if len(factors) == 1:
        return [_pmod(F, pk)]
    half = len(factors) // 2
    left, right = factors[:half], factors[half:]
    gl = [1]
    for fac in left:
        gl = _pmul(gl, fac, p)
    hr = [1]
    for fac in right:
        hr = _pmul(hr, fac, p)
    G, H = _hensel_pair(_pmod(F, pk), gl, hr, p, pk)
    return _hensel_tree(G, left, p, pk) + _hensel_tree(H, right, p, pk)


# ---------------------------------------------------------------------------
# Finite fields GF(p^m) with canonical moduli
# ---------------------------------------------------------------------------


def _gfp_poly_is_irreducible(coeffs: tuple[int, ...], p: int) -> bool:
    """Rabin irreducibility test for a monic polynomial over GF(p)."""
    m = len(coeffs) - 1
    if m == 1:
        return True

    def mulmod(a, b):
        out = [0] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] = (out[i + j] + ca * cb) % p
        return _gfp_mod(out, coeffs, p)

    def powmod_x(e):
        result = [1]
        base = [0, 1]
        while e:
            if e & 1:
                result = mulmod(result, base)
            base = mulmod(base, base)
            e >>= 1
        return result

    # x^(p^m) == x mod f
    h = powmod_x(p**m)
    if _trim(h) != [0, 1]:
        return False
    for q in factor_int(m):
        h = powmod_x(p ** (m // q))
        diff = list(h) + [0] * (2 - len(h))
        diff[1] = (diff[1] - 1) % p
        g = _gfp_gcd(_trim(diff), list(coeffs), p)
        if len(g) != 1:
            return False
    return True


def _trim(cs):
    cs = list(cs)
    while cs and cs[-1] == 0:
        cs.pop()
    return cs


def _gfp_mod(a, mod, p):
    a = [c % p for c in a]
    dm = len(mod) - 1
    for k in range(len(a) - 1, dm - 1, -1):
        c = a[k]
        if c:
            for i in range(dm + 1):
                a[k - dm + i] = (a[k - dm + i] - c * mod[i]) % p
    a = a[:dm]
    while a and a[-1] == 0:
        a.pop()
    return a


def _gfp_gcd(a, b, p):
    a, b = list(a), list(b)
    while b:
        inv = pow(b[-1], -1, p)
        b_m = [c * inv % p for c in b]
        a = _poly_rem_gfp(a, b_m, p)
        a, b = b, a
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def _poly_rem_gfp(a, b_monic, p):
    a = [c % p for c in a]
    db = len(b_monic) - 1
    while len(a) - 1 >= db and a:
        c = a[-1]
        if c:
            k = len(a) - 1 - db
            for i in range(db + 1):
                a[k + i] = (a[k + i] - c * b_monic[i]) % p
        while a and a[-1] == 0:
            a.pop()
    return a


_IRRED_CACHE: dict[tuple[int, int], tuple[int, ...]] = {}


def canonical_irreducible(p: int, m: int) -> tuple[int, ...]:
    """Lexicographically least monic irreducible of degree m over GF(p).

    Coefficient tuples (c_{m-1}, ..., c_1, c_0) are scanned in ascending lex
    order; the result is returned in ascending-degree order (c_0, ..., c_m=1)
    so that reports stay byte-reproducible.
    """
    key = (p, m)
    if key in _IRRED_CACHE:
        return _IRRED_CACHE[key]
    if m == 1:
        result = (0, 1)  # the polynomial t
    else:
        result = None
        total = p**m
        for code in range(total):
            # decode code into (c_{m-1}, ..., c_0) ascending lex
            digits = []
            c = code
            for _ in range(m):
                digits.append(c % p)
                c //= p
            # digits[0] = c_0, ..., digits[m-1] = c_{m-1}; lex order on
            # (c_{m-1}, ..., c_0) means most significant digit is c_{m-1}.
            coeffs = tuple(digits) + (1,)
            if _gfp_poly_is_irreducible(coeffs, p):
                result = coeffs
                break
        if result is None:  # pragma: no cover - irreducibles always exist
            raise RuntimeError(f"no irreducible of degree {m} over GF({p})")
    _IRRED_CACHE[key] = result
    return result


class GF:
    """The finite field GF(p^m), modulus fixed to the canonical irreducible."""

    _cache: dict[tuple[int, int], "GF"] = {}

    def __new__(cls, p: int, m: int = 1):
        key = (p, m)
        if key in cls._cache:
            return cls._cache[key]
        if not is_probable_prime(p):
            raise ValueError(f"{p} is not prime")
        if m < 1:
            raise ValueError("extension degree must be positive")
        self = super().__new__(cls)
        self.p = p
        self.m = m
        self.q = p**m
        self.modulus = canonical_irreducible(p, m)
        cls._cache[key] = self
        return self

    def elem(self, coeffs) -> "GFElem":
        if isinstance(coeffs, GFElem):
            if coeffs.field is not self:
                raise ValueError("element of a different field")
            return coeffs
        if isinstance(coeffs, int):
            coeffs = [coeffs]
        cs = [int(c) % self.p for c in coeffs]
        if len(cs) > self.m:
            cs = _gfp_mod(cs, self.modulus, self.p)
        cs += [0] * (self.m - len(cs))
        return GFElem(self, tuple(cs[: self.m]))

    def scalar(self, c: int) -> "GFElem":
        return self.elem([c])

    def zero(self) -> "GFElem":
        return self.scalar(0)

    def one(self) -> "GFElem":
        return self.scalar(1)

    def gen(self) -> "GFElem":
        """Residue class of the variable (a field generator for m > 1)."""
        if self.m == 1:
            return self.one()
        return self.elem([0, 1])

    def elements(self):
        """All q elements in canonical (lexicographic coefficient) order."""
        for code in range(self.q):
            digits = []
            c = code
            for _ in range(self.m):
                digits.append(c % self.p)
                c //= self.p
            yield GFElem(self, tuple(digits))

    def __repr__(self):
        return f"GF({self.p}^{self.m})" if self.m > 1 else f"GF({self.p})"


class GFElem:
    """Immutable element of GF(p^m); coefficients ascending in the generator."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: GF, coeffs: tuple[int, ...]):
        self.field = field
        self.coeffs = coeffs

    def _check(self, other) -> "GFElem":
        if isinstance(other, GFElem):
            if other.field is not self.field:
                raise ValueError("mixed finite fields")
            return other
        if isinstance(other, int):
            return self.field.scalar(other)
        return NotImplemented

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.field.p
        return GFElem(self.field, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        p = self.field.p
        return GFElem(self.field, tuple(-a % p for a in self.coeffs))

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        p = self.field.p
        prod = [0] * (2 * self.field.m - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] = (prod[i + j] + a * b) % p
        red = _gfp_mod(prod, self.field.modulus, p)
        red += [0] * (self.field.m - len(red))
        return GFElem(self.field, tuple(red))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.field.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "GFElem":
        if not self:
            raise ZeroDivisionError("inverse of zero in a finite field")
        return self ** (self.field.q - 2)

    def __truediv__(self, other):
        other = self._check(other)
        return self * other.inverse()

    def frobenius(self) -> "GFElem":
        return self**self.field.p

    def __bool__(self):
        return any(self.coeffs)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.field.scalar(other)
        if not isinstance(other, GFElem):
            return NotImplemented
        return self.field is other.field and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((id(self.field), self.coeffs))

    def __repr__(self):
        return f"GFElem{self.coeffs}@{self.field!r}"

    def key(self) -> tuple[int, ...]:
        """Canonical sort key."""
        return self.coeffs


def gf_trace(a: GFElem) -> GFElem:
    """Trace to the prime field: a + a^p + ... + a^(p^(m-1))."""
    acc = a
    frob = a
    for _ in range(a.field.m - 1):
        frob = frob.frobenius()
        acc = acc + frob
    return acc


# ---------------------------------------------------------------------------
# Factorization modulo p
# ---------------------------------------------------------------------------


def _reduce_poly_mod_p(f: UniPoly, p: int) -> UniPoly:
    """Reduce a polynomial with p-integral rational coefficients mod p."""
    field = GF(p)
    out = []
    for c in f.coeffs:
        if isinstance(c, GFElem):
            out.append(c)
            continue
        q = QQ(c)
        if int(q.denominator) % p == 0:
            raise ValueError(f"bad reduction: coefficient {rat_str(q)} not {p}-integral")
        out.append(field.scalar(int(q.numerator) * pow(int(q.denominator), -1, p) % p))
    return UniPoly(out)


def factor_mod_p(f: UniPoly, p: int) -> list[tuple[UniPoly, int]]:
    """Factor f mod p into monic irreducibles over GF(p) with multiplicities.

    Requires every coefficient p-integral and the leading coefficient a
    p-unit; raises a "bad reduction" ValueError otherwise.  Output is sorted
    by (degree, coefficient tuple) so reports are reproducible.
    """
    if f.is_zero():
        raise ValueError("cannot factor the zero polynomial")
    lead = QQ(f.lead) if not isinstance(f.lead, GFElem) else None
    if lead is not None and rat_val(lead, p) != 0:
        raise ValueError(f"bad reduction: leading coefficient has nonzero valuation at {p}")
    fb = _reduce_poly_mod_p(f, p)
    field = GF(p)
    fb = fb.monic()
    factors: dict[tuple, int] = {}
    for g, e in _squarefree_decomp(fb, field):
        for irr in _factor_squarefree(g, field):
            key = irr.coeffs
            factors[key] = factors.get(key, 0) + e
    out = [(UniPoly([field.elem(c.coeffs) for c in k]), e) for k, e in factors.items()]
    out.sort(key=lambda fe: (fe[0].degree, tuple(c.key() for c in fe[0].coeffs)))
    return out


def _squarefree_decomp(f: UniPoly, field: GF):
    """Yield (squarefree factor, multiplicity) pairs over GF(p^m)."""
    p = field.p
    if f.degree <= 0:
        return
    fp = f.derivative()
    if fp.is_zero():
        # f = g(t^p); take p-th root coefficientwise
        root = UniPoly([f.coeffs[i] ** (p ** (field.m - 1) if field.m > 1 else 1)
                        for i in range(0, len(f.coeffs), p)])
        for g, e in _squarefree_decomp(root, field):
            yield g, e * p
        return
    g = poly_gcd(f, fp)
    w = f.divmod(g)[0]
    e = 1
    while w.degree > 0:
        y = poly_gcd(w, g)
        z = w.divmod(y)[0]
        if z.degree > 0:
            yield z.monic(), e
        w = y
        g = g.divmod(y)[0]
        e += 1
    if g.degree > 0:
        # leftover part has derivative zero; the recursion multiplies by p itself
        yield from _squarefree_decomp(g, field)


def _poly_powmod(base: UniPoly, e: int, mod: UniPoly) -> UniPoly:
    if not base.coeffs:
        return UniPoly()
    result = UniPoly([_find_gf_one(base)])
    b = base % mod
    while e:
        if e & 1:
            result = (result * b) % mod
        b = (b * b) % mod
        e >>= 1
    return result


def _find_gf_one(poly: UniPoly):
    for c in poly.coeffs:
        if isinstance(c, GFElem):
            return c.field.one()
    return 1


def _factor_squarefree(f: UniPoly, field: GF) -> list[UniPoly]:
    """Distinct-degree then equal-degree splitting of a squarefree monic poly."""
    if f.degree <= 0:
        return []
    if f.degree == 1:
        return [f]
    q = field.q
    out: list[UniPoly] = []
    x = UniPoly([field.zero(), field.one()])
    h = x
    rest = f
    d = 0
    while rest.degree > 2 * (d + 1) - 1 and rest.degree > 0:
        d += 1
        h = _poly_powmod(h, q, rest)
        g = poly_gcd((h - x) % rest, rest)
        if g.degree > 0:
            out.extend(_equal_degree_split(g.monic(), d, field))
            rest = rest.divmod(g)[0]
            h = h % rest if rest.degree > 0 else h
    if rest.degree > 0:
        out.append(rest.monic())
    out.sort(key=lambda h2: (h2.degree, tuple(c.key() for c in h2.coeffs)))
    return out


def _equal_degree_split(f: UniPoly, d: int, field: GF) -> list[UniPoly]:
    """Cantor-Zassenhaus with a deterministic seeded trial sequence (odd p)."""
    if f.degree == d:
        return [f]
    if field.p == 2:
        return _brute_force_factor(f, field)
    q = field.q
    rng = random.Random(0xBEEF ^ f.degree)
    while True:
        a = UniPoly([field.scalar(rng.randrange(field.p)) for _ in range(f.degree)])
        if a.degree < 1:
            continue
        g = poly_gcd(a, f)
        if 0 < g.degree < f.degree:
            pass
        else:
            b = _poly_powmod(a, (q**d - 1) // 2, f)
            g = poly_gcd(b - UniPoly([field.one()]), f)
            if not (0 < g.degree < f.degree):
                continue
        left = _equal_degree_split(g.monic(), d, field)
        right = _equal_degree_split(f.divmod(g)[0].monic(), d, field)
        return left + right


def _brute_force_factor(f: UniPoly, field: GF) -> list[UniPoly]:
    out = []
    rest = f
    deg = 1
    while rest.degree > 0:
        if rest.degree < 2 * deg:
            out.append(rest.monic())
            break
        found = False
        for cand in _monic_polys(field, deg):
            if rest.divmod(cand)[1].is_zero() and _gf_is_irreducible(cand, field):
                out.append(cand)
                rest = rest.divmod(cand)[0]
                found = True
                break
        if not found:
            deg += 1
    return out


def _monic_polys(field: GF, deg: int):
    for code in range(field.q**deg):
        digits = []
        c = code
        for _ in range(deg):
            digits.append(field.scalar(c % field.p))
            c //= field.p
        yield UniPoly(digits + [field.one()])


def _gf_is_irreducible(f: UniPoly, field: GF) -> bool:
    if f.degree == 1:
        return True
    for deg in range(1, f.degree // 2 + 1):
        for cand in _monic_polys(field, deg):
            if f.divmod(cand)[1].is_zero():
                return False
    return True


# ---------------------------------------------------------------------------
# Exact dense matrices
# ---------------------------------------------------------------------------


class Matrix:
    """Immutable dense matrix over a duck-typed exact ring (row-major)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries: Sequence[Sequence]):
        rows = tuple(tuple(r) for r in entries)
        if not rows or not rows[0]:
            raise ValueError("empty matrix")
        cols = len(rows[0])
        if any(len(r) != cols for r in rows):
            raise ValueError("ragged matrix")
        self.rows = len(rows)
        self.cols = cols
        self.entries = rows

    @staticmethod
    def identity(n: int, one=1, zero=0) -> "Matrix":
        return Matrix([[one if i == j else zero for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"Matrix({[list(r) for r in self.entries]})"

    def __add__(self, other: "Matrix") -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return Matrix(
            [
                [a + b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return Matrix(
            [
                [a - b for a, b in zip(ra, rb)]
                for ra, rb in zip(self.entries, other.entries)
            ]
        )

    def __mul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise ValueError("shape mismatch")
            cols = list(zip(*other.entries))
            return Matrix(
                [
                    [_dot(row, col) for col in cols]
                    for row in self.entries
                ]
            )
        return Matrix([[e * other for e in row] for row in self.entries])

    def apply(self, vec: Sequence) -> tuple:
        if len(vec) != self.cols:
            raise ValueError("shape mismatch")
        return tuple(_dot(row, vec) for row in self.entries)

    def det(self):
        if self.rows != self.cols:
            raise ValueError("determinant of a non-square matrix")
        n = self.rows
        if n == 1:
            return self.entries[0][0]
        if n == 2:
            (a, b), (c, d) = self.entries
            return a * d - b * c
        rows = [list(r) for r in self.entries]
        return _bareiss_det(rows)


def _dot(row, col):
    acc = None
    for a, b in zip(row, col):
        t = a * b
        acc = t if acc is None else acc + t
    return acc


def matrix_rank(rows) -> int:
    """Rank over a field, by Gaussian elimination with exact zero tests."""
    rows = [list(r) for r in rows]
    if not rows:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot_row = next(
            (i for i in range(rank, len(rows)) if not _is_zero(rows[i][col])), None
        )
        if pivot_row is None:
            continue
        rows[rank], rows[pivot_row] = rows[pivot_row], rows[rank]
        inv = _ring_inverse(rows[rank][col])
        rows[rank] = [a * inv for a in rows[rank]]
        for i in range(len(rows)):
            if i != rank and not _is_zero(rows[i][col]):
                c = rows[i][col]
                rows[i] = [a - c * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


def first_linear_dependency(vectors):
    """First vector expressible in terms of its predecessors, over a field.

    Processes equal-length coefficient vectors in order with incremental
    Gaussian elimination.  Returns (index, coeffs) where
    vectors[index] = sum(coeffs[j] * vectors[j] for j in coeffs); or None if
    the whole family is independent.
    """
    basis: list[tuple[int, list, dict]] = []
    for idx, vec in enumerate(vectors):
        row = list(vec)
        combo = {idx: QQ(1)}
        for pivot_col, brow, bcombo in basis:
            c = row[pivot_col]
            if _is_zero(c):
                continue
            row = [a - c * b for a, b in zip(row, brow)]
            for j, cf in bcombo.items():
                combo[j] = combo.get(j, QQ(0)) - c * cf
        pivot = next((i for i, c in enumerate(row) if not _is_zero(c)), None)
        if pivot is None:
            return idx, {j: -cf for j, cf in combo.items() if j != idx and not _is_zero(cf)}
        inv = _ring_inverse(row[pivot])
        basis.append((pivot, [a * inv for a in row], {j: cf * inv for j, cf in combo.items()}))
    return None


def mat_pow(M: Matrix, k: int) -> Matrix:
    """Exact k-th power of a square matrix; k = 0 gives the identity."""
    if M.rows != M.cols:
        raise ValueError("power of a non-square matrix")
    if k < 0:
        raise ValueError("negative matrix power")
    sample = M.entries[0][0]
    if isinstance(sample, GFElem):
        one, zero = sample.field.one(), sample.field.zero()
    else:
        one, zero = 1, 0
    result = Matrix.identity(M.rows, one=one, zero=zero)
    base = M
    while k:
        if k & 1:
            result = result * base
        base = base * base
        k >>= 1
    return result
