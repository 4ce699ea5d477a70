"""Fixed-precision arithmetic in unramified extensions of Z_p and Hensel lifting.

An UnramPadic value is an element of O_F / p^k where F is the unramified
extension of Q_p of degree m, presented as Z[t]/(modulus, p^k) with the
canonical irreducible modulus shared with the finite-field layer.  All
operations are pure; precision changes return new values.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactcore import (
    GF,
    GFElem,
    QQ,
    UniPoly,
    canonical_irreducible,
    int_val,
)

__all__ = [
    "UnramPadic",
    "PadicPoint2",
    "unram_val",
    "newton_lift",
    "lift_root",
    "lte_check",
    "ExplicitSystem",
    "PeriodicSystem",
    "NotEtaleError",
]


class NotEtaleError(ValueError):
    """The Jacobian of the system is singular modulo p at the seed."""


class UnramPadic:
    """Element of (unramified degree-m extension of Z_p) modulo p^k."""

    __slots__ = ("p", "m", "k", "coeffs")

    def __init__(self, p: int, m: int, k: int, coeffs):
        if k < 1:
            raise ValueError("precision exponent must be positive")
        pk = p**k
        if isinstance(coeffs, int):
            coeffs = [coeffs]
        elif isinstance(coeffs, GFElem):
            coeffs = list(coeffs.coeffs)
        cs = [int(c) % pk for c in coeffs]
        if len(cs) > m:
            cs = _reduce_mod_modulus(cs, canonical_irreducible(p, m), pk)
        cs += [0] * (m - len(cs))
        self.p = p
        self.m = m
        self.k = k
        self.coeffs = tuple(cs[:m])

    # -- helpers -------------------------------------------------------------

    def _like(self, coeffs) -> "UnramPadic":
        return UnramPadic(self.p, self.m, self.k, coeffs)

    def _check(self, other):
        if isinstance(other, int):
            return self._like([other])
        if isinstance(other, UnramPadic):
            if (other.p, other.m, other.k) != (self.p, self.m, self.k):
                raise ValueError("mixed p-adic parameters")
            return other
        return NotImplemented

    @property
    def pk(self) -> int:
        return self.p**self.k

    def __repr__(self):
        return f"UnramPadic(p={self.p}, m={self.m}, k={self.k}, {self.coeffs})"

    def __eq__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.p, self.m, self.k, self.coeffs))

    def __bool__(self):
        return any(self.coeffs)

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return NotImplemented
        pk = self.pk
        return self._like([(a + b) % pk for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        pk = self.pk
        return self._like([-a % pk for a in self.coeffs])

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
        pk = self.pk
        prod = [0] * (2 * self.m - 1) if self.m > 1 else [0]
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    prod[i + j] = (prod[i + j] + a * b) % pk
        red = _reduce_mod_modulus(prod, canonical_irreducible(self.p, self.m), pk)
        return self._like(red)

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        result = self._like([1])
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def is_unit(self) -> bool:
        return bool(self.reduce_mod_p())

    def inverse(self) -> "UnramPadic":
        """Inverse of a unit, by Newton-lifting the residue inverse."""
        a_bar = self.reduce_mod_p()
        if not a_bar:
            raise ZeroDivisionError("inverse of a non-unit p-adic element")
        inv = UnramPadic(self.p, self.m, self.k, a_bar.inverse())
        # x -> x(2 - a x) doubles the number of correct digits
        steps = max(1, (self.k - 1).bit_length())
        for _ in range(steps):
            inv = inv * (self._like([2]) - self * inv)
        return inv

    def __truediv__(self, other):
        other = self._check(other)
        return self * other.inverse()

    # -- structure ---------------------------------------------------------------

    def reduce_mod_p(self) -> GFElem:
        return GF(self.p, self.m).elem([c % self.p for c in self.coeffs])

    def with_precision(self, k2: int) -> "UnramPadic":
        """Truncate or canonically lift (digits unchanged) to precision k2."""
        return UnramPadic(self.p, self.m, k2, self.coeffs)


def _reduce_mod_modulus(cs: list[int], modulus: tuple[int, ...], pk: int) -> list[int]:
    cs = [c % pk for c in cs]
    dm = len(modulus) - 1
    for idx in range(len(cs) - 1, dm - 1, -1):
        c = cs[idx]
        if c:
            for i in range(dm + 1):
                cs[idx - dm + i] = (cs[idx - dm + i] - c * modulus[i]) % pk
    return cs[:dm]


def unram_val(a: UnramPadic) -> int:
    """Largest e with a == 0 mod p^e; errors if a vanishes to full precision."""
    vals = [int_val(c, a.p) for c in a.coeffs if c]
    if not vals:
        raise ValueError(f"valuation below precision p^{a.k}")
    e = min(min(vals), a.k)
    if e >= a.k:
        raise ValueError(f"valuation below precision p^{a.k}")
    return e


@dataclass(frozen=True)
class PadicPoint2:
    """A point of the affine plane over O_F / p^k."""

    x: UnramPadic
    y: UnramPadic

    def __post_init__(self):
        if (self.x.p, self.x.m, self.x.k) != (self.y.p, self.y.m, self.y.k):
            raise ValueError("coordinates with mixed p-adic parameters")

    def with_precision(self, k2: int) -> "PadicPoint2":
        return PadicPoint2(self.x.with_precision(k2), self.y.with_precision(k2))


# ---------------------------------------------------------------------------
# Polynomial systems on the plane
# ---------------------------------------------------------------------------


class ExplicitSystem:
    """A pair of bivariate polynomials (outer variable y, inner variable x).

    Coefficients are integers; each polynomial is a UniPoly in y whose
    coefficients are UniPoly in x.
    """

    def __init__(self, p1: UniPoly, p2: UniPoly):
        self.polys = (p1, p2)

    @staticmethod
    def _eval_bivar(poly: UniPoly, x, y):
        acc = None
        for cy in reversed(poly.coeffs):
            inner = cy(x) if isinstance(cy, UniPoly) else cy * (x * 0 + 1)
            acc = inner if acc is None else acc * y + inner
        if acc is None:
            return x * 0
        return acc

    @staticmethod
    def _dx(poly: UniPoly) -> UniPoly:
        return UniPoly(
            [c.derivative() if isinstance(c, UniPoly) else 0 for c in poly.coeffs]
        )

    def eval_at(self, pt: PadicPoint2):
        return tuple(self._eval_bivar(q, pt.x, pt.y) for q in self.polys)

    def jacobian_at(self, pt: PadicPoint2):
        rows = []
        for q in self.polys:
            rows.append(
                (
                    self._eval_bivar(self._dx(q), pt.x, pt.y),
                    self._eval_bivar(q.derivative(), pt.x, pt.y),
                )
            )
        return tuple(rows)


class PeriodicSystem:
    """The period-n condition g^n(x, y) = (x, y) for g(x, y) = (y, x + y - y^3).

    Evaluation iterates g; the Jacobian of g^n comes from the chain rule, so
    the degree-3^n polynomials are never expanded.
    """

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("period must be positive")
        self.n = n

    @staticmethod
    def _g(x, y):
        return y, x + y - y * y * y

    def eval_at(self, pt: PadicPoint2):
        x, y = pt.x, pt.y
        for _ in range(self.n):
            x, y = self._g(x, y)
        return (x - pt.x, y - pt.y)

    def jacobian_at(self, pt: PadicPoint2):
        x, y = pt.x, pt.y
        one = x * 0 + 1
        # running product of Jacobians of g along the orbit, times -identity shift
        a, b, c, d = one, x * 0, x * 0, one
        for _ in range(self.n):
            # Jg(x, y) = [[0, 1], [1, 1 - 3 y^2]]
            j21 = one
            j22 = one - 3 * y * y
            a, b, c, d = c, d, a + j22 * c, b + j22 * d
            x, y = self._g(x, y)
        return ((a - one, b), (c, d - one))


def newton_lift(system, seed, target_k: int, p: int = 3, m: int | None = None) -> PadicPoint2:
    """Unique lift of a nonsingular solution mod p to a solution mod p^target_k.

    ``seed`` is a pair of GFElem over GF(p^m) satisfying the system mod p with
    an invertible Jacobian mod p (the lifting hypothesis); otherwise
    NotEtaleError is raised.
    """
    if isinstance(system, tuple):
        system = ExplicitSystem(*system)
    sx, sy = seed
    if isinstance(sx, GFElem):
        p = sx.field.p
        m = sx.field.m
    if m is None:
        raise ValueError("extension degree required for integer seeds")
    pt = PadicPoint2(UnramPadic(p, m, 1, sx), UnramPadic(p, m, 1, sy))

    r1, r2 = system.eval_at(pt)
    if r1 or r2:
        raise ValueError("seed does not satisfy the system mod p")
    (a, b), (c, d) = system.jacobian_at(pt)
    det_bar = (a * d - b * c).reduce_mod_p()
    if not det_bar:
        raise NotEtaleError(f"not etale at seed {tuple(sx.coeffs), tuple(sy.coeffs)}")

    k = 1
    while k < target_k:
        k = min(2 * k, target_k)
        pt = pt.with_precision(k)
        f1, f2 = system.eval_at(pt)
        (a, b), (c, d) = system.jacobian_at(pt)
        det = a * d - b * c
        det_inv = det.inverse()
        # delta = -J^-1 F
        dx = (d * f1 - b * f2) * det_inv
        dy = (a * f2 - c * f1) * det_inv
        pt = PadicPoint2(pt.x - dx, pt.y - dy)

    f1, f2 = system.eval_at(pt)
    if f1 or f2:
        raise ArithmeticError("Newton iteration failed to converge")  # defensive
    return pt


def lift_root(poly: UniPoly, root_bar: GFElem, target_k: int) -> UnramPadic:
    """Hensel lift of a simple root of a p-integral polynomial to O_F / p^k."""
    p = root_bar.field.p
    m = root_bar.field.m
    pk = p**target_k

    coeffs = []
    for c in poly.coeffs:
        q = QQ(c)
        den = int(q.denominator)
        if den % p == 0:
            raise ValueError(f"coefficient {q} is not {p}-integral")
        coeffs.append(int(q.numerator) * pow(den, -1, pk) % pk)
    f = UniPoly(coeffs)
    fprime = f.derivative()

    der_at = _eval_int_poly(fprime, UnramPadic(p, m, 1, root_bar))
    if not der_at:
        raise NotEtaleError("root is not simple mod p")
    res = _eval_int_poly(f, UnramPadic(p, m, 1, root_bar))
    if res:
        raise ValueError("seed is not a root mod p")

    k = 1
    x = UnramPadic(p, m, 1, root_bar)
    while k < target_k:
        k = min(2 * k, target_k)
        x = x.with_precision(k)
        fx = _eval_int_poly(f, x)
        dfx = _eval_int_poly(fprime, x)
        x = x - fx * dfx.inverse()
    if _eval_int_poly(f, x):
        raise ArithmeticError("Hensel lift failed to converge")  # defensive
    return x


def _eval_int_poly(f: UniPoly, x: UnramPadic) -> UnramPadic:
    acc = x * 0
    for c in reversed(f.coeffs):
        acc = acc * x + int(c) % x.pk
    return acc


def lte_check(r: int) -> int:
    """v_3(2^(2*3^r) - 1) by direct integer factorization; asserts it is r + 1."""
    if r < 0 or r > 6:
        raise ValueError("r must satisfy 0 <= r <= 6")
    n = 2 * 3**r
    value = int_val(2**n - 1, 3)
    if value != r + 1:  # defensive: this is a theorem
        raise AssertionError(f"lifting-the-exponent failed at r={r}: got {value}")
    return value
