"""Number fields, certified complex embeddings, unramified places, Weil heights.

A NumberField is Q[t]/(m) for a monic irreducible m with rational
coefficients.  Archimedean places are certified root boxes (Krawczyk-verified
rectangles, one per real root or conjugate pair); finite places exist only
over primes where m stays squarefree after reduction, which is all the
arithmetic the rest of the package needs.  Heights are returned as rigorous
intervals.
"""

from __future__ import annotations

from dataclasses import dataclass

import mpmath
from mpmath.libmp import to_rational

from . import padics
from .exactcore import (
    GF,
    GFElem,
    QQ,
    UniPoly,
    factor_int,
    factor_mod_p,
    first_linear_dependency,
    is_probable_prime,
    rat_str,
    rat_val,
    resultant,
)
from .intervals import (
    Box,
    Interval,
    PrecisionError,
    log_int,
    log_interval,
    precisions,
)

__all__ = [
    "NumberField",
    "NFElem",
    "Place",
    "RamifiedPrimeError",
    "nf_minpoly",
    "embeddings",
    "split_unramified",
    "finite_valuation",
    "weil_height",
    "isolate_roots",
]


class RamifiedPrimeError(ValueError):
    """A finite place was requested at a prime this tower cannot handle."""

    def __init__(self, p: int, detail: str = ""):
        self.p = p
        msg = f"ramified or non-maximal order at {p}; unsupported"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


# ---------------------------------------------------------------------------
# Fields and elements
# ---------------------------------------------------------------------------


class NumberField:
    """Q[t]/(min_poly); instances are cached by defining polynomial."""

    _cache: dict[tuple, "NumberField"] = {}

    def __new__(cls, min_poly: UniPoly):
        coeffs = tuple(QQ(c) for c in min_poly.coeffs)
        key = coeffs
        if key in cls._cache:
            return cls._cache[key]
        poly = UniPoly(coeffs)
        if poly.degree < 1:
            raise ValueError("defining polynomial must be non-constant")
        if poly.lead != 1:
            raise ValueError("defining polynomial must be monic")
        _certify_irreducible(poly)
        self = super().__new__(cls)
        self.min_poly = poly
        self.degree = poly.degree
        self._arch_cache = None  # (prec, places)
        self._finite_cache = {}
        self._lift_cache = {}
        cls._cache[key] = self
        return self

    @staticmethod
    def rationals() -> "NumberField":
        return NumberField(UniPoly([QQ(0), QQ(1)]))

    @staticmethod
    def quadratic(d) -> "NumberField":
        """Q(sqrt(d)) for a non-square rational d."""
        return NumberField(UniPoly([-QQ(d), QQ(0), QQ(1)]))

    def elem(self, coords) -> "NFElem":
        if isinstance(coords, NFElem):
            if coords.parent is not self:
                raise ValueError("element of a different field")
            return coords
        if isinstance(coords, (int,)) or type(coords).__name__ in ("mpq", "Fraction"):
            coords = [QQ(coords)] + [QQ(0)] * (self.degree - 1)
        cs = [QQ(c) for c in coords]
        if len(cs) > self.degree:
            rem = UniPoly(cs) % self.min_poly
            cs = list(rem.coeffs)
        cs += [QQ(0)] * (self.degree - len(cs))
        return NFElem(self, tuple(cs[: self.degree]))

    def gen(self) -> "NFElem":
        if self.degree == 1:
            # Q presented as Q[t]/(t): the generator is 0
            return self.elem(-self.min_poly.coeffs[0])
        return self.elem([0, 1])

    def zero(self) -> "NFElem":
        return self.elem(0)

    def one(self) -> "NFElem":
        return self.elem(1)

    def __repr__(self):
        return f"NumberField({self.min_poly!r})"


def _certify_irreducible(f: UniPoly) -> None:
    """Raise unless f (monic over Q) is certifiably irreducible."""
    n = f.degree
    if n == 1:
        return
    den = 1
    for c in f.coeffs:
        q = QQ(c)
        den = den * int(q.denominator) // __import__("math").gcd(den, int(q.denominator))
    g = UniPoly([int(QQ(c) * den) for c in f.coeffs])
    if _has_rational_root(g):
        raise ValueError("defining polynomial is reducible (rational root)")
    if n <= 3:
        return
    patterns = None
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47):
        if int(g.lead) % p == 0:
            continue
        try:
            factors = factor_mod_p(UniPoly([QQ(c) for c in g.coeffs]), p)
        except ValueError:
            continue
        if any(e > 1 for _, e in factors):
            continue
        degs = sorted(h.degree for h, _ in factors)
        if degs == [n]:
            return
        sums = {0}
        for d in degs:
            sums |= {s + d for s in sums}
        proper = frozenset(s for s in sums if 0 < s < n)
        patterns = proper if patterns is None else patterns & proper
        if patterns is not None and not patterns:
            return
    raise ValueError("cannot certify irreducibility of the defining polynomial")


def _has_rational_root(g: UniPoly) -> bool:
    c0 = int(g.coeffs[0])
    lead = int(g.lead)
    if c0 == 0:
        return True
    for pd in factor_divisors(abs(c0)):
        for qd in factor_divisors(abs(lead)):
            for sign in (1, -1):
                if g(QQ(sign * pd, qd)) == 0:
                    return True
    return False


def factor_divisors(n: int) -> list[int]:
    """All positive divisors of n (for rational root candidates)."""
    fac = factor_int(n)
    divs = [1]
    for p, e in fac.items():
        divs = [d * p**i for d in divs for i in range(e + 1)]
    return sorted(set(divs))


class NFElem:
    """Element of a NumberField in power-basis coordinates."""

    __slots__ = ("parent", "coords")

    def __init__(self, parent: NumberField, coords: tuple):
        self.parent = parent
        self.coords = coords

    def _check(self, other):
        if isinstance(other, NFElem):
            if other.parent is not self.parent:
                raise ValueError("mixed number fields")
            return other
        return self.parent.elem(other)

    def poly(self) -> UniPoly:
        return UniPoly(self.coords)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coords)

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        try:
            other = self._check(other)
        except (ValueError, TypeError):
            return NotImplemented
        return self.coords == other.coords

    def __hash__(self):
        return hash((id(self.parent), self.coords))

    def __repr__(self):
        return f"NFElem{self.coords}"

    def __add__(self, other):
        other = self._check(other)
        return NFElem(self.parent, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return NFElem(self.parent, tuple(-a for a in self.coords))

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) + (-self)

    def __mul__(self, other):
        other = self._check(other)
        prod = (self.poly() * other.poly()) % self.parent.min_poly
        cs = list(prod.coeffs) + [QQ(0)] * (self.parent.degree - len(prod.coeffs))
        return NFElem(self.parent, tuple(QQ(c) for c in cs[: self.parent.degree]))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = self.parent.one()
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def inverse(self) -> "NFElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        g, u, _ = _poly_xgcd(self.poly(), self.parent.min_poly)
        if g.degree != 0:
            raise ArithmeticError("defining polynomial is not irreducible")
        inv = u.scale(1 / g.coeffs[0]) % self.parent.min_poly
        return self.parent.elem(list(inv.coeffs))

    def __truediv__(self, other):
        return self * self._check(other).inverse()

    def __rtruediv__(self, other):
        return self._check(other) * self.inverse()

    def norm(self):
        """Field norm to Q, as the resultant of the defining polynomial."""
        if self.is_zero():
            return QQ(0)
        return QQ(resultant(self.parent.min_poly, self.poly()))

    def box(self, theta_box: Box, prec: int) -> Box:
        """Certified enclosure of the image under an embedding sending the
        field generator into theta_box."""
        acc = Box.from_rational(0)
        for c in reversed(self.coords):
            acc = (acc * theta_box + Box.from_rational(c)).round_out(prec)
        return acc


def _poly_xgcd(a: UniPoly, b: UniPoly):
    """Extended gcd over Q[t]: returns (g, u, v) with u*a + v*b = g."""
    r0, r1 = a, b
    s0, s1 = UniPoly([QQ(1)]), UniPoly()
    t0, t1 = UniPoly(), UniPoly([QQ(1)])
    while not r1.is_zero():
        q, r = r0.divmod(r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    return r0, s0, t0


def nf_minpoly(x: NFElem) -> UniPoly:
    """Monic minimal polynomial over Q, by linear algebra on the powers of x."""
    deg = x.parent.degree
    powers = []
    acc = x.parent.one()
    for _ in range(deg + 1):
        powers.append(list(acc.coords))
        acc = acc * x
    dep = first_linear_dependency(powers)
    if dep is None:  # cannot happen: deg+1 vectors in dimension deg
        raise ArithmeticError("no linear dependency among powers")
    idx, combo = dep
    coeffs = [QQ(0)] * (idx + 1)
    coeffs[idx] = QQ(1)
    for j, c in combo.items():
        coeffs[j] = -c
    out = UniPoly(coeffs)
    if x.parent.degree % out.degree != 0:  # defensive
        raise ArithmeticError("minimal polynomial degree does not divide field degree")
    return out


# ---------------------------------------------------------------------------
# Places
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class Place:
    """An absolute value of a number field.

    Archimedean places carry a certified box around one root of the defining
    polynomial (the upper-half-plane representative for a conjugate pair).
    Finite places carry the prime, the residue degree, the irreducible factor
    of the defining polynomial mod p, and the image of the generator in the
    residue field.
    """

    kind: str  # "arch" or "finite"
    local_degree: int
    box: Box | None = None
    is_real: bool | None = None
    p: int | None = None
    residue_poly: UniPoly | None = None
    theta_bar: GFElem | None = None

    def __repr__(self):
        if self.kind == "arch":
            tag = "real" if self.is_real else "complex-pair"
            return f"Place(arch {tag}, box={self.box!r})"
        return f"Place(finite p={self.p}, f={self.local_degree})"


# ---------------------------------------------------------------------------
# Certified root isolation (Krawczyk operator on rectangles)
# ---------------------------------------------------------------------------


def _poly_box_eval(f: UniPoly, X: Box, prec: int) -> Box:
    acc = Box.from_rational(0)
    for c in reversed(f.coeffs):
        acc = (acc * X + Box.from_rational(QQ(c))).round_out(prec + 16)
    return acc


def _poly_point_eval(f: UniPoly, re, im):
    """Exact complex-rational evaluation; returns (re, im) rationals."""
    ar, ai = QQ(0), QQ(0)
    for c in reversed(f.coeffs):
        ar, ai = ar * re - ai * im + QQ(c), ar * im + ai * re
    return ar, ai


def _krawczyk(f: UniPoly, fp: UniPoly, X: Box, prec: int) -> Box | None:
    """One Krawczyk step; returns K(X) if the slope data is usable."""
    cre, cim = X.re.mid, X.im.mid
    fc_re, fc_im = _poly_point_eval(f, cre, cim)
    dc_re, dc_im = _poly_point_eval(fp, cre, cim)
    den = dc_re * dc_re + dc_im * dc_im
    if den == 0:
        return None
    y_re, y_im = dc_re / den, -dc_im / den
    Y = Box(Interval(y_re), Interval(y_im))
    DX = _poly_box_eval(fp, X, prec)
    one = Box.from_rational(1)
    C = Box(Interval(cre), Interval(cim))
    K = C - Y * Box(Interval(fc_re), Interval(fc_im)) + (one - Y * DX) * (X - C)
    # round on a grid much finer than the box itself, or strict containment
    # checks would be defeated by the rounding
    w = K.re.width + K.im.width
    if w > 0:
        K = K.round_out(_bits_of(1 / w) + 64)
    return K


def _certify_root(f: UniPoly, fp: UniPoly, center, prec: int, eps) -> Box | None:
    """Try to certify a unique root of f near an approximate complex center."""
    cre, cim = center
    for rbits in (3 * prec // 4, prec // 2, prec // 3, prec // 5):
        r = QQ(1, 1 << max(rbits, 8))
        X = Box(
            Interval(cre - r, cre + r),
            Interval(cim - r, cim + r),
        )
        try:
            K = _krawczyk(f, fp, X, prec)
        except PrecisionError:
            continue
        if K is None or not X.contains_interior(K):
            continue
        # unique root in X; contract until the radius is below eps
        for _ in range(64):
            if K.re.width <= eps and K.im.width <= eps:
                return K
            try:
                K2 = _krawczyk(f, fp, K, prec)
            except PrecisionError:
                return None
            if K2 is None:
                return None
            K2 = Box(K2.re.intersect(K.re), K2.im.intersect(K.im))
            if K2.re.width >= K.re.width and K2.im.width >= K.im.width:
                return None  # stalled; caller refines precision
            K = K2
        return None
    return None


def isolate_roots(f: UniPoly, eps) -> list[tuple[Box, bool]]:
    """Certified, pairwise-disjoint boxes around all roots of a squarefree f.

    Returns one (box, is_real) pair per real root and per conjugate pair
    (upper-half representative).  Box half-widths are at most eps.
    """
    eps = QQ(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    n = f.degree
    if n < 1:
        raise ValueError("constant polynomial has no roots")
    if n == 1:
        root = -QQ(f.coeffs[0]) / QQ(f.coeffs[1])
        return [(Box.from_rational(root), True)]
    fp = f.derivative()
    start = max(64, _bits_of(1 / eps) + 32)
    for prec in precisions(start, PREC_CAP_ROOTS):
        try:
            places = _isolate_at(f, fp, n, eps, prec)
        except PrecisionError:
            places = None
        if places is not None:
            return places
    raise PrecisionError("root isolation failed at precision cap")


PREC_CAP_ROOTS = 1 << 14


def _bits_of(q) -> int:
    q = QQ(q)
    return max(int(q.numerator).bit_length() - int(q.denominator).bit_length(), 1)


def _isolate_at(f, fp, n, eps, prec):
    mpmath.mp.prec = prec + 64
    coeffs = [mpmath.mpf(int(QQ(c).numerator)) / mpmath.mpf(int(QQ(c).denominator))
              for c in reversed(f.coeffs)]
    try:
        approx = mpmath.polyroots(coeffs, maxsteps=200, extraprec=prec // 2 + 32)
    except mpmath.libmp.NoConvergence:
        return None

    real_boxes: list[Box] = []
    upper_boxes: list[Box] = []
    tiny = QQ(1, 1 << (prec // 2))
    for z in approx:
        zc = mpmath.mpc(z)
        cre = _dyadic(zc.real, prec)
        cim = _dyadic(zc.imag, prec)
        if abs(cim) <= tiny:
            box = _certify_root(f, fp, (cre, QQ(0)), prec, eps)
            if box is None:
                return None
            # symmetric containment: make the box conjugation-stable so the
            # certified unique root is forced to be real
            sym = Box(box.re, box.im.hull(-box.im))
            K = _krawczyk(f, fp, sym, prec)
            if K is None or not sym.contains_interior(K):
                return None
            real_boxes.append(Box(K.re, Interval(QQ(0))))
        elif cim > 0:
            box = _certify_root(f, fp, (cre, cim), prec, eps)
            if box is None or not box.im.is_positive():
                return None
            upper_boxes.append(box)
    if len(real_boxes) + 2 * len(upper_boxes) != n:
        return None
    # pairwise disjointness
    for i in range(len(real_boxes)):
        for j in range(i + 1, len(real_boxes)):
            if real_boxes[i].re.overlaps(real_boxes[j].re):
                return None
    for i in range(len(upper_boxes)):
        for j in range(i + 1, len(upper_boxes)):
            if upper_boxes[i].overlaps(upper_boxes[j]):
                return None
    real_boxes.sort(key=lambda b: b.re.lo)
    upper_boxes.sort(key=lambda b: (b.re.lo, b.im.lo))
    return [(b, True) for b in real_boxes] + [(b, False) for b in upper_boxes]


def _dyadic(x, prec: int):
    num, den = to_rational(mpmath.mpf(x)._mpf_)
    return QQ(int(num), int(den))


# ---------------------------------------------------------------------------
# Archimedean and finite places
# ---------------------------------------------------------------------------


def embeddings(K: NumberField, eps) -> list[Place]:
    """One archimedean place per real root / conjugate pair, radius <= eps."""
    eps = QQ(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    cached = K._arch_cache
    if cached is not None and cached[0] <= eps:
        boxes = cached[1]
    else:
        boxes = isolate_roots(K.min_poly, eps)
        K._arch_cache = (eps, boxes)
    return [
        Place(kind="arch", local_degree=1 if is_real else 2, box=box, is_real=is_real)
        for box, is_real in boxes
    ]


def split_unramified(K: NumberField, p: int) -> list[Place]:
    """Finite places over p when the defining polynomial is squarefree mod p."""
    if not is_probable_prime(p):
        raise ValueError(f"{p} is not prime")
    if p in K._finite_cache:
        return K._finite_cache[p]
    for c in K.min_poly.coeffs:
        if int(QQ(c).denominator) % p == 0:
            raise RamifiedPrimeError(p, "defining polynomial has a non-integral coefficient at p")
    factors = factor_mod_p(K.min_poly, p)
    if any(e > 1 for _, e in factors):
        raise RamifiedPrimeError(p, "defining polynomial is not squarefree mod p")
    places = []
    for hbar, _ in factors:
        fdeg = hbar.degree
        res_field = GF(p, fdeg)
        theta_bar = _root_in_field(hbar, res_field)
        places.append(
            Place(
                kind="finite",
                local_degree=fdeg,
                p=p,
                residue_poly=hbar,
                theta_bar=theta_bar,
            )
        )
    if sum(pl.local_degree for pl in places) != K.degree:  # defensive
        raise ArithmeticError("local degrees do not sum to the field degree")
    K._finite_cache[p] = places
    return places


def _root_in_field(hbar: UniPoly, field: GF) -> GFElem:
    if field.q > 500_000:
        raise ValueError("residue field too large for root search")
    for a in field.elements():
        acc = field.zero()
        for c in reversed(hbar.coeffs):
            acc = acc * a + field.elem(c.coeffs)
        if not acc:
            return a
    raise ArithmeticError("irreducible factor has no root in its residue field")


def finite_valuation(K: NumberField, place: Place, x: NFElem, cap_k: int = 64) -> int:
    """Valuation of a nonzero element at a finite place (v(p) = 1)."""
    if x.is_zero():
        raise ZeroDivisionError("valuation of zero")
    p = place.p
    shift = 0
    for c in x.coords:
        if c != 0:
            shift = max(shift, -rat_val(c, p))
    y = x * QQ(p) ** shift
    k = 8
    while k <= cap_k:
        key = (p, place.theta_bar.coeffs, k)
        theta_hat = K._lift_cache.get(key)
        if theta_hat is None:
            theta_hat = padics.lift_root(K.min_poly, place.theta_bar, k)
            K._lift_cache[key] = theta_hat
        pk = p**k
        acc = theta_hat * 0
        for c in reversed(y.coords):
            q = QQ(c)
            acc = acc * theta_hat + int(q.numerator) * pow(int(q.denominator), -1, pk) % pk
        if acc:
            return padics.unram_val(acc) - shift
        k *= 2
    raise PrecisionError(f"valuation at {p} undetermined below p^{cap_k}")


# ---------------------------------------------------------------------------
# Weil height
# ---------------------------------------------------------------------------


def weil_height(
    coords,
    K: NumberField | None = None,
    *,
    archimedean_only: bool = False,
    target_width=QQ(1, 10**9),
) -> Interval:
    """Absolute logarithmic Weil height of a projective coordinate vector.

    The result is a rigorous interval of width at most target_width.  Finite
    places are handled exactly (valuations via Hensel-lifted generators);
    only primes where the field is unramified with a squarefree defining
    polynomial are supported, and a RamifiedPrimeError names any violation.
    """
    if K is None:
        for c in coords:
            if isinstance(c, NFElem):
                K = c.parent
                break
        else:
            K = NumberField.rationals()
    xs = [K.elem(c) for c in coords]
    nonzero = [x for x in xs if not x.is_zero()]
    if not nonzero:
        raise ValueError("projective coordinates must not all vanish")
    deg = K.degree

    finite_coeff: dict[int, object] = {}
    if not archimedean_only:
        for p in sorted(_candidate_primes(nonzero)):
            if K.degree == 1:
                vmin = min(rat_val(x.coords[0], p) for x in nonzero)
                if vmin:
                    finite_coeff[p] = QQ(-vmin)
                continue
            for place in split_unramified(K, p):
                vmin = min(finite_valuation(K, place, x) for x in nonzero)
                if vmin:
                    coeff = QQ(-vmin * place.local_degree, deg)
                    finite_coeff[p] = finite_coeff.get(p, QQ(0)) + coeff

    for prec in precisions():
        eps = QQ(1, 1 << prec)
        total = Interval(QQ(0))
        try:
            for place in embeddings(K, eps):
                m = None
                for x in nonzero:
                    a = x.box(place.box, prec).abs_(prec)
                    m = a if m is None else m.max_with(a)
                total = total + log_interval(m, prec) * QQ(place.local_degree, deg)
            for p, coeff in finite_coeff.items():
                total = total + log_int(p, prec) * coeff
        except PrecisionError:
            continue
        if total.width <= target_width:
            return total
    raise PrecisionError("height interval did not reach the requested width")


def _candidate_primes(xs: list[NFElem]) -> set[int]:
    primes: set[int] = set()
    for x in xs:
        if x.parent.degree == 1:
            q = QQ(x.coords[0])
            primes |= set(factor_int(int(q.numerator)))
            primes |= set(factor_int(int(q.denominator)))
        else:
            nrm = x.norm()
            primes |= set(factor_int(int(nrm.numerator)))
            primes |= set(factor_int(int(nrm.denominator)))
    return primes
