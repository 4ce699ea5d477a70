"""Certificate records and deterministic value formatting for reports."""

from __future__ import annotations

from dataclasses import dataclass, field

from .exactcore import QQ, rat_str
from .intervals import Interval

__all__ = [
    "Certificate",
    "decimal_str",
    "fmt_rat",
    "fmt_interval",
    "fmt_point",
    "fmt_algebraic",
]


@dataclass(frozen=True)
class Certificate:
    """One named check: what was expected, what was computed, and whether it passed.

    ``source`` records how the expected value is justified ("fixed table",
    "direct factorization", "interval evaluation", ...), so a report line is
    auditable on its own.
    """

    name: str
    expected: object
    computed: object
    source: str
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        out = {
            "name": self.name,
            "expected": self.expected,
            "computed": self.computed,
            "source": self.source,
            "passed": self.passed,
        }
        if self.detail:
            out["detail"] = self.detail
        return out


def decimal_str(q, places: int = 15, mode: str = "round") -> str:
    """Fixed-point decimal string of a rational with directed rounding.

    mode "floor" rounds toward -inf, "ceil" toward +inf, "round" to nearest.
    """
    q = QQ(q)
    scale = 10**places
    scaled = q * scale
    n, d = int(scaled.numerator), int(scaled.denominator)
    if mode == "floor":
        v = n // d
    elif mode == "ceil":
        v = -((-n) // d)
    else:
        v = (2 * n + d) // (2 * d)
    sign = "-" if v < 0 else ""
    v = abs(v)
    ip, fp = divmod(v, scale)
    return f"{sign}{ip}.{str(fp).rjust(places, '0')}"


def fmt_rat(q) -> str:
    return rat_str(QQ(q))


def fmt_interval(iv: Interval, places: int = 15) -> dict:
    """Serialize an interval as outward-rounded decimal endpoint strings."""
    return {
        "lo": decimal_str(iv.lo, places, "floor"),
        "hi": decimal_str(iv.hi, places, "ceil"),
    }


def fmt_point(coords) -> str:
    return "(" + ", ".join(fmt_rat(c) for c in coords) + ")"


def fmt_algebraic(min_poly_coeffs, box) -> dict:
    """An algebraic number: minimal-polynomial coefficients plus isolating box."""
    return {
        "min_poly": [fmt_rat(c) for c in min_poly_coeffs],
        "box": {
            "re": fmt_interval(box.re),
            "im": fmt_interval(box.im),
        },
    }
