"""Forward-mode dual numbers with domain checking."""

from __future__ import annotations

import math
from dataclasses import dataclass


class DomainFault(ArithmeticError):
    """Raised by a dual operation outside its (differentiable) domain."""


@dataclass(frozen=True)
class Dual:
    """``val + der * eps`` with ``eps**2 == 0``."""

    val: float
    der: float = 0.0

    def __add__(self, other: "Dual") -> "Dual":
        return Dual(self.val + other.val, self.der + other.der)

    def __sub__(self, other: "Dual") -> "Dual":
        return Dual(self.val - other.val, self.der - other.der)

    def __mul__(self, other: "Dual") -> "Dual":
        return Dual(self.val * other.val, self.der * other.val + self.val * other.der)

    def __truediv__(self, other: "Dual") -> "Dual":
        if other.val == 0.0:
            raise DomainFault("division by zero")
        q = self.val / other.val
        return Dual(q, (self.der - q * other.der) / other.val)

    def __neg__(self) -> "Dual":
        return Dual(-self.val, -self.der)


def power(u: Dual, c: float, differentiate: bool) -> Dual:
    """``u**c`` for an exponent constant in the input variables."""
    if u.val < 0.0 and not float(c).is_integer():
        raise DomainFault(f"negative base {u.val!r} to non-integer power {c!r}")
    if u.val == 0.0:
        if c < 0.0:
            raise DomainFault("zero to a negative power")
        if differentiate and 0.0 < c < 1.0:
            raise DomainFault(f"power {c!r} is not differentiable at zero")
    try:
        value = u.val ** c
    except OverflowError as exc:
        raise DomainFault("overflow in power") from exc
    if c == 0.0 or not differentiate:
        return Dual(value, 0.0)
    try:
        slope = c * u.val ** (c - 1.0) if c != 1.0 else 1.0
    except OverflowError as exc:
        raise DomainFault("overflow in power derivative") from exc
    return Dual(value, slope * u.der)


def sin(u: Dual) -> Dual:
    return Dual(math.sin(u.val), math.cos(u.val) * u.der)


def cos(u: Dual) -> Dual:
    return Dual(math.cos(u.val), -math.sin(u.val) * u.der)


def exp(u: Dual) -> Dual:
    try:
        e = math.exp(u.val)
    except OverflowError as exc:
        raise DomainFault("overflow in exp") from exc
    return Dual(e, e * u.der)


def ln(u: Dual) -> Dual:
    if u.val <= 0.0:
        raise DomainFault(f"logarithm of nonpositive value {u.val!r}")
    return Dual(math.log(u.val), u.der / u.val)


def sqrt(u: Dual, differentiate: bool) -> Dual:
    if u.val < 0.0:
        raise DomainFault(f"square root of negative value {u.val!r}")
    r = math.sqrt(u.val)
    if r == 0.0:
        if differentiate:
            raise DomainFault("sqrt is not differentiable at zero")
        return Dual(0.0, 0.0)
    return Dual(r, 0.5 * u.der / r)


def absolute(u: Dual, differentiate: bool) -> Dual:
    if u.val == 0.0:
        if differentiate:
            raise DomainFault("abs is not differentiable at zero")
        return Dual(0.0, 0.0)
    return Dual(abs(u.val), math.copysign(1.0, u.val) * u.der)
