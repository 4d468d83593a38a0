"""The two cyclic groups the handshakes run over.

Both classes expose the same small surface (``exp``, ``op``, ``inverse``,
``encode``/``decode``, ``order``, ``generator``) so the scheme code never
branches on the group kind.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Union

from sympy import isprime

# Fixed-width encodings narrower than this make keystream collisions between
# dictionary candidates likely, so small moduli are zero-padded.
MIN_MODP_WIDTH = 8


class NotAGroupElement(ValueError):
    """Bytes or values that do not name an element of the group."""


class InvalidGroupParams(ValueError):
    pass


class Point(NamedTuple):
    x: int
    y: int


# Affine points; None is the point at infinity.
Element = Union[int, Point, None]
INFINITY = None


@dataclass(frozen=True)
class ModpGroup:
    """Subgroup of Z_p^* generated by ``g``, of order ``q``."""

    p: int
    g: int
    q: int
    name: str = "modp"
    kind: str = field(default="modp", init=False)

    def __post_init__(self):
        if not isprime(self.p):
            raise InvalidGroupParams(f"{self.name}: p is not prime")
        if self.g in (0, 1) or not 1 < self.g < self.p:
            raise InvalidGroupParams(f"{self.name}: generator must lie in [2, p-1]")
        if pow(self.g, self.q, self.p) != 1:
            raise InvalidGroupParams(f"{self.name}: g^q != 1 mod p")

    @property
    def order(self) -> int:
        return self.q

    @property
    def generator(self) -> int:
        return self.g

    @property
    def identity(self) -> int:
        return 1

    @property
    def bits(self) -> int:
        return self.p.bit_length()

    @property
    def width(self) -> int:
        return max((self.p.bit_length() + 7) // 8, MIN_MODP_WIDTH)

    def is_element(self, e) -> bool:
        return isinstance(e, int) and not isinstance(e, bool) and 1 <= e < self.p

    def op(self, a: int, b: int) -> int:
        return a * b % self.p

    def inverse(self, a: int) -> int:
        return pow(a, -1, self.p)

    def exp(self, base: int, s: int) -> int:
        return pow(base, s, self.p)

    def encode(self, e: int) -> bytes:
        if not self.is_element(e):
            raise NotAGroupElement(f"{e!r} is not a residue in [1, p-1]")
        return e.to_bytes(self.width, "big")

    def decode(self, data: bytes) -> int:
        if len(data) != self.width:
            raise NotAGroupElement(f"expected {self.width} bytes, got {len(data)}")
        e = int.from_bytes(data, "big")
        if not 1 <= e < self.p:
            raise NotAGroupElement(f"residue {e} outside [1, p-1]")
        return e


@dataclass(frozen=True)
class EcGroup:
    """Short Weierstrass curve y^2 = x^3 + ax + b over F_field, base point of prime order n."""

    field_prime: int
    a: int
    b: int
    gx: int
    gy: int
    n: int
    name: str = "ec"
    kind: str = field(default="ec", init=False)

    def __post_init__(self):
        f = self.field_prime
        if not isprime(f):
            raise InvalidGroupParams(f"{self.name}: field modulus is not prime")
        if (4 * self.a**3 + 27 * self.b**2) % f == 0:
            raise InvalidGroupParams(f"{self.name}: curve is singular")
        if not self.on_curve(self.generator):
            raise InvalidGroupParams(f"{self.name}: base point not on curve")
        if not isprime(self.n):
            raise InvalidGroupParams(f"{self.name}: order n is not prime")
        if self.exp(self.generator, self.n) is not INFINITY:
            raise InvalidGroupParams(f"{self.name}: n*P is not the identity")

    @property
    def order(self) -> int:
        return self.n

    @property
    def generator(self) -> Point:
        return Point(self.gx, self.gy)

    @property
    def identity(self) -> None:
        return INFINITY

    @property
    def bits(self) -> int:
        return self.field_prime.bit_length()

    @property
    def coord_width(self) -> int:
        return (self.field_prime.bit_length() + 7) // 8

    @property
    def width(self) -> int:
        return 1 + 2 * self.coord_width

    def on_curve(self, pt) -> bool:
        if pt is INFINITY:
            return True
        x, y = pt
        f = self.field_prime
        if not (0 <= x < f and 0 <= y < f):
            return False
        return (y * y - (x * x * x + self.a * x + self.b)) % f == 0

    def is_element(self, e) -> bool:
        return e is INFINITY or (isinstance(e, tuple) and len(e) == 2 and self.on_curve(e))

    def _checked(self, x: int, y: int) -> Point:
        pt = Point(x, y)
        if not self.on_curve(pt):
            raise AssertionError(f"arithmetic left the curve: {pt}")
        return pt

    def op(self, p1, p2):
        if p1 is INFINITY:
            return p2
        if p2 is INFINITY:
            return p1
        f = self.field_prime
        x1, y1 = p1
        x2, y2 = p2
        if x1 == x2:
            if (y1 + y2) % f == 0:
                return INFINITY
            lam = (3 * x1 * x1 + self.a) * pow(2 * y1, -1, f) % f
        else:
            lam = (y2 - y1) * pow(x2 - x1, -1, f) % f
        x3 = (lam * lam - x1 - x2) % f
        y3 = (lam * (x1 - x3) - y1) % f
        return self._checked(x3, y3)

    def inverse(self, pt):
        if pt is INFINITY:
            return INFINITY
        return Point(pt.x, (-pt.y) % self.field_prime)

    def exp(self, base, s: int):
        """Scalar multiplication s*base, left-to-right double-and-add."""
        s %= self.n
        result = INFINITY
        for bit in bin(s)[2:] if s else "":
            result = self.op(result, result)
            if bit == "1":
                result = self.op(result, base)
        return result

    def encode(self, pt) -> bytes:
        if pt is INFINITY:
            return bytes(self.width)
        if not self.is_element(pt):
            raise NotAGroupElement(f"{pt!r} is not on {self.name}")
        w = self.coord_width
        return b"\x04" + pt[0].to_bytes(w, "big") + pt[1].to_bytes(w, "big")

    def decode(self, data: bytes):
        if len(data) != self.width:
            raise NotAGroupElement(f"expected {self.width} bytes, got {len(data)}")
        if data == bytes(self.width):
            return INFINITY
        if data[0] != 4:
            raise NotAGroupElement(f"bad point tag {data[0]:#x}")
        w = self.coord_width
        pt = Point(int.from_bytes(data[1 : 1 + w], "big"), int.from_bytes(data[1 + w :], "big"))
        if not self.on_curve(pt):
            raise NotAGroupElement(f"{pt} is not on {self.name}")
        return pt


Group = Union[ModpGroup, EcGroup]


def power(group, base, s: int):
    """g^s for the modp group, s*P for the curve."""
    return group.exp(base, s)


def sample_scalar(group, rng) -> int:
    """Uniform scalar in [1, order-1]."""
    return rng.randrange(1, group.order)


class CountingGroup:
    """Proxy that counts exponentiations, for the benchmark report."""

    def __init__(self, group):
        self._group = group
        self.exponentiations = 0

    def exp(self, base, s):
        self.exponentiations += 1
        return self._group.exp(base, s)

    def __getattr__(self, name):
        return getattr(self._group, name)
