"""Arithmetic in GF(p^N) = F_p[z]/(rho(z)) in the polynomial basis.

Elements are packed into one Python int, ``sum(c_i * p**i)``.  For p = 2 this is
the usual bitmask and every operation is xor/shift based, which is what makes
N = 1024 workable.  Other characteristics go through coefficient lists.

The primitive element alpha is always the residue class of z.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Iterator, Sequence

import sympy

from .errors import (
    BudgetExceeded,
    DivisionByZero,
    MixedFields,
    NotMonic,
    NotPrime,
    NotPrimitive,
    Reducible,
)

log = logging.getLogger(__name__)

VERIFIED_PRIMITIVE = "verified-primitive"
IRREDUCIBLE_ONLY = "verified-irreducible-only"
ASSERTED = "asserted-unchecked"

# bit length of p^N - 1 above which we do not try to factor it
DEFAULT_FACTOR_BITS = 128
# bit length of p^N - 1 up to which find_primitive_poly will run
DEFAULT_SEARCH_BITS = 64


# --------------------------------------------------------------------------
# GF(2)[z] on bitmasks


def _clmul(a: int, b: int) -> int:
    if a.bit_count() < b.bit_count():
        a, b = b, a
    if b.bit_count() <= 12:
        r = 0
        while b:
            low = b & -b
            r ^= a << (low.bit_length() - 1)
            b ^= low
        return r
    # 4-bit window
    tab = [0] * 16
    for i in range(1, 16):
        tab[i] = tab[i >> 1] << 1 if not i & 1 else tab[i ^ 1] ^ a
    r = 0
    s = 0
    while b:
        r ^= tab[b & 15] << s
        b >>= 4
        s += 4
    return r


def _bdivmod(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise DivisionByZero("polynomial division by zero")
    q = 0
    db = b.bit_length()
    while a.bit_length() >= db:
        shift = a.bit_length() - db
        q ^= 1 << shift
        a ^= b << shift
    return q, a


def _bgcd(a: int, b: int) -> int:
    while b:
        a, b = b, _bdivmod(a, b)[1]
    return a


def _binv_mod(a: int, m: int) -> int:
    r0, r1 = m, a
    s0, s1 = 0, 1
    while r1:
        q, r = _bdivmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, s0 ^ _clmul(q, s1)
    if r0 != 1:
        raise DivisionByZero("element is not invertible")
    return s0


# --------------------------------------------------------------------------
# F_p[z] on coefficient lists (lowest degree first)


def _trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmul(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return _trim([c % p for c in out])


def _psub(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)]
    return _trim(out)


def _pdivmod(a: Sequence[int], b: Sequence[int], p: int) -> tuple[list[int], list[int]]:
    b = _trim(list(b))
    if not b:
        raise DivisionByZero("polynomial division by zero")
    r = _trim([c % p for c in a])
    db = len(b) - 1
    lead_inv = pow(b[-1], -1, p)
    q = [0] * max(len(r) - db, 0)
    while len(r) - 1 >= db and r:
        shift = len(r) - 1 - db
        c = r[-1] * lead_inv % p
        q[shift] = c
        for j, y in enumerate(b):
            r[shift + j] = (r[shift + j] - c * y) % p
        _trim(r)
    return _trim(q), r


def _pgcd(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a, b = _trim(list(a)), _trim(list(b))
    while b:
        a, b = b, _pdivmod(a, b, p)[1]
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def _unpack(v: int, p: int, n: int) -> list[int]:
    out = []
    for _ in range(n):
        v, c = divmod(v, p)
        out.append(c)
    return out


def _pack(coeffs: Sequence[int], p: int) -> int:
    v = 0
    for c in reversed(coeffs):
        v = v * p + c
    return v


# --------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FieldCtx:
    """GF(p^N) given by a monic modulus, coefficients lowest degree first.

    Build through :func:`make_field`; direct construction skips all checks.
    """

    p: int
    modulus: tuple[int, ...]
    primitivity_status: str = ASSERTED
    warnings: tuple[str, ...] = ()
    N: int = field(init=False, repr=False, default=0)
    order: int = field(init=False, repr=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "modulus", tuple(self.modulus))
        n = len(self.modulus) - 1
        object.__setattr__(self, "N", n)
        object.__setattr__(self, "order", self.p**n)
        object.__setattr__(self, "_pow2_chain", [])
        if self.p == 2:
            mod = _pack(self.modulus, 2)
            object.__setattr__(self, "_mod", mod)
            object.__setattr__(self, "_low", mod ^ (1 << n))
            object.__setattr__(self, "_mask", (1 << n) - 1)
        else:
            # nonzero terms of -(rho - z^N): z^N == sum c_i z^i
            fold = [(i, (-c) % self.p) for i, c in enumerate(self.modulus[:-1]) if c]
            object.__setattr__(self, "_fold", fold)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, FieldCtx):
            return NotImplemented
        return self.p == other.p and self.modulus == other.modulus

    def __hash__(self):
        return hash((self.p, self.modulus))

    def __repr__(self):
        return f"GF({self.p}^{self.N}) mod {poly_str(self.modulus)}"

    def __getstate__(self):
        return (self.p, self.modulus, self.primitivity_status, self.warnings)

    def __setstate__(self, state):
        for name, value in zip(("p", "modulus", "primitivity_status", "warnings"), state):
            object.__setattr__(self, name, value)
        self.__post_init__()

    # ---- raw arithmetic on packed ints ----

    def _add(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        p, n = self.p, self.N
        return _pack([(x + y) % p for x, y in zip(_unpack(a, p, n), _unpack(b, p, n))], p)

    def _neg(self, a: int) -> int:
        if self.p == 2:
            return a
        p = self.p
        return _pack([(-x) % p for x in _unpack(a, p, self.N)], p)

    def _sub(self, a: int, b: int) -> int:
        if self.p == 2:
            return a ^ b
        p, n = self.p, self.N
        return _pack([(x - y) % p for x, y in zip(_unpack(a, p, n), _unpack(b, p, n))], p)

    def _reduce_list(self, c: list[int]) -> list[int]:
        p, n = self.p, self.N
        for i in range(len(c) - 1, n - 1, -1):
            t = c[i]
            if t:
                c[i] = 0
                for j, f in self._fold:
                    c[i - n + j] = (c[i - n + j] + t * f) % p
        c = c[:n]
        return c + [0] * (n - len(c))

    def _mul(self, a: int, b: int) -> int:
        if self.p == 2:
            c = _clmul(a, b)
            n, low, mask = self.N, self._low, self._mask
            while c >> n:
                c = (c & mask) ^ _clmul(c >> n, low)
            return c
        if not a or not b:
            return 0
        p, n = self.p, self.N
        prod = _pmul(_unpack(a, p, n), _unpack(b, p, n), p)
        return _pack(self._reduce_list(prod), p)

    def _inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        if self.p == 2:
            return _binv_mod(a, self._mod)
        p, n = self.p, self.N
        r0, r1 = list(self.modulus), _trim(_unpack(a, p, n))
        s0, s1 = [], [1]
        while r1:
            q, r = _pdivmod(r0, r1, p)
            r0, r1 = r1, r
            s0, s1 = s1, _psub(s0, _pmul(q, s1, p), p)
        if len(r0) != 1:
            raise DivisionByZero("element is not invertible")
        inv_lead = pow(r0[0], -1, p)
        s = [c * inv_lead % p for c in s0]
        return _pack(self._reduce_list(s + [0] * max(0, n - len(s))), p)

    def _pow(self, a: int, e: int) -> int:
        if e < 0:
            a, e = self._inv(a), -e
        result = self._one
        while e:
            if e & 1:
                result = self._mul(result, a)
            e >>= 1
            if e:
                a = self._mul(a, a)
        return result

    # the constant 1 packs to 1 in every base
    _one = 1

    @property
    def _alpha(self) -> int:
        if self.N == 1:
            return (-self.modulus[0]) % self.p
        return self.p

    # ---- element constructors ----

    def element(self, coeffs: Sequence[int]) -> FieldElement:
        """Element from coefficients (lowest degree first), reduced mod p and rho."""
        c = [int(x) % self.p for x in coeffs]
        if len(c) > self.N:
            c = self._reduce_list(c)
        return FieldElement(self, _pack(c, self.p))

    def from_int(self, v: int) -> FieldElement:
        if not 0 <= v < self.order:
            raise ValueError(f"packed value {v} out of range for {self!r}")
        return FieldElement(self, v)

    def scalar(self, c: int) -> FieldElement:
        return FieldElement(self, c % self.p)

    @property
    def zero(self) -> FieldElement:
        return FieldElement(self, 0)

    @property
    def one(self) -> FieldElement:
        return FieldElement(self, self._one)

    @property
    def alpha(self) -> FieldElement:
        return FieldElement(self, self._alpha)

    def elements(self) -> Iterator[FieldElement]:
        for v in range(self.order):
            yield FieldElement(self, v)

    def pow2exp(self, e: int) -> FieldElement:
        """alpha^(2^e) by e squarings; the chain is cached on the context."""
        if e < 0:
            raise ValueError("exponent index must be nonnegative")
        chain = self._pow2_chain
        if not chain:
            chain.append(self._alpha)
        while len(chain) <= e:
            x = chain[-1]
            chain.append(self._mul(x, x))
        return FieldElement(self, chain[e])

    @property
    def primitive(self) -> bool:
        return self.primitivity_status in (VERIFIED_PRIMITIVE, ASSERTED)

    def describe(self) -> dict:
        return {
            "p": self.p,
            "N": self.N,
            "modulus": format_modulus(self.modulus),
            "polynomial": poly_str(self.modulus),
            "primitivity": self.primitivity_status,
        }


class FieldElement:
    """Immutable element of a :class:`FieldCtx`."""

    __slots__ = ("field", "value")

    def __init__(self, field: FieldCtx, value: int):
        object.__setattr__(self, "field", field)
        object.__setattr__(self, "value", value)

    def __setattr__(self, name, value):
        raise AttributeError("FieldElement is immutable")

    def __reduce__(self):
        return (FieldElement, (self.field, self.value))

    @property
    def coeffs(self) -> tuple[int, ...]:
        return tuple(_unpack(self.value, self.field.p, self.field.N))

    def is_zero(self) -> bool:
        return self.value == 0

    def __bool__(self):
        return self.value != 0

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field is not self.field and other.field != self.field:
                raise MixedFields(f"{self.field!r} vs {other.field!r}")
            return other.value
        if isinstance(other, int):
            return other % self.field.p
        raise TypeError(f"cannot combine FieldElement with {type(other).__name__}")

    def __add__(self, other):
        return FieldElement(self.field, self.field._add(self.value, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return FieldElement(self.field, self.field._sub(self.value, self._coerce(other)))

    def __rsub__(self, other):
        return FieldElement(self.field, self.field._sub(self._coerce(other), self.value))

    def __neg__(self):
        return FieldElement(self.field, self.field._neg(self.value))

    def __mul__(self, other):
        return FieldElement(self.field, self.field._mul(self.value, self._coerce(other)))

    __rmul__ = __mul__

    def inverse(self) -> FieldElement:
        return FieldElement(self.field, self.field._inv(self.value))

    def __truediv__(self, other):
        return self * FieldElement(self.field, self._coerce(other)).inverse()

    def __pow__(self, e: int):
        return FieldElement(self.field, self.field._pow(self.value, int(e)))

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.field.p, self.field.modulus, self.value))

    def __repr__(self):
        return f"FieldElement({poly_str(self.coeffs)})"


# --------------------------------------------------------------------------
# functional API


def add(a: FieldElement, b: FieldElement) -> FieldElement:
    return a + b


def sub(a: FieldElement, b: FieldElement) -> FieldElement:
    return a - b


def neg(a: FieldElement) -> FieldElement:
    return -a


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    return a * b


def inv(a: FieldElement) -> FieldElement:
    return a.inverse()


def power(a: FieldElement, e: int) -> FieldElement:
    """Square-and-multiply; ``power(a, 0) == 1``."""
    return a**e


def pow2exp(ctx: FieldCtx, e: int) -> FieldElement:
    return ctx.pow2exp(e)


# --------------------------------------------------------------------------
# irreducibility and primitivity


def _frobenius_residues(ctx: FieldCtx, upto: int) -> Iterator[tuple[int, int]]:
    """Yield (d, z^(p^d) mod rho) for d = 1..upto."""
    z = ctx._alpha
    for d in range(1, upto + 1):
        z = ctx._pow(z, ctx.p)
        yield d, z


def _gcd_with_modulus(ctx: FieldCtx, x: int) -> int:
    """Degree of gcd(x(z) - z, rho(z))."""
    if ctx.p == 2:
        return _bgcd(ctx._mod, x ^ 2).bit_length() - 1
    p = ctx.p
    xs = _unpack(x, p, ctx.N)
    if len(xs) < 2:
        xs += [0] * (2 - len(xs))
    xs[1] = (xs[1] - 1) % p
    return len(_pgcd(list(ctx.modulus), xs, p)) - 1


def irreducibility_witness(p: int, modulus: Sequence[int]) -> int | None:
    """None if the monic ``modulus`` is irreducible over F_p, else the degree of a factor.

    Decision by Rabin's test; the witness comes from distinct-degree gcds.
    """
    ctx = FieldCtx(p, tuple(modulus))
    n = ctx.N
    if n == 1:
        return None
    checkpoints = {n // q for q in sympy.primefactors(n)}
    ok = True
    last = None
    for d, x in _frobenius_residues(ctx, n):
        if d in checkpoints and _gcd_with_modulus(ctx, x) != 0:
            ok = False
            break
        last = x
    if ok and last == _reduced_z(ctx):
        return None
    for d, x in _frobenius_residues(ctx, n // 2):
        if _gcd_with_modulus(ctx, x) > 0:
            return d
    raise AssertionError("reducible polynomial without a factor of degree <= N/2")


def _reduced_z(ctx: FieldCtx) -> int:
    return ctx._alpha


def _prime_factors(n: int, factor_bits: int) -> list[int] | None:
    if n.bit_length() > factor_bits:
        return None
    return sorted(sympy.factorint(n))


def make_field(
    p: int,
    modulus: Sequence[int],
    require_primitive: bool = True,
    factor_bits: int = DEFAULT_FACTOR_BITS,
) -> FieldCtx:
    """Validated GF(p^N) for the monic ``modulus`` (lowest degree first).

    Irreducibility is always verified.  With ``require_primitive`` the order of
    z is checked against every prime factor of p^N - 1, provided that number
    has at most ``factor_bits`` bits; otherwise primitivity is recorded as
    asserted-unchecked with a warning.
    """
    if not sympy.isprime(p):
        raise NotPrime(f"{p} is not prime")
    modulus = tuple(int(c) for c in modulus)
    if len(modulus) < 2:
        raise NotMonic("modulus must have degree >= 1")
    if any(not 0 <= c < p for c in modulus):
        raise ValueError(f"modulus coefficients must lie in [0, {p})")
    if modulus[-1] != 1:
        raise NotMonic(f"modulus {poly_str(modulus)} is not monic of degree {len(modulus) - 1}")
    witness = irreducibility_witness(p, modulus)
    if witness is not None:
        raise Reducible(f"{poly_str(modulus)} has a factor of degree {witness}", witness)
    ctx = FieldCtx(p, modulus, IRREDUCIBLE_ONLY)
    if not require_primitive:
        return ctx
    group_order = ctx.order - 1
    factors = _prime_factors(group_order, factor_bits)
    if factors is None:
        msg = (
            f"primitivity of z not verified: p^N - 1 has {group_order.bit_length()} bits "
            f"(factoring budget {factor_bits})"
        )
        log.warning(msg)
        return FieldCtx(p, modulus, ASSERTED, (msg,))
    for q in factors:
        if ctx._pow(ctx._alpha, group_order // q) == ctx._one:
            raise NotPrimitive(f"z^((p^N-1)/{q}) = 1 modulo {poly_str(modulus)}", q)
    return FieldCtx(p, modulus, VERIFIED_PRIMITIVE)


@lru_cache(maxsize=None)
def find_primitive_poly(p: int, N: int, budget_bits: int = DEFAULT_SEARCH_BITS) -> tuple[int, ...]:
    """Smallest primitive monic polynomial of degree N over F_p.

    Candidates are ordered by their value at z = p (highest coefficient most
    significant), so z^3 + z + 1 precedes z^3 + z^2 + 1.
    """
    if not sympy.isprime(p):
        raise NotPrime(f"{p} is not prime")
    if N < 1:
        raise ValueError("degree must be >= 1")
    if (p**N - 1).bit_length() > budget_bits:
        raise BudgetExceeded(
            f"p^N - 1 = {p}^{N} - 1 exceeds the {budget_bits}-bit search budget",
            required=(p**N - 1).bit_length(),
            budget=budget_bits,
        )
    factors = sorted(sympy.factorint(p**N - 1))
    for low in range(p**N):
        if low % p == 0:
            continue
        coeffs = tuple(_unpack(low, p, N)) + (1,)
        if irreducibility_witness(p, coeffs) is not None:
            continue
        ctx = FieldCtx(p, coeffs)
        group_order = ctx.order - 1
        if all(ctx._pow(ctx._alpha, group_order // q) != ctx._one for q in factors):
            return coeffs
    raise AssertionError(f"no primitive polynomial of degree {N} over F_{p}")


def primitive_poly_table() -> dict[tuple[int, int], tuple[int, ...]]:
    """Bundled table of find_primitive_poly results for p in {2, 3, 5}, N <= 16."""
    text = resources.files("superreg").joinpath("data/primitive_polys.txt").read_text()
    table = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        p, n, coeffs = line.split()
        table[int(p), int(n)] = parse_modulus(coeffs)
    return table


def field_for_degree(p: int, N: int, budget_bits: int = DEFAULT_SEARCH_BITS) -> FieldCtx:
    """Verified-primitive GF(p^N) using the bundled table when it covers (p, N)."""
    modulus = primitive_poly_table().get((p, N)) or find_primitive_poly(p, N, budget_bits)
    return make_field(p, modulus, require_primitive=True)


# --------------------------------------------------------------------------
# text formats


_TERM = re.compile(r"^(?:(\d+)\*?)?(?:([a-z])(?:\^(\d+))?)?$")


def parse_modulus(text: str) -> tuple[int, ...]:
    """Coefficients lowest degree first.

    Accepts "1,1,0,1" or a polynomial such as "z^3 + z + 1" (any one-letter variable).
    """
    text = text.replace(" ", "")
    if "," in text or text.isdigit():
        return tuple(int(c) for c in text.split(",") if c != "")
    coeffs: dict[int, int] = {}
    for term in text.split("+"):
        m = _TERM.match(term)
        if not term or not m or (m.group(1) is None and m.group(2) is None):
            raise ValueError(f"cannot parse term {term!r} in {text!r}")
        c = int(m.group(1)) if m.group(1) else 1
        deg = 0 if m.group(2) is None else int(m.group(3) or 1)
        coeffs[deg] = coeffs.get(deg, 0) + c
    out = [0] * (max(coeffs) + 1)
    for d, c in coeffs.items():
        out[d] = c
    return tuple(out)


def format_modulus(coeffs: Sequence[int]) -> str:
    return ",".join(str(c) for c in coeffs)


def poly_str(coeffs: Sequence[int], var: str = "z") -> str:
    terms = []
    for i in range(len(coeffs) - 1, -1, -1):
        c = coeffs[i]
        if not c:
            continue
        mono = "1" if i == 0 else var if i == 1 else f"{var}^{i}"
        if c != 1:
            mono = str(c) if i == 0 else f"{c}*{mono}"
        terms.append(mono)
    return " + ".join(terms) if terms else "0"
