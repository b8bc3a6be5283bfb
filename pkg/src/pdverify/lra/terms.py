"""Linear terms with exact rational coefficients.

A term is a constant plus a sparse map from *keys* to coefficients.  A key
is either a variable name or a :class:`Mod` wrapper (``t mod n``), which
is only meaningful over the integers and only ever evaluated on ground
assignments.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

Number = Union[int, Fraction]
Assignment = Mapping[str, Fraction]


class UnboundVariable(KeyError):
    pass


class SortMismatch(TypeError):
    pass


@dataclass(frozen=True)
class Mod:
    arg: "LinTerm"
    modulus: int

    def __post_init__(self):
        if self.modulus <= 0:
            raise ValueError("modulus must be positive")

    def __str__(self) -> str:
        return f"({self.arg} mod {self.modulus})"


Key = Union[str, Mod]


def _key_order(k: Key):
    return (0, k) if isinstance(k, str) else (1, str(k))


def _frac(c: Number) -> Fraction:
    return c if isinstance(c, Fraction) else Fraction(c)


@dataclass(frozen=True)
class LinTerm:
    """``sum(c * k for k, c in coeffs) + const`` in canonical form."""

    coeffs: tuple[tuple[Key, Fraction], ...] = ()
    const: Fraction = Fraction(0)

    # construction -------------------------------------------------------
    @staticmethod
    def build(items: Mapping[Key, Number] | None = None, const: Number = 0) -> "LinTerm":
        acc: dict[Key, Fraction] = {}
        for k, c in (items or {}).items():
            acc[k] = acc.get(k, Fraction(0)) + _frac(c)
        kept = tuple(sorted(((k, c) for k, c in acc.items() if c != 0), key=lambda kc: _key_order(kc[0])))
        return LinTerm(kept, _frac(const))

    @staticmethod
    def var(name: str) -> "LinTerm":
        return LinTerm(((name, Fraction(1)),), Fraction(0))

    @staticmethod
    def const_term(c: Number) -> "LinTerm":
        return LinTerm((), _frac(c))

    @staticmethod
    def mod(arg: "LinTerm", n: int) -> "LinTerm":
        if arg.is_constant():
            return LinTerm.const_term(int(arg.const) % n) if arg.const.denominator == 1 else _bad_mod(arg)
        return LinTerm(((Mod(arg, n), Fraction(1)),), Fraction(0))

    # queries ------------------------------------------------------------
    def as_dict(self) -> dict[Key, Fraction]:
        return dict(self.coeffs)

    def coeff(self, k: Key) -> Fraction:
        for key, c in self.coeffs:
            if key == k:
                return c
        return Fraction(0)

    def is_constant(self) -> bool:
        return not self.coeffs

    def variables(self) -> frozenset[str]:
        out: set[str] = set()
        for k, _ in self.coeffs:
            if isinstance(k, str):
                out.add(k)
            else:
                out |= k.arg.variables()
        return frozenset(out)

    def has_mod(self) -> bool:
        return any(isinstance(k, Mod) for k, _ in self.coeffs)

    def is_integral(self) -> bool:
        return self.const.denominator == 1 and all(c.denominator == 1 for _, c in self.coeffs)

    # arithmetic ---------------------------------------------------------
    def __add__(self, other: "LinTerm | Number") -> "LinTerm":
        if not isinstance(other, LinTerm):
            return LinTerm(self.coeffs, self.const + _frac(other))
        d = self.as_dict()
        for k, c in other.coeffs:
            d[k] = d.get(k, Fraction(0)) + c
        return LinTerm.build(d, self.const + other.const)

    __radd__ = __add__

    def __neg__(self) -> "LinTerm":
        return self.scale(-1)

    def __sub__(self, other: "LinTerm | Number") -> "LinTerm":
        if not isinstance(other, LinTerm):
            return self + (-_frac(other))
        return self + (-other)

    def __rsub__(self, other: Number) -> "LinTerm":
        return (-self) + other

    def scale(self, c: Number) -> "LinTerm":
        c = _frac(c)
        if c == 0:
            return LinTerm()
        return LinTerm(tuple((k, v * c) for k, v in self.coeffs), self.const * c)

    def __mul__(self, c: Number) -> "LinTerm":
        return self.scale(c)

    __rmul__ = __mul__

    def without(self, k: Key) -> "LinTerm":
        return LinTerm(tuple((key, c) for key, c in self.coeffs if key != k), self.const)

    # substitution / evaluation -----------------------------------------
    def substitute(self, mapping: Mapping[str, "LinTerm"]) -> "LinTerm":
        if not mapping or not (self.variables() & mapping.keys()):
            return self
        out = LinTerm.const_term(self.const)
        for k, c in self.coeffs:
            if isinstance(k, str):
                out = out + (mapping[k] if k in mapping else LinTerm.var(k)).scale(c)
            else:
                inner = k.arg.substitute(mapping)
                if not inner.is_integral():
                    raise SortMismatch(f"non-integral term substituted under mod: {inner}")
                out = out + LinTerm.mod(inner, k.modulus).scale(c)
        return out

    def evaluate(self, a: Assignment) -> Fraction:
        total = self.const
        for k, c in self.coeffs:
            if isinstance(k, str):
                if k not in a:
                    raise UnboundVariable(k)
                total += c * _frac(a[k])
            else:
                v = k.arg.evaluate(a)
                if v.denominator != 1:
                    raise SortMismatch(f"mod applied to non-integer value {v}")
                total += c * (int(v) % k.modulus)
        return total

    # printing -----------------------------------------------------------
    def __str__(self) -> str:
        parts: list[str] = []
        for k, c in self.coeffs:
            name = str(k)
            if c == 1:
                s = name
            elif c == -1:
                s = "-" + name
            else:
                s = f"{_fmt(c)}*{name}"
            parts.append(s)
        if self.const != 0 or not parts:
            parts.append(_fmt(self.const))
        text = " + ".join(parts)
        return text.replace("+ -", "- ")

    def to_sexpr(self):
        """Nested-list form for :func:`pdverify.sexpr.render`."""
        parts = []
        for k, c in self.coeffs:
            base = k if isinstance(k, str) else ["mod", k.arg.to_sexpr(), k.modulus]
            parts.append(base if c == 1 else ["*", c, base])
        if self.const != 0 or not parts:
            parts.append(self.const)
        return parts[0] if len(parts) == 1 else ["+", *parts]


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _bad_mod(arg: LinTerm):
    raise SortMismatch(f"mod applied to non-integer constant {arg}")


def var(name: str) -> LinTerm:
    return LinTerm.var(name)


def const(c: Number) -> LinTerm:
    return LinTerm.const_term(c)
