"""Exact symbolic expressions for the derived right-hand sides.

A :class:`SymbolicExpr` is a finite sum of terms

    coeff * a_{j1}^{e1} ... * u_{i1}^{f1} ... * exp(c_1 u_{l1} + c_2 u_{l2} + ...)

with exact rational-complex coefficients, integer powers, and integer-linear
exponential forms (the l's are Cartan directions, the c's integers).  The
representation is canonical: terms are merged by (exponential form,
monomial), zero coefficients pruned, and the term list kept sorted by a
deterministic total order — so structural equality is plain ``==`` and
rendering is byte-stable.

Only exact operations are provided (ring arithmetic, scaling by rationals,
multiplication by exponential forms); floats never enter.  Numerical
evaluation happens in one place, :meth:`SymbolicExpr.evaluate`.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = ["RationalComplex", "SymbolicExpr"]

Symbol = tuple[str, int]                      # ("a", j) or ("u", i), 1-based
Monomial = tuple[tuple[Symbol, int], ...]     # sorted, powers >= 1
ExpForm = tuple[tuple[int, int], ...]         # sorted (u-index, integer coeff != 0)
TermKey = tuple[ExpForm, Monomial]


@dataclass(frozen=True)
class RationalComplex:
    """Exact complex number with rational real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @staticmethod
    def coerce(x: "RationalComplex | Fraction | int") -> "RationalComplex":
        if isinstance(x, RationalComplex):
            return x
        if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
            return RationalComplex(Fraction(x))
        raise TypeError(f"cannot coerce {type(x).__name__} to RationalComplex")

    def __add__(self, other: "RationalComplex") -> "RationalComplex":
        return RationalComplex(self.re + other.re, self.im + other.im)

    def __neg__(self) -> "RationalComplex":
        return RationalComplex(-self.re, -self.im)

    def __mul__(self, other: "RationalComplex") -> "RationalComplex":
        return RationalComplex(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    @property
    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


_ZERO = RationalComplex()
_ONE = RationalComplex(Fraction(1))


def _rat_plain(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _rat_latex(x: Fraction) -> str:
    if x.denominator == 1:
        return str(x.numerator)
    sign = "-" if x < 0 else ""
    return rf"{sign}\frac{{{abs(x.numerator)}}}{{{x.denominator}}}"


class SymbolicExpr:
    """Canonical exact expression; see the module docstring.

    Construct via :meth:`a`, :meth:`u`, :meth:`number` and combine with
    ``+ - *`` and :meth:`times_exp`.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: dict[TermKey, RationalComplex] | None = None):
        items = []
        if terms:
            for key, coeff in terms.items():
                if not coeff.is_zero:
                    items.append((key, coeff))
        items.sort(key=lambda kv: kv[0])
        self._terms: tuple[tuple[TermKey, RationalComplex], ...] = tuple(items)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def zero() -> "SymbolicExpr":
        return SymbolicExpr()

    @staticmethod
    def number(x: "RationalComplex | Fraction | int") -> "SymbolicExpr":
        return SymbolicExpr({((), ()): RationalComplex.coerce(x)})

    @staticmethod
    def a(j: int) -> "SymbolicExpr":
        """The coefficient symbol a_j (1-based)."""
        if j < 1:
            raise ValueError(f"symbol index must be >= 1, got {j}")
        return SymbolicExpr({((), ((("a", j), 1),)): _ONE})

    @staticmethod
    def u(i: int) -> "SymbolicExpr":
        """The unknown symbol u_i (1-based)."""
        if i < 1:
            raise ValueError(f"symbol index must be >= 1, got {i}")
        return SymbolicExpr({((), ((("u", i), 1),)): _ONE})

    @staticmethod
    def exp_u(form: dict[int, int]) -> "SymbolicExpr":
        """exp(sum_i form[i] * u_i) as an expression."""
        key = (tuple(sorted((i, c) for i, c in form.items() if c != 0)), ())
        return SymbolicExpr({key: _ONE})

    # -- ring arithmetic ----------------------------------------------------

    def _coerce_operand(self, other) -> "SymbolicExpr | None":
        if isinstance(other, SymbolicExpr):
            return other
        if isinstance(other, (int, Fraction, RationalComplex)) and not isinstance(
            other, bool
        ):
            return SymbolicExpr.number(other)
        return None

    def __add__(self, other) -> "SymbolicExpr":
        rhs = self._coerce_operand(other)
        if rhs is None:
            return NotImplemented
        acc: dict[TermKey, RationalComplex] = dict(self._terms)
        for key, coeff in rhs._terms:
            acc[key] = acc.get(key, _ZERO) + coeff
        return SymbolicExpr(acc)

    __radd__ = __add__

    def __neg__(self) -> "SymbolicExpr":
        return SymbolicExpr({key: -coeff for key, coeff in self._terms})

    def __sub__(self, other) -> "SymbolicExpr":
        rhs = self._coerce_operand(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other) -> "SymbolicExpr":
        rhs = self._coerce_operand(other)
        if rhs is None:
            return NotImplemented
        return rhs + (-self)

    def __mul__(self, other) -> "SymbolicExpr":
        rhs = self._coerce_operand(other)
        if rhs is None:
            return NotImplemented
        acc: dict[TermKey, RationalComplex] = {}
        for (form1, mono1), c1 in self._terms:
            for (form2, mono2), c2 in rhs._terms:
                key = (_merge_forms(form1, form2), _merge_monomials(mono1, mono2))
                c = c1 * c2
                acc[key] = acc.get(key, _ZERO) + c
        return SymbolicExpr(acc)

    __rmul__ = __mul__

    def times_exp(self, form: dict[int, int]) -> "SymbolicExpr":
        """Multiply every term by exp(sum_i form[i] * u_i)."""
        extra = tuple(sorted((i, c) for i, c in form.items() if c != 0))
        if not extra:
            return self
        return SymbolicExpr(
            {
                (_merge_forms(f, extra), mono): coeff
                for (f, mono), coeff in self._terms
            }
        )

    # -- structure queries --------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def terms(self) -> tuple[tuple[TermKey, RationalComplex], ...]:
        """Canonically ordered (key, coefficient) pairs."""
        return self._terms

    def u_indices(self) -> set[int]:
        """Indices of u symbols appearing polynomially."""
        out: set[int] = set()
        for (_, mono), _c in self._terms:
            out.update(idx for (kind, idx), _p in mono if kind == "u")
        return out

    def exp_indices(self) -> set[int]:
        """Indices of u symbols appearing inside exponential forms."""
        out: set[int] = set()
        for (form, _), _c in self._terms:
            out.update(i for i, _ in form)
        return out

    def degree_in(self, u_subset: set[int]) -> int:
        """Max total polynomial degree over the given u indices."""
        deg = 0
        for (_, mono), _c in self._terms:
            deg = max(
                deg,
                sum(p for (kind, idx), p in mono if kind == "u" and idx in u_subset),
            )
        return deg

    # -- evaluation ---------------------------------------------------------

    def evaluate(self, a: np.ndarray, u: np.ndarray) -> complex:
        """Numeric value with a_j -> a[j-1], u_i -> u[i-1]."""
        total = 0j
        for (form, mono), coeff in self._terms:
            val = coeff.to_complex()
            for (kind, idx), power in mono:
                base = a[idx - 1] if kind == "a" else u[idx - 1]
                val *= base**power
            if form:
                val *= np.exp(sum(c * u[i - 1] for i, c in form))
            total += val
        return complex(total)

    # -- equality / hashing -------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymbolicExpr):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(self._terms)

    def __repr__(self) -> str:
        return f"SymbolicExpr({self.render_plain()})"

    # -- rendering ----------------------------------------------------------

    def render_plain(self) -> str:
        if not self._terms:
            return "0"
        out: list[str] = []
        for (form, mono), coeff in self._terms:
            sign, body = _term_plain(form, mono, coeff)
            if not out:
                out.append(body if sign > 0 else f"-{body}")
            else:
                out.append(f"{'+' if sign > 0 else '-'} {body}")
        return " ".join(out)

    def render_latex(self) -> str:
        if not self._terms:
            return "0"
        out: list[str] = []
        for (form, mono), coeff in self._terms:
            sign, body = _term_latex(form, mono, coeff)
            if not out:
                out.append(body if sign > 0 else f"-{body}")
            else:
                out.append(f"{'+' if sign > 0 else '-'} {body}")
        return " ".join(out)

    # -- JSON ---------------------------------------------------------------

    def to_json_obj(self) -> list:
        terms = []
        for (form, mono), coeff in self._terms:
            terms.append(
                {
                    "coeff": {
                        "re": [coeff.re.numerator, coeff.re.denominator],
                        "im": [coeff.im.numerator, coeff.im.denominator],
                    },
                    "monomial": [[kind, idx, power] for (kind, idx), power in mono],
                    "exponent": [[i, c] for i, c in form],
                }
            )
        return terms

    @staticmethod
    def from_json_obj(obj: list) -> "SymbolicExpr":
        acc: dict[TermKey, RationalComplex] = {}
        for term in obj:
            coeff = RationalComplex(
                Fraction(term["coeff"]["re"][0], term["coeff"]["re"][1]),
                Fraction(term["coeff"]["im"][0], term["coeff"]["im"][1]),
            )
            mono = tuple(
                ((kind, int(idx)), int(power))
                for kind, idx, power in term["monomial"]
            )
            form = tuple((int(i), int(c)) for i, c in term["exponent"])
            key = (form, mono)
            acc[key] = acc.get(key, _ZERO) + coeff
        return SymbolicExpr(acc)


# ---------------------------------------------------------------------------
# term internals
# ---------------------------------------------------------------------------


def _merge_monomials(m1: Monomial, m2: Monomial) -> Monomial:
    acc: dict[Symbol, int] = {}
    for sym, p in m1:
        acc[sym] = acc.get(sym, 0) + p
    for sym, p in m2:
        acc[sym] = acc.get(sym, 0) + p
    return tuple(sorted(acc.items()))


def _merge_forms(f1: ExpForm, f2: ExpForm) -> ExpForm:
    acc: dict[int, int] = {}
    for i, c in f1:
        acc[i] = acc.get(i, 0) + c
    for i, c in f2:
        acc[i] = acc.get(i, 0) + c
    return tuple(sorted((i, c) for i, c in acc.items() if c != 0))


def _coeff_sign_and_body(coeff: RationalComplex, latex: bool) -> tuple[int, str, bool]:
    """(sign, rendered magnitude, is_trivial_one) for a coefficient."""
    rat = _rat_latex if latex else _rat_plain
    if coeff.im == 0:
        sign = -1 if coeff.re < 0 else 1
        mag = abs(coeff.re)
        return sign, rat(mag), mag == 1
    if coeff.re == 0:
        sign = -1 if coeff.im < 0 else 1
        mag = abs(coeff.im)
        body = ("i" if mag == 1 else f"{rat(mag)}i") if not latex else (
            "i" if mag == 1 else f"{rat(mag)} i"
        )
        return sign, body, False
    inner = f"{rat(coeff.re)}{'+' if coeff.im > 0 else '-'}{rat(abs(coeff.im))}i"
    body = rf"\left({inner}\right)" if latex else f"({inner})"
    return 1, body, False


def _form_inner(form: ExpForm, latex: bool) -> str:
    parts: list[str] = []
    for i, c in form:
        sym = f"u_{{{i}}}" if latex else f"u{i}"
        if c == 1:
            piece = sym
        elif c == -1:
            piece = f"-{sym}"
        else:
            piece = f"{c} {sym}" if latex else f"{c}*{sym}"
        if parts:
            parts.append(f"+ {piece}" if not piece.startswith("-") else f"- {piece[1:]}")
        else:
            parts.append(piece)
    return " ".join(parts)


def _term_plain(form: ExpForm, mono: Monomial, coeff: RationalComplex) -> tuple[int, str]:
    sign, coeff_body, trivial = _coeff_sign_and_body(coeff, latex=False)
    pieces: list[str] = []
    for (kind, idx), power in mono:
        sym = f"{kind}{idx}"
        pieces.append(sym if power == 1 else f"{sym}^{power}")
    if form:
        pieces.append(f"exp({_form_inner(form, latex=False)})")
    if not pieces:
        return sign, coeff_body
    if not trivial:
        pieces.insert(0, coeff_body)
    return sign, "*".join(pieces)


def _term_latex(form: ExpForm, mono: Monomial, coeff: RationalComplex) -> tuple[int, str]:
    sign, coeff_body, trivial = _coeff_sign_and_body(coeff, latex=True)
    pieces: list[str] = []
    for (kind, idx), power in mono:
        sym = f"{kind}_{{{idx}}}"
        pieces.append(sym if power == 1 else f"{sym}^{{{power}}}")
    if form:
        pieces.append(f"e^{{{_form_inner(form, latex=True)}}}")
    if not pieces:
        return sign, coeff_body
    if not trivial:
        pieces.insert(0, coeff_body)
    return sign, " ".join(pieces)
