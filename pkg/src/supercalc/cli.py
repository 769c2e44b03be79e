"""Command line front end: expression parsing, JSON output, verify suites.

One invocation works over one ring R^{p|q}, declared as ``--ring p|q``;
the coordinates are then named x1..xp and th1..thq, their fiber letters
dx1../dth1.., and the polyvector letters pdx1../pdth1...  Expressions in
those generators parse to polynomials, differential forms, delta forms,
densities (written ``Ber @ coefficient``) and differential operators
(words in dd_x1../dd_th1..), and every printer emits text the parser
accepts back, so command outputs can be fed to further commands.

Exit codes follow one convention across subcommands: 0 means the
computation succeeded (and, for check-style commands, the identity
holds), 1 means a checked identity was violated, 2 means the input
could not be used (usage, syntax, unknown generator, parity).

The ``verify`` subcommand batches the randomized identity suites; every
suite takes an explicit seed (``--seed`` or the SUPERCALC_SEED
environment variable) so failures replay exactly.
"""

from __future__ import annotations

import json
import random
import re
from fractions import Fraction
from typing import Callable, NamedTuple

import click

from supercalc.algebra import (
    GeneratorTable,
    RationalFunction,
    SuperPoly,
    absorb_even_exponents,
    transport,
)
from supercalc.charts import (
    Chart,
    CoordinateMap,
    cocycle_check,
    compose_maps,
    conic_transition,
)
from supercalc.derham import (
    UniversalElement,
    con3_identity_factor,
    d,
    degree_parts,
    fiber_name,
    form_table,
    homotopy_h,
    pullback_form,
    script_D,
    script_H,
)
from supercalc.diffops import DiffOp
from supercalc.integral_forms import (
    BerSection,
    IntegralForm,
    VectorField,
    _plain_polynomial,
    cohomology_projection,
    homotopy_int,
    lie_derivative_ber,
    pair,
    polyvector_name,
    polyvector_table,
    right_action,
    spencer_delta,
)
from supercalc.integration import (
    PiValue,
    berezin_integral,
    duality_pair_integral,
    lie_derivative_gaussian,
    spencer_delta_gaussian,
    stokes_check,
    susy_algebra_check,
    susy_variation,
)
from supercalc.koszul import KoszulAlgebra
from supercalc.pseudoforms import (
    CWOperator,
    DeltaForm,
    cw_apply,
    fiber_integral,
    from_integral_form,
    gaussian_fiber_integral,
    to_integral_form,
)
from supercalc.randoms import (
    _fraction_det,
    random_invertible_fraction_matrix,
    random_invertible_supermatrix,
    random_nonzero_rational,
    random_rational,
    random_split_map,
    random_superpoly,
)
from supercalc.supermatrix import SuperMatrix, berezinian

JSON_FORMAT = "supercalc.v1"
MATRIX_FORMAT = "supercalc.matrix.v1"


# --- errors ----------------------------------------------------------------


class ExpressionError(click.UsageError):
    """Input text the parser or evaluator cannot use; exits with code 2."""

    def __init__(self, message: str, line: int | None = None,
                 column: int | None = None):
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


# --- tokens ----------------------------------------------------------------

_TOKEN = re.compile(r"[A-Za-z_][A-Za-z_0-9]*|[0-9]+|\*\*|[-+*/^@(),=]|\S")


class Token(NamedTuple):
    kind: str  # "name", "int", a punctuation string, or "end"
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[Token]:
    out: list[Token] = []
    for lineno, line in enumerate(text.splitlines() or [""], start=1):
        for m in _TOKEN.finditer(line):
            piece = m.group()
            col = m.start() + 1
            if piece[0].isdigit():
                out.append(Token("int", piece, lineno, col))
            elif piece[0].isalpha() or piece[0] == "_":
                out.append(Token("name", piece, lineno, col))
            elif piece == "**":
                out.append(Token("^", "^", lineno, col))
            elif piece in "+-*/^@(),=":
                out.append(Token(piece, piece, lineno, col))
            else:
                raise ExpressionError(
                    f"syntax error: unexpected character {piece!r}",
                    lineno, col)
    last = out[-1] if out else None
    out.append(Token("end", "", last.line if last else 1,
                     last.column + len(last.text) if last else 1))
    return out


# --- syntax trees ----------------------------------------------------------
#
# Nodes are plain tuples: ("int", Fraction, tok), ("name", str, tok),
# ("call", fname, [args], tok), ("neg", a), ("add", a, b), ("sub", a, b),
# ("mul", a, b), ("div", a, b, tok), ("pow", a, k, tok), ("at", a, b, tok).

_CALLS = ("del", "gauss", "dirac", "formal")


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> Token:
        return self.tokens[self.i]

    def take(self) -> Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> Token:
        tok = self.take()
        if tok.kind != kind:
            shown = tok.text or "end of input"
            raise ExpressionError(
                f"syntax error: expected {kind!r}, found {shown!r}",
                tok.line, tok.column)
        return tok

    def parse(self):
        node = self.sum()
        if self.peek().kind == "@":
            tok = self.take()
            node = ("at", node, self.sum(), tok)
            if self.peek().kind == "@":
                bad = self.peek()
                raise ExpressionError(
                    "syntax error: a density takes a single '@' separator",
                    bad.line, bad.column)
        tok = self.peek()
        if tok.kind != "end":
            raise ExpressionError(
                f"syntax error: unexpected {tok.text!r}", tok.line, tok.column)
        return node

    def sum(self):
        node = self.product()
        while self.peek().kind in ("+", "-"):
            op = self.take()
            rhs = self.product()
            node = ("add" if op.kind == "+" else "sub", node, rhs)
        return node

    def product(self):
        node = self.power()
        while True:
            tok = self.peek()
            if tok.kind == "*":
                self.take()
                node = ("mul", node, self.power())
            elif tok.kind == "/":
                self.take()
                node = ("div", node, self.power(), tok)
            elif tok.kind in ("name", "int", "("):
                # juxtaposition reads as multiplication, so rendered
                # delta forms like "(x1) dx1 del(dth1)" parse back
                node = ("mul", node, self.power())
            else:
                return node

    def power(self):
        node = self.atom()
        if self.peek().kind == "^":
            tok = self.take()
            exp = self.expect("int")
            node = ("pow", node, int(exp.text), tok)
        return node

    def atom(self):
        tok = self.take()
        if tok.kind == "-":
            return ("neg", self.power())
        if tok.kind == "+":
            return self.power()
        if tok.kind == "(":
            node = self.sum()
            self.expect(")")
            return node
        if tok.kind == "int":
            return ("int", Fraction(tok.text), tok)
        if tok.kind == "name":
            if tok.text in _CALLS:
                self.expect("(")
                args = [self.sum()]
                while self.peek().kind == ",":
                    self.take()
                    args.append(self.sum())
                self.expect(")")
                return ("call", tok.text, args, tok)
            return ("name", tok.text, tok)
        shown = tok.text or "end of input"
        raise ExpressionError(f"syntax error: unexpected {shown!r}",
                              tok.line, tok.column)


# --- the ring --------------------------------------------------------------


class Ring:
    """The single chart of an invocation, with every generator layer.

    Names follow one scheme so the three tables resolve without
    declarations: x1..xp and th1..thq on the base, dx*/dth* on the form
    layer, pdx*/pdth* on the polyvector layer, dd_x*/dd_th* for
    derivative symbols.
    """

    def __init__(self, p: int, q: int):
        self.p = p
        self.q = q
        evens = [f"x{i}" for i in range(1, p + 1)]
        odds = [f"th{a}" for a in range(1, q + 1)]
        self.chart = Chart(evens, odds, label=f"R{p}|{q}")
        self.ftab = form_table(self.chart.table)
        self.ptab = polyvector_table(self.chart)
        self.fiber_names = {fiber_name(n): n for n in evens + odds}
        self.pv_names = {polyvector_name(fiber_name(n)): n
                         for n in evens + odds}

    def describe(self) -> str:
        return f"{self.p}|{self.q}"


def _parse_ring(text: str) -> Ring:
    m = re.fullmatch(r"(\d+)\|(\d+)", text.strip())
    if not m:
        raise click.UsageError(
            f"ring must look like p|q (for example 2|2), got {text!r}")
    return Ring(int(m.group(1)), int(m.group(2)))


# --- evaluated values ------------------------------------------------------

BASE, FORM, PV = "base", "form", "pv"


class Poly(NamedTuple):
    poly: SuperPoly
    layer: str


class Markers(NamedTuple):
    gaussian: frozenset
    dirac: tuple  # sorted (name, Fraction) pairs
    formal: frozenset

    @classmethod
    def none(cls) -> "Markers":
        return cls(frozenset(), (), frozenset())

    def merged(self, other: "Markers") -> "Markers":
        return Markers(self.gaussian | other.gaussian,
                       tuple(sorted(dict(self.dirac + other.dirac).items())),
                       self.formal | other.formal)

    def __bool__(self):
        return bool(self.gaussian or self.dirac or self.formal)


class Marked(NamedTuple):
    value: object
    markers: Markers


class BerPending(NamedTuple):
    """A ``Ber`` factor whose coefficient is still being collected."""
    poly: SuperPoly  # over the polyvector table


_BER = object()


def _table(ring: Ring, layer: str):
    if layer == BASE:
        return ring.chart.table
    return ring.ftab if layer == FORM else ring.ptab


def _lift(ring: Ring, value: Poly, layer: str) -> SuperPoly:
    if value.layer == layer:
        return value.poly
    if value.layer == BASE:
        return transport(value.poly, _table(ring, layer))
    raise ExpressionError(
        "differential letters and polyvector letters cannot mix")


def _join_layers(a: str, b: str) -> str:
    if a == b or b == BASE:
        return a
    if a == BASE:
        return b
    raise ExpressionError(
        "differential letters and polyvector letters cannot mix")


def _as_poly(ring: Ring, value, layer: str) -> SuperPoly:
    if isinstance(value, Fraction):
        return SuperPoly.constant(_table(ring, layer), value)
    if isinstance(value, Poly):
        return _lift(ring, value, layer)
    raise ExpressionError(f"expected a polynomial, got {_kind(value)}")


def _kind(value) -> str:
    if isinstance(value, Fraction):
        return "a number"
    if isinstance(value, Poly):
        return {BASE: "a polynomial", FORM: "a differential form",
                PV: "a polyvector"}[value.layer]
    if isinstance(value, DiffOp):
        return "a differential operator"
    if isinstance(value, DeltaForm):
        return "a delta form"
    if isinstance(value, IntegralForm):
        return "a density"
    if isinstance(value, (BerPending,)) or value is _BER:
        return "a density"
    if isinstance(value, Marked):
        return _kind(value.value)
    return type(value).__name__


# --- evaluation ------------------------------------------------------------


class Evaluator:
    def __init__(self, ring: Ring):
        self.ring = ring

    def run(self, node):
        return self._finish(self.eval(node))

    def _finish(self, value):
        if isinstance(value, Marked):
            return Marked(self._finish(value.value), value.markers)
        if value is _BER:
            return IntegralForm(self.ring.chart, SuperPoly.one(self.ring.ptab))
        if isinstance(value, BerPending):
            return IntegralForm(self.ring.chart, value.poly)
        return value

    def eval(self, node):
        head = node[0]
        if head == "int":
            return node[1]
        if head == "name":
            return self.name(node[1], node[2])
        if head == "neg":
            return self.neg(self.eval(node[1]))
        if head == "add":
            return self.add(self.eval(node[1]), self.eval(node[2]))
        if head == "sub":
            return self.add(self.eval(node[1]), self.neg(self.eval(node[2])))
        if head == "mul":
            return self.product(_flatten_mul(node))
        if head == "div":
            return self.div(self.eval(node[1]), self.eval(node[2]), node[3])
        if head == "pow":
            return self.pow(node[1], node[2], node[3])
        if head == "at":
            return self.at(node[1], node[2], node[3])
        if head == "call":
            return self.call(node)
        raise AssertionError(head)

    def name(self, text: str, tok: Token):
        ring = self.ring
        if text == "Ber":
            return _BER
        if text in ring.chart.coordinate_names:
            return Poly(SuperPoly.generator(ring.chart.table, text), BASE)
        if text in ring.fiber_names:
            return Poly(SuperPoly.generator(ring.ftab, text), FORM)
        if text in ring.pv_names:
            return Poly(SuperPoly.generator(ring.ptab, text), PV)
        if text.startswith("dd_"):
            coord = text[3:]
            if coord in ring.chart.coordinate_names:
                return DiffOp.partial(ring.chart.table, coord)
        raise ExpressionError(f"unknown generator {text!r}",
                              tok.line, tok.column)

    def call(self, node):
        _, fname, args, tok = node
        if fname == "del":
            raise ExpressionError(
                "a delta factor must multiply the rest of its term",
                tok.line, tok.column)
        if fname == "dirac":
            if len(args) != 2:
                raise ExpressionError("dirac takes a coordinate and a point",
                                      tok.line, tok.column)
            name = _marker_name(args[0], tok)
            point = self.eval(args[1])
            if not isinstance(point, Fraction):
                raise ExpressionError("dirac points must be rational numbers",
                                      tok.line, tok.column)
            return Markers(frozenset(), ((name, point),), frozenset())
        names = frozenset(_marker_name(a, tok) for a in args)
        if fname == "gauss":
            return Markers(names, (), frozenset())
        return Markers(frozenset(), (), names)

    def neg(self, value):
        if isinstance(value, Fraction):
            return -value
        if isinstance(value, Poly):
            return Poly(-value.poly, value.layer)
        if isinstance(value, (DiffOp, DeltaForm, IntegralForm)):
            return -value
        if value is _BER:
            return BerPending(SuperPoly.constant(self.ring.ptab, -1))
        if isinstance(value, BerPending):
            return BerPending(-value.poly)
        if isinstance(value, Marked):
            return Marked(self.neg(value.value), value.markers)
        raise ExpressionError(f"cannot negate {_kind(value)}")

    def add(self, a, b):
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            return a + b
        if isinstance(a, DeltaForm) or isinstance(b, DeltaForm):
            return self._delta_sum(a, b)
        if isinstance(a, (IntegralForm, BerPending)) or \
                isinstance(b, (IntegralForm, BerPending)) or \
                a is _BER or b is _BER:
            return self._density_sum(a, b)
        if isinstance(a, DiffOp) or isinstance(b, DiffOp):
            return self._as_op(a) + self._as_op(b)
        if isinstance(a, (Fraction, Poly)) and isinstance(b, (Fraction, Poly)):
            layer = _join_layers(a.layer if isinstance(a, Poly) else BASE,
                                 b.layer if isinstance(b, Poly) else BASE)
            return Poly(_as_poly(self.ring, a, layer)
                        + _as_poly(self.ring, b, layer), layer)
        raise ExpressionError(
            f"cannot add {_kind(a)} and {_kind(b)}")

    def _density_sum(self, a, b):
        out = IntegralForm(self.ring.chart, SuperPoly.zero(self.ring.ptab))
        for v in (a, b):
            v = self._finish(v)
            if isinstance(v, IntegralForm):
                out = out + v
            elif isinstance(v, Fraction) and v == 0:
                continue
            else:
                raise ExpressionError(
                    f"cannot add a density and {_kind(v)}")
        return out

    def _delta_sum(self, a, b):
        out = DeltaForm.zero(self.ring.chart)
        for v in (a, b):
            if isinstance(v, DeltaForm):
                out = out + v
            elif isinstance(v, Fraction) and v == 0:
                continue
            else:
                raise ExpressionError(
                    f"cannot add a delta form and {_kind(v)}")
        return out

    def _as_op(self, value) -> DiffOp:
        if isinstance(value, DiffOp):
            return value
        if isinstance(value, (Fraction, Poly)):
            return DiffOp.multiplication(_as_poly(self.ring, value, BASE))
        raise ExpressionError(
            f"cannot use {_kind(value)} in an operator expression")

    def product(self, factors: list):
        if any(_is_delta_letter(f) for f in factors):
            return self._delta_term(factors)
        value = self.eval(factors[0])
        for node in factors[1:]:
            value = self.mul(value, self.eval(node))
        return value

    def mul(self, a, b):
        ring = self.ring
        if isinstance(b, Markers):
            if isinstance(a, Markers):
                return a.merged(b)
            if isinstance(a, Marked):
                return Marked(a.value, a.markers.merged(b))
            return Marked(a, b)
        if isinstance(a, Markers):
            raise ExpressionError(
                "marker tags (gauss, dirac, formal) go after the expression")
        if isinstance(a, Marked) or isinstance(b, Marked):
            raise ExpressionError(
                "marker tags must close the expression they weight")
        if a is _BER:
            return self.mul(BerPending(SuperPoly.one(ring.ptab)), b)
        if b is _BER:
            if isinstance(a, Fraction):
                return BerPending(SuperPoly.constant(ring.ptab, a))
            raise ExpressionError(
                "write densities with Ber leftmost: Ber * coefficient")
        if isinstance(a, BerPending):
            return BerPending(a.poly * _as_poly(ring, b, PV))
        if isinstance(b, BerPending):
            if isinstance(a, Fraction):
                return BerPending(b.poly.scale(a))
            raise ExpressionError(
                "write densities with Ber leftmost: Ber * coefficient")
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            return a * b
        if isinstance(a, Fraction):
            return self._scale(b, a)
        if isinstance(b, Fraction):
            return self._scale_right(a, b)
        if isinstance(a, DiffOp) or isinstance(b, DiffOp):
            if isinstance(a, DiffOp) and isinstance(b, DiffOp):
                return a.compose(b)
            if isinstance(a, Poly):
                return self._as_op(b).left_multiply(
                    _as_poly(ring, a, BASE))
            return a.compose(self._as_op(b))
        if isinstance(a, DeltaForm) and isinstance(b, DeltaForm):
            raise ExpressionError(
                "the product of two full delta forms vanishes identically; "
                "build one term with all its delta factors instead")
        if isinstance(a, DeltaForm):
            return _delta_times_poly(a, _as_poly(ring, b, BASE))
        if isinstance(b, DeltaForm):
            if isinstance(a, Poly) and a.layer == FORM:
                return _form_times_delta(ring, a.poly, b)
            return b.times(_as_poly(ring, a, BASE))
        if isinstance(a, Poly) and isinstance(b, Poly):
            layer = _join_layers(a.layer, b.layer)
            return Poly(_lift(ring, a, layer) * _lift(ring, b, layer), layer)
        raise ExpressionError(f"cannot multiply {_kind(a)} and {_kind(b)}")

    def _scale(self, value, c: Fraction):
        if isinstance(value, Poly):
            return Poly(value.poly.scale(c), value.layer)
        if isinstance(value, (DiffOp, DeltaForm)):
            return value.scale(c)
        if value is _BER:
            return BerPending(SuperPoly.constant(self.ring.ptab, c))
        if isinstance(value, BerPending):
            return BerPending(value.poly.scale(c))
        raise ExpressionError(f"cannot scale {_kind(value)}")

    def _scale_right(self, value, c: Fraction):
        if isinstance(value, BerPending):
            return BerPending(value.poly.scale(c))
        return self._scale(value, c)

    def div(self, a, b, tok: Token):
        if isinstance(b, Fraction):
            if b == 0:
                raise ExpressionError("division by zero",
                                      tok.line, tok.column)
            return self.mul(a, 1 / b)
        if isinstance(b, Poly):
            layer = b.layer
            try:
                inv = absorb_even_exponents(b.poly).inverse()
            except (ValueError, ZeroDivisionError) as exc:
                raise ExpressionError(f"cannot divide: {exc}",
                                      tok.line, tok.column)
            return self.mul(a, Poly(inv, layer))
        raise ExpressionError(f"cannot divide by {_kind(b)}",
                              tok.line, tok.column)

    def pow(self, base_node, k: int, tok: Token):
        if _is_delta_letter(base_node):
            raise ExpressionError(
                "raise delta factors inside their own term",
                tok.line, tok.column)
        value = self.eval(base_node)
        if k == 0:
            return Fraction(1)
        if isinstance(value, Fraction):
            return value ** k
        if isinstance(value, Poly):
            return Poly(value.poly ** k, value.layer)
        if isinstance(value, DiffOp):
            out = value
            for _ in range(k - 1):
                out = out.compose(value)
            return out
        raise ExpressionError(f"cannot raise {_kind(value)} to a power",
                              tok.line, tok.column)

    def at(self, lhs_node, rhs_node, tok: Token):
        lhs = self.eval(lhs_node)
        if lhs is _BER:
            lhs = BerPending(SuperPoly.one(self.ring.ptab))
        if not isinstance(lhs, BerPending):
            raise ExpressionError(
                "'@' attaches a coefficient to Ber; the left side must be "
                "Ber or Ber * f", tok.line, tok.column)
        rhs = self.eval(rhs_node)
        markers = Markers.none()
        if isinstance(rhs, Marked):
            rhs, markers = rhs.value, rhs.markers
        poly = lhs.poly * _as_poly(self.ring, rhs, PV)
        form = IntegralForm(self.ring.chart, poly)
        return Marked(form, markers) if markers else form

    # -- delta terms --------------------------------------------------------

    def _delta_term(self, factors: list):
        """One product containing delta factors, in the written order.

        Polynomial factors collect in front of the fiber letters; the
        odd part of each one picks up a sign for every odd letter it
        crosses on the way.  The letters themselves go to the term
        constructor, which normalizes their order.
        """
        ring = self.ring
        letters: list = []
        coefficient = SuperPoly.one(ring.chart.table)
        for node in factors:
            letter = self._delta_letter(node)
            if letter is _ZERO_LETTER:
                return DeltaForm.zero(ring.chart)
            if letter is not None:
                letters.append(letter)
                continue
            value = self.eval(node)
            if isinstance(value, Poly) and value.layer == FORM:
                name = _single_fiber_letter(ring, value.poly)
                if name is not None:
                    letters.append(name)
                    continue
            poly = _as_poly(ring, value, BASE)
            even, odd = poly.homogeneous_parts()
            if len(letters) % 2:
                poly = even - odd
            coefficient = coefficient * poly
        try:
            return DeltaForm.from_factors(ring.chart, coefficient, letters)
        except ValueError as exc:
            raise ExpressionError(str(exc))

    def _delta_letter(self, node):
        """A del(...) factor or a power of one, else None."""
        if node[0] == "pow":
            inner = self._delta_letter(node[1])
            if inner is None:
                return None
            k = node[2]
            if k == 0:
                raise ExpressionError(
                    "a delta factor to the power zero drops its slot; "
                    "remove it or give every odd fiber direction a factor",
                    node[3].line, node[3].column)
            return inner if k == 1 else _ZERO_LETTER
        if node[0] != "call" or node[1] != "del":
            return None
        _, _, args, tok = node
        if not 1 <= len(args) <= 2:
            raise ExpressionError("del takes a fiber letter and an "
                                  "optional order", tok.line, tok.column)
        name = _marker_name(args[0], tok)
        if name not in self.ring.fiber_names or \
                self.ring.fiber_names[name] not in self.ring.chart.odd_names:
            raise ExpressionError(
                f"del expects an odd fiber letter such as dth1, got {name!r}",
                tok.line, tok.column)
        order = 0
        if len(args) == 2:
            val = self.eval(args[1])
            if not isinstance(val, Fraction) or val.denominator != 1 or val < 0:
                raise ExpressionError("delta orders are nonnegative integers",
                                      tok.line, tok.column)
            order = int(val)
        return (name, order)


_ZERO_LETTER = object()


def _flatten_mul(node) -> list:
    out = []
    stack = [node]
    while stack:
        n = stack.pop()
        if n[0] == "mul":
            stack.append(n[2])
            stack.append(n[1])
        else:
            out.append(n)
    return out


def _is_delta_letter(node) -> bool:
    if node[0] == "pow":
        return _is_delta_letter(node[1])
    return node[0] == "call" and node[1] == "del"


def _marker_name(node, tok: Token) -> str:
    if node[0] != "name":
        raise ExpressionError("expected a coordinate or fiber letter here",
                              tok.line, tok.column)
    return node[1]


def _single_fiber_letter(ring: Ring, poly: SuperPoly) -> str | None:
    """The fiber name when the form poly is exactly one odd fiber letter."""
    if len(poly.terms) != 1:
        return None
    ((ev, od), c), = poly.terms.items()
    if c != 1 or any(ev) or len(od) != 1:
        return None
    name = ring.ftab.names[od[0]]
    base = ring.fiber_names.get(name)
    if base in ring.chart.even_names:
        return name
    return None


def _delta_times_poly(form: DeltaForm, f: SuperPoly) -> DeltaForm:
    """Right multiplication, moving f left through each term's letters."""
    even, odd = f.homogeneous_parts()
    out = DeltaForm.zero(form.chart)
    q = form.chart.q
    for (eps, ells), c in form.terms.items():
        odd_letters = sum(eps) + q
        shifted = even + (odd.scale(-1) if odd_letters % 2 else odd)
        out = out + DeltaForm(form.chart, {(eps, ells): c * shifted})
    return out


def _form_times_delta(ring: Ring, fpoly: SuperPoly,
                      form: DeltaForm) -> DeltaForm:
    """Left multiplication of a delta form by a differential form.

    Each monomial of the form splits into a base coefficient and a
    fiber word; the word acts through the letter calculus and the
    coefficient multiplies from the left.  Base odd factors sitting to
    the right of dx letters in the canonical word cross back out with
    the usual sign.
    """
    chart = ring.chart
    base_even = {ring.ftab.index(n) for n in chart.even_names}
    out = DeltaForm.zero(chart)
    for (ev, od), c in fpoly.terms.items():
        if isinstance(c, RationalFunction):
            raise ExpressionError(
                "delta forms carry polynomial coefficients only")
        sign = 1
        base_powers: dict[str, int] = {}
        dth_letters: list[str] = []
        dx_letters: list[str] = []
        for slot, k in enumerate(ev):
            if not k:
                continue
            pos = ring.ftab.even_positions[slot]
            name = ring.ftab.names[pos]
            if pos in base_even:
                base_powers[name] = k
            else:
                dth_letters.extend([name] * k)
        base_odds: list[str] = []
        for pos in od:
            name = ring.ftab.names[pos]
            if name in ring.fiber_names:
                dx_letters.append(name)
            else:
                if len(dx_letters) % 2:
                    sign = -sign
                base_odds.append(name)
        for name in base_odds:
            base_powers[name] = 1
        coeff = SuperPoly.from_monomial(chart.table, base_powers,
                                        Fraction(c) * sign)
        piece = cw_apply(dth_letters + dx_letters, form).times(coeff)
        out = out + piece
    return out


# --- coercions for command arguments ---------------------------------------


def parse_value(text: str, ring: Ring):
    """Parse one expression; the value plus any marker tags it carried."""
    node = _Parser(text).parse()
    value = Evaluator(ring).run(node)
    if isinstance(value, Marked):
        return value.value, value.markers
    if isinstance(value, Markers):
        raise ExpressionError("marker tags need an expression to weight")
    return value, Markers.none()


def _want_form(ring: Ring, value) -> SuperPoly:
    if isinstance(value, (Fraction, Poly)):
        return _as_poly(ring, value, FORM)
    raise ExpressionError(f"expected a differential form, got {_kind(value)}")


def _want_density(ring: Ring, value) -> IntegralForm:
    if isinstance(value, IntegralForm):
        return value
    raise ExpressionError(
        f"expected a density (written Ber @ coefficient), got {_kind(value)}")


def _want_section(ring: Ring, value) -> BerSection:
    u = _want_density(ring, value)
    try:
        return u.as_section()
    except ValueError as exc:
        raise ExpressionError(str(exc))


def _want_delta(ring: Ring, value) -> DeltaForm:
    if isinstance(value, DeltaForm):
        return value
    if isinstance(value, Fraction) and value == 0:
        return DeltaForm.zero(ring.chart)
    if ring.q == 0 and isinstance(value, (Fraction, Poly)):
        vacuum = DeltaForm(ring.chart,
                           {((0,) * ring.p, ()): SuperPoly.one(ring.chart.table)})
        return _form_times_delta(ring, _as_poly(ring, value, FORM), vacuum)
    raise ExpressionError(
        "expected a delta form with one del(...) factor per odd fiber "
        f"direction, got {_kind(value)}")


def _marker_kwargs(markers: Markers) -> dict:
    return {"gaussian": sorted(markers.gaussian),
            "dirac": dict(markers.dirac),
            "formal": sorted(markers.formal)}


# --- printers --------------------------------------------------------------


def render(value) -> str:
    if isinstance(value, Poly):
        return str(value.poly)
    if isinstance(value, Marked):
        inner = render(value.value)
        tags = []
        if value.markers.gaussian:
            tags.append("gauss(" + ",".join(sorted(value.markers.gaussian)) + ")")
        for name, point in value.markers.dirac:
            tags.append(f"dirac({name},{point})")
        if value.markers.formal:
            tags.append("formal(" + ",".join(sorted(value.markers.formal)) + ")")
        return " ".join([inner] + tags)
    return str(value)


# --- files -----------------------------------------------------------------


def _read_text(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise click.UsageError(str(exc))


def read_expression_file(path: str, ring: Ring):
    """An expression file: comment lines start with '#', the rest is
    one expression (line breaks allowed)."""
    lines = [line for line in _read_text(path).splitlines()
             if line.strip() and not line.lstrip().startswith("#")]
    if not lines:
        raise click.UsageError(f"{path}: no expression found")
    return parse_value(" ".join(lines), ring)


def read_map_file(path: str, ring: Ring) -> CoordinateMap:
    """A coordinate change written one line per coordinate: name = expr."""
    images: dict[str, SuperPoly] = {}
    for lineno, raw in enumerate(_read_text(path).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, eq, rhs = line.partition("=")
        name = name.strip()
        if not eq or name not in ring.chart.coordinate_names:
            raise ExpressionError(
                f"{path}: expected 'coordinate = expression', got {line!r}",
                lineno, 1)
        value, markers = parse_value(rhs, ring)
        if markers:
            raise ExpressionError(f"{path}: marker tags do not belong in a "
                                  "coordinate change", lineno, 1)
        images[name] = _as_poly(ring, value, BASE)
    missing = [n for n in ring.chart.coordinate_names if n not in images]
    if missing:
        raise click.UsageError(
            f"{path}: no image given for {', '.join(missing)}")
    try:
        return CoordinateMap(ring.chart, ring.chart, images)
    except ValueError as exc:
        raise click.UsageError(f"{path}: {exc}")


def format_map(m: CoordinateMap) -> str:
    return "\n".join(f"{name} = {m.images[name]}"
                     for name in m.target.coordinate_names)


def read_matrix_file(path: str, ring: Ring) -> SuperMatrix:
    try:
        data = json.loads(_read_text(path))
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"{path}: {exc}")
    for key in ("p", "q", "rows"):
        if key not in data:
            raise click.UsageError(f"{path}: missing field {key!r}")
    p, q = int(data["p"]), int(data["q"])
    rows_text = data["rows"]
    if len(rows_text) != p + q or any(len(r) != p + q for r in rows_text):
        raise click.UsageError(
            f"{path}: rows must form a square of side p+q = {p + q}")
    rows = []
    for r in rows_text:
        row = []
        for entry in r:
            value, markers = parse_value(str(entry), ring)
            if markers:
                raise click.UsageError(
                    f"{path}: marker tags do not belong in a matrix")
            row.append(_as_poly(ring, value, BASE))
        rows.append(row)
    try:
        return SuperMatrix.from_rows(ring.chart.table, p, q, rows)
    except ValueError as exc:
        raise click.UsageError(f"{path}: {exc}")


def matrix_json(m: SuperMatrix) -> dict:
    return {"format": MATRIX_FORMAT, "p": m.p, "q": m.q,
            "rows": [[str(e) for e in row] for row in m.rows()]}


# --- command plumbing ------------------------------------------------------


def _emit(json_mode: bool, command: str, text: str, ring: Ring | None = None,
          **extra):
    if not json_mode:
        click.echo(text)
        return
    payload = {"format": JSON_FORMAT, "command": command, "result": text}
    if ring is not None:
        payload["ring"] = ring.describe()
    payload.update(extra)
    click.echo(json.dumps(payload, sort_keys=True))


def _ring_option(f):
    return click.option("--ring", "ring_text", default="2|2",
                        show_default=True, metavar="P|Q",
                        help="coordinates x1..xP (even) and th1..thQ (odd)")(f)


def _json_option(f):
    return click.option("--json", "json_mode", is_flag=True,
                        help="emit a versioned JSON envelope")(f)


def _seed_option(f):
    return click.option("--seed", type=int, default=None,
                        envvar="SUPERCALC_SEED", metavar="N",
                        help="seed for the randomized checks "
                             "(default: SUPERCALC_SEED or 0)")(f)


def _markers_options(f):
    f = click.option("--gaussian", multiple=True, metavar="NAME",
                     help="coordinate carrying the Gaussian weight")(f)
    f = click.option("--dirac", multiple=True, metavar="NAME=POINT",
                     help="coordinate pinned at a rational point")(f)
    f = click.option("--formal", multiple=True, metavar="NAME",
                     help="coordinate left uninterpreted")(f)
    return f


def _collect_markers(markers: Markers, gaussian, dirac, formal) -> Markers:
    pins = []
    for item in dirac:
        name, eq, point = item.partition("=")
        if not eq:
            raise click.UsageError(f"--dirac expects NAME=POINT, got {item!r}")
        try:
            pins.append((name.strip(), Fraction(point.strip())))
        except (ValueError, ZeroDivisionError):
            raise click.UsageError(f"--dirac point must be rational: {item!r}")
    flagged = Markers(frozenset(gaussian), tuple(sorted(pins)),
                      frozenset(formal))
    return markers.merged(flagged)


@click.group()
def main():
    """Exact calculator for superspace forms, densities and delta forms."""


@main.command("d")
@click.argument("expression")
@_ring_option
@_json_option
def cmd_d(expression, ring_text, json_mode):
    """Exterior differential of a form."""
    ring = _parse_ring(ring_text)
    value, markers = parse_value(expression, ring)
    if markers:
        raise click.UsageError("the differential takes no marker tags")
    out = d(_want_form(ring, value))
    _emit(json_mode, "d", str(out), ring)


@main.command("homotopy")
@click.argument("expression")
@click.option("--degree", type=int, default=None,
              help="insist on this fiber degree for forms")
@_ring_option
@_json_option
def cmd_homotopy(expression, degree, ring_text, json_mode):
    """Contracting homotopy: forms (fiber degree >= 1) or densities."""
    ring = _parse_ring(ring_text)
    value, markers = parse_value(expression, ring)
    if markers:
        raise click.UsageError("the homotopy takes no marker tags")
    if isinstance(value, IntegralForm):
        out = homotopy_int(value)
    else:
        try:
            out = homotopy_h(_want_form(ring, value), degree)
        except ValueError as exc:
            raise click.UsageError(str(exc))
    _emit(json_mode, "homotopy", str(out), ring)


@main.command("spencer-delta")
@click.argument("expression")
@_markers_options
@_ring_option
@_json_option
def cmd_spencer_delta(expression, gaussian, dirac, formal, ring_text,
                      json_mode):
    """Differential of a density; Gaussian weights ride along."""
    ring = _parse_ring(ring_text)
    value, markers = parse_value(expression, ring)
    markers = _collect_markers(markers, gaussian, dirac, formal)
    u = _want_density(ring, value)
    try:
        if markers.gaussian:
            out = spencer_delta_gaussian(u, markers.gaussian)
        else:
            out = spencer_delta(u)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(json_mode, "spencer-delta", str(out), ring)


@main.command("lie-ber")
@click.argument("density")
@click.argument("field")
@_markers_options
@_ring_option
@_json_option
def cmd_lie_ber(density, field, gaussian, dirac, formal, ring_text,
                json_mode):
    """Lie derivative of a density along a vector field.

    FIELD lists components as 'name = expr' separated by semicolons,
    for example 'x1 = th1; th1 = 1'.
    """
    ring = _parse_ring(ring_text)
    value, markers = parse_value(density, ring)
    markers = _collect_markers(markers, gaussian, dirac, formal)
    section = _want_section(ring, value)
    comps = {}
    for piece in field.split(";"):
        if not piece.strip():
            continue
        name, eq, rhs = piece.partition("=")
        name = name.strip()
        if not eq or name not in ring.chart.coordinate_names:
            raise click.UsageError(
                f"field components read 'name = expr', got {piece.strip()!r}")
        v, extra = parse_value(rhs, ring)
        if extra:
            raise click.UsageError("field components take no marker tags")
        comps[name] = _as_poly(ring, v, BASE)
    try:
        x = VectorField(ring.chart, comps)
        if markers.gaussian:
            out = lie_derivative_gaussian(section, x, markers.gaussian)
        else:
            out = lie_derivative_ber(section, x)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(json_mode, "lie-ber", str(out), ring)


@main.command("pair")
@click.argument("density")
@click.argument("form")
@_ring_option
@_json_option
def cmd_pair(density, form, ring_text, json_mode):
    """Contract a density's polyvector letters against a form."""
    ring = _parse_ring(ring_text)
    u, m1 = parse_value(density, ring)
    omega, m2 = parse_value(form, ring)
    if m1 or m2:
        raise click.UsageError("the pairing takes no marker tags; "
                               "use pd-pair to integrate")
    out = pair(_want_density(ring, u), _want_form(ring, omega))
    _emit(json_mode, "pair", str(out), ring)


@main.command("ber-matrix")
@click.argument("matrix_file", type=click.Path(exists=True, dir_okay=False))
@_ring_option
@_json_option
def cmd_ber_matrix(matrix_file, ring_text, json_mode):
    """Berezinian of a supermatrix given as a JSON file."""
    ring = _parse_ring(ring_text)
    m = read_matrix_file(matrix_file, ring)
    try:
        out = berezinian(m)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.UsageError(str(exc))
    _emit(json_mode, "ber-matrix", str(out), ring)


@main.command("jacobian")
@click.argument("map_file", type=click.Path(exists=True, dir_okay=False))
@_ring_option
@_json_option
def cmd_jacobian(map_file, ring_text, json_mode):
    """Jacobian supermatrix of a coordinate change."""
    ring = _parse_ring(ring_text)
    m = read_map_file(map_file, ring)
    data = matrix_json(m.jacobian())
    if json_mode:
        click.echo(json.dumps({"format": JSON_FORMAT, "command": "jacobian",
                               "ring": ring.describe(), "result": data},
                              sort_keys=True))
    else:
        click.echo(json.dumps(data, indent=2, sort_keys=True))


@main.command("ber-jacobian")
@click.argument("map_file", type=click.Path(exists=True, dir_okay=False))
@_ring_option
@_json_option
def cmd_ber_jacobian(map_file, ring_text, json_mode):
    """Berezinian of the Jacobian of a coordinate change."""
    ring = _parse_ring(ring_text)
    m = read_map_file(map_file, ring)
    try:
        out = m.ber_jacobian()
    except (ValueError, ZeroDivisionError) as exc:
        raise click.UsageError(str(exc))
    _emit(json_mode, "ber-jacobian", str(out), ring)


@main.command("cocycle")
@click.argument("map_file_1", type=click.Path(exists=True, dir_okay=False))
@click.argument("map_file_2", type=click.Path(exists=True, dir_okay=False))
@_ring_option
@_json_option
@click.pass_context
def cmd_cocycle(ctx, map_file_1, map_file_2, ring_text, json_mode):
    """Check the chain rule for Berezinians of two coordinate changes."""
    ring = _parse_ring(ring_text)
    m1 = read_map_file(map_file_1, ring)
    m2 = read_map_file(map_file_2, ring)
    try:
        ok = cocycle_check(m1, m2)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.UsageError(str(exc))
    _emit(json_mode, "cocycle", "cocycle holds" if ok else "cocycle violated",
          ring, passed=ok)
    if not ok:
        ctx.exit(1)


@main.command("koszul")
@click.option("--p", "p", type=int, required=True)
@click.option("--q", "q", type=int, required=True)
@click.option("--which", type=click.Choice(["koszul", "dual"]),
              default="koszul", show_default=True)
@click.option("--degree", type=int, default=None,
              help="one homological degree (default: a small scan)")
@click.option("--cutoff", type=int, default=6, show_default=True,
              help="module-side degree bound for the exact ranks")
@_json_option
def cmd_koszul(p, q, which, degree, cutoff, json_mode):
    """Exact homology ranks of the free Koszul complex or its dual."""
    algebra = KoszulAlgebra(p, q)
    if degree is not None:
        degrees = [degree]
    elif which == "koszul":
        degrees = [0, -1, -2, -3, -4]
    else:
        degrees = list(range(0, p + 2))
    rows = []
    for deg in degrees:
        try:
            ranks = algebra.homology_ranks(which, deg, cutoff)
        except ValueError as exc:
            raise click.UsageError(str(exc))
        rows.append({"degree": deg, "kernel": ranks.kernel_dim,
                     "image": ranks.image_dim,
                     "homology": ranks.homology_dim})
    if json_mode:
        click.echo(json.dumps({"format": JSON_FORMAT, "command": "koszul",
                               "p": p, "q": q, "which": which,
                               "cutoff": cutoff, "result": rows},
                              sort_keys=True))
    else:
        for row in rows:
            click.echo(f"degree {row['degree']}: kernel {row['kernel']} "
                       f"image {row['image']} homology {row['homology']}")


@main.command("con3-check")
@click.option("--trials", type=int, default=25, show_default=True)
@_seed_option
@_ring_option
@_json_option
@click.pass_context
def cmd_con3_check(ctx, trials, seed, ring_text, json_mode):
    """Operator homotopy identity on random monomials, factor included."""
    ring = _parse_ring(ring_text)
    rng = random.Random(seed or 0)
    failures = 0
    for _ in range(trials):
        u = _random_universal_monomial(rng, ring.chart, ring.ftab)
        if u.is_zero():
            continue
        factor = con3_identity_factor(u)
        total = script_H(script_D(u)) + script_D(script_H(u))
        if total != u.scale(factor):
            failures += 1
    ok = failures == 0
    _emit(json_mode, "con3-check",
          f"{trials} monomials checked, {failures} violations", ring,
          passed=ok, trials=trials, failures=failures)
    if not ok:
        ctx.exit(1)


@main.command("berezin-int")
@click.argument("expression")
@_markers_options
@_ring_option
@_json_option
def cmd_berezin_int(expression, gaussian, dirac, formal, ring_text,
                    json_mode):
    """Berezin integral of a top-degree density."""
    ring = _parse_ring(ring_text)
    value, markers = parse_value(expression, ring)
    markers = _collect_markers(markers, gaussian, dirac, formal)
    section = _want_section(ring, value)
    try:
        out = berezin_integral(section, **_marker_kwargs(markers))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(json_mode, "berezin-int", str(out), ring)


@main.command("stokes")
@click.argument("expression")
@click.option("--gaussian", multiple=True, metavar="NAME",
              help="Gaussian-weighted coordinates (default: all evens)")
@_ring_option
@_json_option
@click.pass_context
def cmd_stokes(ctx, expression, gaussian, ring_text, json_mode):
    """Integrate the differential of a degree p-1 density; expect zero."""
    ring = _parse_ring(ring_text)
    value, markers = parse_value(expression, ring)
    weights = set(markers.gaussian) | set(gaussian)
    u = _want_density(ring, value)
    try:
        value_out, vanished = stokes_check(u, weights or None)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(json_mode, "stokes", str(value_out), ring, passed=vanished)
    if not vanished:
        ctx.exit(1)


@main.command("pd-pair")
@click.argument("density_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("form_file", type=click.Path(exists=True, dir_okay=False))
@_markers_options
@_ring_option
@_json_option
def cmd_pd_pair(density_file, form_file, gaussian, dirac, formal, ring_text,
                json_mode):
    """Pair a density against a form and integrate the result."""
    ring = _parse_ring(ring_text)
    sigma, m1 = read_expression_file(density_file, ring)
    eta, m2 = read_expression_file(form_file, ring)
    markers = _collect_markers(m1.merged(m2), gaussian, dirac, formal)
    kwargs = _marker_kwargs(markers)
    if kwargs.pop("formal"):
        raise click.UsageError("formal coordinates cannot be integrated")
    try:
        out = duality_pair_integral(_want_density(ring, sigma),
                                    _want_form(ring, eta), **kwargs)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(json_mode, "pd-pair", str(out), ring)


@main.command("susy-check")
@click.option("--gamma", required=True,
              help="structure constants as JSON: a number for 1|1, a q by q "
                   "matrix for one even direction, or a list of p matrices")
@click.option("--trials", type=int, default=10, show_default=True,
              help="random Lagrangians for the invariance check")
@_seed_option
@_ring_option
@_json_option
@click.pass_context
def cmd_susy_check(ctx, gamma, trials, seed, ring_text, json_mode):
    """Check the supersymmetry bracket and action invariance."""
    ring = _parse_ring(ring_text)
    tensor = _parse_gamma(gamma, ring.p, ring.q)
    rng = random.Random(seed or 0)
    try:
        bracket_ok = susy_algebra_check(ring.chart, tensor)
        failures = 0
        for _ in range(trials):
            lagrangian = BerSection(
                ring.chart, random_superpoly(rng, ring.chart.table,
                                             terms=3, max_exp=2))
            for a in range(ring.q):
                if not susy_variation(lagrangian, tensor, a).is_zero():
                    failures += 1
    except ValueError as exc:
        raise click.UsageError(str(exc))
    ok = bracket_ok and failures == 0
    text = (f"bracket {'holds' if bracket_ok else 'violated'}; "
            f"{trials} Lagrangians, {failures} non-invariant variations")
    _emit(json_mode, "susy-check", text, ring, passed=ok,
          bracket=bracket_ok, failures=failures)
    if not ok:
        ctx.exit(1)


def _parse_gamma(text: str, p: int, q: int):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise click.UsageError(f"--gamma is not valid JSON: {exc}")

    def depth(x):
        return 1 + depth(x[0]) if isinstance(x, list) and x else 0

    if depth(data) == 0:
        data = [[[data]]]
    elif depth(data) == 2:
        data = [data]
    if depth(data) != 3:
        raise click.UsageError("--gamma must be a number, a matrix, or a "
                               "list of matrices")
    return data


@main.command("cw-apply")
@click.argument("word")
@click.argument("expression")
@_ring_option
@_json_option
def cmd_cw_apply(word, expression, ring_text, json_mode):
    """Apply a word of fiber letters (dx1, dd_dth1, ...) to a delta form."""
    ring = _parse_ring(ring_text)
    value, markers = parse_value(expression, ring)
    if markers:
        raise click.UsageError("letter words take no marker tags")
    form = _want_delta(ring, value)
    try:
        out = cw_apply(CWOperator(word), form)
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(json_mode, "cw-apply", str(out), ring)


@main.command("pseudo-transform")
@click.argument("map_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("expression")
@_ring_option
@_json_option
def cmd_pseudo_transform(map_file, expression, ring_text, json_mode):
    """Pull a delta form through a coordinate change."""
    ring = _parse_ring(ring_text)
    m = read_map_file(map_file, ring)
    value, markers = parse_value(expression, ring)
    if markers:
        raise click.UsageError("the transform takes no marker tags")
    form = _want_delta(ring, value)
    try:
        out = form.transform(m)
    except (ValueError, ZeroDivisionError) as exc:
        raise click.UsageError(str(exc))
    _emit(json_mode, "pseudo-transform", str(out), ring)


@main.command("fiber-int")
@click.argument("expression")
@click.option("--gaussian", multiple=True, metavar="NAME",
              help="even fiber letter carrying a Gaussian weight")
@_ring_option
@_json_option
def cmd_fiber_int(expression, gaussian, ring_text, json_mode):
    """Integrate out the fiber directions of a delta form.

    With --gaussian weights the input is instead a polynomial form in
    the fiber letters and the weighted moments are used.
    """
    ring = _parse_ring(ring_text)
    value, markers = parse_value(expression, ring)
    weights = set(markers.gaussian) | set(gaussian)
    try:
        if weights:
            if isinstance(value, DeltaForm):
                raise click.UsageError(
                    "Gaussian fiber weights apply to polynomial fiber "
                    "dependence; delta forms integrate without them")
            weight, section = gaussian_fiber_integral(
                ring.chart, _want_form(ring, value), sorted(weights))
            text = f"{weight} * ({section})"
            _emit(json_mode, "fiber-int", text, ring,
                  weight=str(weight), section=str(section))
            return
        out = fiber_integral(_want_delta(ring, value))
    except ValueError as exc:
        raise click.UsageError(str(exc))
    _emit(json_mode, "fiber-int", str(out), ring)


# --- verify ----------------------------------------------------------------


class CheckResult(NamedTuple):
    label: str
    ok: bool
    detail: str = ""


class SuiteSpec(NamedTuple):
    run: Callable  # (rng, trials, p, q) -> list[CheckResult]
    trials: int
    summary: str


def _ring_chart(p: int, q: int) -> Chart:
    return Ring(p, q).chart


def _random_form(rng: random.Random, ftab: GeneratorTable,
                 terms: int = 3) -> SuperPoly:
    return random_superpoly(rng, ftab, terms=terms, max_exp=2)


def _random_universal_monomial(rng: random.Random, chart: Chart,
                               ftab: GeneratorTable) -> UniversalElement:
    fiber = []
    for name in chart.even_names:
        if rng.random() < 0.4:
            fiber.append(fiber_name(name))
    for name in chart.odd_names:
        fiber.extend([fiber_name(name)] * rng.choice((0, 0, 1, 2)))
    deriv = []
    for name in chart.even_names:
        deriv.extend([name] * rng.choice((0, 0, 1, 2)))
    for name in chart.odd_names:
        if rng.random() < 0.4:
            deriv.append(name)
    f = transport(random_superpoly(rng, chart.table, terms=2, max_exp=1), ftab)
    return UniversalElement.monomial(ftab, fiber, deriv, f)


def _count(label: str, total: int, bad: int) -> CheckResult:
    return CheckResult(label, bad == 0, f"{bad} of {total} failed" if bad
                       else f"{total} checked")


def _suite_nilpotency(rng, trials, p, q):
    chart = _ring_chart(p, q)
    ftab = form_table(chart.table)
    ptab = polyvector_table(chart)
    checks = []

    bad = sum(1 for _ in range(trials)
              if not d(d(_random_form(rng, ftab))).is_zero())
    checks.append(_count("exterior differential squares to zero",
                         trials, bad))

    bad = 0
    for _ in range(trials):
        u = IntegralForm(chart, random_superpoly(rng, ptab, terms=3,
                                                 max_exp=2))
        if not spencer_delta(spencer_delta(u)).is_zero():
            bad += 1
    checks.append(_count("density differential squares to zero",
                         trials, bad))

    bad = 0
    for _ in range(trials):
        u = _random_universal_monomial(rng, chart, ftab)
        if not script_D(script_D(u)).is_zero():
            bad += 1
    checks.append(_count("operator-complex differential squares to zero",
                         trials, bad))

    algebra = KoszulAlgebra(p, q)
    bad = sum(1 for _ in range(trials) if not algebra.koszul_delta(
        algebra.koszul_delta(random_superpoly(
            rng, algebra.table, terms=3, max_exp=2))).is_zero())
    checks.append(_count("koszul differential squares to zero", trials, bad))

    bad = sum(1 for _ in range(trials) if not algebra.dual_delta(
        algebra.dual_delta(random_superpoly(
            rng, algebra.dual_table, terms=3, max_exp=2))).is_zero())
    checks.append(_count("dual koszul differential squares to zero",
                         trials, bad))
    return checks


def _suite_berezinian(rng, trials, p, q):
    table = GeneratorTable.chart([], ["e1", "e2", "e3", "e4"])
    checks = []
    for shape in ((1, 1), (2, 1), (2, 2)):
        bad = 0
        for _ in range(trials):
            m = random_invertible_supermatrix(rng, table, *shape)
            n = random_invertible_supermatrix(rng, table, *shape)
            if berezinian(m * n) != berezinian(m) * berezinian(n):
                bad += 1
        checks.append(_count(
            f"multiplicative on shape {shape[0]}|{shape[1]}", trials, bad))

    bad = 0
    for _ in range(10):
        n = rng.choice((1, 2))
        a_rows = random_invertible_fraction_matrix(rng, n)
        d_rows = random_invertible_fraction_matrix(rng, n)
        A = [[SuperPoly.constant(table, e) for e in r] for r in a_rows]
        D = [[SuperPoly.constant(table, e) for e in r] for r in d_rows]
        m = SuperMatrix.block_diagonal(table, A, D)
        expected = _fraction_det(a_rows) / _fraction_det(d_rows)
        if berezinian(m) != SuperPoly.constant(table, expected):
            bad += 1
    checks.append(_count("block diagonal gives detA/detD", 10, bad))

    eps = (SuperPoly.generator(table, "e1")
           * SuperPoly.generator(table, "e2"))
    bad = 0
    for _ in range(10):
        shape = rng.choice(((1, 1), (2, 1), (2, 2)))
        x = random_invertible_supermatrix(rng, table, *shape)
        m = SuperMatrix.identity(table, *shape) + x.map_entries(
            lambda e: eps * e)
        if berezinian(m) != SuperPoly.one(table) + eps * supertrace(x):
            bad += 1
    checks.append(_count("infinitesimally 1 + eps Str", 10, bad))
    return checks


def _fraction_det(rows):
    from itertools import permutations
    n = len(rows)
    total = Fraction(0)
    for perm in permutations(range(n)):
        inversions = sum(1 for i in range(n) for j in range(i + 1, n)
                         if perm[i] > perm[j])
        term = Fraction(1)
        for i, j in enumerate(perm):
            term *= rows[i][j]
        total += -term if inversions % 2 else term
    return total


def _suite_cocycle(rng, trials, p, q):
    checks = []
    m = conic_transition()
    back = conic_transition(z="w", w="z", source_odds=("psi1", "psi2"),
                            target_odds=("th1", "th2"))
    chain = cocycle_check(m, back)
    round_trip = compose_maps(m, back).ber_jacobian() == SuperPoly.one(
        m.source.table)
    checks.append(CheckResult("punctured-plane transition chain rule",
                              chain))
    checks.append(CheckResult("punctured-plane round trip has Berezinian 1",
                              round_trip))

    u = Chart(["u1", "u2"], ["et1", "et2"], label="U")
    v = Chart(["v1", "v2"], ["ps1", "ps2"], label="V")
    w = Chart(["w1", "w2"], ["ch1", "ch2"], label="W")
    bad = 0
    for _ in range(trials):
        m1 = random_split_map(rng, u, v)
        m2 = random_split_map(rng, v, w)
        if not cocycle_check(m1, m2):
            bad += 1
    checks.append(_count("chain rule on random coordinate changes",
                         trials, bad))
    return checks


def _suite_homotopies(rng, trials, p, q):
    checks = []
    chart = _ring_chart(2, 2)
    ftab = form_table(chart.table)
    fiber_letters = [fiber_name(n) for n in chart.coordinate_names]
    for degree in (1, 2, 3, 4):
        bad = 0
        for _ in range(trials):
            omega = SuperPoly.zero(ftab)
            for _ in range(2):
                f = transport(random_superpoly(rng, chart.table, terms=2,
                                               max_exp=2), ftab)
                for _k in range(degree):
                    f = f * SuperPoly.generator(ftab,
                                                rng.choice(fiber_letters))
                omega = omega + f
            if omega.is_zero():
                continue
            parts = degree_parts(omega)
            if set(parts) != {degree}:
                continue
            if homotopy_h(d(omega)) + d(homotopy_h(omega)) != omega:
                bad += 1
        checks.append(_count(f"form homotopy is the identity in degree "
                             f"{degree}", trials, bad))

    for pp, qq in ((1, 1), (2, 2)):
        c = _ring_chart(pp, qq)
        ptab = polyvector_table(c)
        pv_letters = [polyvector_name(fiber_name(n))
                      for n in c.coordinate_names]
        bad = 0
        for k in range(0, 4):
            for _ in range(trials):
                poly = random_superpoly(rng, c.table, terms=2, max_exp=2)
                poly = transport(poly, ptab)
                for _j in range(k):
                    poly = poly * SuperPoly.generator(
                        ptab, rng.choice(pv_letters))
                u = IntegralForm(c, poly)
                if u.is_zero():
                    continue
                anti = (spencer_delta(homotopy_int(u))
                        + homotopy_int(spencer_delta(u)))
                if anti != u - cohomology_projection(u):
                    bad += 1
        checks.append(_count(
            f"density homotopy hits the identity off the generator "
            f"on R{pp}|{qq}", 4 * trials, bad))

    chart = _ring_chart(p, q)
    ftab = form_table(chart.table)
    bad = 0
    for _ in range(trials):
        u = _random_universal_monomial(rng, chart, ftab)
        if u.is_zero():
            continue
        factor = con3_identity_factor(u)
        if script_H(script_D(u)) + script_D(script_H(u)) != u.scale(factor):
            bad += 1
    checks.append(_count("operator homotopy scales each monomial by its "
                         "counting factor", trials, bad))

    density = UniversalElement.monomial(
        ftab, [fiber_name(n) for n in chart.even_names],
        list(chart.odd_names))
    factor = con3_identity_factor(density)
    total = script_H(script_D(density)) + script_D(script_H(density))
    checks.append(CheckResult(
        "density monomials sit in the operator-homotopy kernel",
        factor == 0 and total.is_zero()))
    return checks


def _suite_koszul(rng, trials, p, q):
    checks = []
    cutoff = 6
    for pp, qq in ((1, 1), (1, 2), (2, 1)):
        algebra = KoszulAlgebra(pp, qq)
        acyclic = all(algebra.homology_ranks("koszul", deg,
                                             cutoff).homology_dim == 0
                      for deg in (-1, -2, -3, -4))
        rank0 = algebra.homology_ranks("koszul", 0, cutoff).homology_dim == 1
        dual_ok = all(
            algebra.homology_ranks("dual", deg, cutoff).homology_dim
            == (1 if deg == pp else 0)
            for deg in range(0, pp + 2))
        checks.append(CheckResult(
            f"koszul complex on {pp}|{qq} acyclic below degree zero",
            acyclic))
        checks.append(CheckResult(
            f"koszul degree zero rank one on {pp}|{qq}", rank0))
        checks.append(CheckResult(
            f"dual homology concentrated in degree {pp} on {pp}|{qq}",
            dual_ok))

    coeff = GeneratorTable.chart([], ["e1", "e2", "e3", "e4"])
    bad = 0
    for _ in range(trials):
        pp, qq = rng.choice(((1, 1), (1, 2), (2, 1)))
        algebra = KoszulAlgebra(pp, qq,
                                coefficient_odds=["e1", "e2", "e3", "e4"])
        m = random_invertible_supermatrix(rng, coeff, pp, qq)
        scalar = algebra.induced_automorphism_scalar(m)
        expected = transport(berezinian(m).inverse(),
                             algebra.coefficient_table)
        if scalar != expected:
            bad += 1
    checks.append(_count("class transforms by the reciprocal Berezinian",
                         trials, bad))
    return checks


def _random_parity_field(rng, chart):
    table = chart.table
    comps = {}
    parity = rng.choice((0, 1))
    for name in chart.coordinate_names:
        want = (parity + table.parity(name)) % 2
        comps[name] = random_superpoly(rng, table, parity=want, terms=2,
                                       max_exp=1)
    field = VectorField(chart, comps)
    return field if field.parity() is not None else None


def _random_diffop(rng, table, terms=2, letters=2):
    out = DiffOp.zero(table)
    names = list(table.names)
    for _ in range(rng.randint(1, terms)):
        w = DiffOp.multiplication(random_superpoly(rng, table, terms=2,
                                                   max_exp=1))
        for _k in range(rng.randint(0, letters)):
            w = w.compose(DiffOp.partial(table, rng.choice(names)))
        out = out + w
    return out


def _suite_dmodule(rng, trials, p, q):
    chart = _ring_chart(p, q)
    table = chart.table
    checks = []

    one = BerSection.generator(chart)
    killed = all(right_action(one, DiffOp.partial(table, name)).is_zero()
                 for name in chart.coordinate_names)
    checks.append(CheckResult("generator density killed by every "
                              "derivative", killed))

    bad = 0
    for _ in range(trials):
        s = BerSection(chart, random_superpoly(rng, table, terms=2,
                                               max_exp=1))
        x = _random_parity_field(rng, chart)
        y = _random_parity_field(rng, chart)
        if x is None or y is None:
            continue
        xop, yop = x.as_diffop(), y.as_diffop()
        lhs = right_action(s, xop.bracket(yop))
        first = right_action(right_action(s, xop), yop)
        second = right_action(right_action(s, yop), xop)
        rhs = first + second if (x.parity() and y.parity()) else \
            first - second
        if lhs != rhs:
            bad += 1
    checks.append(_count("right action flat on field brackets", trials, bad))

    bad = 0
    for _ in range(trials):
        s = BerSection(chart, random_superpoly(rng, table, terms=2,
                                               max_exp=1))
        f = random_superpoly(rng, table, terms=2, max_exp=1)
        x = _random_parity_field(rng, chart)
        if x is None:
            continue
        mult = DiffOp.multiplication(f)
        xop = x.as_diffop()
        if right_action(s, mult.compose(xop)) != right_action(
                s.times(f), xop):
            bad += 1
        if right_action(s, xop.compose(mult)) != right_action(
                right_action(s, xop), mult):
            bad += 1
    checks.append(_count("connection-style product rules", trials, bad))

    bad = 0
    for _ in range(trials):
        s = BerSection(chart, random_superpoly(rng, table, terms=2,
                                               max_exp=1))
        op1 = _random_diffop(rng, table)
        op2 = _random_diffop(rng, table)
        if right_action(right_action(s, op1), op2) != right_action(
                s, op1.compose(op2)):
            bad += 1
    checks.append(_count("action associative over operator composition",
                         trials, bad))
    return checks


def _suite_integrals(rng, trials, p, q):
    checks = []
    half = Fraction(1, 2)

    line = _ring_chart(0, 1)
    ftab = form_table(line.table)
    theta = transport(SuperPoly.generator(line.table, "th1"), ftab)
    weight, section = gaussian_fiber_integral(line, theta,
                                              [fiber_name("th1")])
    value = weight * berezin_integral(section)
    checks.append(CheckResult(
        "odd tangent line with Gaussian fiber weight integrates to "
        "sqrt(pi)", value == PiValue.pi_power(half)))

    plane = _ring_chart(0, 2)
    top = SuperPoly.generator(plane.table, "th1") * SuperPoly.generator(
        plane.table, "th2")
    checks.append(CheckResult(
        "purely odd plane normalizes to 1",
        berezin_integral(BerSection(plane, top)) == 1))

    chart = _ring_chart(1, 2)
    ptab = polyvector_table(chart)
    sigma0 = IntegralForm(
        chart, transport(top_coefficient(chart), ptab)
        * SuperPoly.generator(ptab, polyvector_name(fiber_name("x1"))))
    ftab = form_table(chart.table)
    dx1 = SuperPoly.generator(ftab, fiber_name("x1"))
    paired = duality_pair_integral(sigma0, dx1, dirac={"x1": 0})
    checks.append(CheckResult(
        "point class against the pinned line form pairs to 1", paired == 1))

    eta = transport(top_coefficient(chart), ftab)
    shifted = duality_pair_integral(sigma0, dx1 + d(eta), dirac={"x1": 0})
    checks.append(CheckResult(
        "pairing unchanged by an exact shift of the form",
        shifted == paired == 1))
    return checks


def top_coefficient(chart: Chart) -> SuperPoly:
    out = SuperPoly.one(chart.table)
    for name in chart.odd_names:
        out = out * SuperPoly.generator(chart.table, name)
    return out


def _suite_stokes(rng, trials, p, q):
    checks = []
    for pp, qq in ((1, 1), (1, 2), (2, 2)):
        chart = _ring_chart(pp, qq)
        ptab = polyvector_table(chart)
        pv_letters = [polyvector_name(fiber_name(n))
                      for n in chart.coordinate_names]
        bad = 0
        for _ in range(trials):
            poly = transport(random_superpoly(rng, chart.table, terms=3,
                                              max_exp=2), ptab)
            poly = poly * SuperPoly.generator(ptab, rng.choice(pv_letters))
            u = IntegralForm(chart, poly)
            if u.is_zero():
                continue
            _value, vanished = stokes_check(u)
            if not vanished:
                bad += 1
        checks.append(_count(
            f"boundary integral vanishes on R{pp}|{qq}", trials, bad))
    return checks


def _suite_susy(rng, trials, p, q):
    checks = []
    cases = [((1, 1), [[[2]]]), ((1, 2), [[[2, 0], [0, 2]]])]
    for (pp, qq), gamma in cases:
        chart = _ring_chart(pp, qq)
        checks.append(CheckResult(
            f"bracket closes on translations for 1|{qq}",
            susy_algebra_check(chart, gamma)))
        bad = 0
        for _ in range(trials):
            lagrangian = BerSection(
                chart, random_superpoly(rng, chart.table, terms=3,
                                        max_exp=2))
            for a in range(qq):
                if not susy_variation(lagrangian, gamma, a).is_zero():
                    bad += 1
        checks.append(_count(
            f"action invariant under every generator for 1|{qq}",
            trials * qq, bad))
    return checks


def _unimodular_split_map(rng, source: Chart, target: Chart) -> CoordinateMap:
    """A coordinate change whose Jacobian blocks have constant
    determinants, so delta forms transform with polynomial output."""
    p, q = source.p, source.q
    table = source.table
    xs = [SuperPoly.generator(table, n) for n in source.even_names]
    ths = [SuperPoly.generator(table, n) for n in source.odd_names]
    images = {}
    for i, name in enumerate(target.even_names):
        img = xs[i].scale(random_nonzero_rational(rng, 3))
        for j in range(i):
            img = img + (xs[j] * xs[j]).scale(random_rational(rng, 2))
        images[name] = img
    for a, name in enumerate(target.odd_names):
        img = ths[a].scale(random_nonzero_rational(rng, 3))
        for b in range(a):
            coeff = random_superpoly(rng, table, parity=0, terms=1, max_exp=2)
            even_only = SuperPoly(table, {m: c for m, c in coeff.terms.items()
                                          if not m[1]})
            img = img + even_only * ths[b]
        images[name] = img
    return CoordinateMap(source, target, images)


def _random_delta_form(rng, chart: Chart, terms: int = 2) -> DeltaForm:
    out = DeltaForm.zero(chart)
    for _ in range(rng.randint(1, terms)):
        eps = tuple(rng.randint(0, 1) for _ in range(chart.p))
        ells = tuple(rng.choice((0, 0, 1, 2)) for _ in range(chart.q))
        coeff = random_superpoly(rng, chart.table, terms=2, max_exp=1)
        out = out + DeltaForm(chart, {(eps, ells): coeff})
    return out


def _suite_delta_forms(rng, trials, p, q):
    checks = []
    charts = [_ring_chart(1, 1), _ring_chart(2, 1), _ring_chart(1, 2),
              _ring_chart(2, 2)]

    bad = 0
    for _ in range(trials):
        chart = rng.choice(charts)
        w = _random_delta_form(rng, chart)
        i = rng.randrange(chart.p)
        a = rng.randrange(chart.q)
        dx = fiber_name(chart.even_names[i])
        dth = fiber_name(chart.odd_names[a])
        anti = cw_apply(f"dd_{dx} {dx}", w) + cw_apply(f"{dx} dd_{dx}", w)
        comm = cw_apply(f"dd_{dth} {dth}", w) - cw_apply(f"{dth} dd_{dth}", w)
        if anti != w or comm != w:
            bad += 1
        if chart.p > 1:
            other = fiber_name(chart.even_names[(i + 1) % chart.p])
            square = cw_apply(f"{dx} {other}", w) + cw_apply(
                f"{other} {dx}", w)
            if not square.is_zero():
                bad += 1
    checks.append(_count("letter relations hold on random delta forms",
                         trials, bad))

    bad = 0
    maps = max(trials // 2, 20)
    pairs = [(Chart(["u1", "u2"], ["et1", "et2"], label="U"),
              Chart(["v1", "v2"], ["ps1", "ps2"], label="V")),
             (Chart(["u"], ["et1", "et2"], label="U"),
              Chart(["v"], ["ps1", "ps2"], label="V"))]
    for _ in range(maps):
        src, tgt = rng.choice(pairs)
        m = _unimodular_split_map(rng, src, tgt)
        ber = _plain_polynomial(m.ber_jacobian())
        if DeltaForm.top(tgt).transform(m) != DeltaForm.top(src, ber):
            bad += 1
    checks.append(_count("pivot transforms by the Berezinian", maps, bad))

    bad = 0
    for _ in range(trials):
        chart = rng.choice(charts)
        w = _random_delta_form(rng, chart)
        if from_integral_form(to_integral_form(w)) != w:
            bad += 1
    checks.append(_count("delta and density pictures invert each other",
                         trials, bad))

    bad = 0
    rounds = max(trials // 3, 12)
    for _ in range(rounds):
        src, tgt = pairs[0]
        m = _unimodular_split_map(rng, src, tgt)
        w = _random_delta_form(rng, tgt)
        deg = w.z_degree()
        if deg is None or not tgt.p - deg >= 0:
            continue
        eta = transport(random_superpoly(rng, tgt.table, terms=2, max_exp=1),
                        form_table(tgt.table))
        for _k in range(tgt.p - deg):
            eta = eta * SuperPoly.generator(
                form_table(tgt.table),
                rng.choice([fiber_name(n) for n in tgt.coordinate_names]))
        if eta.is_zero():
            continue
        lhs = pair(to_integral_form(w.transform(m)),
                   _plain_polynomial(pullback_form(m, eta))).as_section()
        rhs = pair(to_integral_form(w), eta).as_section().transform(m)
        if lhs != rhs:
            bad += 1
    checks.append(_count("transform commutes with the density picture",
                         rounds, bad))

    line = _ring_chart(0, 1)
    theta = transport(SuperPoly.generator(line.table, "th1"),
                      form_table(line.table))
    weight, section = gaussian_fiber_integral(line, theta,
                                              [fiber_name("th1")])
    value = weight * berezin_integral(section)
    sqrt_pi = value == PiValue.pi_power(Fraction(1, 2))

    plane = _ring_chart(0, 2)
    sigma = DeltaForm.top(plane, top_coefficient(plane))
    unit = berezin_integral(fiber_integral(sigma)) == 1
    checks.append(CheckResult(
        "fiber integration reproduces the benchmark integrals",
        sqrt_pi and unit))
    return checks


SUITES: dict[str, SuiteSpec] = {
    "nilpotency": SuiteSpec(_suite_nilpotency, 50,
                            "every differential squares to zero"),
    "berezinian": SuiteSpec(_suite_berezinian, 100,
                            "Berezinian multiplicativity and expansions"),
    "cocycle": SuiteSpec(_suite_cocycle, 50,
                         "chain rule for Berezinians of coordinate changes"),
    "homotopies": SuiteSpec(_suite_homotopies, 12,
                            "contracting homotopies hit the identity"),
    "koszul": SuiteSpec(_suite_koszul, 20,
                        "homology ranks and class transport"),
    "dmodule": SuiteSpec(_suite_dmodule, 50,
                         "right module structure on densities"),
    "integrals": SuiteSpec(_suite_integrals, 1,
                           "benchmark integral values"),
    "stokes": SuiteSpec(_suite_stokes, 50,
                        "boundary integrals vanish"),
    "susy": SuiteSpec(_suite_susy, 10,
                      "supersymmetry algebra and invariance"),
    "delta-forms": SuiteSpec(_suite_delta_forms, 50,
                             "delta form calculus and transforms"),
}


def run_suite(name: str, seed: int = 0, trials: int | None = None,
              p: int = 2, q: int = 2) -> list[CheckResult]:
    """Run one verify suite with a fresh seeded generator."""
    spec = SUITES[name]
    rng = random.Random(seed)
    return spec.run(rng, trials if trials is not None else spec.trials, p, q)


@main.command("verify")
@click.argument("suite", default="all")
@click.option("--trials", type=int, default=None,
              help="override the suite's sample count")
@click.option("--p", "p", type=int, default=2, show_default=True)
@click.option("--q", "q", type=int, default=2, show_default=True)
@_seed_option
@_json_option
@click.pass_context
def cmd_verify(ctx, suite, trials, p, q, seed, json_mode):
    """Run one named identity suite, or all of them.

    Suites: nilpotency, berezinian, cocycle, homotopies, koszul,
    dmodule, integrals, stokes, susy, delta-forms.
    """
    if suite != "all" and suite not in SUITES:
        raise click.UsageError(
            f"unknown suite {suite!r}; pick from "
            f"{', '.join(sorted(SUITES))} or 'all'")
    names = sorted(SUITES) if suite == "all" else [suite]
    seed = seed or 0
    all_ok = True
    report = []
    for name in names:
        results = run_suite(name, seed=seed, trials=trials, p=p, q=q)
        ok = all(r.ok for r in results)
        all_ok = all_ok and ok
        report.append({"suite": name, "passed": ok,
                       "checks": [{"label": r.label, "ok": r.ok,
                                   "detail": r.detail} for r in results]})
        if not json_mode:
            for r in results:
                status = "ok" if r.ok else "FAIL"
                detail = f" ({r.detail})" if r.detail else ""
                click.echo(f"{status:4} {name}: {r.label}{detail}")
    if json_mode:
        click.echo(json.dumps({"format": JSON_FORMAT, "command": "verify",
                               "seed": seed, "passed": all_ok,
                               "suites": report}, sort_keys=True))
    else:
        click.echo(f"{'all suites passed' if all_ok else 'FAILURES above'}"
                   f" (seed {seed})")
    if not all_ok:
        ctx.exit(1)


if __name__ == "__main__":
    main()
