"""Berezinian densities and the complex of integral forms over a chart.

With odd coordinates present the de Rham complex has no top: powers of the
even coordinate differentials never terminate, and nothing in sight is a
candidate measure.  The objects a Berezin integral consumes are organised
the other way around.  Start from the density symbol ``Ber`` of the chart
(written ``D`` in formulas below) and tensor it with polyvectors, i.e. with
polynomials in the parity-reversed coordinate derivations.  We name those
generators ``pd<coordinate>``; reversal makes ``pdz`` odd and ``pdth``
even, so they span a second supercommutative family on top of the
coordinate ring and everything stays inside one :class:`SuperPoly`.

A plain density ``Ber @ f`` sits in degree p (the number of even
coordinates) and every polyvector letter lowers the degree by one.  The
complex carries

* a degree-lowering differential :func:`spencer_delta`,
* an explicit contracting homotopy :func:`homotopy_int` whose defect
  :func:`cohomology_projection` picks out the single generator
  ``Ber @ th_1..th_q pdz_1..pdz_p``,
* a right action of differential operators :func:`right_action` making the
  densities a right module over the Weyl superalgebra of the chart,
* Lie derivatives along vector fields :func:`lie_derivative_ber`, and
* a contraction pairing :func:`pair` against differential forms, filling
  the role a wedge product cannot play here: two integral forms never
  multiply, an integral form and a form do.

All coefficients are exact rationals and every object is immutable once
built, so values can be shared freely between threads.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping

from supercalc.algebra import (
    EVEN_BASE,
    FIBER_ODD,
    GeneratorTable,
    Monomial,
    ODD_BASE,
    POLYVECTOR_EVEN,
    POLYVECTOR_ODD,
    RationalFunction,
    SuperPoly,
    transport,
)
from supercalc.charts import Chart, CoordinateMap
from supercalc.derham import fiber_degree, form_table
from supercalc.diffops import DiffOp

POLYVECTOR_PREFIX = "pd"


def polyvector_name(name: str) -> str:
    return POLYVECTOR_PREFIX + name


def polyvector_table(chart: Chart) -> GeneratorTable:
    """The chart table extended by its parity-reversed derivations.

    The new symbols are appended after the coordinates, so a canonical
    monomial always reads (coefficient part) * (polyvector part) with no
    reordering sign between the two blocks.
    """
    extra = [(polyvector_name(n), POLYVECTOR_ODD) for n in chart.even_names]
    extra += [(polyvector_name(n), POLYVECTOR_EVEN) for n in chart.odd_names]
    return chart.table.extend(extra)


def polyvector_degree(table: GeneratorTable, mono: Monomial) -> int:
    """Number of polyvector letters in a monomial, with multiplicity."""
    ev, od = mono
    total = 0
    for slot, k in enumerate(ev):
        if table.classes[table.even_positions[slot]] == POLYVECTOR_EVEN:
            total += k
    total += sum(1 for i in od if table.classes[i] == POLYVECTOR_ODD)
    return total


def _monomial_degrees(table: GeneratorTable, mono: Monomial) -> tuple[int, int, int, int]:
    """(even base, odd base, even polyvector, odd polyvector) degrees."""
    ev, od = mono
    base_ev = pv_ev = 0
    for slot, k in enumerate(ev):
        if table.classes[table.even_positions[slot]] == EVEN_BASE:
            base_ev += k
        else:
            pv_ev += k
    base_od = sum(1 for i in od if table.classes[i] == ODD_BASE)
    pv_od = len(od) - base_od
    return base_ev, base_od, pv_ev, pv_od


def _plain_polynomial(poly: SuperPoly) -> SuperPoly:
    """Clear absorbed rational coefficients back into even exponents."""
    table = poly.table
    out = SuperPoly.zero(table)
    for (ev, od), c in poly.terms.items():
        if isinstance(c, RationalFunction):
            if not c.is_polynomial():
                raise ValueError("coordinate change left a non-polynomial "
                                 "coefficient; only polynomial data is "
                                 "supported here")
            out = out + SuperPoly(table, {(ev, od): Fraction(1)}) * c.num
        else:
            out = out + SuperPoly(table, {(ev, od): c})
    return out


# --- densities ------------------------------------------------------------------


class BerSection:
    """A density ``Ber @ f`` on a chart, with polynomial coefficient f.

    The symbol itself carries parity p + q mod 2, so the parity of the
    section is that of the coefficient shifted accordingly.  Sections form
    a module: they add, scale, and multiply by coordinate functions from
    the right; they never multiply each other.
    """

    __slots__ = ("chart", "coefficient")

    def __init__(self, chart: Chart, coefficient):
        if not isinstance(coefficient, SuperPoly):
            coefficient = SuperPoly.constant(chart.table, coefficient)
        if coefficient.table != chart.table:
            raise ValueError("coefficient is not over the chart's coordinates")
        self.chart = chart
        self.coefficient = coefficient

    @classmethod
    def generator(cls, chart: Chart) -> "BerSection":
        return cls(chart, SuperPoly.one(chart.table))

    def is_zero(self) -> bool:
        return self.coefficient.is_zero()

    def parity(self) -> int | None:
        fp = self.coefficient.parity()
        if fp is None:
            return None
        return (self.chart.p + self.chart.q + fp) % 2

    def times(self, f) -> "BerSection":
        """Right multiplication by a coordinate function."""
        if not isinstance(f, SuperPoly):
            f = SuperPoly.constant(self.chart.table, f)
        return BerSection(self.chart, self.coefficient * f)

    def scale(self, c) -> "BerSection":
        return BerSection(self.chart, self.coefficient.scale(c))

    def transform(self, m: CoordinateMap) -> "BerSection":
        """Express the density in the source coordinates of ``m``.

        The coefficient pulls back along the map and picks up the
        Berezinian of the Jacobian.  Raises when the result fails to be
        polynomial (the map divides by a coordinate somewhere).
        """
        if m.target.table != self.chart.table:
            raise ValueError("section does not live on the target of the map")
        moved = m.ber_jacobian() * m.pullback(self.coefficient)
        return BerSection(m.source, _plain_polynomial(moved))

    def __add__(self, other: "BerSection") -> "BerSection":
        self._check(other)
        return BerSection(self.chart, self.coefficient + other.coefficient)

    def __sub__(self, other: "BerSection") -> "BerSection":
        self._check(other)
        return BerSection(self.chart, self.coefficient - other.coefficient)

    def __neg__(self) -> "BerSection":
        return BerSection(self.chart, -self.coefficient)

    def _check(self, other: "BerSection") -> None:
        if not isinstance(other, BerSection):
            raise TypeError("expected another density")
        if other.chart.table != self.chart.table:
            raise ValueError("densities live on different charts")

    def __eq__(self, other):
        if not isinstance(other, BerSection):
            return NotImplemented
        return (self.chart.table == other.chart.table
                and self.coefficient == other.coefficient)

    def __str__(self):
        return f"Ber @ {self.coefficient}"

    __repr__ = __str__


class VectorField:
    """A derivation sum_a X^a d/dx_a with polynomial components.

    Components are keyed by coordinate name; missing names mean zero.  The
    field is homogeneous when every component X^a has parity |X| + |x_a|
    for one fixed |X|; inhomogeneous fields are allowed as containers but
    refuse the operations that need a parity.
    """

    __slots__ = ("chart", "components")

    def __init__(self, chart: Chart, components: Mapping[str, object]):
        table = chart.table
        comps: dict[str, SuperPoly] = {}
        for name, value in components.items():
            if name not in chart.coordinate_names:
                raise ValueError(f"unknown coordinate {name!r}")
            if not isinstance(value, SuperPoly):
                value = SuperPoly.constant(table, value)
            if value.table != table:
                raise ValueError("component is not over the chart's coordinates")
            if not value.is_zero():
                comps[name] = value
        self.chart = chart
        self.components = comps

    @classmethod
    def coordinate(cls, chart: Chart, name: str) -> "VectorField":
        return cls(chart, {name: 1})

    def parity(self) -> int | None:
        """Operator parity, or None when mixed.  The zero field counts as even."""
        found: int | None = None
        for name, comp in self.components.items():
            cp = comp.parity()
            if cp is None:
                return None
            this = (cp + self.chart.table.parity(name)) % 2
            if found is None:
                found = this
            elif found != this:
                return None
        return 0 if found is None else found

    def as_diffop(self) -> DiffOp:
        out = DiffOp.zero(self.chart.table)
        for name, comp in self.components.items():
            out = out + DiffOp.partial(self.chart.table, name).left_multiply(comp)
        return out

    def __str__(self):
        if not self.components:
            return "0"
        return " + ".join(f"({c})*dd_{n}" for n, c in sorted(self.components.items()))

    __repr__ = __str__


def lie_derivative_ber(section: BerSection, field: VectorField) -> BerSection:
    """Dressed Lie derivative of a density along a vector field.

    Acts through the divergence: the coefficient f goes to
    sum_a (-1)^{|x_a| (|f| + |X^a|)} d/dx_a (f X^a), summed over the
    chart coordinates, with the derivative taken from the left.  The
    field must be parity homogeneous so the signs are well defined.
    """
    if field.chart.table != section.chart.table:
        raise ValueError("field and density live on different charts")
    xp = field.parity()
    if xp is None:
        raise ValueError("vector field must have homogeneous parity")
    table = section.chart.table
    parts = section.coefficient.homogeneous_parts()
    out = SuperPoly.zero(table)
    for name, comp in field.components.items():
        pa = table.parity(name)
        comp_parity = (xp + pa) % 2
        for fp, fpart in enumerate(parts):
            if fpart.is_zero():
                continue
            term = (fpart * comp).left_derivative(name)
            if pa and (fp + comp_parity) % 2:
                term = -term
            out = out + term
    return BerSection(section.chart, out)


def _push_past_partial(g: SuperPoly, name: str, odd: bool) -> SuperPoly:
    """One step of the right action: move d/dname through the symbol.

    ``(Ber @ g) . d/dx_a = Ber @ -(-1)^{|x_a||g|} (left d/dx_a g)``.
    """
    if not odd:
        return -g.left_derivative(name)
    even_part, odd_part = g.homogeneous_parts()
    return odd_part.left_derivative(name) - even_part.left_derivative(name)


def right_action(section: BerSection, op: DiffOp) -> BerSection:
    """Right action of a differential operator on a density.

    Satisfies ``right_action(s, P.compose(Q)) ==
    right_action(right_action(s, P), Q)`` and annihilates the generator
    on every bare coordinate derivative.
    """
    table = section.chart.table
    if op.table != table:
        raise ValueError("operator and density live on different charts")
    total = SuperPoly.zero(table)
    for (ell, eps), coeff in op.terms.items():
        cur = section.coefficient * coeff
        word = []
        for slot, k in enumerate(ell):
            word.extend([table.names[op.deriv_even[slot]]] * k)
        word.extend(table.names[i] for i in eps)
        for name in word:
            if cur.is_zero():
                break
            cur = _push_past_partial(cur, name, bool(table.parity(name)))
        total = total + cur
    return BerSection(section.chart, total)


# --- integral forms -------------------------------------------------------------


class IntegralForm:
    """``Ber @ h`` with h a polynomial in coordinates and polyvector letters.

    The numerical degree of a monomial is p minus its polyvector degree,
    so plain densities sit on top and the bottom is reached after p + q
    contractions are no longer possible (odd letters square to zero, even
    letters do not, hence the complex is unbounded below for q > 0).

    Integral forms add and scale, multiply by functions and polyvectors
    through :meth:`times`, and pair with differential forms through
    :func:`pair`.  There is deliberately no product of two integral
    forms; the density symbol cannot appear twice.
    """

    __slots__ = ("chart", "table", "poly")

    def __init__(self, chart: Chart, poly):
        table = polyvector_table(chart)
        if isinstance(poly, SuperPoly):
            if poly.table == chart.table:
                poly = transport(poly, table)
            elif poly.table != table:
                raise ValueError("element is not over the chart or its "
                                 "polyvector extension")
        else:
            poly = SuperPoly.constant(table, poly)
        self.chart = chart
        self.table = table
        self.poly = poly

    @classmethod
    def from_section(cls, section: BerSection) -> "IntegralForm":
        return cls(section.chart, section.coefficient)

    @classmethod
    def cohomology_generator(cls, chart: Chart) -> "IntegralForm":
        """``Ber @ th_1..th_q pdz_1..pdz_p``, the surviving class."""
        powers = {name: 1 for name in chart.odd_names}
        powers.update({polyvector_name(n): 1 for n in chart.even_names})
        table = polyvector_table(chart)
        return cls(chart, SuperPoly.from_monomial(table, powers))

    def is_zero(self) -> bool:
        return self.poly.is_zero()

    def degrees(self) -> frozenset[int]:
        p = self.chart.p
        return frozenset(p - polyvector_degree(self.table, mono)
                         for mono in self.poly.terms)

    def degree(self) -> int | None:
        degs = self.degrees()
        return next(iter(degs)) if len(degs) == 1 else None

    def parity(self) -> int | None:
        base = (self.chart.p + self.chart.q) % 2
        pp = self.poly.parity()
        if pp is None:
            return None
        return (base + pp) % 2

    def times(self, factor) -> "IntegralForm":
        """Right multiplication by a function or polyvector polynomial."""
        if not isinstance(factor, SuperPoly):
            factor = SuperPoly.constant(self.table, factor)
        if factor.table == self.chart.table:
            factor = transport(factor, self.table)
        elif factor.table != self.table:
            raise ValueError("factor is not over the chart or its "
                             "polyvector extension")
        return IntegralForm(self.chart, self.poly * factor)

    def as_section(self) -> BerSection:
        """Forget the (absent) polyvector part; degree must be p throughout."""
        base = self.chart.table
        terms = {}
        for (ev, od), c in self.poly.terms.items():
            if polyvector_degree(self.table, ((ev), od)):
                raise ValueError("polyvector letters remain; not a plain density")
            terms[(ev[:len(base.even_positions)], od)] = c
        return BerSection(self.chart, SuperPoly(base, terms))

    def scale(self, c) -> "IntegralForm":
        return IntegralForm(self.chart, self.poly.scale(c))

    def __add__(self, other: "IntegralForm") -> "IntegralForm":
        self._check(other)
        return IntegralForm(self.chart, self.poly + other.poly)

    def __sub__(self, other: "IntegralForm") -> "IntegralForm":
        self._check(other)
        return IntegralForm(self.chart, self.poly - other.poly)

    def __neg__(self) -> "IntegralForm":
        return IntegralForm(self.chart, -self.poly)

    def _check(self, other: "IntegralForm") -> None:
        if not isinstance(other, IntegralForm):
            raise TypeError("expected another integral form")
        if other.table != self.table:
            raise ValueError("integral forms live on different charts")

    def __eq__(self, other):
        if not isinstance(other, IntegralForm):
            return NotImplemented
        return self.table == other.table and self.poly == other.poly

    def __str__(self):
        return f"Ber @ {self.poly}"

    __repr__ = __str__


def spencer_delta(u: IntegralForm) -> IntegralForm:
    """The degree-lowering differential of the integral form complex.

    On a monomial ``Ber @ h`` it reads

        sum_a (-1)^{|x_a| + p + q + 1} (left d/dx_a)(left d/dpdx_a) h,

    transferring one polyvector letter into an honest coordinate
    derivative.  Squares to zero and anticommutes with nothing else it
    needs to; see :func:`homotopy_int` for the contraction identity.
    """
    chart = u.chart
    base_parity = (chart.p + chart.q) % 2
    out = SuperPoly.zero(u.table)
    for name in chart.coordinate_names:
        term = u.poly.left_derivative(polyvector_name(name)).left_derivative(name)
        if term.is_zero():
            continue
        if (u.table.parity(name) + base_parity + 1) % 2:
            term = -term
        out = out + term
    return IntegralForm(chart, out)


def cohomology_projection(u: IntegralForm) -> IntegralForm:
    """Projection onto the span of the surviving generator.

    Keeps exactly the monomials proportional to
    ``th_1..th_q pdz_1..pdz_p``: full odd coordinate content, all odd
    polyvector letters, no even ones, and a constant coefficient.
    """
    chart = u.chart
    kept = {}
    for mono, c in u.poly.terms.items():
        base_ev, base_od, pv_ev, pv_od = _monomial_degrees(u.table, mono)
        if (base_ev, base_od, pv_ev, pv_od) == (0, chart.q, 0, chart.p):
            kept[mono] = c
    return IntegralForm(chart, SuperPoly(u.table, kept))


def homotopy_int(u: IntegralForm) -> IntegralForm:
    """Contracting homotopy for :func:`spencer_delta`.

    Together they satisfy, exactly and in every degree,

        spencer_delta(homotopy_int(u)) + homotopy_int(spencer_delta(u))
            == u - cohomology_projection(u).

    Monomial by monomial the operator multiplies by x_b and pdx_b for
    every coordinate, with weight 1 / (K + deg f + 1) where f is the
    coefficient part, deg is its total coordinate degree, and

        K = p + q + (even polyvector degree) - (odd polyvector degree)
              - 2 (odd coordinate degree) - 1.

    The denominator vanishes only on scalar multiples of the surviving
    generator, where every product x_b f pdx_b X is already zero; the
    assertion below guards that analysis rather than user input.
    """
    chart = u.chart
    table = u.table
    p, q = chart.p, chart.q
    base_parity = (p + q) % 2
    base_even_positions = table.positions_of_class(EVEN_BASE)
    base_even_slots = {table.even_slot(i) for i in base_even_positions}
    base_odd_positions = set(table.positions_of_class(ODD_BASE))
    out = SuperPoly.zero(table)
    for (ev, od), c in u.poly.terms.items():
        base_ev, base_od, pv_ev, pv_od = _monomial_degrees(table, (ev, od))
        k_weight = p + q + pv_ev - pv_od - 2 * base_od - 1
        denominator = k_weight + base_ev + base_od + 1
        f_parity = base_od % 2
        f_ev = tuple(x if slot in base_even_slots else 0
                     for slot, x in enumerate(ev))
        x_ev = tuple(0 if slot in base_even_slots else x
                     for slot, x in enumerate(ev))
        f_poly = SuperPoly(table, {(f_ev, tuple(i for i in od if i in base_odd_positions)): Fraction(1)})
        x_poly = SuperPoly(table, {(x_ev, tuple(i for i in od if i not in base_odd_positions)): Fraction(1)})
        for name in chart.coordinate_names:
            xb = SuperPoly.generator(table, name)
            pdb = SuperPoly.generator(table, polyvector_name(name))
            prod = xb * f_poly * pdb * x_poly
            if prod.is_zero():
                continue
            assert denominator > 0, "nonzero product on a generator monomial"
            pb = table.parity(name)
            exponent = (f_parity * (pb + 1) + pb + base_parity + 1) % 2
            weight = Fraction(1, denominator) * c
            out = out + prod.scale(-weight if exponent else weight)
    return IntegralForm(chart, out)


def pair(u: IntegralForm, omega: SuperPoly) -> IntegralForm:
    """Contract a differential form into an integral form.

    The form may be given over the chart table (a function) or over the
    chart's exterior table.  Each fiber symbol of the form consumes one
    matching polyvector letter of ``u`` from the right, in the written
    order of the form monomial, and the remaining coordinate factor
    multiplies the result.  The operation is associative against the
    wedge product: pairing with ``omega1 * omega2`` equals pairing with
    ``omega1`` and then with ``omega2``.

    Raises when the fiber degree of the form exceeds the polyvector
    degree of the integral form anywhere (the contraction would
    overshoot past the densities).
    """
    base = u.chart.table
    ftab = form_table(base)
    if omega.table == base:
        omega = transport(omega, ftab)
    elif omega.table != ftab:
        raise ValueError("form is not over the chart's coordinates")
    result = SuperPoly.zero(u.table)
    if u.poly.is_zero() or omega.is_zero():
        return IntegralForm(u.chart, result)
    max_fiber = max(fiber_degree(ftab, mono) for mono in omega.terms)
    min_pv = min(polyvector_degree(u.table, mono) for mono in u.poly.terms)
    if max_fiber > min_pv:
        raise ValueError("form degree exceeds the polyvector degree of the "
                         "integral form")
    fiber_odd = [i for i, cls in enumerate(ftab.classes) if cls == FIBER_ODD]
    base_names = {i: ftab.names[i][1:] for i in fiber_odd}
    even_fiber_slots = [(slot, ftab.names[i][1:])
                        for slot, i in enumerate(ftab.even_positions)
                        if ftab.classes[i] not in (EVEN_BASE,)]
    base_even_slots = [(slot, ftab.names[i])
                       for slot, i in enumerate(ftab.even_positions)
                       if ftab.classes[i] == EVEN_BASE]
    for (ev, od), c in omega.terms.items():
        letters = [base_names[i] for i in od if i in base_names]
        for slot, name in even_fiber_slots:
            letters.extend([name] * ev[slot])
        cur = u.poly.scale(c)
        for name in letters:
            cur = cur.right_derivative(polyvector_name(name))
            if cur.is_zero():
                break
        if cur.is_zero():
            continue
        remainder = {name: ev[slot] for slot, name in base_even_slots if ev[slot]}
        remainder.update({ftab.names[i]: 1 for i in od if i not in base_names})
        if remainder:
            cur = cur * SuperPoly.from_monomial(u.table, remainder)
        result = result + cur
    return IntegralForm(u.chart, result)
