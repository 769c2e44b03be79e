"""Exact Berezin integration for Gaussian-class densities.

Integrands are polynomial coefficients dressed with an optional global
Gaussian weight exp(-sum z_i^2) over a declared set of even coordinates
and optional point evaluations delta(z_i - a_i) at rational points.
That class is closed under coordinate derivatives and every moment is a
rational multiple of a power of sqrt(pi), so the integral stays exact;
values live in :class:`PiValue`.

The module also provides the weighted versions of the Lie derivative
and of the integral-form differential (the weight rides along through
the product rule), a Stokes checker, evaluation of the duality pairing
between integral and differential forms, and the supersymmetry
generators with their algebra and invariance checks.
"""

from __future__ import annotations

from fractions import Fraction
from math import prod
from typing import Iterable, Mapping, Sequence

from .algebra import SuperPoly
from .charts import Chart
from .derham import fiber_degree, form_table
from .diffops import DiffOp
from .integral_forms import (
    BerSection,
    IntegralForm,
    VectorField,
    _plain_polynomial,
    pair,
    polyvector_name,
)

__all__ = [
    "PiValue",
    "GaussianIntegrand",
    "berezin_integral",
    "gaussian_moment",
    "lie_derivative_gaussian",
    "spencer_delta_gaussian",
    "stokes_check",
    "duality_pair_integral",
    "susy_generator",
    "susy_field",
    "susy_algebra_check",
    "susy_variation",
]


class PiValue:
    """A finite rational combination of half-integer powers of pi.

    Gaussian moments produce nothing else, so this tiny ring is the
    exact value domain for every integral in this module.  ``terms``
    maps the exponent (a Fraction with denominator 1 or 2) to a nonzero
    rational coefficient; the empty map is zero.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        clean: dict[Fraction, Fraction] = {}
        for k, c in (terms or {}).items():
            k = Fraction(k)
            if k.denominator > 2:
                raise ValueError("pi exponents must be half-integers")
            c = Fraction(c)
            if c:
                clean[k] = c
        self.terms = clean

    @classmethod
    def rational(cls, c) -> "PiValue":
        return cls({Fraction(0): Fraction(c)})

    @classmethod
    def pi_power(cls, exponent, coeff=1) -> "PiValue":
        return cls({Fraction(exponent): Fraction(coeff)})

    def is_zero(self) -> bool:
        return not self.terms

    def coefficient(self, exponent) -> Fraction:
        return self.terms.get(Fraction(exponent), Fraction(0))

    def __add__(self, other) -> "PiValue":
        other = _as_pi_value(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            out[k] = out.get(k, Fraction(0)) + c
        return PiValue(out)

    def __radd__(self, other) -> "PiValue":
        return self.__add__(other)

    def __sub__(self, other) -> "PiValue":
        return self.__add__(-_as_pi_value(other))

    def __neg__(self) -> "PiValue":
        return PiValue({k: -c for k, c in self.terms.items()})

    def __mul__(self, other) -> "PiValue":
        other = _as_pi_value(other)
        out: dict[Fraction, Fraction] = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = k1 + k2
                out[k] = out.get(k, Fraction(0)) + c1 * c2
        return PiValue(out)

    def __rmul__(self, other) -> "PiValue":
        return self.__mul__(other)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PiValue.rational(other)
        if not isinstance(other, PiValue):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def __str__(self):
        if not self.terms:
            return "0"
        bits = []
        for k in sorted(self.terms):
            c = self.terms[k]
            if k == 0:
                bits.append(str(c))
                continue
            if k == Fraction(1, 2):
                base = "sqrt(pi)"
            elif k == 1:
                base = "pi"
            elif k.denominator == 1:
                base = f"pi^{k}"
            else:
                base = f"pi^({k})"
            if c == 1:
                bits.append(base)
            elif c == -1:
                bits.append(f"-{base}")
            else:
                bits.append(f"{c}*{base}")
        return " + ".join(bits).replace("+ -", "- ")

    def __repr__(self):
        return f"PiValue({self})"


def _as_pi_value(value) -> PiValue:
    if isinstance(value, PiValue):
        return value
    if isinstance(value, (int, Fraction)):
        return PiValue.rational(value)
    raise TypeError(f"cannot coerce {type(value).__name__} to PiValue")


def gaussian_moment(n: int) -> PiValue:
    """``int z^(2n) exp(-z^2) dz`` over the line: (2n-1)!! sqrt(pi) / 2^n."""
    if n < 0:
        raise ValueError("moment order must be nonnegative")
    coeff = Fraction(prod(range(1, 2 * n, 2)), 2**n)
    return PiValue.pi_power(Fraction(1, 2), coeff)


class GaussianIntegrand:
    """A density coefficient with every even coordinate accounted for.

    The payload is a polynomial over the chart.  Alongside it the
    instance records which even coordinates sit under the global weight
    exp(-z^2) (``gaussian``), which are pinned by a point evaluation
    delta(z - a) at a rational point (``dirac``), and which carry no
    integration data at all (``formal``).  Every even coordinate must
    land in exactly one of the three groups, otherwise its integral
    would be an honest divergent improper integral and the exact story
    ends.  Formal coordinates survive algebra but refuse integration.
    """

    __slots__ = ("chart", "poly", "gaussian", "dirac", "formal")

    def __init__(self, chart: Chart, poly, *, gaussian: Iterable[str] = (),
                 dirac: Mapping[str, object] | None = None,
                 formal: Iterable[str] = ()):
        if not isinstance(poly, SuperPoly):
            poly = SuperPoly.constant(chart.table, poly)
        if poly.table != chart.table:
            raise ValueError("coefficient is not over the chart's coordinates")
        gaussian = frozenset(gaussian)
        dirac = {name: Fraction(a) for name, a in dict(dirac or {}).items()}
        formal = frozenset(formal)
        evens = set(chart.even_names)
        for name in (*gaussian, *dirac, *formal):
            if name not in evens:
                raise ValueError(f"{name!r} is not an even coordinate of the chart")
        if gaussian & dirac.keys() or gaussian & formal or formal & dirac.keys():
            raise ValueError("each even coordinate takes at most one marker")
        uncovered = evens - gaussian - dirac.keys() - formal
        if uncovered:
            name = min(uncovered)
            raise ValueError(f"even coordinate {name!r} carries no Gaussian "
                             "weight, point evaluation, or formal marker")
        self.chart = chart
        self.poly = poly
        self.gaussian = gaussian
        self.dirac = dirac
        self.formal = formal

    @classmethod
    def from_section(cls, section: BerSection, *, gaussian: Iterable[str] = (),
                     dirac: Mapping[str, object] | None = None,
                     formal: Iterable[str] = ()) -> "GaussianIntegrand":
        return cls(section.chart, section.coefficient, gaussian=gaussian,
                   dirac=dirac, formal=formal)

    def __str__(self):
        tags = []
        if self.gaussian:
            tags.append("gauss(" + ",".join(sorted(self.gaussian)) + ")")
        for name in sorted(self.dirac):
            tags.append(f"dirac({name},{self.dirac[name]})")
        if self.formal:
            tags.append("formal(" + ",".join(sorted(self.formal)) + ")")
        suffix = (" " + " ".join(tags)) if tags else ""
        return f"Ber @ {self.poly}{suffix}"


def berezin_integral(target, *, gaussian: Iterable[str] = (),
                     dirac: Mapping[str, object] | None = None,
                     formal: Iterable[str] = ()) -> PiValue:
    """Exact Berezin integral of a Gaussian-class density.

    Accepts a :class:`GaussianIntegrand`, or a :class:`BerSection`
    together with the marker keywords.  The odd directions contribute
    the coefficient of the full odd monomial theta_1 .. theta_q, in
    table order; Dirac-pinned coordinates are evaluated at their
    points; every Gaussian coordinate is then integrated out with

        int z^(2n) exp(-z^2) dz = (2n-1)!! sqrt(pi) / 2^n

    and odd powers dropping out by symmetry.  A formal coordinate has
    no integral, so its presence is an error here.
    """
    if isinstance(target, BerSection):
        target = GaussianIntegrand.from_section(target, gaussian=gaussian,
                                                dirac=dirac, formal=formal)
    elif not isinstance(target, GaussianIntegrand):
        raise TypeError("expected a BerSection or a GaussianIntegrand")
    if target.formal:
        raise ValueError(f"divergent/formal variable: {min(target.formal)}")
    table = target.chart.table
    top = tuple(table.odd_positions)
    ftop = SuperPoly(table, {(ev, ()): c for (ev, od), c in target.poly.terms.items()
                             if od == top})
    ftop = _plain_polynomial(ftop)
    if target.dirac:
        points = {name: SuperPoly.constant(table, a)
                  for name, a in target.dirac.items()}
        ftop = _plain_polynomial(ftop.substitute(points))
    power = Fraction(len(target.gaussian), 2)
    total = PiValue()
    for (ev, _), c in ftop.terms.items():
        coeff = Fraction(c)
        for slot, e in enumerate(ev):
            if e == 0:
                continue
            name = table.names[table.even_positions[slot]]
            assert name in target.gaussian
            if e % 2:
                coeff = Fraction(0)
                break
            coeff *= Fraction(prod(range(1, e, 2)), 2 ** (e // 2))
        if coeff:
            total = total + PiValue.pi_power(power, coeff)
    return total


def _weighted_derivative(g: SuperPoly, name: str,
                         gaussian: frozenset[str]) -> SuperPoly:
    """Left derivative of g * exp(-z^2) with the weight factored back out."""
    out = g.left_derivative(name)
    if name in gaussian:
        out = out - (g * SuperPoly.generator(g.table, name)).scale(2)
    return out


def _marker_set(chart: Chart, gaussian) -> frozenset[str]:
    if gaussian is None:
        return frozenset(chart.even_names)
    gaussian = frozenset(gaussian)
    unknown = gaussian - set(chart.even_names)
    if unknown:
        raise ValueError(f"{min(unknown)!r} is not an even coordinate of the chart")
    return gaussian


def lie_derivative_gaussian(section: BerSection, field: VectorField,
                            gaussian: Iterable[str] | None = None) -> BerSection:
    """Lie derivative of a Gaussian-weighted density, weight factored out.

    Same divergence formula as the polynomial version, with every
    coordinate derivative replaced by its weighted counterpart; with an
    empty marker set the two agree.  Defaults to the weight sitting on
    all even coordinates.
    """
    if field.chart.table != section.chart.table:
        raise ValueError("field and density live on different charts")
    xp = field.parity()
    if xp is None:
        raise ValueError("vector field must have homogeneous parity")
    table = section.chart.table
    gaussian = _marker_set(section.chart, gaussian)
    parts = section.coefficient.homogeneous_parts()
    out = SuperPoly.zero(table)
    for name, comp in field.components.items():
        pa = table.parity(name)
        comp_parity = (xp + pa) % 2
        for fp, fpart in enumerate(parts):
            if fpart.is_zero():
                continue
            term = _weighted_derivative(fpart * comp, name, gaussian)
            if pa and (fp + comp_parity) % 2:
                term = -term
            out = out + term
    return BerSection(section.chart, out)


def spencer_delta_gaussian(u: IntegralForm,
                           gaussian: Iterable[str] | None = None) -> IntegralForm:
    """The integral-form differential with the Gaussian weight riding along.

    Identical to the polynomial differential except that the coordinate
    derivative picks up the weight's contribution -2z on the marked
    even coordinates.  Squares to zero for the same reason.
    """
    chart = u.chart
    gaussian = _marker_set(chart, gaussian)
    base_parity = (chart.p + chart.q) % 2
    out = SuperPoly.zero(u.table)
    for name in chart.coordinate_names:
        peeled = u.poly.left_derivative(polyvector_name(name))
        if peeled.is_zero():
            continue
        term = _weighted_derivative(peeled, name, gaussian)
        if (u.table.parity(name) + base_parity + 1) % 2:
            term = -term
        out = out + term
    return IntegralForm(chart, out)


def stokes_check(u: IntegralForm,
                 gaussian: Iterable[str] | None = None) -> tuple[PiValue, bool]:
    """Integrate the differential of a degree p-1 Gaussian-class form.

    Returns the value and whether it vanished; total derivatives of
    rapidly decaying data always integrate to zero, so a False flag
    means the input was not in the advertised class.  The weight
    defaults to every even coordinate and must cover all of them, since
    the differential has to act on whatever multiplies each coordinate.
    """
    chart = u.chart
    if not u.is_zero() and u.degree() != chart.p - 1:
        raise ValueError("expected a form of degree one below the top")
    gaussian = _marker_set(chart, gaussian)
    boundary = spencer_delta_gaussian(u, gaussian)
    value = berezin_integral(boundary.as_section(), gaussian=gaussian)
    return value, value.is_zero()


def duality_pair_integral(sigma: IntegralForm, eta: SuperPoly, *,
                          gaussian: Iterable[str] = (),
                          dirac: Mapping[str, object] | None = None) -> PiValue:
    """Contract an integral form against a differential form, then integrate.

    The two degrees must be complementary, deg sigma + deg eta = p, so
    that the contraction consumes every polyvector letter and lands in
    the top degree.  Marker keywords describe the even coordinates of
    the combined coefficient, exactly as in :func:`berezin_integral`.
    """
    chart = sigma.chart
    if eta.table == chart.table:
        eta_degrees = {0} if not eta.is_zero() else set()
    else:
        ftab = form_table(chart.table)
        if eta.table != ftab:
            raise ValueError("form is not over the chart or its differentials")
        eta_degrees = {fiber_degree(ftab, mono) for mono in eta.terms}
    if sigma.is_zero() or not eta_degrees:
        return PiValue()
    sd = sigma.degree()
    if sd is None or len(eta_degrees) > 1 or sd + next(iter(eta_degrees)) != chart.p:
        raise ValueError("degrees are not complementary; the pairing needs "
                         "deg sigma + deg eta = p")
    section = pair(sigma, eta).as_section()
    return berezin_integral(section, gaussian=gaussian, dirac=dirac)


def _checked_gamma(chart: Chart, gamma) -> tuple:
    p, q = chart.p, chart.q
    mats = tuple(tuple(tuple(Fraction(x) for x in row) for row in mat)
                 for mat in gamma)
    if len(mats) != p:
        raise ValueError(f"need {p} coefficient matrices, one per even coordinate")
    for mat in mats:
        if len(mat) != q or any(len(row) != q for row in mat):
            raise ValueError(f"each coefficient matrix must be {q} by {q}")
        for a in range(q):
            for b in range(a + 1, q):
                if mat[a][b] != mat[b][a]:
                    raise ValueError("the coefficient tensor must be symmetric "
                                     "in its two odd indices")
    return mats


def susy_field(chart: Chart, gamma: Sequence, a: int) -> VectorField:
    """The a-th supersymmetry generator as a vector field.

    Components: 1 on theta_a and (1/2) sum_b gamma^mu_ab theta_b on
    each x_mu.  The tensor gamma is indexed [mu][a][b] and must be
    symmetric in (a, b).
    """
    gamma = _checked_gamma(chart, gamma)
    if not 0 <= a < chart.q:
        raise ValueError(f"generator index {a} out of range for q={chart.q}")
    table = chart.table
    components: dict[str, object] = {chart.odd_names[a]: 1}
    for mu, x in enumerate(chart.even_names):
        comp = SuperPoly.zero(table)
        for b, th in enumerate(chart.odd_names):
            g = gamma[mu][a][b]
            if g:
                comp = comp + SuperPoly.generator(table, th).scale(Fraction(g, 2))
        if not comp.is_zero():
            components[x] = comp
    return VectorField(chart, components)


def susy_generator(chart: Chart, gamma: Sequence, a: int) -> DiffOp:
    """The a-th supersymmetry generator as a differential operator."""
    return susy_field(chart, gamma, a).as_diffop()


def susy_algebra_check(chart: Chart, gamma: Sequence) -> bool:
    """Do the generators close on translations with structure gamma?

    Checks [Q_a, Q_b] = sum_mu gamma^mu_ab d/dx_mu for every pair of
    indices; the bracket of two odd operators is the anticommutator.
    """
    gamma = _checked_gamma(chart, gamma)
    table = chart.table
    ops = [susy_generator(chart, gamma, a) for a in range(chart.q)]
    for a in range(chart.q):
        for b in range(a, chart.q):
            expected = DiffOp.zero(table)
            for mu, x in enumerate(chart.even_names):
                g = gamma[mu][a][b]
                if g:
                    expected = expected + DiffOp.partial(table, x).scale(g)
            if ops[a].bracket(ops[b]) != expected:
                return False
    return True


def susy_variation(lagrangian: BerSection, gamma: Sequence, a: int,
                   gaussian: Iterable[str] | None = None) -> PiValue:
    """Variation of the action along the a-th supersymmetry generator.

    Computes the integral of the Lie derivative of the Lagrangian
    density along Q_a, with the Gaussian weight (default: all even
    coordinates) standing in for compact support.  A well-posed setup
    always returns zero: the Lie derivative of a density is a total
    derivative, and those integrate away.
    """
    chart = lagrangian.chart
    gaussian = _marker_set(chart, gaussian)
    field = susy_field(chart, gamma, a)
    varied = lie_derivative_gaussian(lagrangian, field, gaussian)
    return berezin_integral(varied, gaussian=gaussian)
