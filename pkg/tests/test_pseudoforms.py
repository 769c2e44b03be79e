"""Delta forms: the fiber letter actions, gradings, the bridge to
polyvector densities, coordinate changes, and fiber integration."""

import random
from fractions import Fraction

import pytest

from supercalc.algebra import SuperPoly, transport
from supercalc.charts import Chart, CoordinateMap
from supercalc.derham import d, fiber_name, form_table
from supercalc.integral_forms import (
    BerSection,
    IntegralForm,
    _plain_polynomial,
    pair,
    polyvector_name,
    polyvector_table,
)
from supercalc.integration import PiValue, berezin_integral
from supercalc.pseudoforms import (
    CWOperator,
    DeltaForm,
    cw_apply,
    fiber_integral,
    from_integral_form,
    gaussian_fiber_integral,
    to_integral_form,
    unsafe_middle_picture,
)
from supercalc.randoms import random_superpoly

R01 = Chart((), ("th",), label="R01")
R02 = Chart((), ("th1", "th2"), label="R02")
R11 = Chart(("x",), ("th",), label="R11")
R12 = Chart(("x",), ("th1", "th2"), label="R12")
R21 = Chart(("x", "y"), ("th",), label="R21")
R22 = Chart(("x", "y"), ("th1", "th2"), label="R22")

SQRT_PI = PiValue.pi_power(Fraction(1, 2))


def gen(table, name):
    return SuperPoly.generator(table, name)


def delta_term(chart, coefficient, eps, ells):
    return DeltaForm(chart, {(tuple(eps), tuple(ells)): coefficient})


def random_delta_form(rng, chart, terms=3, max_order=2):
    out = DeltaForm.zero(chart)
    for _ in range(terms):
        eps = tuple(rng.randrange(2) for _ in range(chart.p))
        ells = tuple(rng.randrange(max_order + 1) for _ in range(chart.q))
        coeff = random_superpoly(rng, chart.table, terms=2, max_exp=2)
        out = out + delta_term(chart, coeff, eps, ells)
    return out


def homogeneous_delta_form(rng, chart, degree):
    """A random form whose every term has the requested Z-degree."""
    out = DeltaForm.zero(chart)
    for _ in range(2):
        dx_count = rng.randint(max(0, degree), chart.p)
        budget = dx_count - degree
        ones = rng.sample(range(chart.p), dx_count)
        eps = tuple(1 if i in ones else 0 for i in range(chart.p))
        ells = [0] * chart.q
        for _ in range(budget):
            ells[rng.randrange(chart.q)] += 1
        coeff = random_superpoly(rng, chart.table, terms=2, max_exp=1)
        out = out + delta_term(chart, coeff, eps, tuple(ells))
    return out


def random_fiber_form(rng, chart, fiber_deg):
    """A differential form with every monomial of the given fiber degree."""
    ftab = form_table(chart.table)
    out = SuperPoly.zero(ftab)
    for _ in range(2):
        dx_count = rng.randint(max(0, fiber_deg - 6), min(chart.p, fiber_deg))
        powers = {fiber_name(n): 1
                  for n in rng.sample(chart.even_names, dx_count)}
        budget = fiber_deg - dx_count
        for _ in range(budget):
            name = fiber_name(rng.choice(chart.odd_names))
            powers[name] = powers.get(name, 0) + 1
        mono = SuperPoly.from_monomial(ftab, powers)
        coeff = transport(random_superpoly(rng, chart.table, terms=2, max_exp=1),
                          ftab)
        out = out + coeff * mono
    return out


def random_split_map(rng, source, target):
    """x' triangular in x with constant diagonal, th' = G(x) th, det G constant."""
    images = {}
    evens = source.even_names
    for i, tname in enumerate(target.even_names):
        img = gen(source.table, evens[i]).scale(rng.choice([1, 2, -1, 3]))
        if i:
            shear = gen(source.table, evens[rng.randrange(i)])
            img = img + (shear * shear).scale(rng.choice([0, 1, -2]))
        images[tname] = img
    odds = source.odd_names
    for a, tname in enumerate(target.odd_names):
        img = gen(source.table, odds[a]).scale(rng.choice([1, -1, 2]))
        for b in range(a):
            weight = random_superpoly(rng, source.table, parity=0,
                                      terms=1, max_exp=1)
            even_part = SuperPoly(source.table,
                                  {m: c for m, c in weight.terms.items()
                                   if not m[1]})
            img = img + even_part * gen(source.table, odds[b])
        images[tname] = img
    return CoordinateMap(source, target, images)


def form_pullback(m, eta):
    """Substitute coordinate images and their differentials into a form."""
    src_ftab = form_table(m.source.table)
    assignment = {}
    for name in m.target.coordinate_names:
        img = transport(m.images[name], src_ftab)
        assignment[name] = img
        assignment[fiber_name(name)] = d(img)
    return _plain_polynomial(eta.substitute(assignment, src_ftab))


class TestCWAction:
    def test_multiplication_kills_plain_delta(self):
        plain = delta_term(R01, 1, (), (0,))
        assert cw_apply("dth", plain).is_zero()

    def test_derivative_raises_order(self):
        for order in range(4):
            start = delta_term(R01, 1, (), (order,))
            assert cw_apply("dd_dth", start) == delta_term(R01, 1, (), (order + 1,))

    def test_multiplication_lowers_with_distribution_factor(self):
        once = delta_term(R01, 1, (), (1,))
        assert cw_apply("dth", once) == delta_term(R01, -1, (), (0,))
        thrice = delta_term(R01, 1, (), (3,))
        assert cw_apply("dth", thrice) == delta_term(R01, -3, (), (2,))

    def test_dx_letter_annihilates_occupied(self):
        assert cw_apply("dx", DeltaForm.top(R11)).is_zero()

    def test_dx_derivative_annihilates_empty(self):
        empty = delta_term(R11, 1, (0,), (0,))
        assert cw_apply("dd_dx", empty).is_zero()

    def test_dx_insertion_passes_earlier_letters(self):
        with_x = delta_term(R21, 1, (1, 0), (0,))
        assert cw_apply("dy", with_x) == delta_term(R21, -1, (1, 1), (0,))
        without = delta_term(R21, 1, (0, 0), (0,))
        assert cw_apply("dy", without) == delta_term(R21, 1, (0, 1), (0,))

    def test_odd_coefficient_costs_a_sign(self):
        th = gen(R11.table, "th")
        assert (cw_apply("dx", delta_term(R11, th, (0,), (0,)))
                == delta_term(R11, -th, (1,), (0,)))

    def test_clifford_weyl_relations_randomized(self):
        rng = random.Random(421)
        checked = 0
        for chart in (R11, R12, R21, R22):
            dths = [fiber_name(n) for n in chart.odd_names]
            dxs = [fiber_name(n) for n in chart.even_names]
            for _ in range(5):
                w = random_delta_form(rng, chart)
                for a in dths:
                    for b in dths:
                        got = (cw_apply(f"dd_{a} {b}", w)
                               - cw_apply(f"{b} dd_{a}", w))
                        want = w if a == b else DeltaForm.zero(chart)
                        assert got == want
                        checked += 1
                for i in dxs:
                    for j in dxs:
                        got = (cw_apply(f"dd_{i} {j}", w)
                               + cw_apply(f"{j} dd_{i}", w))
                        want = w if i == j else DeltaForm.zero(chart)
                        assert got == want
                        checked += 1
        assert checked >= 50

    def test_word_application_composes(self):
        rng = random.Random(422)
        letters = ["dx", "dd_dx", "dth1", "dd_dth1", "dth2", "dd_dth2"]
        for _ in range(10):
            w = random_delta_form(rng, R12)
            word = [rng.choice(letters) for _ in range(3)]
            stepwise = w
            for token in reversed(word):
                stepwise = cw_apply(token, stepwise)
            assert cw_apply(" ".join(word), w) == stepwise
            assert cw_apply(CWOperator(word), w) == stepwise

    def test_operator_product_concatenates(self):
        op = CWOperator("dd_dth1") * CWOperator("dth2 dx")
        assert op == CWOperator("dd_dth1 dth2 dx")
        assert op.z_shift() == -1 + 1 + 1

    def test_malformed_letter_rejected(self):
        with pytest.raises(ValueError, match="malformed"):
            CWOperator("dd_")
        with pytest.raises(ValueError, match="not a fiber letter"):
            cw_apply("dq", DeltaForm.top(R11))


class TestTermStructure:
    def test_deltas_anticommute(self):
        forward = DeltaForm.from_factors(R02, 1, [("dth1", 0), ("dth2", 0)])
        backward = DeltaForm.from_factors(R02, 1, [("dth2", 0), ("dth1", 0)])
        assert backward == -forward

    def test_delta_passes_dx_with_sign(self):
        forward = DeltaForm.from_factors(R11, 1, ["dx", ("dth", 1)])
        backward = DeltaForm.from_factors(R11, 1, [("dth", 1), "dx"])
        assert backward == -forward

    def test_repeated_dx_squares_to_zero(self):
        assert DeltaForm.from_factors(
            R12, 1, ["dx", "dx", ("dth1", 0), ("dth2", 0)]).is_zero()

    def test_repeated_delta_slot_rejected(self):
        with pytest.raises(ValueError, match="appears twice"):
            DeltaForm.from_factors(R02, 1, [("dth1", 0), ("dth1", 1)])

    def test_missing_delta_slot_rejected(self):
        with pytest.raises(ValueError, match="missing dth2"):
            DeltaForm.from_factors(R02, 1, [("dth1", 0)])

    def test_shape_validation(self):
        with pytest.raises(ValueError, match="0/1 marker"):
            DeltaForm(R11, {((2,), (0,)): 1})
        with pytest.raises(ValueError, match="nonnegative delta order"):
            DeltaForm(R11, {((1,), (-1,)): 1})
        with pytest.raises(ValueError, match="not over the chart"):
            DeltaForm(R11, {((1,), (0,)): SuperPoly.one(R12.table)})

    def test_module_operations(self):
        th = gen(R11.table, "th")
        w = DeltaForm.top(R11)
        assert (w + w).scale(Fraction(1, 2)) == w
        assert (w - w).is_zero()
        assert (-w) + w == DeltaForm.zero(R11)
        assert w.times(th) == DeltaForm.top(R11, th)
        mismatched = DeltaForm.top(R12)
        with pytest.raises(ValueError, match="different charts"):
            w + mismatched

    def test_rendering_mentions_letters(self):
        text = str(DeltaForm.from_factors(R11, 1, ["dx", ("dth", 2)]))
        assert "dx" in text and "del(dth,2)" in text
        assert str(DeltaForm.zero(R11)) == "0"


class TestGradings:
    def test_pivot_degree_and_parity(self):
        for chart in (R01, R11, R12, R21, R22):
            top = DeltaForm.top(chart)
            assert top.z_degree() == chart.p
            assert top.parity() == (chart.p + chart.q) % 2
            assert top.picture() == chart.q

    def test_derived_delta_sits_below_zero(self):
        assert delta_term(R02, 1, (), (1, 0)).z_degree() == -1

    def test_mixed_degrees_reported(self):
        mixed = DeltaForm.top(R11) + delta_term(R11, 1, (0,), (0,))
        assert mixed.z_degrees() == frozenset({0, 1})
        with pytest.raises(ValueError, match=r"mixed degrees: \{0: 1, 1: 1\}"):
            mixed.z_degree()

    def test_zero_form_has_no_degree(self):
        assert DeltaForm.zero(R11).z_degree() is None
        assert DeltaForm.zero(R11).parity() is None

    def test_degree_shift_matches_z_shift(self):
        rng = random.Random(422)
        letters = ["dx", "dd_dx", "dth1", "dd_dth1", "dth2", "dd_dth2"]
        moved = 0
        for _ in range(30):
            w = homogeneous_delta_form(rng, R12, rng.choice([-1, 0, 1]))
            token = rng.choice(letters)
            out = cw_apply(token, w)
            if out.is_zero() or w.is_zero():
                continue
            shift = CWOperator(token).z_shift()
            assert out.z_degree() == w.z_degree() + shift
            moved += 1
        assert moved >= 10

    def test_middle_picture_bookkeeping(self):
        th1 = gen(R12.table, "th1")
        sym = unsafe_middle_picture(R12, th1, (1,), {"dth1": 2})
        assert sym.z_degree() == 1 - 2
        assert sym.picture() == 1
        assert sym.parity() == (1 + 1 + 1) % 2
        assert not hasattr(sym, "transform")
        assert "del(dth1,2)" in repr(sym)

    def test_middle_picture_validation(self):
        with pytest.raises(ValueError, match="unknown delta direction"):
            unsafe_middle_picture(R12, 1, (0,), {"dq": 0})
        with pytest.raises(ValueError, match="0/1 marker"):
            unsafe_middle_picture(R12, 1, (3,), {})


class TestIsomorphism:
    def test_pivot_maps_to_plain_density(self):
        for chart in (R11, R12, R22):
            sigma = to_integral_form(DeltaForm.top(chart))
            assert sigma.poly == SuperPoly.one(sigma.table)
            assert sigma.degree() == chart.p
            assert from_integral_form(sigma) == DeltaForm.top(chart)

    def test_dx_derivative_becomes_polyvector_letter(self):
        lowered = cw_apply("dd_dx", DeltaForm.top(R12))
        sigma = to_integral_form(lowered)
        want = SuperPoly.generator(polyvector_table(R12), polyvector_name("x"))
        assert sigma.poly == want

    def test_localized_generator_counterpart(self):
        th1, th2 = gen(R02.table, "th1"), gen(R02.table, "th2")
        body = DeltaForm.top(R02, th1 * th2)
        sigma = to_integral_form(body)
        assert sigma.as_section() == BerSection(R02, th1 * th2)
        assert from_integral_form(sigma) == body

    def test_round_trip_randomized(self):
        rng = random.Random(423)
        checked = 0
        for chart in (R11, R12, R21, R22):
            for _ in range(5):
                w = random_delta_form(rng, chart)
                back = from_integral_form(to_integral_form(w))
                assert back == w
                checked += 1
        assert checked >= 20

    def test_reverse_round_trip_randomized(self):
        rng = random.Random(423)
        for chart in (R11, R12, R22):
            table = polyvector_table(chart)
            for _ in range(7):
                sigma = IntegralForm(chart,
                                     random_superpoly(rng, table, terms=3,
                                                      max_exp=2))
                again = to_integral_form(from_integral_form(sigma))
                assert again.poly == sigma.poly

    def test_degrees_agree(self):
        rng = random.Random(423)
        for chart in (R12, R22):
            for degree in (chart.p, 0, -1):
                w = homogeneous_delta_form(rng, chart, degree)
                sigma = to_integral_form(w)
                if not w.is_zero():
                    assert sigma.degree() == w.z_degree() == degree


class TestTransform:
    def test_linear_delta_scaling(self):
        src = Chart((), ("ps",), label="S")
        m = CoordinateMap(src, R01, {"th": gen(src.table, "ps").scale(2)})
        plain = delta_term(R01, 1, (), (0,))
        assert plain.transform(m) == delta_term(src, Fraction(1, 2), (), (0,))
        derived = delta_term(R01, 1, (), (1,))
        assert derived.transform(m) == delta_term(src, Fraction(1, 4), (), (1,))

    def test_identity_map_fixes_forms(self):
        rng = random.Random(426)
        ident = CoordinateMap(R12, R12, {
            name: gen(R12.table, name) for name in R12.coordinate_names})
        for _ in range(5):
            w = random_delta_form(rng, R12)
            assert w.transform(ident) == w

    def test_pivot_transforms_by_berezinian(self):
        src = Chart(("y",), ("e1", "e2"), label="V")
        y, e1, e2 = (gen(src.table, n) for n in ("y", "e1", "e2"))
        m = CoordinateMap(src, R12, {
            "x": y + e1 * e2,
            "th1": e1 + y * e2,
            "th2": e2,
        })
        moved = DeltaForm.top(R12).transform(m)
        ber = _plain_polynomial(m.ber_jacobian())
        assert moved == DeltaForm.top(src).times(ber)

    def test_pivot_berezinian_randomized_split(self):
        rng = random.Random(424)
        pairs = [(Chart(("u",), ("ps",), label="S11"), R11),
                 (Chart(("u",), ("ps1", "ps2"), label="S12"), R12),
                 (Chart(("u", "v"), ("ps1", "ps2"), label="S22"), R22)]
        for src, tgt in pairs:
            for _ in range(7):
                m = random_split_map(rng, src, tgt)
                moved = DeltaForm.top(tgt).transform(m)
                ber = _plain_polynomial(m.ber_jacobian())
                assert moved == DeltaForm.top(src).times(ber)

    def test_naturality_against_density_transform(self):
        rng = random.Random(424)
        pairs = [(Chart(("u",), ("ps1", "ps2"), label="S12"), R12),
                 (Chart(("u", "v"), ("ps1", "ps2"), label="S22"), R22)]
        checked = 0
        for src, tgt in pairs:
            for _ in range(8):
                m = random_split_map(rng, src, tgt)
                degree = rng.choice([tgt.p, tgt.p - 1, 0, -1])
                w = homogeneous_delta_form(rng, tgt, degree)
                eta = random_fiber_form(rng, tgt, tgt.p - degree)
                direct = pair(to_integral_form(w.transform(m)),
                              form_pullback(m, eta)).as_section()
                routed = pair(to_integral_form(w), eta).as_section().transform(m)
                assert direct == routed
                checked += 1
        assert checked >= 16

    def test_top_degree_naturality(self):
        rng = random.Random(425)
        src = Chart(("u",), ("ps1", "ps2"), label="S12")
        for _ in range(6):
            m = random_split_map(rng, src, R12)
            f = random_superpoly(rng, R12.table, terms=2, max_exp=2)
            w = DeltaForm.top(R12, f)
            lhs = to_integral_form(w.transform(m)).as_section()
            rhs = BerSection(R12, f).transform(m)
            assert lhs == rhs

    def test_singular_odd_block_rejected(self):
        src = Chart((), ("ps1", "ps2"), label="S02")
        ps1, ps2 = gen(src.table, "ps1"), gen(src.table, "ps2")
        m = CoordinateMap(src, R02, {"th1": ps1 + ps2, "th2": ps1 + ps2})
        with pytest.raises(ValueError, match="delta argument not reducible"):
            DeltaForm.top(R02).transform(m)

    def test_wrong_chart_rejected(self):
        src = Chart((), ("ps",), label="S")
        m = CoordinateMap(src, R01, {"th": gen(src.table, "ps")})
        with pytest.raises(ValueError, match="target of the map"):
            DeltaForm.top(R02).transform(m)


class TestFiberIntegral:
    def test_localized_form_integrates_to_one(self):
        th1, th2 = gen(R02.table, "th1"), gen(R02.table, "th2")
        body = DeltaForm.top(R02, th1 * th2)
        section = fiber_integral(body)
        assert section == BerSection(R02, th1 * th2)
        assert berezin_integral(section) == 1

    def test_derived_delta_integrates_to_zero(self):
        assert fiber_integral(delta_term(R02, 1, (), (1, 0))).is_zero()

    def test_missing_dx_integrates_to_zero(self):
        assert fiber_integral(delta_term(R11, 1, (0,), (0,))).is_zero()

    def test_round_trip_with_densities(self):
        rng = random.Random(425)
        checked = 0
        for chart in (R11, R12, R22):
            for _ in range(7):
                s = BerSection(chart,
                               random_superpoly(rng, chart.table, terms=3,
                                                max_exp=2))
                back = fiber_integral(from_integral_form(IntegralForm.from_section(s)))
                assert back == s
                checked += 1
        assert checked >= 20

    def test_only_top_terms_contribute(self):
        rng = random.Random(426)
        for _ in range(5):
            w = random_delta_form(rng, R12)
            top_key = ((1,), (0, 0))
            expect = w.terms.get(top_key, SuperPoly.zero(R12.table))
            assert fiber_integral(w) == BerSection(R12, expect)


class TestGaussianFiberIntegral:
    def test_weighted_line_form(self):
        ftab = form_table(R01.table)
        weight, section = gaussian_fiber_integral(R01, gen(ftab, "th"),
                                                  gaussian=("dth",))
        assert weight == SQRT_PI
        assert section == BerSection(R01, gen(R01.table, "th"))
        assert weight * berezin_integral(section) == SQRT_PI

    def test_unweighted_direction_diverges(self):
        ftab = form_table(R01.table)
        with pytest.raises(ValueError, match="divergent"):
            gaussian_fiber_integral(R01, gen(ftab, "th") * gen(ftab, "dth"))

    def test_weighted_form_with_base_function(self):
        ftab = form_table(R11.table)
        g = gen(ftab, "x") * gen(ftab, "x")
        body = gen(ftab, "dx") * g * gen(ftab, "th")
        weight, section = gaussian_fiber_integral(R11, body, gaussian=("dth",))
        x, th = gen(R11.table, "x"), gen(R11.table, "th")
        assert weight == SQRT_PI
        assert section == BerSection(R11, x * x * th)

    def test_even_moments(self):
        ftab = form_table(R01.table)
        dth = gen(ftab, "dth")
        _, second = gaussian_fiber_integral(R01, dth * dth, gaussian=("dth",))
        assert second == BerSection(R01, SuperPoly.constant(R01.table,
                                                            Fraction(1, 2)))
        _, fourth = gaussian_fiber_integral(R01, dth * dth * dth * dth,
                                            gaussian=("dth",))
        assert fourth == BerSection(R01, SuperPoly.constant(R01.table,
                                                            Fraction(3, 4)))

    def test_odd_moment_vanishes(self):
        ftab = form_table(R01.table)
        _, section = gaussian_fiber_integral(R01, gen(ftab, "dth"),
                                             gaussian=("dth",))
        assert section.is_zero()

    def test_missing_dx_block_drops_term(self):
        ftab = form_table(R11.table)
        _, section = gaussian_fiber_integral(R11, gen(ftab, "th"),
                                             gaussian=("dth",))
        assert section.is_zero()

    def test_marker_validation(self):
        ftab = form_table(R01.table)
        with pytest.raises(ValueError, match="not an even fiber direction"):
            gaussian_fiber_integral(R01, gen(ftab, "th"), gaussian=("dx",))
        with pytest.raises(ValueError, match="not over the chart"):
            gaussian_fiber_integral(R01, gen(R11.table, "x"), gaussian=("dth",))
