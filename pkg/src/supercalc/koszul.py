"""The two-sided Koszul complex of a free p|q module and its dual.

The complex lives in a single supercommutative algebra: even module
generators v_i, odd ones ch_a, their parity-reversed partners piv_i (odd)
and pich_a (even).  The differential is the odd derivation sending each
parity-reversed generator to its partner; the dual complex replaces the
parity-reversed generators by dual ones (dpiv_i, dpich_a) and the
differential by multiplication with the same odd element.

Homology is computed fiberwise over the rationals by exact row reduction
of the differential restricted to a bidegree (partner-side degree,
module-side degree), both of which are finite-dimensional.  The dual
complex has one-dimensional homology in degree p, generated by
ch_1...ch_q * dpiv_1...dpiv_p, and an automorphism of the module acts on
that class by the reciprocal of its Berezinian; the class transport is
computed by honest multiplication in the algebra, not by the determinant
formula, so the comparison with `berezinian` is a genuine cross-check.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from typing import Literal, NamedTuple, Sequence

from supercalc.algebra import GeneratorTable, Monomial, SuperPoly, transport
from supercalc.supermatrix import SuperMatrix


class HomologyRanks(NamedTuple):
    kernel_dim: int
    image_dim: int
    homology_dim: int


def _compositions(total: int, slots: int):
    """Weak compositions of `total` into `slots` parts."""
    if slots == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, slots - 1):
            yield (first,) + rest


def exact_rank(matrix: Sequence[Sequence[Fraction]]) -> int:
    """Row reduction over the rationals."""
    rows = [list(r) for r in matrix]
    if not rows or not rows[0]:
        return 0
    ncols = len(rows[0])
    rank = 0
    for col in range(ncols):
        pivot = next((r for r in range(rank, len(rows)) if rows[r][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [x * inv for x in rows[rank]]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                factor = rows[r][col]
                rows[r] = [a - factor * b for a, b in zip(rows[r], rows[rank])]
        rank += 1
        if rank == len(rows):
            break
    return rank


class KoszulAlgebra:
    """Both sides of the complex for a free module of rank p|q, optionally
    over a Grassmann coefficient algebra (for matrices with odd entries)."""

    def __init__(self, p: int, q: int,
                 coefficient_odds: Sequence[str] = ()):
        if p < 0 or q < 0:
            raise ValueError("ranks must be nonnegative")
        self.p = p
        self.q = q
        self.coefficient_odds = tuple(coefficient_odds)
        self.v_names = tuple(f"v{i}" for i in range(1, p + 1))
        self.ch_names = tuple(f"ch{a}" for a in range(1, q + 1))
        self.piv_names = tuple(f"piv{i}" for i in range(1, p + 1))
        self.pich_names = tuple(f"pich{a}" for a in range(1, q + 1))
        self.dpiv_names = tuple(f"dpiv{i}" for i in range(1, p + 1))
        self.dpich_names = tuple(f"dpich{a}" for a in range(1, q + 1))
        reserved = set(self.v_names + self.ch_names + self.piv_names
                       + self.pich_names + self.dpiv_names + self.dpich_names)
        if reserved & set(self.coefficient_odds):
            raise ValueError("coefficient generator names collide with the "
                             "module generator names")
        odds_prefix = list(self.coefficient_odds) + list(self.ch_names)
        self.table = GeneratorTable.chart(
            list(self.v_names) + list(self.pich_names),
            odds_prefix + list(self.piv_names))
        self.dual_table = GeneratorTable.chart(
            list(self.v_names) + list(self.dpich_names),
            odds_prefix + list(self.dpiv_names))
        self.coefficient_table = GeneratorTable.chart(
            [], list(self.coefficient_odds))

    # -- the differentials -------------------------------------------------

    def koszul_delta(self, e: SuperPoly) -> SuperPoly:
        """The odd derivation with piv_i -> v_i and pich_a -> ch_a."""
        if e.table != self.table:
            raise ValueError("element is not in the Koszul algebra")
        out = SuperPoly.zero(self.table)
        for v, piv in zip(self.v_names, self.piv_names):
            out = out + SuperPoly.generator(self.table, v) * e.left_derivative(piv)
        for ch, pich in zip(self.ch_names, self.pich_names):
            out = out + SuperPoly.generator(self.table, ch) * e.left_derivative(pich)
        return out

    def dual_delta_element(self) -> SuperPoly:
        out = SuperPoly.zero(self.dual_table)
        for v, dpiv in zip(self.v_names, self.dpiv_names):
            out = out + (SuperPoly.generator(self.dual_table, v)
                         * SuperPoly.generator(self.dual_table, dpiv))
        for ch, dpich in zip(self.ch_names, self.dpich_names):
            out = out + (SuperPoly.generator(self.dual_table, ch)
                         * SuperPoly.generator(self.dual_table, dpich))
        return out

    def dual_delta(self, e: SuperPoly) -> SuperPoly:
        """Multiplication by the odd element sum v_i dpiv_i + sum ch_a dpich_a."""
        if e.table != self.dual_table:
            raise ValueError("element is not in the dual algebra")
        return self.dual_delta_element() * e

    # -- bigraded bases ----------------------------------------------------

    def _names_for(self, which: Literal["koszul", "dual"]):
        table = self.table if which == "koszul" else self.dual_table
        pi_odd = self.piv_names if which == "koszul" else self.dpiv_names
        pi_even = self.pich_names if which == "koszul" else self.dpich_names
        return table, pi_odd, pi_even

    def basis(self, which: Literal["koszul", "dual"], k: int,
              n: int) -> list[Monomial]:
        """Monomials of partner-side degree k and module-side degree n."""
        if self.coefficient_odds:
            raise ValueError("homology bases are computed fiberwise; build "
                             "the algebra without coefficient generators")
        table, pi_odd, pi_even = self._names_for(which)
        if k < 0 or n < 0:
            return []
        v_slots = [table.even_slot(table.index(nm)) for nm in self.v_names]
        pi_even_slots = [table.even_slot(table.index(nm)) for nm in pi_even]
        ch_pos = [table.index(nm) for nm in self.ch_names]
        pi_odd_pos = [table.index(nm) for nm in pi_odd]
        out: list[Monomial] = []
        for r_odd in range(min(self.q, n) + 1):
            for ch_subset in itertools.combinations(ch_pos, r_odd):
                for v_comp in _compositions(n - r_odd, self.p):
                    for k_odd in range(min(self.p, k) + 1):
                        for piv_subset in itertools.combinations(pi_odd_pos, k_odd):
                            for pich_comp in _compositions(k - k_odd, self.q):
                                ev = list(table.zero_exponents)
                                for slot, e in zip(v_slots, v_comp):
                                    ev[slot] = e
                                for slot, e in zip(pi_even_slots, pich_comp):
                                    ev[slot] = e
                                od = tuple(sorted(ch_subset + piv_subset))
                                out.append((tuple(ev), od))
        return out

    def differential_matrix(self, which: Literal["koszul", "dual"], k: int,
                            n: int) -> list[list[Fraction]]:
        """The differential out of bidegree (k, n), written in the monomial
        bases; rows index the target basis."""
        table, _, _ = self._names_for(which)
        source = self.basis(which, k, n)
        if which == "koszul":
            target = self.basis(which, k - 1, n + 1)
            op = self.koszul_delta
        else:
            target = self.basis(which, k + 1, n + 1)
            op = self.dual_delta
        index = {mono: i for i, mono in enumerate(target)}
        matrix = [[Fraction(0)] * len(source) for _ in target]
        for col, mono in enumerate(source):
            image = op(SuperPoly(table, {mono: Fraction(1)}))
            for out_mono, c in image.terms.items():
                matrix[index[out_mono]][col] = Fraction(c)
        return matrix

    def homology_ranks(self, which: Literal["koszul", "dual"], degree: int,
                       cutoff: int) -> HomologyRanks:
        """Exact ranks at one homological degree, totalled over module-side
        degrees 0..cutoff.  Degrees above the cutoff are not examined, so a
        zero here certifies vanishing only within that window."""
        if which not in ("koszul", "dual"):
            raise ValueError("which must be 'koszul' or 'dual'")
        if cutoff < 0:
            raise ValueError("cutoff must be nonnegative")
        k = -degree if which == "koszul" else degree
        if k < 0:
            raise ValueError("degree outside the complex")
        kernel = 0
        image = 0
        for n in range(cutoff + 1):
            dim = len(self.basis(which, k, n))
            out_rank = exact_rank(self.differential_matrix(which, k, n))
            kernel += dim - out_rank
            if n >= 1:
                k_in = k + 1 if which == "koszul" else k - 1
                if k_in >= 0:
                    image += exact_rank(self.differential_matrix(which, k_in, n - 1))
        return HomologyRanks(kernel, image, kernel - image)

    # -- the distinguished dual class and its transport --------------------

    def dual_homology_generator(self) -> SuperPoly:
        """ch_1...ch_q * dpiv_1...dpiv_p, the kernel class in degree p."""
        out = SuperPoly.one(self.dual_table)
        for name in self.ch_names + self.dpiv_names:
            out = out * SuperPoly.generator(self.dual_table, name)
        return out

    def class_coefficient(self, e: SuperPoly) -> SuperPoly:
        """Coefficient of the generator class in e, as an element of the
        coefficient algebra.  Multiples of the class never occur in an image
        of the dual differential (every image term carries a v or a dpich
        factor), so on a cycle this reads off the homology class."""
        if e.table != self.dual_table:
            raise ValueError("element is not in the dual algebra")
        table = self.dual_table
        (class_mono,) = tuple(self.dual_homology_generator().terms)
        class_od = class_mono[1]
        zero_ev = table.zero_exponents
        coeff_pos = {table.index(nm) for nm in self.coefficient_odds}
        out = SuperPoly.zero(table)
        for (ev, od), c in e.terms.items():
            if ev != zero_ev:
                continue
            eta_part = tuple(i for i in od if i in coeff_pos)
            module_part = tuple(i for i in od if i not in coeff_pos)
            if module_part == class_od:
                out = out + SuperPoly(table, {(zero_ev, eta_part): c})
        return transport(out, self.coefficient_table)

    def induced_automorphism_scalar(self, m: SuperMatrix) -> SuperPoly:
        """Transport the degree-p dual class through the automorphism with
        matrix m (entries over the coefficient algebra) and return the
        scalar it gets multiplied by."""
        if (m.p, m.q) != (self.p, self.q):
            raise ValueError("matrix shape does not match the module ranks")
        table = self.dual_table

        def lift(entry):
            return transport(entry, table)

        n_inv = m.parity_swap().inverse().rows()
        elem = SuperPoly.one(table)
        for j in range(self.q):
            img = SuperPoly.zero(table)
            for h in range(self.p):
                img = img + lift(m.B[h][j]) * SuperPoly.generator(
                    table, self.v_names[h])
            for kk in range(self.q):
                img = img + lift(m.D[kk][j]) * SuperPoly.generator(
                    table, self.ch_names[kk])
            elem = elem * img
        duals = ([SuperPoly.generator(table, nm) for nm in self.dpich_names]
                 + [SuperPoly.generator(table, nm) for nm in self.dpiv_names])
        for i in range(self.p):
            img = SuperPoly.zero(table)
            for alpha, dual_gen in enumerate(duals):
                img = img + lift(n_inv[self.q + i][alpha]) * dual_gen
            elem = elem * img
        return self.class_coefficient(elem)
