import math
from itertools import product

import numpy as np
import pytest

from ybe.services.abgroup import (
    AbHom,
    EvenMap,
    FiniteAbelianGroup,
    ab_add,
    ab_neg,
    evenmap_validate,
    hom_validate,
)
from ybe.utils.errors import (
    EvennessError,
    NotAHomomorphismError,
    ParseError,
    StructuralError,
)
from ybe.utils.logging import setup_logger

logger = setup_logger(__name__)

Z2 = FiniteAbelianGroup.cyclic(2)
Z3 = FiniteAbelianGroup.cyclic(3)
Z4 = FiniteAbelianGroup.cyclic(4)
V4 = FiniteAbelianGroup((2, 2))


class TestFiniteAbelianGroup:
    """Element arithmetic and parsing."""

    def test_parse_and_format(self):
        """Test that 'Z/2 x Z/4' parses to the right moduli and prints back."""
        g = FiniteAbelianGroup.parse("Z/2 x Z/4")
        assert g.moduli == (2, 4)
        assert g.order == 8
        assert str(g) == "Z/2 x Z/4"
        assert FiniteAbelianGroup.parse("Z/3") == Z3

    def test_parse_rejects_garbage(self):
        """Test that a malformed factor is a parse error."""
        with pytest.raises(ParseError):
            FiniteAbelianGroup.parse("Z2 x Z/4")

    def test_add_and_neg(self):
        """Test coordinatewise arithmetic."""
        g = FiniteAbelianGroup((2, 4))
        assert ab_add(g, (1, 3), (1, 2)) == (0, 1)
        assert ab_neg(g, (1, 1)) == (1, 3)
        assert ab_add(g, (0, 0), ab_neg(g, (0, 1))) == (0, 3)

    def test_dimension_mismatch(self):
        """Test that elements of the wrong rank are rejected."""
        with pytest.raises(StructuralError):
            ab_add(V4, (1,), (1, 0))

    def test_elements_are_indexed_lexicographically(self):
        """Test that index() inverts the elements listing."""
        g = FiniteAbelianGroup((2, 3))
        assert g.elements[:3] == [(0, 0), (0, 1), (0, 2)]
        assert [g.index(x) for x in g.elements] == list(range(6))

    def test_tables(self):
        """Test the cached addition and negation tables."""
        assert Z4.add_table[3][2] == 1
        assert Z4.neg_table == [0, 3, 2, 1]

    def test_generated_subgroup(self):
        """Test closure of generators."""
        assert len(Z4.generated_subgroup([(2,)])) == 2
        assert len(V4.generated_subgroup([(1, 0), (0, 1)])) == 4


class TestHomomorphisms:
    """Validation of integer matrices as homomorphisms."""

    def test_identity_is_isomorphism(self):
        """Test that the identity validates as an isomorphism."""
        h = hom_validate(AbHom.identity(V4))
        assert h.is_isomorphism
        assert h((1, 0)) == (1, 0)

    def test_z2_to_z4_doubling(self):
        """Test that 1 -> 2 is an injective, non-surjective hom Z/2 -> Z/4."""
        h = hom_validate(AbHom(Z2, Z4, ((2,),)))
        assert h.injective
        assert not h.surjective
        assert h((1,)) == (2,)

    def test_not_a_homomorphism(self):
        """Test that 1 -> 1 from Z/2 to Z/4 fails on generator 0."""
        with pytest.raises(NotAHomomorphismError) as info:
            hom_validate(AbHom(Z2, Z4, ((1,),)))
        assert info.value.generator == 0

    def test_shape_mismatch(self):
        """Test that a matrix of the wrong shape is structural."""
        with pytest.raises(StructuralError):
            hom_validate(AbHom(V4, Z2, ((1,),)))

    def test_parse_matrix(self):
        """Test the JSON matrix format."""
        h = AbHom.parse(V4, Z2, "[[1,1]]")
        assert hom_validate(h)((1, 1)) == (0,)
        assert str(h) == "[[1,1]]"
        with pytest.raises(ParseError):
            AbHom.parse(V4, Z2, "[1,1")

    def test_zero_map(self):
        """Test the zero hom is neither injective nor surjective."""
        h = hom_validate(AbHom.zero(Z3, Z3))
        assert not h.injective and not h.surjective


class TestEvenMaps:
    """Even maps f(-a) = f(a) and their flags."""

    def test_indicator_on_z3(self):
        """Test the map 0 -> 0, 1, 2 -> 1 on Z/3."""
        f = evenmap_validate(EvenMap.parse_lines(Z3, Z3, ["0 -> 0", "1 -> 1", "2 -> 1"]))
        assert f.zero_to_zero
        assert f.kernel_trivial
        assert f.generates_target
        assert f.is_indicator()

    def test_identity_on_z3_is_not_even(self):
        """Test that id on Z/3 fails evenness."""
        with pytest.raises(EvennessError):
            evenmap_validate(EvenMap.from_function(Z3, Z3, lambda a: a))

    def test_missing_entry(self):
        """Test that a partial table is structural."""
        with pytest.raises(StructuralError):
            evenmap_validate(EvenMap(Z3, Z3, {(0,): (0,), (1,): (1,)}))

    def test_zero_map_flags(self):
        """Test the flags of the zero map on the Klein group."""
        f = evenmap_validate(EvenMap.from_function(V4, V4, lambda a: (0, 0)))
        assert f.zero_to_zero
        assert not f.kernel_trivial
        assert not f.generates_target

    def test_every_map_on_exponent_two_is_even(self):
        """Test that an arbitrary map on Z/2 x Z/2 validates."""
        f = EvenMap.parse_lines(V4, Z4, ["0,0 -> 1", "1,0 -> 2", "0,1 -> 3", "1,1 -> 0"])
        checked = evenmap_validate(f)
        assert not checked.zero_to_zero
        assert checked.generates_target
        assert checked.even_map.lines()[0] == "0,0 -> 1"

    def test_bad_line(self):
        """Test the 'a -> b' syntax check."""
        with pytest.raises(ParseError):
            EvenMap.parse_lines(Z3, Z3, ["0 => 0"])


def _invariant_factor_moduli(limit: int):
    """Moduli m_1 | m_2 | ... with product <= limit: one group per isomorphism class."""
    found = [(1,)]

    def extend(prefix, product_so_far):
        last = prefix[-1] if prefix else 1
        m = 2 if not prefix else last
        while product_so_far * m <= limit:
            if m % last == 0:
                found.append(prefix + (m,))
                extend(prefix + (m,), product_so_far * m)
            m += 1

    extend((), 1)
    return found


SMALL_GROUPS = [
    Z2,
    Z3,
    Z4,
    V4,
    FiniteAbelianGroup((2, 4)),
    FiniteAbelianGroup((8,)),
    FiniteAbelianGroup((4, 4)),
    FiniteAbelianGroup((2, 2, 2)),
]


class TestGroupAxioms:
    """Abelian group laws by exhaustion."""

    def test_every_group_up_to_order_64(self):
        """Test identity, inverses, commutativity and associativity on all tables."""
        moduli = _invariant_factor_moduli(64)
        assert len([m for m in moduli if math.prod(m) == 64]) == 11
        for m in moduli:
            g = FiniteAbelianGroup(m)
            n = g.order
            table = np.array(g.add_table)
            everything = np.arange(n)
            assert (table[g.index(g.zero)] == everything).all()
            assert (table[everything, np.array(g.neg_table)] == g.index(g.zero)).all()
            assert (table == table.T).all()
            # table[table][a, b, c] = (a + b) + c, table[:, table][a, b, c] = a + (b + c)
            assert (table[table] == table[:, table]).all(), str(g)

    def test_ab_add_matches_table(self):
        """Test the element-level operations against the cached tables."""
        g = FiniteAbelianGroup((2, 6))
        for x in g.elements:
            assert g.index(ab_neg(g, x)) == g.neg_table[g.index(x)]
            for y in g.elements:
                assert g.index(ab_add(g, x, y)) == g.add_table[g.index(x)][g.index(y)]


class TestHomomorphismFlags:
    """hom_validate against brute force on small groups."""

    def test_doubling_on_z4(self):
        """Test that x -> 2x on Z/4 is a homomorphism that is not injective."""
        h = hom_validate(AbHom(Z4, Z4, ((2,),)))
        assert not h.injective
        assert not h.surjective
        assert [h(x) for x in Z4.elements] == [(0,), (2,), (0,), (2,)]

    @pytest.mark.parametrize("source", SMALL_GROUPS, ids=str)
    @pytest.mark.parametrize("target", SMALL_GROUPS, ids=str)
    def test_flags_match_image_enumeration(self, source, target):
        """Test every matrix: validity and the injective/surjective flags."""
        entries = [range(m) for m in target.moduli for _ in range(source.rank)]
        valid = 0
        for flat in product(*entries):
            matrix = tuple(
                flat[i * source.rank : (i + 1) * source.rank] for i in range(target.rank)
            )
            raw = AbHom(source, target, matrix)
            additive = all(
                raw.raw_apply(ab_add(source, x, y))
                == ab_add(target, raw.raw_apply(x), raw.raw_apply(y))
                for x in source.elements
                for y in source.elements
            )
            if not additive:
                with pytest.raises(NotAHomomorphismError):
                    hom_validate(raw)
                continue
            h = hom_validate(raw)
            kernel = [x for x in source.elements if h(x) == target.zero]
            image = {h(x) for x in source.elements}
            assert h.injective == (kernel == [source.zero])
            assert h.surjective == (image == set(target.elements))
            valid += 1
        assert valid >= 1
