import numpy as np
import pytest
from sympy.combinatorics import Permutation as SymPermutation
from sympy.combinatorics import PermutationGroup

from ybe.services.abgroup import FiniteAbelianGroup
from ybe.services.family import blocks, build, cyclic_params, identity_params, load_grid
from ybe.services.permgroup import (
    Permutation,
    analyze,
    center,
    cyclic_hypothesis,
    det_Nk,
    enumerate_group,
    generator_orbits,
    orbits_from_elements,
    predicted_class,
    wreath_check,
)
from ybe.tests.conftest import LARGE_GRID_POINTS
from ybe.utils.errors import EnumerationCapExceeded
from ybe.utils.logging import setup_logger

logger = setup_logger(__name__)


def sympy_order(sigma) -> int:
    return PermutationGroup([SymPermutation(list(row)) for row in sigma]).order()


def _assert_embedding(params, g) -> None:
    check = wreath_check(params, g)
    assert check.nu_affine and check.nu_homomorphic and check.nu_injective
    assert check.nu_matches_definition
    assert check.order_is_p_power is not False


class TestPermutation:
    """The small Permutation value type."""

    def test_composition_convention(self):
        """Test (p * q)(y) = p(q(y))."""
        p = Permutation((1, 2, 0))
        q = Permutation((0, 2, 1))
        assert (p * q)(1) == p(q(1))
        assert (p * p.inverse()).is_identity
        assert p.order() == 3
        with pytest.raises(ValueError):
            Permutation((0, 0, 1))


class TestEnumeration:
    """BFS closure of the generators."""

    def test_orders_match_sympy(self, vendramin, z3, vendramin_group, z3_group):
        """Test enumerated orders against the Schreier-Sims order."""
        logger.info("Testing group orders against sympy")
        assert vendramin_group.order == sympy_order(vendramin.sigma) == 64
        assert z3_group.order == sympy_order(z3.sigma) == 6561

    def test_identity_first_and_witnesses(self, vendramin_group):
        """Test that every element is reproduced by its generator word."""
        g = vendramin_group
        assert g.elements[0].tolist() == list(range(g.n))
        for i in range(g.order):
            assert g.evaluate(g.witness(i)).tolist() == g.elements[i].tolist()

    def test_mul_and_inv(self, vendramin_group):
        """Test index arithmetic in the enumerated group."""
        g = vendramin_group
        for i in range(0, g.order, 7):
            assert g.mul(i, g.inv(i)) == 0
            assert g.mul(0, i) == i

    def test_cap(self, vendramin):
        """Test that the cap stops enumeration with a partial size."""
        with pytest.raises(EnumerationCapExceeded) as info:
            enumerate_group(vendramin, cap=10)
        assert info.value.cap == 10
        assert info.value.partial_size == 11
        assert info.value.exit_code == 2

    def test_orbits_are_blocks(self, vendramin, vendramin_params_fx, vendramin_group):
        """Test generator orbits against the element orbits and the blocks."""
        assert generator_orbits(vendramin.sigma) == blocks(vendramin_params_fx)
        assert orbits_from_elements(vendramin_group) == blocks(vendramin_params_fx)


class TestAnalysis:
    """Series, center and class."""

    def test_vendramin(self, vendramin_group):
        """Test derived length 2 and class 2 on the 64-element group."""
        analysis = analyze(vendramin_group)
        assert analysis.order == 64
        assert analysis.derived_length == 2
        assert analysis.nilpotency_class == 2
        assert analysis.orbits_consistent
        assert analysis.center_order == len(center(vendramin_group))
        assert analysis.generator_orders == [2] * 8

    def test_z3_class_three(self, z3, z3_group):
        """Test class 3 and agreement with sympy on nilpotency."""
        analysis = analyze(z3_group)
        assert analysis.nilpotency_class == 3
        assert analysis.derived_length == 2
        sym = PermutationGroup([SymPermutation(list(row)) for row in z3.sigma])
        assert sym.is_nilpotent

    def test_predicted_class(self):
        """Test the class formula for prime powers only."""
        assert predicted_class(2) == 2
        assert predicted_class(3) == 3
        assert predicted_class(4) == 6
        assert predicted_class(8) == 16
        assert predicted_class(6) is None


class TestWreath:
    """Embedding into the product of wreath products."""

    def test_vendramin_matches(self, vendramin_params_fx, vendramin_group):
        """Test predicted order, class and the embedding checks."""
        check = wreath_check(vendramin_params_fx, vendramin_group)
        assert check.applicable
        assert check.predicted_order == check.measured_order == 64
        assert check.predicted_class == 2
        assert check.nu_injective
        assert check.nu_homomorphic
        assert check.matches

    def test_z3_matches(self, z3_params, z3_group):
        """Test the Z/3 case."""
        check = wreath_check(z3_params, z3_group)
        assert check.predicted_order == 6561
        assert check.matches

    def test_hypotheses(self):
        """Test the first failing hypothesis is named."""
        Z2 = FiniteAbelianGroup.cyclic(2)
        assert cyclic_hypothesis(identity_params(Z2, 3)) == "gcd(|I| - 1, k) = 1"
        V4 = FiniteAbelianGroup.parse("Z/2 x Z/2")
        assert cyclic_hypothesis(identity_params(V4)) == "A = B = Z/k"
        assert cyclic_hypothesis(cyclic_params(5)) is None

    def test_embedding_without_prediction(self):
        """Test that a non-applicable instance still embeds."""
        params = identity_params(FiniteAbelianGroup.cyclic(2), 3)
        g = enumerate_group(build(params), cap=100_000)
        check = wreath_check(params, g)
        assert not check.applicable
        assert check.predicted_order is None
        assert check.nu_injective and check.nu_affine
        assert check.wreath_order % check.measured_order == 0

    def test_grid_embeddings(self, data_dir):
        """Test the embedding and the p-group property on every grid point that fits the cap."""
        skipped = []
        for index, params in enumerate(load_grid(data_dir / "grid.txt")):
            try:
                g = enumerate_group(build(params), cap=20_000)
            except EnumerationCapExceeded:
                skipped.append(index)
                continue
            _assert_embedding(params, g)
        logger.info("Embedding skipped on grid points %s", skipped)
        assert skipped == LARGE_GRID_POINTS

    @pytest.mark.heavy
    @pytest.mark.parametrize("index", [7, 13])
    def test_large_grid_embeddings(self, data_dir, index):
        """Test the embedding on the grid points above the fast cap."""
        params = load_grid(data_dir / "grid.txt")[index]
        g = enumerate_group(build(params), cap=2_000_000)
        assert g.order > 20_000
        _assert_embedding(params, g)

    @pytest.mark.heavy
    def test_z4(self):
        """Test the 32-point Z/4 instance: order 4^10, class 6."""
        params = cyclic_params(4)
        g = enumerate_group(build(params), cap=2_000_000)
        assert g.order == 1_048_576
        check = wreath_check(params, g)
        assert check.measured_class == 6
        assert check.matches


class TestDeterminant:
    """det of the all-ones-minus-identity matrix."""

    @pytest.mark.parametrize("k", range(2, 13))
    def test_closed_form(self, k):
        """Test (-1)^(k-1) (k-1)."""
        assert det_Nk(k) == (-1) ** (k - 1) * (k - 1)

    def test_small_k(self):
        """Test the lower bound on k."""
        with pytest.raises(ValueError):
            det_Nk(1)
        assert np.isclose(np.linalg.det(np.ones((3, 3)) - np.eye(3)), det_Nk(3))
