import numpy as np
import pytest

from ybe.services.abgroup import FiniteAbelianGroup
from ybe.services.brace import (
    _check_associativity,
    _inverse_idx,
    associated_solution,
    brace_add,
    brace_lambda,
    brace_mul,
    brace_neg,
    build_brace,
    generator_element,
    lagrange_check,
    lambda_is_identity,
    phi_H_ideal_check,
    socle,
    verify_brace_axioms,
)
from ybe.services.family import build, cyclic_params, identity_params, load_grid
from ybe.services.permgroup import enumerate_group
from ybe.services.retraction import tower
from ybe.services.solution import FiniteSolution
from ybe.tests.conftest import LARGE_GRID_POINTS
from ybe.utils.errors import (
    ConsistencyError,
    EnumerationCapExceeded,
    NotApplicableError,
)
from ybe.utils.logging import setup_logger

logger = setup_logger(__name__)


@pytest.fixture(scope="module")
def z3_brace(z3_group):
    return build_brace(z3_group)


@pytest.fixture(scope="module")
def non_lri_brace(non_lri):
    return build_brace(enumerate_group(non_lri, cap=100))


def _assert_socle(s, b) -> int:
    """Check socle members act trivially, and the socle is trivial when s is
    irretractable. Returns 1 when the irretractable case was checked."""
    soc = socle(b)
    for u in soc.elements[:8]:
        assert lambda_is_identity(b, u)
    if tower(s).classification.kind != "irretractable":
        return 0
    assert soc.order == 1
    return 1


class TestBuild:
    """Additive structure Z^X / K."""

    def test_index_equals_order(self, vendramin_brace):
        """Test that K has index |G| = 64 and the lifts reduce bijectively."""
        b = vendramin_brace
        assert b.order == 64
        assert b.lattice.determinant() == 64
        assert int(np.prod(b.radices)) == 64
        assert len({tuple(r) for r in b.reps.tolist()}) == 64
        assert lagrange_check(b)

    def test_coset_map(self, vendramin_brace):
        """Test that a representative maps back to its permutation."""
        b = vendramin_brace
        for i in range(b.order):
            assert b.coset_map(b.reps[i]) == b.group.permutation(i)

    def test_trivial_group(self):
        """Test the brace of a trivial solution has one element."""
        g = enumerate_group(FiniteSolution.trivial(2), cap=10)
        b = build_brace(g)
        assert b.order == 1
        assert b.K_basis == [[1, 0], [0, 1]]
        assert socle(b).order == 1


class TestOperations:
    """Element-level arithmetic."""

    def test_mul_is_add_plus_lambda(self, vendramin_brace):
        """Test ab = a + lambda_a(b) on generators."""
        b = vendramin_brace
        for x in range(8):
            for y in range(8):
                u, v = generator_element(b, x), generator_element(b, y)
                assert brace_mul(b, u, v) == brace_add(b, u, brace_lambda(b, u, v))

    def test_negation(self, vendramin_brace):
        """Test u + (-u) = 0."""
        b = vendramin_brace
        u = generator_element(b, 3)
        assert brace_add(b, u, brace_neg(b, u)).index == 0

    def test_lambda_of_identity(self, vendramin_brace):
        """Test lambda_1 = id."""
        assert lambda_is_identity(vendramin_brace, 0)
        assert not lambda_is_identity(vendramin_brace, 1)


class TestAxioms:
    """Brace axioms and the socle."""

    def test_exhaustive(self, vendramin_brace):
        """Test every triple of the order-64 brace."""
        logger.info("Testing brace axioms exhaustively")
        report = verify_brace_axioms(vendramin_brace, sample="all")
        assert report.exhaustive
        assert report.triples_checked == 64**3
        assert report.additive_group
        assert report.multiplicative_group
        assert report.lambda_links
        logger.info("Brace axioms passed on %d triples", report.triples_checked)

    def test_integer_sample_within_limit_is_exhaustive(self, vendramin_brace):
        """Test that a numeric sample still checks every triple when they fit the limit."""
        report = verify_brace_axioms(vendramin_brace, sample=10, seed=3)
        assert report.exhaustive
        assert report.seed is None
        assert report.triples_checked == 64**3

    def test_non_associative_product_fails(self, vendramin_brace, monkeypatch):
        """Test that a product which is not associative is caught on free triples."""
        b = vendramin_brace
        monkeypatch.setattr(b, "mul_idx", lambda u, v: (u - v) % b.order)
        a, x, y = (np.arange(b.order) for _ in range(3))
        with pytest.raises(ConsistencyError, match="multiplicative associativity"):
            _check_associativity(b, a, np.roll(x, 1), np.roll(y, 2))
        with pytest.raises(ConsistencyError):
            verify_brace_axioms(b, sample="all")

    def test_sampled(self, z3_brace):
        """Test a seeded sample on the order-6561 brace."""
        report = verify_brace_axioms(z3_brace, sample=5000, seed=7)
        assert not report.exhaustive
        assert report.seed == 7
        assert report.triples_checked == 5000

    def test_socle_trivial(self, vendramin_brace):
        """Test that the irretractable instance has trivial socle."""
        assert socle(vendramin_brace).order == 1

    def test_grid_socles(self, data_dir):
        """Test trivial socles on the irretractable grid points that fit the cap."""
        checked, skipped = 0, []
        for index, params in enumerate(load_grid(data_dir / "grid.txt")):
            s = build(params)
            try:
                g = enumerate_group(s, cap=20_000)
            except EnumerationCapExceeded:
                skipped.append(index)
                continue
            checked += _assert_socle(s, build_brace(g))
        assert skipped == LARGE_GRID_POINTS
        assert checked >= 3

    @pytest.mark.heavy
    @pytest.mark.parametrize("index", [7, 13])
    def test_large_grid_socles(self, data_dir, index):
        """Test the socle on the grid points above the fast cap."""
        s = build(load_grid(data_dir / "grid.txt")[index])
        _assert_socle(s, build_brace(enumerate_group(s, cap=2_000_000)))

    def test_retractable_regression(self):
        """Test a trivial socle does not force irretractability."""
        s = FiniteSolution.trivial(2)
        assert tower(s).classification.kind == "multipermutation"
        assert socle(build_brace(enumerate_group(s, cap=10))).order == 1

    def test_nontrivial_socle_is_an_ideal(self, non_lri_brace):
        """Test the order-2 socle of a retractable solution.

        The members have lambda = id, are closed under + and conjugation,
        are lambda-invariant, and multiply as they add.
        """
        b = non_lri_brace
        members = socle(b).elements
        assert len(members) == 2
        assert 0 in members
        everything = np.arange(b.order)
        for u in members:
            assert lambda_is_identity(b, u)
            for v in members:
                uv = np.array([u]), np.array([v])
                assert int(b.add_idx(*uv)[0]) in members
                assert int(b.mul_idx(*uv)[0]) == int(b.add_idx(*uv)[0])
            conj = b.mul_idx(b.mul_idx(everything, np.full(b.order, u)), _inverse_idx(b, everything))
            assert set(conj.tolist()) <= set(members)
            lam = b.lambda_idx(everything, np.full(b.order, u))
            assert set(lam.tolist()) <= set(members)


class TestIdeal:
    """phi(H) as an ideal."""

    def test_vendramin(self, vendramin_params_fx, vendramin_brace):
        """Test the k = 2 instance."""
        report = phi_H_ideal_check(vendramin_params_fx, vendramin_brace)
        assert report.passed
        assert 1 < report.ideal_order < 64

    def test_z3(self, z3_params, z3_brace):
        """Test the k = 3 instance."""
        report = phi_H_ideal_check(z3_params, z3_brace)
        assert report.passed
        assert report.max_generator_order == 3

    def test_not_applicable(self):
        """Test that k = 2 with three blocks fails gcd(|I| - 1, k) = 1."""
        params = cyclic_params(2, i_count=3)
        b = build_brace(enumerate_group(build(params), cap=10_000))
        with pytest.raises(NotApplicableError) as info:
            phi_H_ideal_check(params, b)
        assert info.value.exit_code == 4
        assert info.value.hypothesis == "gcd(|I| - 1, k) = 1"

    def test_non_cyclic_groups(self, vendramin_brace):
        """Test that non-cyclic parameters are rejected."""
        V4 = FiniteAbelianGroup.parse("Z/2 x Z/2")
        with pytest.raises(NotApplicableError):
            phi_H_ideal_check(identity_params(V4), vendramin_brace)


class TestAssociatedSolution:
    """The solution sigma_a = lambda_a on the brace."""

    def test_vendramin(self, vendramin_brace):
        """Test it is an irretractable 64-point solution."""
        s = associated_solution(vendramin_brace)
        assert s.size == 64
        assert tower(s).classification.kind == "irretractable"

    def test_group_is_the_brace(self, vendramin_brace):
        """Test that the lambda maps generate a group of order |B|."""
        s = associated_solution(vendramin_brace)
        assert enumerate_group(s, cap=1000).order == vendramin_brace.order

    @pytest.mark.parametrize(
        "brace_name,socle_order,irretractable",
        [("vendramin_brace", 1, True), ("non_lri_brace", 2, False)],
    )
    def test_irretractable_iff_socle_trivial(
        self, request, brace_name, socle_order, irretractable
    ):
        """Test both sides: lambda_a = lambda_b exactly when a, b differ by the socle."""
        b = request.getfixturevalue(brace_name)
        assert socle(b).order == socle_order
        kind = tower(associated_solution(b)).classification.kind
        assert (kind == "irretractable") == irretractable
