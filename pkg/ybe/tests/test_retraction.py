import pytest

from ybe.services.family import blocks, vendramin_params
from ybe.services.retraction import retract, separate_all, separating_point, tower
from ybe.services.solution import FiniteSolution, restrict
from ybe.utils.errors import ConsistencyError
from ybe.utils.logging import setup_logger

logger = setup_logger(__name__)


class TestRetract:
    """A single retraction step."""

    def test_projection_uses_least_representatives(self, non_lri):
        """Test that equal rows collapse onto the least index."""
        step = retract(non_lri)
        assert step.projection == (0, 0, 1, 1)
        assert step.quotient.size == 2
        assert step.quotient.labels == ("0", "2")

    def test_trivial_collapses_to_one_point(self):
        """Test that a trivial solution retracts to a single point."""
        assert retract(FiniteSolution.trivial(5)).quotient.size == 1


class TestTower:
    """Classification from the retraction tower."""

    def test_vendramin_is_irretractable(self, vendramin):
        """Test that the 8-point instance does not retract and has a separating witness."""
        result = tower(vendramin)
        assert result.classification.kind == "irretractable"
        assert result.sizes == [8, 8]
        assert result.separating == {"x": 0, "y": 1, "z": 4}
        assert vendramin.sigma[0][4] != vendramin.sigma[1][4]

    def test_every_pair_is_separated(self, vendramin):
        """Test a witness z for all 28 pairs of the 8-point instance."""
        result = tower(vendramin)
        assert len(result.separating_pairs) == 28
        for (x, y), z in result.separating_pairs.items():
            assert vendramin.sigma[x][z] != vendramin.sigma[y][z]
        assert result.to_report().separated_pairs == 28

    def test_separate_all_rejects_equal_rows(self, non_lri):
        """Test that coinciding rows are a consistency error."""
        with pytest.raises(ConsistencyError) as info:
            separate_all(non_lri)
        assert info.value.context["pair"] == (0, 1)

    def test_levels(self, non_lri):
        """Test levels 0, 1 and 2."""
        assert tower(FiniteSolution.trivial(1)).classification.level == 0
        trivial = tower(FiniteSolution.trivial(2))
        assert trivial.sizes == [2, 1]
        assert trivial.classification.level == 1
        result = tower(non_lri)
        assert result.sizes == [4, 2, 1]
        assert result.classification.kind == "multipermutation"
        assert result.classification.level == 2

    def test_undetermined_when_steps_run_out(self, non_lri):
        """Test that a short step budget leaves the classification open."""
        result = tower(non_lri, max_steps=1)
        assert result.classification.kind == "undetermined"
        assert result.classification.at_step == 1
        with pytest.raises(ValueError):
            tower(non_lri, max_steps=0)

    def test_blocks_have_level_two(self, vendramin):
        """Test that each block of the 8-point instance has level 2."""
        for part in blocks(vendramin_params()):
            c = tower(restrict(vendramin, part)).classification
            assert c.kind == "multipermutation"
            assert c.level == 2

    def test_report_shape(self, vendramin):
        """Test the pydantic report mirrors the tower."""
        report = tower(vendramin).to_report()
        assert report.sizes == [8, 8]
        assert str(report.classification) == str(tower(vendramin).classification)


class TestSeparatingPoint:
    """Witnesses for differing left actions."""

    def test_equal_rows(self, non_lri):
        """Test None for equal rows and a point otherwise."""
        assert separating_point(non_lri, 0, 1) is None
        assert separating_point(non_lri, 0, 2) == 0
