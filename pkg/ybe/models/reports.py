from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field

SCHEMA_VERSION = 1


class ValidationReport(BaseModel):
    size: int
    involutive: bool
    non_degenerate: bool
    braid: bool
    braid_pairwise: bool
    square_free: bool
    lri: bool
    trivial: bool
    witnesses: Dict[str, Any] = Field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.involutive and self.non_degenerate and self.braid


class PropertyPrediction(BaseModel):
    square_free: bool
    irretractable_sufficient: bool
    orbits_are_blocks_sufficient: bool


class Classification(BaseModel):
    kind: Literal["irretractable", "multipermutation", "stabilized", "undetermined"]
    level: Optional[int] = None
    at_step: Optional[int] = None

    def __str__(self) -> str:
        if self.kind == "irretractable":
            return "irretractable"
        if self.kind == "multipermutation":
            return f"multipermutation level {self.level}"
        if self.kind == "stabilized":
            return f"stabilized nontrivially at step {self.at_step}"
        return f"undetermined after {self.at_step} steps"


class TowerReport(BaseModel):
    sizes: List[int]
    classification: Classification
    separating: Optional[Dict[str, int]] = None
    separated_pairs: int = 0


class GroupAnalysis(BaseModel):
    order: int
    orbits: List[List[int]]
    orbits_consistent: bool
    derived_series: List[int]
    lower_central_series: List[int]
    derived_length: Optional[int]
    nilpotency_class: Optional[int]  # None: not nilpotent
    center_order: int
    generator_orders: List[int]


class WreathCheck(BaseModel):
    applicable: bool
    failing_hypothesis: Optional[str] = None
    predicted_order: Optional[int]
    measured_order: int
    wreath_order: int  # (|B|^|A| * |A|)^|I|
    predicted_class: Optional[int]
    measured_class: Optional[int]
    predicted_derived_length: int = 2
    measured_derived_length: Optional[int] = None
    nu_affine: bool
    nu_matches_definition: bool
    nu_homomorphic: bool
    nu_injective: bool
    p_group_prime: Optional[int] = None
    order_is_p_power: Optional[bool] = None

    @property
    def matches(self) -> bool:
        embedding = (
            self.nu_affine
            and self.nu_matches_definition
            and self.nu_homomorphic
            and self.nu_injective
        )
        if self.order_is_p_power is False or self.wreath_order % self.measured_order:
            return False
        if not self.applicable:
            return embedding
        return (
            embedding
            and self.predicted_order == self.measured_order
            and self.predicted_class == self.measured_class
            and self.predicted_derived_length == self.measured_derived_length
        )


class BraceAxiomReport(BaseModel):
    order: int
    triples_checked: int
    exhaustive: bool
    seed: Optional[int] = None
    compatibility: bool
    additive_group: bool
    multiplicative_group: bool
    lambda_links: bool


class SocleReport(BaseModel):
    order: int
    elements: List[int]


class IdealReport(BaseModel):
    group_order: int
    ideal_order: int
    witness_in_ideal: bool
    witness_nontrivial: bool
    generator_outside: bool
    normal: bool
    lambda_invariant: bool
    proper_nontrivial: bool
    max_generator_order: int
    generator_orders_divide_k: bool

    @property
    def passed(self) -> bool:
        return all(
            [
                self.witness_in_ideal,
                self.witness_nontrivial,
                self.generator_outside,
                self.normal,
                self.lambda_invariant,
                self.proper_nontrivial,
                self.generator_orders_divide_k,
            ]
        )


class CenterProbeReport(BaseModel):
    radius: int
    elements_explored: int
    candidates: int
    probe_set: str
    probe_size: int
    centralizing: List[List[int]]
    evidence_only: bool = True

    @property
    def passed(self) -> bool:
        return not self.centralizing


class QuotientRankReport(BaseModel):
    orbit_count: int
    generators_are_units: bool
    homomorphic: bool
    inverse_negates: bool
    kernel_is_H: bool
    samples: int
    seed: int

    @property
    def passed(self) -> bool:
        return (
            self.generators_are_units
            and self.homomorphic
            and self.inverse_negates
            and self.kernel_is_H
        )


class KernelLatticeReport(BaseModel):
    samples: int
    seed: int
    kernel_elements: int
    kernel_in_lattice: bool
    others_outside_lattice: bool

    @property
    def passed(self) -> bool:
        return self.kernel_in_lattice and self.others_outside_lattice


class ConjectureWitness(BaseModel):
    square_free: bool
    multipermutation: bool
    strong_twisted_union: bool
    blocks_multipermutation: bool
    two_blocks: bool
    counterexample: bool
    answers_question: bool


class Section(BaseModel):
    verdict: Literal["pass", "fail", "error", "not-applicable", "info"]
    witnesses: Dict[str, Any] = Field(default_factory=dict)
    details: Dict[str, Any] = Field(default_factory=dict)
    timing_ms: float = 0.0


class Report(BaseModel):
    schema_version: int = SCHEMA_VERSION
    command: str
    source: str
    sections: Dict[str, Section] = Field(default_factory=dict)
    first_failure: Optional[str] = None
    exit_code: int = 0

    def add(self, name: str, section: Section) -> Section:
        self.sections[name] = section
        if self.first_failure is None and section.verdict in ("fail", "error"):
            self.first_failure = name
        return section

    def stable_dump(self) -> Dict[str, Any]:
        """The report without timing fields, for determinism comparisons."""
        data = self.model_dump()
        for section in data["sections"].values():
            section.pop("timing_ms", None)
        return data


class GridRow(BaseModel):
    index: int
    report: Report
