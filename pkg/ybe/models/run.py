from typing import Literal, Optional

from pydantic import BaseModel, Field, model_validator

Command = Literal["build", "check", "tower", "group", "brace", "sg", "grid", "iso"]


class RunConfig(BaseModel):
    command: Command
    params_path: Optional[str] = None
    solution_path: Optional[str] = None
    other_path: Optional[str] = None  # second input of ``iso``, same kind as the first
    out_path: Optional[str] = None
    cap: int = Field(2_000_000, ge=1)
    radius: int = Field(3, ge=1)
    seed: int = 0
    samples: int = Field(100, ge=1)
    axiom_exhaustive_limit: int = Field(1_000_000, ge=1)
    axiom_sample: int = Field(1_000_000, ge=1)
    output: Literal["text", "structured"] = "text"
    dump_hnf: bool = False
    probe_center: bool = False
    word: Optional[str] = None
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def one_input(self) -> "RunConfig":
        given = [p for p in (self.params_path, self.solution_path) if p is not None]
        if len(given) != 1:
            raise ValueError("give exactly one of --params or --solution")
        if self.command == "grid" and self.params_path is None:
            raise ValueError("grid needs --params <grid file>")
        if self.command == "build" and self.params_path is None:
            raise ValueError("build needs --params")
        if self.command == "iso" and self.other_path is None:
            raise ValueError("iso needs --other")
        if self.probe_center and self.params_path is None:
            raise ValueError("--probe-center needs --params")
        return self

    @property
    def source(self) -> str:
        return self.params_path or self.solution_path or ""
