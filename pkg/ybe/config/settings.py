from functools import lru_cache
from typing import Literal

from dotenv import load_dotenv
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

load_dotenv()


class Settings(BaseSettings):
    """Runtime knobs; every field can be set through a ``YBE_`` env var."""

    model_config = SettingsConfigDict(
        env_prefix="YBE_", env_file=".env", extra="ignore"
    )

    cap: int = Field(2_000_000, ge=1)  # enumeration cap for permutation groups
    radius: int = Field(3, ge=1)  # word radius for the Z(H) probe
    seed: int = 0
    axiom_sample: int = Field(1_000_000, ge=1)
    axiom_exhaustive_limit: int = Field(1_000_000, ge=1)  # max triples checked exhaustively
    random_words: int = Field(1000, ge=1)
    workers: int = Field(1, ge=1)
    output: Literal["text", "structured"] = "text"


@lru_cache
def get_settings() -> Settings:
    return Settings()
