import os
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field

load_dotenv()


class Settings(BaseModel):
    variable_budget: int = Field(200_000, gt=0)
    max_witness_combinations: int = Field(1024, gt=0)
    lp_dump_dir: Optional[Path] = None
    log_level: str = "WARNING"

    @classmethod
    def from_env(cls) -> "Settings":
        values = {}
        if os.getenv("DATACOMPLEX_VARIABLE_BUDGET"):
            values["variable_budget"] = int(os.environ["DATACOMPLEX_VARIABLE_BUDGET"])
        if os.getenv("DATACOMPLEX_MAX_WITNESS_COMBINATIONS"):
            values["max_witness_combinations"] = int(os.environ["DATACOMPLEX_MAX_WITNESS_COMBINATIONS"])
        if os.getenv("DATACOMPLEX_LP_DUMP_DIR"):
            values["lp_dump_dir"] = Path(os.environ["DATACOMPLEX_LP_DUMP_DIR"])
        if os.getenv("DATACOMPLEX_LOG_LEVEL"):
            values["log_level"] = os.environ["DATACOMPLEX_LOG_LEVEL"].upper()
        return cls(**values)


_settings = Settings.from_env()


def get_settings() -> Settings:
    return _settings


@contextmanager
def override_settings(**values) -> Iterator[Settings]:
    """
    Temporarily replace settings fields (None values are ignored).
    Used by the CLI to layer project options over the environment.
    """
    global _settings
    previous = _settings
    updates = {k: v for k, v in values.items() if v is not None}
    _settings = previous.model_copy(update=updates)
    try:
        yield _settings
    finally:
        _settings = previous
