import os
from functools import lru_cache
from pathlib import Path
from typing import Optional

import yaml
from dotenv import load_dotenv
from loguru import logger
from pydantic import BaseModel, Field

ROOT = Path(__file__).resolve().parent


class Settings(BaseModel):
    ENV: str = "dev"
    LOG_LEVEL: str = "INFO"
    STORE_DIR: str = "store"
    SEARCH_BUDGET: int = Field(default=1 << 22, ge=1)
    KMAX: int = Field(default=4, ge=1)
    DMAX: int = Field(default=6, ge=1)
    N_JOBS: int = 1
    TABLE_LIMIT: int = Field(default=1 << 16, ge=2)
    DOMINANCE_SAMPLES: int = Field(default=10_000, ge=1)
    SEED: int = 20240611


def load_settings(env: Optional[str] = None) -> Settings:
    """
    Build the settings for one process.

    Reads `.env` first, then `env-<ENV>.yaml` from the project root; any
    environment variable named like a settings key wins over the YAML value.

    Args:
        env: Name of the environment file to use; defaults to $ENV or "dev"

    Returns:
        Settings: validated configuration
    """
    load_dotenv()
    env = env or os.getenv("ENV", "dev")
    values: dict = {}
    yaml_path = ROOT / f"env-{env}.yaml"
    if yaml_path.exists():
        with open(yaml_path, "r") as file:
            values.update(yaml.safe_load(file) or {})
    else:
        logger.warning(f"No env file {yaml_path.name}, falling back to defaults")
    for key in Settings.model_fields:
        if os.getenv(key) is not None:
            values[key] = os.getenv(key)
    values["ENV"] = env
    return Settings(**values)


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    return load_settings()
