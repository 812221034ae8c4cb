from functools import lru_cache

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

# Load environment variables
load_dotenv()


class Settings(BaseSettings):
    """Toolkit settings, read from NWFS_* environment variables or .env"""

    model_config = SettingsConfigDict(env_prefix="NWFS_", env_file=".env", extra="ignore")

    app_name: str = "No-Wait Flowshop Toolkit"
    app_version: str = "1.0.0"
    log_level: str = "INFO"
    debug: bool = False

    # Exact oracles
    held_karp_limit: int = 16
    brute_force_limit: int = 9

    # Bench harness
    bench_workers: int = 1
    bench_seed: int = 20240101

    # Reductions ("chosen arbitrarily" vertices)
    default_anchor: int = 0
    default_split_vertex: int = 0


@lru_cache
def get_settings() -> Settings:
    return Settings()


settings = get_settings()
