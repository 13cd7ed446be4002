from .Config import config
from .run_config import EXPERIMENTS, RunConfig

__all__ = ["EXPERIMENTS", "RunConfig", "config"]
