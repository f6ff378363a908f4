"""
运行配置

使用方法:
1. 在环境变量或项目根目录 .env 中设置 BCNQ_* 变量
2. 命令行全局参数（--seed / --format / --log-level / --workers）优先级更高
"""
import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field

from bcnq.models import ClassOrder, OutputFormat

# 加载环境变量
load_dotenv()


class Settings(BaseModel):
    model_config = ConfigDict(frozen=True)

    seed: int = Field(default=0, ge=0)
    log_level: str = "WARNING"
    output_format: OutputFormat = OutputFormat.TEXT
    workers: int = Field(default=1, ge=1)
    class_order: ClassOrder = ClassOrder.FIRST_OCCURRENCE


@lru_cache
def get_settings() -> Settings:
    """从环境读取配置（进程内缓存）"""
    return Settings(
        seed=int(os.getenv("BCNQ_SEED", "0")),
        log_level=os.getenv("BCNQ_LOG_LEVEL", "WARNING").upper(),
        output_format=os.getenv("BCNQ_FORMAT", OutputFormat.TEXT.value),
        workers=int(os.getenv("BCNQ_WORKERS", "1")),
        class_order=os.getenv("BCNQ_CLASS_ORDER", ClassOrder.FIRST_OCCURRENCE.value),
    )
