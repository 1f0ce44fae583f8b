"""工具函数：有序并行映射、内容摘要、带种子的随机源"""
import hashlib
import logging
import os
import random
from concurrent.futures import ThreadPoolExecutor

logger = logging.getLogger(__name__)

WORKERS_ENV = 'SHEAFCTL_WORKERS'


def worker_count():
    """内部并行线程数，取自环境变量 SHEAFCTL_WORKERS，默认 1"""
    raw = os.getenv(WORKERS_ENV, '1')
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning(f"{WORKERS_ENV}={raw} 不是整数，改用单线程")
        return 1


def ordered_map(func, items, workers=None):
    """并行求值但保持输入顺序；线程数为 1 时直接顺序执行"""
    items = list(items)
    workers = workers or worker_count()
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def digest_file(file_path):
    """文件内容的 sha256，用于报告中的输入摘要"""
    with open(file_path, 'rb') as f:
        return hashlib.sha256(f.read()).hexdigest()


def make_rng(seed):
    """报告中记录的种子即随机源的唯一来源"""
    return random.Random(int(seed))


def derive_seed(seed, *labels):
    """由主种子和标签派生子种子，使各子任务的随机序列互不影响"""
    text = ':'.join([str(seed)] + [str(label) for label in labels])
    return int(hashlib.sha256(text.encode('utf-8')).hexdigest()[:16], 16)
