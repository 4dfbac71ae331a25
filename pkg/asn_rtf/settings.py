import os
from dotenv import load_dotenv

load_dotenv()

LOG_FORMAT = "[asn-rtf] %(message)s"
LOG_LEVEL = os.getenv("ASN_RTF_LOG_LEVEL", "INFO").upper()

# 0 = one worker per CPU
DEFAULT_THREADS = int(os.getenv("ASN_RTF_THREADS", "0"))


def resolve_threads(threads: int) -> int:
    if threads <= 0:
        return os.cpu_count() or 1
    return threads
