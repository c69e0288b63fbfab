"""Print one PASS/FAIL line per acceptance criterion without pytest.

    python scripts/run_acceptance.py [criterion numbers...]
"""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from test_acceptance import CRITERIA  # noqa: E402


def main(argv):
    picks = [int(a) for a in argv] or range(1, len(CRITERIA) + 1)
    failed = 0
    for k in picks:
        t0 = time.perf_counter()
        ok, detail = CRITERIA[k - 1]()
        failed += not ok
        print(f"C{k:<2d} {'PASS' if ok else 'FAIL'}  {detail}  [{time.perf_counter() - t0:.1f} s]", flush=True)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
