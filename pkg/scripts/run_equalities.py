"""Run both coupling-equality experiments at full scale and print the reports."""

import sys
import time

from stablesde.experiments import verify_equality_case, write_report_csv


def main() -> int:
    n_paths = int(sys.argv[1]) if len(sys.argv) > 1 else 20_000
    failures = 0
    for name in ("E1", "E2"):
        t0 = time.time()
        ok, report = verify_equality_case(name, n_paths=n_paths)
        write_report_csv(report, sys.stdout)
        print(f"# {name}: {'PASS' if ok else 'FAIL'} ({time.time() - t0:.0f}s, "
              f"{n_paths} paths)", file=sys.stderr)
        failures += not ok
    return 3 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
