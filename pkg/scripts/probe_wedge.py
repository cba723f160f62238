"""Exploratory probe: the finite-variation equality experiment at intensity
ratios beyond the admissible wedge c < |cos(pi alpha)|.

The monotone construction is only available inside the wedge; outside it no
critical exponent exists and no conclusion is drawn here — the run simply
reports the estimated moments for inspection.
"""

import math
import sys

from stablesde.experiments import equality_probe_outside_wedge, write_report_csv


def main() -> int:
    alpha = float(sys.argv[1]) if len(sys.argv) > 1 else 0.75
    beta = float(sys.argv[2]) if len(sys.argv) > 2 else 0.4
    wedge = -math.cos(math.pi * alpha)
    for c in (0.5 * wedge, 0.95 * wedge, 1.1 * wedge, 1.5 * wedge):
        rep = equality_probe_outside_wedge(alpha, c, beta, n_paths=2000)
        side = "inside" if c < wedge else "OUTSIDE"
        print(f"# c = {c:.4f} ({side} the wedge {wedge:.4f}), beta = {beta}")
        write_report_csv(rep, sys.stdout)
    print("# exploratory only: no verdicts", file=sys.stderr)
    return 0


if __name__ == "__main__":
    main()
