"""Regularity-index table over alpha: what the uniqueness results demand of
sigma (alpha > 1) or gamma (alpha < 1) for each monotonicity class."""

import numpy as np

from stablesde.exponents import Monotone, required_holder_index
from stablesde.measure import validate_params


def main() -> None:
    print(f"{'alpha':>6} {'ratio':>6} {'none':>8} {'non_dec':>8} {'non_inc':>8}")
    for alpha in np.concatenate([np.linspace(0.2, 0.95, 6), np.linspace(1.1, 1.9, 5)]).tolist():
        for am, ap in ((1.0, 1.0), (0.3, 1.0), (0.0, 1.0)):
            p = validate_params(alpha, am, ap)
            cols = [
                required_holder_index(p, None),
                required_holder_index(p, Monotone.NON_DECREASING),
                required_holder_index(p, Monotone.NON_INCREASING),
            ]
            print(f"{alpha:6.2f} {p.ratio_c():6.2f} " + " ".join(f"{v:8.4f}" for v in cols))


if __name__ == "__main__":
    main()
