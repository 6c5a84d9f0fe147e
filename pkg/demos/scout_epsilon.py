"""Letting a scout find Adam's epsilon.

Starting from the whole range [1e-12, 1e12], each round grid-searches a
few log-spaced points and drops a decade from the side that looked worse.
Adam's good region sits near 1e11, so the range walks upward.

Run:  python3 demos/scout_epsilon.py
"""

from ehpo.config import bundled_config
from ehpo.hpo import HpPoint, scout_hyper_hps


def main() -> None:
    cfg = bundled_config("deceptive")
    history = []
    final = scout_hyper_hps(cfg.task, "adam", (1e-12, 1e12), 3, 30, cfg.master_seed, dimension="eps",
                            base_hp=HpPoint({"lr": 0.0, "eps": 0.0}), log_coordinates=True, history=history)
    for i, r in enumerate(history, start=1):
        cells = "  ".join(f"{g:.0e}:{m:.2f}" for g, m in zip(r.grid, r.metrics))
        print(f"round {i:2d} [{r.low:.0e}, {r.high:.0e}]  {cells}")
    print(f"final range [{final[0]:.0e}, {final[1]:.0e}] after {len(history)} rounds")


if __name__ == "__main__":
    main()
