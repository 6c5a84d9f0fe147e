"""Two grid searches over the same task, two opposite conclusions.

The bundled task compares SGD with Adam.  Adam only shines at a very large
epsilon.  A grid that never tries large epsilon says SGD wins; a grid that
does says Adam wins.  The demon gets to pick the grid, so the naive
reasoner can be pushed either way cheaply.

Run:  python3 demos/deception_exhibit.py
"""

from ehpo.adversary import deception_verdict
from ehpo.config import bundled_config
from ehpo.hpo import run_plan
from ehpo.logic import Atom, format_formula
from ehpo.reasoners import NaiveReasoner, naive_conclude


def main() -> None:
    cfg = bundled_config("deceptive")
    print(f"task {cfg.task.task_id}; p means 'sgd outperforms adam'\n")

    for name in ("default-eps", "tuned-eps"):
        log = run_plan(cfg.task, cfg.plan(name), cfg.master_seed)
        found = naive_conclude([log], cfg.policy)
        bests = ", ".join(f"{alg} {log.best_trial(alg).metric:.3f}" for alg in log.algorithms)
        print(f"{name:>10}: {log.total_time:3d} trials, best {bests} -> "
              f"{', '.join(format_formula(f) for f in found) or 'nothing'}")

    verdict = deception_verdict(cfg.task, cfg.allowable_set("grid"), NaiveReasoner(cfg.policy), Atom("p"),
                                cfg.budget)
    print(f"\nnaive reasoner at t={float(verdict.budget):g}: {verdict.kind}")
    print(f"  p  in {float(verdict.witness_p.expected_time):g} time units via {verdict.witness_p.config}")
    print(f"  !p in {float(verdict.witness_notp.expected_time):g} time units via {verdict.witness_notp.config}")


if __name__ == "__main__":
    main()
