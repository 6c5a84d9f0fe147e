"""From a deceivable random search to a certified one.

With random search the demon chooses the sampling distribution.  The two
allowable distributions differ by a bounded likelihood ratio (gamma).  The
naive reasoner is still easy to push both ways.  The defended reasoner
splits one K*R-trial log into R groups and keeps only what every group
agrees on.  Choosing R from gamma, K and the budget t makes both
conclusions too expensive to force within t.

Run:  python3 demos/defended_certificate.py
"""

import math

from ehpo.adversary import deception_verdict, simulate_double_deception
from ehpo.certifier import certify
from ehpo.config import bundled_config, with_trials
from ehpo.logic import Atom
from ehpo.reasoners import DefendedReasoner, NaiveReasoner


def show(label, verdict):
    print(f"{label}: {verdict.kind}")
    for o in verdict.odds.per_config:
        print(f"  {o.config:>9}: q_p={float(o.q_p):.3g} q_!p={float(o.q_notp):.3g} (log of {o.cost} trials)")
    for side, w in (("p", verdict.witness_p), ("!p", verdict.witness_notp)):
        t = w.to_dict()
        print(f"  fastest {side}: {w.config}, log10 expected time {t['log10_expected_time']:.2f}")


def main() -> None:
    cfg = bundled_config("deceptive")
    allowable = cfg.allowable_set("random")
    p = Atom("p")
    t = cfg.budget

    show("naive reasoner", deception_verdict(cfg.task, allowable, NaiveReasoner(cfg.policy), p, t))

    cert = certify(allowable, K=3, t=t)
    print(f"\ngamma = {cert.gamma:.4f} nats (ln 1.5 = {math.log(1.5):.4f}); K = 3, t = {float(t):g} -> R = {cert.R}")
    print(f"contradiction check: {cert.check.lhs:.4f} > {cert.check.rhs:.4f} is {cert.check.passed}\n")

    scaled = {n: with_trials(plan, 3 * cert.R) for n, plan in allowable.items()}
    defended = DefendedReasoner(cfg.policy, 3, cert.R)
    verdict = deception_verdict(cfg.task, scaled, defended, p, t)
    show(f"defended reasoner (K=3, R={cert.R})", verdict)

    sims = simulate_double_deception(cfg.task, scaled["eps-low"], scaled["eps-high"], defended, p, float(t), 10_000)
    print(f"\n{sims['both_within_budget']} of {sims['simulations']} simulated demons forced both p and !p within t")


if __name__ == "__main__":
    main()
