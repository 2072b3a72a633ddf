"""Race SpadePSO, PSO and CLPSO on shifted Rastrigin (D=10) and show how the
two sub-populations of SpadePSO spread out over the run."""
import numpy as np

from spadepso import SpadeConfig, run
from spadepso.problems import make_problem

obj = make_problem("F8", 10, seed=0)
cfg = SpadeConfig(budget=30_000)

for name in ("spade", "pso", "clpso"):
    errors = [run(name, obj, cfg, seed=s).error for s in range(3)]
    print(f"{name:6s} errors {np.round(errors, 4).tolist()}")

res = run("spade", obj, cfg, seed=0)
print("\niteration  best error  exploration div  exploitation div")
for rec in res.trace[:: len(res.trace) // 8]:
    print(f"{rec.iteration:9d}  {rec.best_error:10.4g}  {rec.div_explore:15.4g}  {rec.div_exploit:16.4g}")
