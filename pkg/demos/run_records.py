"""
Storing and re-checking runs
============================

solve_once returns a RunRecord that can be written as JSON and read back.
The stored coefficients are enough to recompute every reported number.
"""
import os
import tempfile

import nehari_nodal as nn

spec = nn.ProblemSpec(nn.MeshSpec.parse("interval:96"), nn.Nonlinearity(p=3, q=4, mu=1.0), 0.1)
print(spec.validate().as_dict())

rec = nn.solve_once(spec, nn.SolveOptions(n_starts=3))
with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "run.json")
    nn.write_record(rec, path)
    back = nn.read_record(path)

check = nn.revalidate(back)
print(f"stored energy {rec.energy:.15g}, recomputed {check['energy']:.15g}")
print(f"stored residual {rec.residual:.3e}, recomputed {check['residual']:.3e}")
print(f"index {check['morse_index']}, nullity {check['nullity']}, domains {check['nodal_domains']}")
print(nn.export_csv([rec]))
