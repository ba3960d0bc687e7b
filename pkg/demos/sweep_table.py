"""A small fidelity/probability sweep written to CSV.

Uses the same machinery as ``squeezedcat sweep``. The full default grid takes
a minute or two; this one is trimmed to a few seconds.

    python3 demos/sweep_table.py [out.csv]
"""

import sys

from squeezedcat.sweep import SweepConfig, rows_to_csv, run_sweep

cfg = SweepConfig.from_mapping({"s_grid": [0.06, 0.12, 0.18], "r1sq_list": [0.001, 0.01], "multistarts": 2})
rows = run_sweep(cfg)
for r in rows:
    print(f"s={r.s:.2f} r1^2={r.r1sq:<6} F={r.F:.4f} P={r.P:.3e} rel MQI={r.rel_MQI:.3f} [{r.status}]")
if len(sys.argv) > 1:
    with open(sys.argv[1], "w") as fh:
        fh.write(rows_to_csv(rows))
    print(f"wrote {sys.argv[1]}")
