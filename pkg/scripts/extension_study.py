"""Cost of a compiled circuit as it is extended to larger chains.

Runs the small dense compilation (8 sites, depth 3) and tabulates C_LHST,
the central-site cost and C_HST for the optimised circuit and Trotter
baselines at each evaluation size. The table is also written as CSV.
"""
import argparse
import csv
import json
from pathlib import Path

from lvqc.driver import CompileConfig, run_lvqc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", default=str(Path(__file__).parent.parent / "configs" / "heisenberg_mini.json"))
    ap.add_argument("--out", default="runs/extension.csv")
    args = ap.parse_args()

    cfg = CompileConfig.from_json_file(args.config)
    report = run_lvqc(cfg)
    rows = []
    for ev in report.evaluations:
        series = [("optimized", ev.optimized)] + [(f"trotter_d{d}", r) for d, r in sorted(ev.baselines.items())]
        for name, r in series:
            rows.append({"L": ev.L, "circuit": name, "c_lhst": r.c_lhst, "c_lhst_center": r.c_lhst_center(),
                         "c_hst": r.c_hst, "backend": r.backend, "truncation_error": r.truncation_error})
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    for r in rows:
        print(f"L={r['L']:3d} {r['circuit']:>12}  C_LHST {r['c_lhst']:.3e}  centre {r['c_lhst_center']:.3e}  C_HST {r['c_hst']:.3e}")
    print(json.dumps({"final_cost": report.trace.final_cost, "termination": report.trace.termination}))


if __name__ == "__main__":
    main()
