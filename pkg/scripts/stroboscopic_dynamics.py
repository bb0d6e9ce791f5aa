"""Repeatedly apply a compiled circuit to the local-excitation and domain-wall states.

Records the central magnetisation after each period next to the reference
evolution and writes one CSV per initial state.
"""
import argparse
import json
from pathlib import Path

from lvqc.circuits import ParameterVector
from lvqc.driver import run_stroboscopic


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--theta", required=True, help="parameter JSON or run report")
    ap.add_argument("--size", type=int, default=40)
    ap.add_argument("--ltilde", type=int, default=20)
    ap.add_argument("--tau", type=float, default=0.5)
    ap.add_argument("--steps", type=int, default=10)
    ap.add_argument("--backend", choices=["dense", "mps"], default="mps")
    ap.add_argument("--chi", type=int, default=60)
    ap.add_argument("--d-ref", type=int, default=100)
    ap.add_argument("--out", default="runs/dynamics")
    args = ap.parse_args()

    doc = json.loads(Path(args.theta).read_text())
    theta = ParameterVector.from_dict(doc.get("theta_opt", doc))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for kind in ("LE", "DW"):
        res = run_stroboscopic(theta, args.size, kind, args.steps, args.backend, Ltilde=args.ltilde,
                               tau=args.tau, chi=args.chi, d_ref=args.d_ref)
        res.write_csv(out / f"dynamics_{kind}.csv")
        print(f"{kind}: MSE {res.mse:.3e} over {args.steps} steps ({res.reference_kind} reference)")


if __name__ == "__main__":
    main()
