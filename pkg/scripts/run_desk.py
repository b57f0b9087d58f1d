"""Run the desk-scale pipeline for Li2 and d-Li2 and print the stage metrics."""
import argparse
import json

from carsrecon.config import desk_config, full_config
from carsrecon.pipeline import run_pipeline


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="out")
    ap.add_argument("--full", action="store_true", help="use the full lattice instead of the desk one")
    args = ap.parse_args()
    make = full_config if args.full else desk_config
    for system in ("li2", "dli2"):
        man = run_pipeline(make(system, out_dir=f"{args.out}/{system}"))
        print(f"== {system}: {'ok' if man.ok else 'FAILED'}")
        for name, stage in man.stages.items():
            print(f"{name:10s} {stage['seconds']:7.2f} s  {json.dumps(stage.get('metrics', {}), default=str)}")


if __name__ == "__main__":
    main()
