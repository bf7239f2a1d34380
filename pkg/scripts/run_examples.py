"""Run every scenario in ``scenarios/`` and write reports under ``runs/<name>/``.

    python3 scripts/run_examples.py [--out runs] [--seed 0]
"""

import argparse
import sys
from pathlib import Path

from cmaxreg import scenario as sc

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", default=str(ROOT / "runs"))
    parser.add_argument("--seed", type=int)
    args = parser.parse_args()

    failed = 0
    for path in sorted((ROOT / "scenarios").glob("*.json")):
        if path.name.endswith(".schema.json"):
            continue
        data = sc.load_scenario(path)
        if args.seed is not None:
            data["seed"] = args.seed
        report = sc.run_data(data)
        sc.emit_report(report, Path(args.out) / path.stem)
        print(f"== {path.stem} ({report.wall_time:.2f} s)")
        for task, res in report.results.items():
            if "error" in res:
                print(f"  {task}: ERROR {res['error']}")
            elif "holds" in res:
                print(f"  {task}: {res['holds']}")
            else:
                print(f"  {task}: ok")
        failed += bool(report.failed_tasks)
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
