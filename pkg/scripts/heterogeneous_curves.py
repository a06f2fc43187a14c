"""Rate and coverage vs beta for the heterogeneous scenarios: analytic curves next to Monte Carlo.

Runs ``analyze`` and ``simulate`` for each scenario and writes a joined compare table per scenario.
"""

import argparse
from pathlib import Path

from hybridcell.cli import compare
from hybridcell.scenario import load_scenario
from hybridcell.tables import write

ROOT = Path(__file__).resolve().parents[1]
DEFAULT = ("heterogeneous_two_tier.yaml", "heterogeneous_three_source.yaml")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("scenarios", nargs="*", default=[ROOT / "scenarios" / s for s in DEFAULT])
    p.add_argument("--outdir", default=ROOT / "results", type=Path)
    args = p.parse_args()
    for path in args.scenarios:
        sc = load_scenario(path)
        table, passed, lines = compare(sc)
        csv_path, _ = write(table, args.outdir / f"heterogeneous_{sc.name}.csv")
        print(f"{sc.name}: wrote {csv_path}")
        for line in lines:
            print("  " + line)


if __name__ == "__main__":
    main()
