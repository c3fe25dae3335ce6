#!/usr/bin/env python3
"""Generate a synthetic daily-profile dataset shaped like an air-quality
study: g = 24 hourly groups with p = 2 covariates (temperature, humidity)
per hour and one response per day.

Writes the CSV plus an explicit group-map JSON (the CSV's column names also
follow the <var>_<groupindex> convention, so the map is optional) and
prints the true change locations baked into the generator.

Usage:
    python scripts/make_airquality_like.py out/air.csv [--days 357] [--seed 7]

Then, for example:
    groupfuse fit out/air.csv --response benzene_max \
        --loss quantile --adaptive --auto-lambda --standardize \
        --out out/fit.json
    groupfuse plotdata out/fit.json --out out/profile.csv
"""

import argparse
import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from groupfuse.datasets import write_hourly_profile_csv  # noqa: E402


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("out", help="CSV output path")
    parser.add_argument("--days", type=int, default=357)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    changes = write_hourly_profile_csv(out, n_days=args.days, seed=args.seed)

    map_path = out.with_suffix(".groups.json")
    groups = [[f"temp_{j}", f"hum_{j}"] for j in range(1, 25)]
    map_path.write_text(json.dumps(groups, indent=2) + "\n")

    print(f"wrote {out} ({args.days} days) and {map_path}")
    print(f"true hourly change locations: {changes}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
