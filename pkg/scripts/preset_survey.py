"""Run every cross-check on each spectral preset and print one row per preset.

    python3 scripts/preset_survey.py [--points 401] [--json survey.json]
"""
import argparse
import json
import time

from atomopo.presets import PRESETS
from atomopo.validation import validate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=401, help="omega points per comparison")
    ap.add_argument("--json", help="also write the full reports here")
    args = ap.parse_args()

    rows, reports = [], {}
    for name, preset in PRESETS.items():
        if preset.task == "trajectory":
            continue
        t0 = time.perf_counter()
        report = validate(preset.params(), omega_points=args.points)
        values = {c.name: c.value for c in report.checks}
        rows.append((name, preset.g, preset.kappa, values.get(f"oracle_{preset.task}"),
                     values.get(f"reduced_{preset.task}"), values.get(f"identity_{preset.task}"),
                     report.passed, time.perf_counter() - t0))
        reports[name] = json.loads(report.to_json())

    print(f"{'preset':7} {'g':>6} {'kappa':>6} {'oracle':>9} {'reduced':>9} {'identity':>9}  ok   time")
    for name, g, kappa, orc, red, ident, ok, dt in rows:
        print(f"{name:7} {g:6g} {kappa:6g} {orc:9.1e} {red:9.1e} {ident:9.1e}  {str(ok):5} {dt:5.1f}s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(reports, fh, indent=2, sort_keys=True)


if __name__ == "__main__":
    main()
