import argparse
import csv
import io
import pathlib

from qccd.sweep import SweepSpec, run_sweep, to_csv

ROOT = pathlib.Path(__file__).resolve().parent.parent


def run(spec: dict, default_out: str, columns: list[str]) -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("-o", "--output", default=str(ROOT / "results" / default_out))
    args = ap.parse_args()
    s = SweepSpec.from_dict(spec)
    print(f"{len(s.points())} points")
    text = to_csv(run_sweep(s))
    out = pathlib.Path(args.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    rows = list(csv.DictReader(io.StringIO(text)))
    widths = [max(len(c), *(len(_short(r[c])) for r in rows)) for c in columns]
    print("  ".join(c.ljust(w) for c, w in zip(columns, widths)))
    for r in rows:
        print("  ".join(_short(r[c]).ljust(w) for c, w in zip(columns, widths)))
    print(f"wrote {out}")


def _short(v: str) -> str:
    try:
        return f"{float(v):.4g}"
    except ValueError:
        return v[:40]
