"""Write every exact table (census, certificates, gaps, bounds) into one directory.

    python3 scripts/bound_tables.py results/
"""

import sys
from pathlib import Path

from specden.cli import main as cli


def main() -> int:
    out = Path(sys.argv[1] if len(sys.argv) > 1 else "results")
    out.mkdir(parents=True, exist_ok=True)
    runs = [
        ["census", "--bits", "2", "--max-digits", "5", "--out", str(out / "census_n2.csv")],
        ["census", "--bits", "3", "--max-digits", "3", "--out", str(out / "census_n3.csv")],
        ["lemma-cert", "--max-length", "200", "--out", str(out / "lemma_cert.csv")],
        ["bs-det", "--max-length", "500", "--out", str(out / "bs_det.csv")],
        ["bound-table", "--bits", "2", "--max-digits", "5", "--delta", "0.27",
         "--out", str(out / "bound_table.csv")],
    ]
    worst = 0
    for argv in runs:
        code = cli(argv)
        print(f"{' '.join(argv[:1])}: exit {code}", file=sys.stderr)
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
