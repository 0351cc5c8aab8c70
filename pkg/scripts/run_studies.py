"""Run study configs and write ``<out>/<name>.csv``, ``.json`` and ``.txt``.

    python scripts/run_studies.py configs/fig2.json configs/survival_grid.json --fast
"""
import argparse
import logging
import time
from dataclasses import asdict
from pathlib import Path

from ldptail.experiments import StudyConfig, run_study


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("configs", nargs="+")
    ap.add_argument("--out", default="results")
    ap.add_argument("--fast", action="store_true", help="cap realisations at 100")
    ap.add_argument("--workers", type=int)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for path in args.configs:
        cfg = StudyConfig.from_json(path)
        if args.fast:
            cfg = cfg.fast()
        if args.workers:
            cfg = StudyConfig.from_dict({**asdict(cfg), "workers": args.workers})
        t0 = time.time()
        rep = run_study(cfg)
        stem = out / Path(path).stem
        stem.with_suffix(".csv").write_text(rep.to_csv())
        stem.with_suffix(".json").write_text(rep.to_json())
        stem.with_suffix(".txt").write_text(rep.to_text())
        logging.info("%s: %d rows in %.1fs", path, len(rep.rows), time.time() - t0)
        print(rep.to_text())


if __name__ == "__main__":
    main()
