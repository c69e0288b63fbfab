"""Pin the Rademacher stream for seed 0 in tests/data/rademacher_seed0.json.

Run once when the generator is chosen; rerunning must not change the file.
"""

import json
from pathlib import Path

from dirichlet_lab.randomized import RandomSeriesInstance, RandomSignModel

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "rademacher_seed0.json"


def main():
    model = RandomSignModel("rademacher", 0)
    first = model.sample(64).astype(int).tolist()
    rec = {
        "generator": "numpy Philox4x64, key=seed, top bit of raw output k gives X_(k+1)",
        "kind": "rademacher",
        "seed": 0,
        "N4": first[:4],
        "first64": first,
        "digest_N4": RandomSeriesInstance.create(model, 4).digest(),
    }
    if OUT.exists() and json.loads(OUT.read_text()) != rec:
        raise SystemExit(f"{OUT} differs from the current generator; refusing to overwrite")
    OUT.write_text(json.dumps(rec, indent=1) + "\n")
    print(f"N=4 pattern {first[:4]} -> {OUT}")


if __name__ == "__main__":
    main()
