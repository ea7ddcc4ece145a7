#!/usr/bin/env python3
"""Pre-train and cache the checkpoints the test suite needs.

Usage:
    python3 tests/warm_cache.py context-baseline:0 wm2:0
    python3 tests/warm_cache.py --all
"""

import sys
import time

from cache_util import VARIANTS, checkpoint_path, get_checkpoint

ALL = [
    ("static", 0), ("wm2", 0), ("romo", 0), ("wm3", 0),
    ("context-baseline", 0), ("context-baseline", 1), ("context-baseline", 2),
    ("context-warponly", 0), ("context-warponly", 1), ("context-warponly", 2),
    ("context-nowarp", 0), ("context-nowarp", 1), ("context-nowarp", 2),
]


def main(argv):
    jobs = []
    if "--all" in argv:
        jobs = ALL
    else:
        for spec in argv:
            variant, _, seed = spec.partition(":")
            jobs.append((variant, int(seed or 0)))
    for variant, seed in jobs:
        path = checkpoint_path(variant, seed)
        if path.exists():
            print(f"[skip] {variant}:{seed} already cached at {path}")
            continue
        print(f"[train] {variant}:{seed} ...", flush=True)
        t0 = time.time()
        last = {"it": -1}

        def progress(it, loss, _last=last):
            if it % 200 == 0:
                print(f"    iter {it:5d}  loss {loss:.5f}  "
                      f"({time.time() - t0:.0f}s)", flush=True)

        ck = get_checkpoint(variant, seed, progress=progress)
        print(f"[done] {variant}:{seed} final loss "
              f"{ck.loss_history[-1]['loss']:.5f} in {time.time() - t0:.0f}s",
              flush=True)


if __name__ == "__main__":
    main(sys.argv[1:])
