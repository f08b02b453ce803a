"""Regenerate the contrast calibration golden file.

The complete-continuity contrast needs two numbers that a finite sample
cannot supply by itself: how small a chi ratio must be to call a linear map
compact-like, and how close to 1 it must stay to call it noncompact-like.
They come from the two endpoints, the identity (ratio exactly 1) and the
rank-one averaging operator (image is a segment of constants).

    python demos/calibrate_contrast.py            # print
    python demos/calibrate_contrast.py --write    # refresh tests/golden/

After --write, copy the printed thresholds into CONTRAST_THRESHOLDS in
src/mnclab/analysis.py; tests/test_analysis.py fails until they match.
"""

import argparse
from pathlib import Path

from mnclab.analysis import CONTRAST_THRESHOLDS, calibrate_contrast
from mnclab.report import dumps

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden" / "contrast_calibration.json"

ap = argparse.ArgumentParser()
ap.add_argument("--write", action="store_true")
args = ap.parse_args()

run = calibrate_contrast()
for kind in ("chi", "beta"):
    r = run[kind]
    print(f"{kind:>4}  identity {['%.4f' % x for x in r['identity']]}")
    print(f"{'':>4}  rank-one {['%.4f' % x for x in r['rank_one']]}")
    print(f"{'':>4}  ratio_tol={r['ratio_tol']!r}  margin={r['margin']!r}")
    frozen = CONTRAST_THRESHOLDS[kind]
    if frozen != {"ratio_tol": r["ratio_tol"], "margin": r["margin"]}:
        print(f"{'':>4}  (frozen values differ: {frozen})")

if args.write:
    GOLDEN.write_text(dumps(run))
    print(f"wrote {GOLDEN}")
