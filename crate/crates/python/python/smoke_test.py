"""Smoke test for the glab extension module.

Build and run from the workspace root:

    cargo build --release -p glab-py --features extension-module
    python3 crates/python/python/smoke_test.py

The script copies the newest target/*/libglab_py.so next to itself as
glab.so before importing.
"""

import math
import pathlib
import shutil
import sys

HERE = pathlib.Path(__file__).resolve().parent
ROOT = HERE.parents[2]


def load():
    built = [ROOT / "target" / p / "libglab_py.so" for p in ("release", "debug")]
    built = [b for b in built if b.exists()]
    if built:
        shutil.copy(max(built, key=lambda b: b.stat().st_mtime), HERE / "glab.so")
        sys.path.insert(0, str(HERE))
    try:
        import glab
    except ImportError:
        sys.exit("build the extension first: cargo build -p glab-py --features extension-module")
    return glab


def main():
    glab = load()
    k = glab.constants()
    assert abs(k["c_star"] - 0.25573) < 5e-5, k
    assert abs(k["k_dr"] - 1.6769) < 1e-4, k
    assert abs(glab.Phi(0.0) - 0.5) < 1e-15
    assert abs(glab.phi(0.0) - 1.0 / math.sqrt(2.0 * math.pi)) < 1e-15
    assert glab.hermite(3, 2.0) == 2.0

    b = glab.solve_symmetric_breakpoint()
    assert abs(b - 0.18009) < 2e-4, b
    c = k["c_star"]
    f, g = glab.build_strip_pair([-c, -b, 0.0, b, c], [0.0, -1.0, 1.0, -1.0, 1.0, 0.0])
    assert glab.pi3_gap(f, g) >= 0.046

    game = glab.Game.davie_reeds()
    u = glab.SignFunction1D(-1, [-k["c_star"], k["c_star"]])
    assert abs(game.val_1d(glab.SignFunction1D.sign(), glab.SignFunction1D.sign()) - (2 / math.pi - k["lambda_star"])) < 1e-9
    assert game.sdp_value() == (1.0 - k["lambda_star"], 1)
    assert u(0.0) == 1.0 and u(1.0) == -1.0

    best, bf, bg = glab.optimize(game, restarts=8)
    assert abs(best - k["val_dr"]) < 1e-6, best

    chain = glab.bound_chain(4e-11)
    assert chain["improvement"] >= 1e-12

    w = glab.witness_mc(100, 1, game, samples=2000, seed=3)
    assert abs(w["coefficient"] - (1 - k["lambda_star"])) < 1e-12

    rows = glab.landscape(0.0, 0.5, 3)
    assert len(rows) == 3 and abs(rows[0][1] - 0.4391) < 1e-4

    try:
        glab.SignFunction1D(1, [1.0, 0.0])
    except ValueError:
        pass
    else:
        raise AssertionError("unsorted breakpoints accepted")
    print("glab python smoke test ok")


if __name__ == "__main__":
    main()
