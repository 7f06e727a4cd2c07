"""Smoke test for the grushin_lab extension module.

Build and install first, for example:

    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/grushin_lab-*.whl
"""

import json
import math
import pathlib

import grushin_lab as gl

ROOT = pathlib.Path(__file__).resolve().parent.parent


def check(label, ok):
    print(f"{'PASS' if ok else 'FAIL'} {label}")
    return ok


def main():
    results = []

    space = gl.GrushinSpace(1, 1, 1.0)
    results.append(check("homogeneous dimension", space.homogeneous_dimension() == 3.0))
    results.append(check("dilation", space.dilate(2.0, [1.0, 1.0]) == [2.0, 4.0]))

    n = 32
    h = 1.0 / n
    lap = gl.Operator(gl.GrushinSpace(1, 1, 0.0), gl.Grid([(0.0, 1.0), (0.0, 1.0)], [n, n]))
    lam, phi = lap.smallest_eigenpair(tol=1e-10)
    exact = 8.0 / h**2 * math.sin(math.pi * h / 2) ** 2
    results.append(check("discrete Laplacian eigenvalue", abs(lam - exact) / exact < 1e-8))

    grid = gl.Grid([(-1.0, 1.0), (-1.0, 1.0)], [16, 16])
    op = gl.Operator(space, grid)
    u = [math.cos(math.pi * x / 2) * math.cos(math.pi * y / 2) for x, y in grid.nodes()]
    au = op.apply(u)
    sbp = -sum(a * b for a, b in zip(u, au)) * grid.cell_volume
    results.append(check("summation by parts", abs(sbp - op.energy(u)) <= 1e-12 * op.energy(u)))

    cubic = gl.Nonlinearity.power(3.0, 1.0)
    expr = gl.Nonlinearity.expression("u^3")
    results.append(check("F(2) = 4", cubic.F(2.0) == 4.0 and abs(expr.F(2.0) - 4.0) < 1e-10))
    hyp = cubic.check_blowup_hypothesis(4.0, 0.1, 0.01, 10.0)
    results.append(check("blow-up hypothesis for u^3", hyp["holds"]))

    results.append(check("constants", gl.blowup_constants(8.0, 1.0, 2.0) == (1.0, 1.0, 0.5)))

    config = json.loads((ROOT / "configs" / "global_cubic.json").read_text())
    report = gl.run_experiment(json.dumps(config))
    joint = report["joint_satisfiability"]
    results.append(check("global verdict", report["verdict"] == "HypothesesNotMet"))
    results.append(check("joint satisfiability flagged", not joint["jointly_satisfied"]))

    try:
        config["space"]["gamma"] = -1.0
        gl.run_experiment(json.dumps(config))
        results.append(check("config error raised", False))
    except ValueError as e:
        results.append(check("config error raised", "/space/gamma" in str(e)))

    failed = results.count(False)
    print(f"{len(results) - failed}/{len(results)} passed")
    raise SystemExit(1 if failed else 0)


if __name__ == "__main__":
    main()
