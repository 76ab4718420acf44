"""Smoke test for the henon_rigidity extension module."""

import cmath
import math

import henon_rigidity as hr


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    h = hr.HenonMap.basic()
    f = hr.HenonMap.twisted_basic()
    w2 = cmath.exp(-2j * math.pi / 3)

    assert h(0, 10) == (10, 100)
    assert h.degree == 2 and h.num_factors == 1
    assert close(h.jacobian, 1)
    x, y = h.inverse(*h(0.3 + 0.1j, -0.2j))
    assert close(x, 0.3 + 0.1j) and close(y, -0.2j)

    twist = hr.find_twist(f, h)
    assert twist is not None and close(twist["eta"], w2)
    commute, residual = hr.check_commute(f, h)
    assert not commute and residual >= 0.1
    commute, residual = hr.verify_squares_commute(f, h)
    assert commute and residual <= 1e-9

    report = hr.rigidity_report(f, h)
    assert report["commute_squares"]["commute"] is True
    assert "commute_FH: false" in hr.rigidity_report_text(f, h)

    g = hr.green(h, 0, 10, sign="plus")
    assert abs(g["value"] - 2.3022) <= 1e-3 and g["escaped"]
    assert hr.green(h, 0, 0, sign="max")["value"] == 0.0
    assert hr.classify(h, 0, 0) == "in K (candidate)"

    points = hr.fixed_points(h)
    assert len(points) == 2
    assert any(close(px, 0, 1e-8) and close(py, 0, 1e-8) for px, py in points)
    assert any(close(px, 2, 1e-8) and close(py, 2, 1e-8) for px, py in points)

    assert len(hr.twist_group(h)) == 3
    sq = hr.square_normal_form(f)
    z = (0.4 - 0.1j, 0.2 + 0.3j)
    a, b = sq(*z), f(*f(*z))
    assert close(a[0], b[0], 1e-12) and close(a[1], b[1], 1e-12)

    again = hr.HenonMap.from_json(f.to_json())
    assert again(*z) == f(*z)

    dom = hr.verify_domination(h, samples=20)
    assert dom["all_certified"]

    grid = hr.render(h, mode="k", resolution=(9, 9))
    assert len(grid) == 9 and grid[4][4] == 1.0

    try:
        hr.HenonMap([0, 1])
    except ValueError:
        pass
    else:
        raise AssertionError("linear p accepted")

    print("smoke test passed:", repr(h), "| eta =", twist["eta"])


if __name__ == "__main__":
    main()
