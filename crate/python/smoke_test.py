"""Smoke test for the multicolor_py extension.

Build first, e.g. `maturin develop -m crates/python/Cargo.toml`, then run
`python python/smoke_test.py`.
"""

import multicolor_py as mc


def main():
    fig2 = mc.generate("fig2")
    assert (fig2.n, fig2.m, fig2.max_degree()) == (6, 18, 6)
    assert mc.phi(fig2) == 6

    res = mc.color(fig2)
    assert res.sound
    assert res.colors_used <= 7
    assert res.certificate.bound_floor == 7
    cert = mc.certify(fig2, res.coloring)
    assert cert.satisfied and cert.colors_used == res.colors_used

    narrow = mc.color(fig2, terminal_order=4)
    assert narrow.trace.count("\n") == 5

    petersen = mc.Multigraph.from_text(mc.generate("petersen").to_text())
    chi, coloring = mc.exact_chromatic_index(petersen)
    assert chi == 4 and len(coloring) == 15
    delta, gamma, phi = mc.invariant_report(petersen)
    assert (delta, gamma, phi) == (3, (3, 1), 3)
    assert mc.bound_floor(10, 3) == 5

    t3 = mc.Multigraph(3, [(0, 1)] * 3 + [(1, 2)] * 3 + [(0, 2)] * 3)
    assert mc.color(t3).colors_used == 9

    bad = dict(coloring)
    an_edge = petersen.edges()[0]
    neighbour = next(e for e in petersen.edges() if e[0] != an_edge[0] and set(e[1:]) & set(an_edge[1:]))
    bad[neighbour[0]] = bad[an_edge[0]]
    try:
        mc.certify(petersen, bad)
    except ValueError:
        pass
    else:
        raise AssertionError("improper coloring accepted")

    try:
        mc.Multigraph(2, [(0, 0)])
    except ValueError:
        pass
    else:
        raise AssertionError("loop accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
