"""Quick end-to-end check of the dfvem_py extension module."""

import sys

import dfvem_py


def main() -> int:
    mesh = dfvem_py.Mesh.structured(2)
    print(mesh, "h =", mesh.h, "volume =", mesh.volume)
    assert mesh.num_cells == 8
    assert abs(mesh.volume - 1.0) < 1e-12

    same = dfvem_py.Mesh.from_json(mesh.to_json())
    assert same.counts == mesh.counts

    report = dfvem_py.complex_check(mesh, k=2)
    print("complex check:", report["exactness"]["pass"], report["rank"]["pass"])
    assert report["exactness"]["pass"] and report["rank"]["pass"]

    # degree-2 polynomial velocity: reproduced exactly
    res = dfvem_py.solve("ex3-p1", mesh, k=2)
    print("ex3-p1: eH1u = %.3e  eL2p = %.3e  divfree = %.3e" % (res["e_h1_u"], res["e_l2_p"], res["divfree"]))
    assert res["e_h1_u"] < 1e-8 and res["divfree"] < 1e-9

    disc = dfvem_py.Discretization(mesh, k=2)
    assert disc.ndof_velocity == len(res["velocity"])
    assert disc.divfree(res["velocity"]) < 1e-9

    study = dfvem_py.bench("ex1-stokes", [1, 2, 4], k=2)
    slopes = study["slopes"]
    print("ex1-stokes slopes:", slopes)
    assert slopes["e_h1_u"] > 1.5

    try:
        dfvem_py.solve("nope", mesh)
    except ValueError as err:
        print("bad case rejected:", err)
    else:
        raise AssertionError("unknown case accepted")

    print("ok")
    return 0


if __name__ == "__main__":
    sys.exit(main())
