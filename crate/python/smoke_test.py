#!/usr/bin/env python3
"""Smoke test for the banach_lab extension module.

Build the module first:

    cargo build -p banach-lab-py            # or --release

then run this script from anywhere inside the repository:

    python3 python/smoke_test.py
"""

import fractions
import pathlib
import shutil
import sys
import tempfile

REPO = pathlib.Path(__file__).resolve().parent.parent


def locate_extension():
    candidates = [
        REPO / "target" / "release" / "libbanach_lab.so",
        REPO / "target" / "debug" / "libbanach_lab.so",
        REPO / "target" / "release" / "banach_lab.dll",
        REPO / "target" / "debug" / "banach_lab.dll",
        REPO / "target" / "release" / "libbanach_lab.dylib",
        REPO / "target" / "debug" / "libbanach_lab.dylib",
    ]
    for path in candidates:
        if path.exists():
            return path
    sys.exit("extension not built; run `cargo build -p banach-lab-py` first")


def import_module():
    built = locate_extension()
    stage = pathlib.Path(tempfile.mkdtemp(prefix="banach_lab_"))
    target = stage / ("banach_lab" + (".pyd" if built.suffix == ".dll" else ".so"))
    shutil.copyfile(built, target)
    sys.path.insert(0, str(stage))
    import banach_lab

    return banach_lab


def frac(s):
    return fractions.Fraction(s)


def main():
    bl = import_module()
    checks = 0

    def check(cond, label):
        nonlocal checks
        assert cond, f"failed: {label}"
        checks += 1

    # vector construction and elementary norms
    x = bl.FiniteVector([(1, "3"), (2, "-4")])
    lo, hi = x.norm("l2")
    check(lo == hi == "5", "3-4-5 triangle in l2")
    check(x.norm("sup") == ("4", "4"), "sup norm")
    check(x.norm("l1") == ("7", "7"), "l1 norm")

    # Tsirelson values
    triple = bl.FiniteVector([(3, "1"), (4, "1"), (5, "1")])
    check(bl.tsirelson_norm(triple) == "3/2", "||e3+e4+e5||_T = 3/2")
    check(bl.tsirelson_norm(bl.FiniteVector.basis(7)) == "1", "basis vectors are normalized")
    its = bl.tsirelson_iterates(triple, 3)
    check(its == ["1", "3/2", "3/2", "3/2"], "iterates stabilize at the norm")
    report = bl.tsirelson_norm_report(triple)
    check(report["value"] == "3/2", "norm report value")
    check(report["witness_tree"]["kind"] == "family", "fixed point attained by a family")

    # admissible families
    fams = bl.admissible_families(1, 3, 3)
    check(len(fams) == 7, "seven admissible families inside [1, 3]")
    check([(3, 3), (4, 4), (5, 5)] in bl.admissible_families(3, 5, 3), "singleton triple family")

    # equivalence constants: the early Tsirelson pair and the l2 basis
    pair = [bl.FiniteVector.basis(1), bl.FiniteVector.basis(2)]
    cert = bl.equivalence_constants(pair, "1", "tsirelson")
    check(cert["c_lower"] == ["1/2", "1/2"], "c_lower = 1/2 exactly")
    check(cert["c_upper"] == ["1", "1"], "c_upper = 1 exactly")
    basis3 = [bl.FiniteVector.basis(k) for k in (1, 2, 3)]
    cert2 = bl.equivalence_constants(basis3, "2", "l2")
    check(cert2["c_lower"] == ["1", "1"] and cert2["c_upper"] == ["1", "1"],
          "orthonormal basis is an isometry")

    # type check: violation for the early pair
    res = bl.check_type(pair, "1", "1/10", "tsirelson")
    check(res["verdict"] == "violation", "early pair violates the type at eps = 1/10")
    check(res["violating"] is not None, "violation carries coefficients")

    # summing basis and the order property
    check(bl.summing_basis_value(2, 5) == "2", "||e_2 + s_5|| = 2")
    check(bl.summing_basis_value(3, 2) == "1", "||e_3 + s_2|| = 1")
    table = bl.double_limit(example="c0-summing", m=12, n=12)
    check(table["verdict"] == "order-property-witnessed", "order property witnessed")
    limits = {tuple(table["row_then_column"]), tuple(table["column_then_row"])}
    check(limits == {("1", "1"), ("2", "2")}, "iterated limits 1 and 2")

    # independence at small depth
    rep = bl.independence_search("c0", "5/4", "7/4", 4, seed=5)
    check(rep["independent_at_depth"], "c0 family independent at depth 4")
    check(rep["pair_count"] == 3 ** 4 - 1, "every disjoint pair enumerated")

    # SOP chain
    sop = bl.sop_check(10)
    check(sop["pass"], "SOP monotone chain holds")

    # convolution formula
    b1 = bl.binomial_kernel(1)
    check(b1 == [(-1, "1/4"), (0, "1/2"), (1, "1/4")], "binomial kernel b_1")
    conv = bl.convolution_phi(b1, [(0, "1")], 8)
    check(conv["value"] == ["1", "1"], "phi(b_1, delta_0) = 1")
    check(conv["optimal"], "simplex reached optimality")
    conv2 = bl.convolution_phi([(0, "1")], [(0, "2"), (3, "1/2")], 8)
    check(frac(conv2["value"][0]) == frac("3/2"), "phi(delta_0, y) = ||y||_1 - 1")

    # probes
    lo, hi = bl.d_metric_lower(bl.FiniteVector.basis(1), bl.FiniteVector.basis(2), "c0",
                               net_max_index=2, net_step=2)
    check(frac(lo) >= 1, "d-metric lower bound separates e_1 and e_2")
    packing = bl.packing_stats(basis3, "1/2", "c0", net_max_index=3, net_step=2)
    check(packing["count"] == 3, "basis types pack at eps = 1/2")

    print(f"smoke test passed ({checks} checks)")


if __name__ == "__main__":
    main()
