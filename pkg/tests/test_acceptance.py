"""Acceptance suite: every criterion at its declared size and tolerance.

Each test prints one PASS/FAIL line (run pytest with -s to see them all;
failures carry the line in the assertion message).  All Monte-Carlo
inputs are keyed off fixed seeds, so outcomes are reproducible bit for
bit.

Criterion 10 is expected RED: the exact second moment at the declared
parameters is m(r) = r^-2.25 (9 log r - 8) + 9 r^-3, whose compensated
ratio m(r) r^2.25 / (1 + log r) spans a factor ~3.58 over r in
[2, 2^16] (2.12 at r=2, 7.59 at r=2^16, limit 9), so the declared
factor-3 envelope is unattainable.  The assertion is kept as declared
rather than widened.
"""

import subprocess
import sys

import sfp.verify as verify


def _check(result, time_limit):
    line = (f"ACCEPTANCE {result.cid:>2} {result.name}: "
            f"{'PASS' if result.passed else 'FAIL'} "
            f"({result.elapsed:.1f}s / limit {time_limit:.0f}s)")
    print(line)
    print(f"    {result.detail}")
    assert result.elapsed < time_limit, f"{line} exceeded its runtime limit"
    assert result.passed, f"{line}\n    {result.detail}"


def test_criterion_01_exponent_identities():
    _check(verify.criterion_exponent_identities(seed=0, n_points=10_000), 1.0)


def test_criterion_02_closed_form_vs_oracle():
    _check(verify.criterion_closed_form_vs_oracle(), 10.0)


def test_criterion_03_adjacent_sandwich():
    _check(verify.criterion_adjacent_sandwich(seed=0, replicates=1_000_000), 60.0)


def test_criterion_04_adjacent_decay_slope():
    _check(verify.criterion_adjacent_decay(seed=0, replicates=10_000_000), 300.0)


def test_criterion_05_coupling_domination():
    _check(verify.criterion_coupling(seed=0, n_seeds=100, side=256), 60.0)


def test_criterion_06_degree_tail():
    _check(verify.criterion_degree_tail(seed=0, side=100_000), 300.0)


def test_criterion_07_bridge_slope():
    _check(verify.criterion_bridge_slope(seed=0, replicates=10_000_000), 600.0)


def test_criterion_08_fkg():
    _check(verify.criterion_fkg(seed=0, n_paths=20, replicates=1_000_000), 300.0)


def test_criterion_09_hierarchy_machinery():
    _check(verify.criterion_hierarchy_machinery(), 1.0)


def test_criterion_10_second_moment_shape():
    # Expected RED; see the module docstring.  The factor-3 envelope is
    # asserted exactly as declared.
    _check(verify.criterion_second_moment_shape(), 10.0)


def test_criterion_11_distance_property_suite():
    _check(verify.criterion_distance_suite(seed=0, full_scale=True), 900.0)


def test_criterion_12_determinism_across_threads(tmp_path):
    # Same seed, different worker counts: the CSV body (everything except
    # the #wallclock and #threads lines) must be byte-identical.
    def body(path):
        return [l for l in path.read_text().splitlines()
                if not (l.startswith("#wallclock") or l.startswith("#threads"))]

    outs = []
    for threads in ("1", "4"):
        out = tmp_path / f"verify-t{threads}.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "sfp.cli", "verify", "--quick",
             "--seed", "0", "--threads", threads, "--out", str(out)],
            capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outs.append(out)
    identical = body(outs[0]) == body(outs[1])
    print(f"ACCEPTANCE 12 determinism-across-threads: "
          f"{'PASS' if identical else 'FAIL'}")
    assert identical
