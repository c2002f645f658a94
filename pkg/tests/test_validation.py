import time

from tkrylov.validation import CHECKS, run_validation


def test_all_checks_pass_quickly():
    t0 = time.perf_counter()
    results = run_validation()
    assert time.perf_counter() - t0 < 120
    assert len(results) == len(CHECKS)
    assert [r.name for r in results if not r.passed] == []


def test_perturbed_hessenberg_is_caught():
    failed = [r.name for r in run_validation(perturb_hessenberg=True) if not r.passed]
    assert failed == ["arnoldi_relations"]
