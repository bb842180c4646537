"""Collects per-criterion outcomes so the run can end with one line each."""

_results: dict = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    _results.setdefault(criterion, []).append((ok, detail))


def summary_lines() -> list:
    out = []
    for n in sorted(_results):
        checks = _results[n]
        ok = all(c for c, _ in checks)
        details = "; ".join(d for _, d in checks)
        out.append(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({details})")
    return out
