"""Predicate expressions over belief/percept key-value maps.

A predicate is a conjunction of clauses, each ``[key, op, literal]`` with
op in =, !=, <, <=, >, >=. The empty conjunction is true. Evaluation is
total: a missing key or an unordered comparison makes the clause false
rather than raising.
"""

from __future__ import annotations

from typing import Any, Mapping, Sequence

OPS = ("=", "!=", "<", "<=", ">", ">=")

_MISSING = object()


def _compare(op: str, left: Any, right: Any) -> bool:
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    try:
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        if op == ">=":
            return left >= right
    except TypeError:
        return False
    return False


def eval_predicate(clauses: Sequence, values: Mapping[str, Any]) -> bool:
    for clause in clauses:
        key, op, literal = clause[0], clause[1], clause[2]
        stored = values.get(key, _MISSING)
        if stored is _MISSING:
            return False
        if not _compare(op, stored, literal):
            return False
    return True


def validate_predicate(clauses: Any, where: str) -> list[str]:
    """Shape-check a predicate; returns a list of problems (empty if ok)."""
    problems = []
    if not isinstance(clauses, (list, tuple)):
        return [f"{where}: predicate must be a list of [key, op, value] clauses"]
    for i, clause in enumerate(clauses):
        if not isinstance(clause, (list, tuple)) or len(clause) != 3:
            problems.append(f"{where}[{i}]: clause must be [key, op, value]")
            continue
        key, op, _ = clause
        if not isinstance(key, str) or not key:
            problems.append(f"{where}[{i}]: key must be a non-empty string")
        if op not in OPS:
            problems.append(f"{where}[{i}]: unknown operator {op!r}")
    return problems
