"""Ingestion of lessons-learned reports and the project metadata forest.

Two external sources feed the engine: a UTF-8 line-delimited JSON file of
failure reports, and a JSON array describing the project -> module ->
element hierarchy. Parsing is forgiving (malformed records are reported
and skipped, never fatal), validation is strict: a corpus is accepted
only when the report carries zero errors.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

DOC_FIELDS = (
    "id",
    "title",
    "failure_description",
    "cause",
    "solution",
    "project_path",
    "language",
    "created_at",
)

ELEMENT_KINDS = ("project", "module", "element")
_KIND_RANK = {kind: rank for rank, kind in enumerate(ELEMENT_KINDS)}


@dataclass
class DesignCaseDoc:
    """One lessons-learned report: what failed, why, and how it was solved."""

    id: str
    title: str = ""
    failure_description: str = ""
    cause: str = ""
    solution: str = ""
    project_path: list[str] = field(default_factory=list)
    language: str = "en"
    created_at: str = ""

    def text_sections(self) -> list[str]:
        """All free-text sections, in document order."""
        return [self.title, self.failure_description, self.cause, self.solution]

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "failure_description": self.failure_description,
            "cause": self.cause,
            "solution": self.solution,
            "project_path": list(self.project_path),
            "language": self.language,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DesignCaseDoc":
        return cls(
            id=data["id"],
            title=data.get("title", ""),
            failure_description=data.get("failure_description", ""),
            cause=data.get("cause", ""),
            solution=data.get("solution", ""),
            project_path=list(data.get("project_path") or []),
            language=data.get("language", "en"),
            created_at=data.get("created_at", ""),
        )


@dataclass
class ProjectElement:
    """One node of the project metadata forest."""

    id: str
    name: str
    kind: str  # project | module | element
    parent_id: str | None = None

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "kind": self.kind, "parent_id": self.parent_id}

    @classmethod
    def from_dict(cls, data: dict) -> "ProjectElement":
        return cls(
            id=data["id"],
            name=data.get("name", data["id"]),
            kind=data["kind"],
            parent_id=data.get("parent_id"),
        )


@dataclass
class CorpusReport:
    """Findings from parsing/validation. Errors empty <=> corpus accepted."""

    doc_count: int = 0
    element_count: int = 0
    errors: list[tuple[str, str]] = field(default_factory=list)
    warnings: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, locator: str, message: str) -> None:
        self.errors.append((locator, message))

    def warn(self, locator: str, message: str) -> None:
        self.warnings.append((locator, message))

    def merge(self, other: "CorpusReport") -> "CorpusReport":
        """Fold another report's findings into this one (counts kept from self)."""
        self.errors.extend(other.errors)
        self.warnings.extend(other.warnings)
        return self

    def to_dict(self) -> dict:
        return {
            "doc_count": self.doc_count,
            "element_count": self.element_count,
            "errors": [list(e) for e in self.errors],
            "warnings": [list(w) for w in self.warnings],
        }


def _iter_lines(stream: Iterable[str] | IO | str | Path) -> Iterable[str]:
    if isinstance(stream, (str, Path)):
        with open(stream, encoding="utf-8") as fh:
            yield from fh
    else:
        yield from stream


def _coerce_doc(obj: object, locator: str, report: CorpusReport) -> DesignCaseDoc | None:
    if not isinstance(obj, dict):
        report.error(locator, "record is not a JSON object")
        return None

    unknown = sorted(set(obj) - set(DOC_FIELDS))
    if unknown:
        report.warn(locator, "unknown fields ignored: " + ", ".join(unknown))

    doc_id = obj.get("id")
    if not isinstance(doc_id, str) or not doc_id.strip():
        report.error(locator, "missing or invalid 'id'")
        return None
    failure = obj.get("failure_description")
    if not isinstance(failure, str) or not failure.strip():
        report.error(locator, f"doc {doc_id!r}: missing 'failure_description'")
        return None

    path = obj.get("project_path") or []
    if not isinstance(path, list) or not all(isinstance(p, str) for p in path):
        report.error(locator, f"doc {doc_id!r}: 'project_path' must be a list of element ids")
        return None

    text_fields = {}
    for name in ("title", "cause", "solution", "language", "created_at"):
        value = obj.get(name)
        if value is None:
            value = "en" if name == "language" else ""
        if not isinstance(value, str):
            report.error(locator, f"doc {doc_id!r}: field {name!r} must be a string")
            return None
        text_fields[name] = value

    return DesignCaseDoc(
        id=doc_id,
        title=text_fields["title"],
        failure_description=failure,
        cause=text_fields["cause"],
        solution=text_fields["solution"],
        project_path=list(path),
        language=text_fields["language"] or "en",
        created_at=text_fields["created_at"],
    )


def parse_documents(stream: Iterable[str] | IO | str | Path) -> tuple[list[DesignCaseDoc], CorpusReport]:
    """Parse line-delimited JSON failure reports.

    Every well-formed record becomes a doc; malformed lines are reported
    with their line number and skipped. Later records reusing an id are
    dropped with a duplicate-id error. Input order is preserved.
    """
    report = CorpusReport()
    docs: list[DesignCaseDoc] = []
    seen: set[str] = set()

    for lineno, line in enumerate(_iter_lines(stream), start=1):
        if not line.strip():
            continue
        locator = f"line {lineno}"
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            report.error(locator, f"invalid JSON: {exc.msg}")
            continue
        doc = _coerce_doc(obj, locator, report)
        if doc is None:
            continue
        if doc.id in seen:
            report.error(locator, f"duplicate id {doc.id!r}, record skipped")
            continue
        seen.add(doc.id)
        docs.append(doc)

    report.doc_count = len(docs)
    return docs, report


def parse_project_tree(source: IO | str | Path | list) -> tuple[dict[str, ProjectElement], CorpusReport]:
    """Parse and validate the project metadata forest.

    Rejects unknown parents, cycles (error names the members), and kind
    inversions (element above module, module above project). A skipped
    level (element directly under a project) is accepted with a warning.
    """
    report = CorpusReport()
    if isinstance(source, list):
        raw = source
    else:
        try:
            if isinstance(source, (str, Path)):
                with open(source, encoding="utf-8") as fh:
                    raw = json.load(fh)
            else:
                raw = json.load(source)
        except json.JSONDecodeError as exc:
            report.error("project file", f"invalid JSON: {exc.msg}")
            return {}, report
        if not isinstance(raw, list):
            report.error("project file", "expected a JSON array of elements")
            return {}, report

    forest: dict[str, ProjectElement] = {}
    for idx, entry in enumerate(raw):
        locator = f"element #{idx}"
        if not isinstance(entry, dict):
            report.error(locator, "entry is not a JSON object")
            continue
        el_id = entry.get("id")
        if not isinstance(el_id, str) or not el_id.strip():
            report.error(locator, "missing or invalid 'id'")
            continue
        if el_id in forest:
            report.error(locator, f"duplicate element id {el_id!r}")
            continue
        kind = entry.get("kind")
        if kind not in ELEMENT_KINDS:
            report.error(locator, f"element {el_id!r}: kind must be one of {ELEMENT_KINDS}")
            continue
        parent = entry.get("parent_id")
        if parent is not None and not isinstance(parent, str):
            report.error(locator, f"element {el_id!r}: 'parent_id' must be a string or null")
            continue
        name = entry.get("name")
        forest[el_id] = ProjectElement(
            id=el_id,
            name=name if isinstance(name, str) and name else el_id,
            kind=kind,
            parent_id=parent,
        )

    _check_structure(forest, report)
    report.element_count = len(forest)
    return forest, report


def _check_structure(forest: dict[str, ProjectElement], report: CorpusReport) -> None:
    # Unknown parents.
    for el in forest.values():
        if el.parent_id is not None and el.parent_id not in forest:
            report.error(el.id, f"parent {el.parent_id!r} does not exist")

    # Cycle detection by walking parent chains with tri-state marks.
    state: dict[str, int] = {}  # 1 = on current walk, 2 = cleared
    for start in forest:
        if state.get(start) == 2:
            continue
        walk: list[str] = []
        node: str | None = start
        while node is not None and node in forest and state.get(node) != 2:
            if state.get(node) == 1:
                members = walk[walk.index(node):]
                report.error(node, "cycle in project tree: " + " -> ".join(members + [node]))
                break
            state[node] = 1
            walk.append(node)
            node = forest[node].parent_id
        for visited in walk:
            state[visited] = 2

    # Kind ordering along parent links: never invert, skipping a level is tolerated.
    for el in forest.values():
        parent = forest.get(el.parent_id) if el.parent_id else None
        if parent is None:
            continue
        delta = _KIND_RANK[el.kind] - _KIND_RANK[parent.kind]
        if delta < 0:
            report.error(el.id, f"kind inversion: {el.kind} {el.id!r} under {parent.kind} {parent.id!r}")
        elif delta > 1:
            report.warn(el.id, f"kind skip: {el.kind} {el.id!r} directly under {parent.kind} {parent.id!r}")


def validate_corpus(docs: list[DesignCaseDoc], forest: dict[str, ProjectElement]) -> CorpusReport:
    """Cross-check documents against the project forest.

    Re-asserts the document invariants and verifies that every
    project_path is a root-to-descendant chain of existing elements.
    """
    report = CorpusReport(doc_count=len(docs), element_count=len(forest))

    seen: set[str] = set()
    for doc in docs:
        if doc.id in seen:
            report.error(doc.id, "duplicate document id")
            continue
        seen.add(doc.id)
        if not doc.failure_description.strip():
            report.error(doc.id, "empty failure_description")

        missing = [p for p in doc.project_path if p not in forest]
        for pid in missing:
            report.error(doc.id, f"project_path references unknown element {pid!r}")
        if missing or not doc.project_path:
            continue

        head = forest[doc.project_path[0]]
        if head.parent_id is not None:
            report.error(doc.id, f"project_path does not start at a root ({head.id!r} has a parent)")
        for prev, cur in zip(doc.project_path, doc.project_path[1:]):
            if forest[cur].parent_id != prev:
                report.error(doc.id, f"project_path broken: {cur!r} is not a child of {prev!r}")

    if not docs:
        report.warn("corpus", "empty corpus")
    return report
