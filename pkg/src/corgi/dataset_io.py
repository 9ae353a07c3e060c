"""Strict JSONL serialization for courses, concepts, and datasets.

Records are written with a fixed key order so that save -> load -> save is
byte-identical.  Every dataset file gets a ``<path>.manifest`` JSON sidecar
carrying run id, per-stage counts, and (when ordered) strategy and seed.
"""

from __future__ import annotations

import json
import os
from typing import Any, Iterable

import numpy as np

from .model import (
    Concept,
    Course,
    Dataset,
    EducationalStage,
    InstructionInstance,
    Provenance,
    build_manifest,
)

INSTANCE_FIELDS = (
    "id",
    "stage",
    "stage_level",
    "subject",
    "course_id",
    "concept_id",
    "cognitive_index",
    "cognitive_process",
    "cognitive_subprocess",
    "cognitive_load",
    "system_message",
    "question",
    "answer",
    "filter_status",
    "filter_reason",
    "relevance_votes",
    "provenance",
)


class DatasetFormatError(ValueError):
    """A record failed schema checks; carries file, line, and field context."""

    def __init__(self, path: str, line: int, field: str | None, message: str):
        self.path = path
        self.line = line
        self.field = field
        where = f"{path}:{line}"
        if field:
            where += f": field {field!r}"
        super().__init__(f"{where}: {message}")


def manifest_path(path: str) -> str:
    return f"{path}.manifest"


def _require(record: dict, path: str, line: int, field: str, kind: type | tuple) -> Any:
    if field not in record:
        raise DatasetFormatError(path, line, field, "missing required field")
    value = record[field]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is int:
        raise DatasetFormatError(
            path, line, field, f"expected {kind}, got {type(value).__name__}"
        )
    return value


def _optional_str(record: dict, path: str, line: int, field: str) -> str | None:
    value = record.get(field)
    if value is None:
        return None
    if not isinstance(value, str):
        raise DatasetFormatError(path, line, field, "expected string or null")
    return value


def instance_to_record(item: InstructionInstance) -> dict[str, Any]:
    return {
        "id": item.id,
        "stage": item.stage.value,
        "stage_level": item.stage.level,
        "subject": item.subject,
        "course_id": item.course_id,
        "concept_id": item.concept_id,
        "cognitive_index": item.cognitive_index,
        "cognitive_process": item.cognitive_process,
        "cognitive_subprocess": item.cognitive_subprocess,
        "cognitive_load": item.cognitive_load,
        "system_message": item.system_message,
        "question": item.question,
        "answer": item.answer,
        "filter_status": item.filter_status,
        "filter_reason": item.filter_reason,
        "relevance_votes": (
            None if item.relevance_votes is None else list(item.relevance_votes)
        ),
        "provenance": {
            "teacher_model": item.provenance.teacher_model,
            "created_at": item.provenance.created_at,
            "run_id": item.provenance.run_id,
        },
    }


def instance_from_record(record: dict, path: str = "<memory>", line: int = 0) -> InstructionInstance:
    stage_value = _require(record, path, line, "stage", str)
    votes = record.get("relevance_votes")
    if votes is not None:
        if not isinstance(votes, list) or not all(isinstance(v, bool) for v in votes):
            raise DatasetFormatError(path, line, "relevance_votes", "expected a list of booleans")
        votes = tuple(votes)
    prov = _require(record, path, line, "provenance", dict)
    try:
        stage = EducationalStage(stage_value, _optional_str(record, path, line, "stage_level"))
    except ValueError as exc:
        raise DatasetFormatError(path, line, "stage", str(exc)) from exc
    return InstructionInstance(
        id=_require(record, path, line, "id", str),
        stage=stage,
        subject=_require(record, path, line, "subject", str),
        course_id=_require(record, path, line, "course_id", str),
        concept_id=_require(record, path, line, "concept_id", str),
        cognitive_index=_require(record, path, line, "cognitive_index", int),
        cognitive_process=_require(record, path, line, "cognitive_process", str),
        cognitive_subprocess=_require(record, path, line, "cognitive_subprocess", str),
        cognitive_load=_require(record, path, line, "cognitive_load", str),
        system_message=_require(record, path, line, "system_message", str),
        question=_require(record, path, line, "question", str),
        answer=_require(record, path, line, "answer", str),
        filter_status=_require(record, path, line, "filter_status", str),
        filter_reason=_optional_str(record, path, line, "filter_reason"),
        relevance_votes=votes,
        provenance=Provenance(
            teacher_model=_require(prov, path, line, "teacher_model", str),
            created_at=_require(prov, path, line, "created_at", str),
            run_id=_require(prov, path, line, "run_id", str),
        ),
    )


def _dump_line(record: dict) -> str:
    return json.dumps(record, ensure_ascii=False)


def _read_jsonl(path: str) -> Iterable[tuple[int, dict]]:
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            raw = raw.strip("\n")
            if not raw:
                continue
            try:
                record = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(path, line_no, None, f"invalid JSON: {exc}") from exc
            if not isinstance(record, dict):
                raise DatasetFormatError(path, line_no, None, "expected a JSON object")
            yield line_no, record


def save_dataset(d: Dataset, path: str) -> None:
    """Write canonical JSONL plus the manifest sidecar."""
    with open(path, "w", encoding="utf-8") as handle:
        for item in d.items:
            handle.write(_dump_line(instance_to_record(item)))
            handle.write("\n")
    with open(manifest_path(path), "w", encoding="utf-8") as handle:
        json.dump(d.manifest, handle, ensure_ascii=False, indent=2)
        handle.write("\n")


def load_dataset(path: str) -> Dataset:
    """Read a dataset file; malformed lines raise with line and field named."""
    items = [instance_from_record(rec, path, line) for line, rec in _read_jsonl(path)]
    side = manifest_path(path)
    if os.path.exists(side):
        with open(side, encoding="utf-8") as handle:
            manifest = json.load(handle)
    else:
        manifest = build_manifest(items, run_id="")
    return Dataset(items=tuple(items), manifest=manifest)


def course_to_record(course: Course) -> dict[str, Any]:
    return {
        "id": course.id,
        "subject": course.subject,
        "stage": course.stage.value,
        "stage_level": course.stage.level,
        "title": course.title,
        "description": course.description,
        "refined_description": course.refined_description,
        "source": course.source,
    }


def course_from_record(record: dict, path: str = "<memory>", line: int = 0) -> Course:
    try:
        stage = EducationalStage(
            _require(record, path, line, "stage", str),
            _optional_str(record, path, line, "stage_level"),
        )
        return Course(
            id=_require(record, path, line, "id", str),
            subject=_require(record, path, line, "subject", str),
            stage=stage,
            title=_require(record, path, line, "title", str),
            description=_require(record, path, line, "description", str),
            refined_description=_optional_str(record, path, line, "refined_description"),
            source=_require(record, path, line, "source", str),
        )
    except DatasetFormatError:
        raise
    except ValueError as exc:
        raise DatasetFormatError(path, line, None, str(exc)) from exc


def concept_to_record(concept: Concept) -> dict[str, Any]:
    return {
        "id": concept.id,
        "course_id": concept.course_id,
        "subject": concept.subject,
        "stage": concept.stage.value,
        "stage_level": concept.stage.level,
        "name": concept.name,
        "explanation": concept.explanation,
        "embedding": (
            None if concept.embedding is None else [float(x) for x in concept.embedding]
        ),
        "dedup_status": concept.dedup_status,
        "duplicate_of": concept.duplicate_of,
    }


def concept_from_record(record: dict, path: str = "<memory>", line: int = 0) -> Concept:
    embedding = record.get("embedding")
    if embedding is not None:
        if not isinstance(embedding, list):
            raise DatasetFormatError(path, line, "embedding", "expected a list of numbers")
        embedding = np.asarray(embedding, dtype=np.float64)
    try:
        stage = EducationalStage(
            _require(record, path, line, "stage", str),
            _optional_str(record, path, line, "stage_level"),
        )
        return Concept(
            id=_require(record, path, line, "id", str),
            course_id=_require(record, path, line, "course_id", str),
            subject=_require(record, path, line, "subject", str),
            stage=stage,
            name=_require(record, path, line, "name", str),
            explanation=_require(record, path, line, "explanation", str),
            embedding=embedding,
            dedup_status=_require(record, path, line, "dedup_status", str),
            duplicate_of=_optional_str(record, path, line, "duplicate_of"),
        )
    except DatasetFormatError:
        raise
    except ValueError as exc:
        raise DatasetFormatError(path, line, None, str(exc)) from exc


def save_courses(courses: Iterable[Course], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for course in courses:
            handle.write(_dump_line(course_to_record(course)))
            handle.write("\n")


def load_courses(path: str) -> list[Course]:
    return [course_from_record(rec, path, line) for line, rec in _read_jsonl(path)]


def save_concepts(concepts: Iterable[Concept], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for concept in concepts:
            handle.write(_dump_line(concept_to_record(concept)))
            handle.write("\n")


def load_concepts(path: str) -> list[Concept]:
    return [concept_from_record(rec, path, line) for line, rec in _read_jsonl(path)]
