"""Core domain types for catalog courses, concepts, and instruction instances.

All types are plain frozen dataclasses; pipeline operations never mutate
them in place and instead build new values with ``dataclasses.replace``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from .taxonomy import COGNITIVE_LOADS, template_for

SECONDARY = "secondary"
HIGHER = "higher"

STAGE_VALUES = (SECONDARY, HIGHER)

FILTER_UNFILTERED = "unfiltered"
FILTER_KEPT = "kept"
FILTER_DROPPED_RULE = "dropped_rule"
FILTER_DROPPED_RETRIEVAL = "dropped_retrieval"

FILTER_STATUSES = (
    FILTER_UNFILTERED,
    FILTER_KEPT,
    FILTER_DROPPED_RULE,
    FILTER_DROPPED_RETRIEVAL,
)

DEDUP_KEPT = "kept"
DEDUP_DROPPED = "dropped"

_SLUG_RE = re.compile(r"^[a-z0-9]+(-[a-z0-9]+)*$")

UNIT_NORM_TOLERANCE = 1e-6


class ModelError(ValueError):
    """Raised when a core type is constructed from inconsistent values."""


@dataclass(frozen=True)
class EducationalStage:
    """Coarse education tier, with an optional finer sub-level for higher ed.

    ``value`` is one of ``secondary`` or ``higher``.  ``level`` is free text
    (for example ``undergraduate`` or ``graduate``) and is only meaningful,
    and only allowed, on the higher tier.
    """

    value: str
    level: str | None = None

    def __post_init__(self) -> None:
        if self.value not in STAGE_VALUES:
            raise ModelError(f"unknown stage value: {self.value!r}")
        if self.level is not None and self.value != HIGHER:
            raise ModelError("sub-level tags apply to the higher stage only")


@dataclass(frozen=True)
class Course:
    """One catalog course; ``id`` is ``<subject-slug>/<title-slug>``."""

    id: str
    subject: str
    stage: EducationalStage
    title: str
    description: str
    source: str = ""
    refined_description: str | None = None

    def __post_init__(self) -> None:
        if not self.title:
            raise ModelError("course title must be non-empty")
        if not self.description:
            raise ModelError("course description must be non-empty")
        if not self.subject:
            raise ModelError("course subject must be non-empty")


@dataclass(frozen=True)
class Concept:
    """A fine-grained teachable unit extracted from one course."""

    id: str
    course_id: str
    subject: str
    stage: EducationalStage
    name: str
    explanation: str
    embedding: np.ndarray | None = None
    dedup_status: str = DEDUP_KEPT
    duplicate_of: str | None = None

    def __post_init__(self) -> None:
        if not self.name:
            raise ModelError("concept name must be non-empty")
        if self.dedup_status not in (DEDUP_KEPT, DEDUP_DROPPED):
            raise ModelError(f"unknown dedup status: {self.dedup_status!r}")
        if self.dedup_status == DEDUP_DROPPED and not self.duplicate_of:
            raise ModelError("dropped concepts must reference the kept duplicate")
        if self.embedding is not None:
            norm = float(np.linalg.norm(self.embedding))
            if abs(norm - 1.0) > UNIT_NORM_TOLERANCE:
                raise ModelError(f"concept embedding must be unit length, norm={norm}")

    def embedding_text(self) -> str:
        return f"{self.name}: {self.explanation}"


@dataclass(frozen=True)
class Provenance:
    teacher_model: str
    created_at: str
    run_id: str


@dataclass(frozen=True)
class InstructionInstance:
    """One question/answer pair tagged with its full curriculum metadata.

    ``id`` is deterministic: ``subject-slug/course-slug/concept-slug/index``.
    ``system_message`` may be the empty string (no system turn on export).
    """

    id: str
    stage: EducationalStage
    subject: str
    course_id: str
    concept_id: str
    cognitive_index: int
    cognitive_process: str
    cognitive_subprocess: str
    cognitive_load: str
    system_message: str
    question: str
    answer: str
    filter_status: str = FILTER_UNFILTERED
    filter_reason: str | None = None
    relevance_votes: tuple[bool, ...] | None = None
    provenance: Provenance = field(
        default=Provenance(teacher_model="", created_at="", run_id="")
    )


@dataclass(frozen=True)
class Dataset:
    """An ordered collection of instances plus its manifest metadata."""

    items: tuple[InstructionInstance, ...]
    manifest: dict[str, Any] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.items)


def build_manifest(
    items: tuple[InstructionInstance, ...] | list[InstructionInstance],
    run_id: str,
    strategy: str | None = None,
    seed: int | None = None,
    extra: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """Assemble the canonical manifest for a set of instances."""
    counts = {"total": len(items), SECONDARY: 0, HIGHER: 0}
    for item in items:
        counts[item.stage.value] += 1
    manifest: dict[str, Any] = {
        "run_id": run_id,
        "counts": counts,
        "strategy": strategy,
        "seed": seed,
    }
    if extra:
        manifest.update(extra)
    return manifest


def make_dataset(
    items: list[InstructionInstance] | tuple[InstructionInstance, ...],
    run_id: str = "",
    strategy: str | None = None,
    seed: int | None = None,
    extra: dict[str, Any] | None = None,
) -> Dataset:
    items = tuple(items)
    return Dataset(items=items, manifest=build_manifest(items, run_id, strategy, seed, extra))


@dataclass(frozen=True)
class ValidationIssue:
    instance_id: str
    position: int
    field: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    issues: tuple[ValidationIssue, ...]

    @property
    def ok(self) -> bool:
        return not self.issues

    def summary(self) -> str:
        if self.ok:
            return "dataset valid"
        lines = [f"{len(self.issues)} issue(s)"]
        for issue in self.issues:
            lines.append(
                f"  [{issue.position}] {issue.instance_id or '<no id>'} "
                f"{issue.field}: {issue.message}"
            )
        return "\n".join(lines)


def _check_id_shape(item: InstructionInstance, add) -> None:
    # id must be reconstructible from its own metadata: the concept id plus
    # the cognitive index, with the concept id nested under the course id.
    expected = f"{item.concept_id}/{item.cognitive_index}"
    if item.id != expected:
        add(item, "id", f"expected {expected!r} from concept_id and index")
    if not item.concept_id.startswith(item.course_id + "/"):
        add(item, "concept_id", f"not nested under course_id {item.course_id!r}")
    parts = item.course_id.split("/")
    if len(parts) != 2 or not all(_SLUG_RE.match(p) for p in parts):
        add(item, "course_id", "must be <subject-slug>/<title-slug>")
    else:
        from .catalog import slugify

        try:
            subject_slug = slugify(item.subject)
        except Exception:
            add(item, "subject", "cannot derive a slug")
            return
        if parts[0] != subject_slug:
            add(item, "subject", f"course_id subject slug {parts[0]!r} does not match")


def validate(d: Dataset) -> ValidationReport:
    """Check every dataset invariant; collects issues instead of raising."""
    issues: list[ValidationIssue] = []

    def add(item: InstructionInstance, field_name: str, message: str) -> None:
        issues.append(ValidationIssue(item.id, positions[id(item)], field_name, message))

    positions = {id(item): i for i, item in enumerate(d.items)}

    seen: dict[str, int] = {}
    for i, item in enumerate(d.items):
        if item.id in seen:
            issues.append(
                ValidationIssue(
                    item.id, i, "id",
                    f"duplicate of instance at position {seen[item.id]}",
                )
            )
        else:
            seen[item.id] = i

    for item in d.items:
        try:
            row = template_for(item.cognitive_index)
        except ValueError as exc:
            add(item, "cognitive_index", str(exc))
            row = None
        if row is not None:
            if item.cognitive_process != row.process:
                add(item, "cognitive_process",
                    f"index {row.index} requires {row.process!r}")
            if item.cognitive_subprocess != row.subprocess:
                add(item, "cognitive_subprocess",
                    f"index {row.index} requires {row.subprocess!r}")
            if item.cognitive_load != row.load:
                add(item, "cognitive_load", f"index {row.index} requires {row.load!r}")
        if item.cognitive_load not in COGNITIVE_LOADS:
            add(item, "cognitive_load", f"unknown load {item.cognitive_load!r}")
        if item.filter_status not in FILTER_STATUSES:
            add(item, "filter_status", f"unknown status {item.filter_status!r}")
        if item.filter_status in (FILTER_KEPT, FILTER_UNFILTERED):
            if not item.question.strip():
                add(item, "question", "empty question on a surviving instance")
            if not item.answer.strip():
                add(item, "answer", "empty answer on a surviving instance")
        if item.filter_status == FILTER_DROPPED_RULE and not item.filter_reason:
            add(item, "filter_reason", "rule drops must carry a reason")
        if item.filter_status == FILTER_DROPPED_RETRIEVAL and item.relevance_votes is None:
            add(item, "relevance_votes", "retrieval drops must carry the vote vector")
        if not item.subject.strip():
            add(item, "subject", "empty subject")
        _check_id_shape(item, add)

    counts = d.manifest.get("counts")
    if counts is not None:
        observed = {"total": len(d.items), SECONDARY: 0, HIGHER: 0}
        for item in d.items:
            if item.stage.value in observed:
                observed[item.stage.value] += 1
        for key, value in observed.items():
            if counts.get(key) != value:
                issues.append(
                    ValidationIssue(
                        "", -1, f"manifest.counts.{key}",
                        f"manifest says {counts.get(key)!r}, observed {value}",
                    )
                )

    return ValidationReport(issues=tuple(issues))


def with_filter_status(
    item: InstructionInstance,
    status: str,
    reason: str | None = None,
    votes: tuple[bool, ...] | None = None,
) -> InstructionInstance:
    return replace(item, filter_status=status, filter_reason=reason, relevance_votes=votes)
