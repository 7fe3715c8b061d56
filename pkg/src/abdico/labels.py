"""The closed ABDICO label set shared by the corpus and classifier modules."""

from __future__ import annotations

from enum import Enum


class ComponentLabel(str, Enum):
    """Per-token institutional-grammar label.

    Declaration order is the tie-break order used by the classifier.
    """

    A = "A"  # attribute / agent
    B = "B"  # object
    D = "D"  # deontic
    I = "I"  # aim  # noqa: E741
    C = "C"  # context
    O = "O"  # or-else  # noqa: E741
    NONE = "NONE"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, value: str) -> "ComponentLabel":
        try:
            return cls(value)
        except ValueError:
            valid = ", ".join(m.value for m in cls)
            raise ValueError(f"unknown label {value!r}; valid labels are {{{valid}}}") from None


LABELS: tuple[ComponentLabel, ...] = tuple(ComponentLabel)
LABEL_RANK = {label: rank for rank, label in enumerate(LABELS)}
